// Regenerates the committed fixture outputs that depend on prompt bytes:
//   fixtures/mock/    digest-keyed transcripts replaying the recorded runs
//   fixtures/golden/  canonical redacted JSON per bundled task
// Run manually after changing the prompt template or the serializer, then
// commit the result. The unit suite fails loudly when these drift.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "arc/llm.hpp"
#include "arc/prompts.hpp"
#include "arc/task.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main() {
  const fs::path fixtures = ARC_FIXTURES_DIR;
  const fs::path mock_dir = fixtures / "mock";
  const fs::path golden_dir = fixtures / "golden";
  fs::create_directories(mock_dir);
  fs::create_directories(golden_dir);

  for (const auto& entry : fs::directory_iterator(fixtures / "tasks")) {
    if (entry.path().extension() != ".json") continue;
    const arc::Task task = arc::load_task_file(entry.path());

    std::ofstream golden(golden_dir / (task.id + ".redacted.json"), std::ios::binary);
    golden << arc::redact_test_output(task);

    const fs::path transcript = fixtures / "transcripts" / (task.id + "_naive.txt");
    if (fs::exists(transcript)) {
      const std::string digest = arc::ScriptedBackend::record(
          mock_dir, arc::prompts::build_naive_prompt(task), {read_file(transcript)});
      std::cout << task.id << " -> " << digest << ".json\n";
    }
    std::cout << task.id << " -> golden/" << task.id << ".redacted.json\n";
  }
  return 0;
}

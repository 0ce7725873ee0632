#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "arc/pipeline.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support/fixtures.hpp"

using namespace arc;
using nlohmann::json;

namespace {

const Grid kAnswer157(4, 4, {2, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0, 0, 4, 0, 0, 9});
const Grid kAnswer162(3, 3, {3, 3, 4, 7, 0, 1, 7, 0, 1});

}  // namespace

TEST_CASE("the naive prompt is the pinned template plus the redacted task") {
  const Task task = fixtures::load_task("66e6c45b");
  const std::vector<ChatMessage> prompt = prompts::build_naive_prompt(task);
  REQUIRE(prompt.size() == 1);
  CHECK(prompt.front().role == Role::user);
  const std::string& text = prompt.front().content;

  CHECK(text.starts_with("You are given a series of inputs and output pairs.\n"));
  CHECK(text.find("Input/output pairs may not reflect all possibilities, you are to infer the "
                  "simplest possible relation making use of symmetry and invariance as much as "
                  "possible.\n") != std::string::npos);
  CHECK(text.find("- object view (defined as continuous squares connected horizontally, "
                  "vertically and/or diagonally, separated by 0 values)") != std::string::npos);
  CHECK(text.find("- Apply this description to the test input and find out the answer "
                  "'to_be_filled'.\n\n") != std::string::npos);
  CHECK(text.ends_with(redact_test_output(task)));

  // Byte-stable across calls.
  CHECK(prompts::build_naive_prompt(task).front().content == text);
}

TEST_CASE("the naive prompt lists all train pairs in order") {
  Task task = fixtures::load_task("66e6c45b");
  task.train.push_back({Grid::filled(2, 2, 1), Grid::filled(2, 2, 2)});
  REQUIRE(task.train.size() == 3);
  const std::string text = prompts::build_naive_prompt(task).front().content;
  const std::size_t first = text.find(grid_to_json(task.train[0].input));
  const std::size_t second = text.find(grid_to_json(task.train[1].input));
  const std::size_t third = text.find(grid_to_json(task.train[2].input));
  REQUIRE(first != std::string::npos);
  REQUIRE(second != std::string::npos);
  REQUIRE(third != std::string::npos);
  CHECK(first < second);
  CHECK(second < third);
}

TEST_CASE("extract_grid_from_completion on the recorded outputs") {
  const auto from_157 = extract_grid_from_completion(fixtures::transcript("66e6c45b_naive.txt"));
  REQUIRE(from_157.has_value());
  CHECK(*from_157 == kAnswer157);

  // The 162 output restates the 6x6 test input before the 3x3 answer; the
  // restatement must not win.
  const auto from_162 = extract_grid_from_completion(fixtures::transcript("68b67ca3_naive.txt"));
  REQUIRE(from_162.has_value());
  CHECK(*from_162 == kAnswer162);
}

TEST_CASE("extract_grid_from_completion corner cases") {
  CHECK_FALSE(extract_grid_from_completion("no arrays here").has_value());
  CHECK_FALSE(extract_grid_from_completion("").has_value());

  const auto last_wins =
      extract_grid_from_completion("first try [[1, 1], [1, 1]] then better [[2, 2], [2, 2]]");
  REQUIRE(last_wins.has_value());
  CHECK(*last_wins == Grid(2, 2, {2, 2, 2, 2}));

  // Ragged and out-of-alphabet arrays are not grids.
  CHECK_FALSE(extract_grid_from_completion("look: [[1, 2], [3]]").has_value());
  CHECK_FALSE(extract_grid_from_completion("look: [[10, 2], [3, 4]]").has_value());
  CHECK_FALSE(extract_grid_from_completion("look: [[-1]]").has_value());

  // An array that only restates the input is skipped.
  CHECK_FALSE(extract_grid_from_completion("The test input:\n[[1, 2], [3, 4]]").has_value());
  const auto after_input = extract_grid_from_completion(
      "Test input:\n[[1, 2], [3, 4]]\nThe answer is\n[[5, 6], [7, 8]]");
  REQUIRE(after_input.has_value());
  CHECK(*after_input == Grid(2, 2, {5, 6, 7, 8}));

  // Whitespace and newlines inside the brackets are tolerated.
  const auto spread = extract_grid_from_completion("[[1,\n  2],\n [3,\t4]]");
  REQUIRE(spread.has_value());
  CHECK(*spread == Grid(2, 2, {1, 2, 3, 4}));
}

TEST_CASE("split_completion_sections follows the model's headers") {
  const CompletionSections s157 =
      split_completion_sections(fixtures::transcript("66e6c45b_naive.txt"));
  CHECK(s157.broad.starts_with("The input/output relation involves manipulating"));
  CHECK(s157.detailed.starts_with("Identify any objects"));

  const CompletionSections s162 =
      split_completion_sections(fixtures::transcript("68b67ca3_naive.txt"));
  CHECK(s162.broad.starts_with("The input/output relation involves extracting non-zero"));
  CHECK(s162.detailed.find("Place these non-zero elements") != std::string::npos);

  const CompletionSections headerless = split_completion_sections("just do the thing");
  CHECK(headerless.broad.empty());
  CHECK(headerless.detailed == "just do the thing");
}

TEST_CASE("solve_naive replays the recorded task 162 run") {
  const Task task = fixtures::load_task("68b67ca3");
  fixtures::TempDir dir("scripted");
  ScriptedBackend::record(dir.path(), prompts::build_naive_prompt(task),
                          {fixtures::transcript("68b67ca3_naive.txt")});
  ScriptedBackend backend(dir.path());
  const SolveTranscript transcript = solve_naive(task, backend, {});
  REQUIRE(transcript.predicted_output.has_value());
  CHECK(*transcript.predicted_output == kAnswer162);
  CHECK(transcript.flow == Flow::naive);
  CHECK(transcript.raw_completions.size() == 1);
  CHECK(transcript.broad_description.find("extracting non-zero elements") != std::string::npos);
}

TEST_CASE("solve_naive records an absent prediction when no grid comes back") {
  const Task task = fixtures::load_task("68b67ca3");
  fixtures::TempDir dir("scripted");
  ScriptedBackend::record(dir.path(), prompts::build_naive_prompt(task),
                          {"I cannot solve this"});
  ScriptedBackend backend(dir.path());
  const SolveTranscript transcript = solve_naive(task, backend, {});
  CHECK_FALSE(transcript.predicted_output.has_value());
  CHECK_FALSE(transcript.warnings.empty());
}

TEST_CASE("a scripted backend refuses unknown prompts") {
  const Task task = fixtures::load_task("68b67ca3");
  fixtures::TempDir dir("scripted");
  ScriptedBackend backend(dir.path());
  try {
    solve_naive(task, backend, {});
    FAIL("expected backend_error");
  } catch (const error& e) {
    CHECK(e.code() == errc::backend_error);
  }
}

TEST_CASE("an unreachable HTTP backend reports a backend error") {
  HttpBackendConfig config;
  config.base_url = "http://127.0.0.1:9";  // nothing listens here
  config.max_retries = 0;
  config.timeout_sec = 1;
  HttpBackend backend(config);
  try {
    backend.complete({{Role::user, "hello"}}, {});
    FAIL("expected backend_error");
  } catch (const error& e) {
    CHECK(e.code() == errc::backend_error);
  }
}

TEST_CASE("solve_hierarchical runs three grounded exchanges") {
  const Task task = fixtures::load_task("66e6c45b");
  fixtures::TempDir dir("scripted");

  const std::string broad =
      "The input/output relation involves manipulating the input grid by applying a series of "
      "transformations based on certain rules and symmetries to produce the output grid.";
  const std::string steps =
      "Identify the inner block of four values and move each value to its nearest corner.";
  const std::string answer =
      "Therefore, the answer is [[2, 0, 0, 3], [0, 0, 0, 0], [0, 0, 0, 0], [4, 0, 0, 9]].";

  std::vector<ChatMessage> conversation = prompts::build_hierarchical_opening(task);
  ScriptedBackend::record(dir.path(), conversation, {broad});
  conversation.push_back({Role::assistant, broad});
  conversation.push_back({Role::user, prompts::detailed_steps_followup()});
  ScriptedBackend::record(dir.path(), conversation, {steps});
  conversation.push_back({Role::assistant, steps});
  conversation.push_back({Role::user, prompts::apply_steps_followup()});
  ScriptedBackend::record(dir.path(), conversation, {answer});

  ScriptedBackend backend(dir.path());
  const SolveTranscript transcript = solve_hierarchical(task, backend, {});
  CHECK(transcript.flow == Flow::hierarchical);
  CHECK(transcript.broad_description == broad);
  CHECK(transcript.detailed_steps == steps);
  REQUIRE(transcript.predicted_output.has_value());
  CHECK(*transcript.predicted_output == kAnswer157);
  CHECK(transcript.raw_completions.size() == 3);
}

TEST_CASE("solve_hierarchical continues past an empty steps exchange") {
  const Task task = fixtures::load_task("66e6c45b");
  fixtures::TempDir dir("scripted");

  const std::string broad = "Move the four inner values to the four corners.";
  std::vector<ChatMessage> conversation = prompts::build_hierarchical_opening(task);
  ScriptedBackend::record(dir.path(), conversation, {broad});
  conversation.push_back({Role::assistant, broad});
  conversation.push_back({Role::user, prompts::detailed_steps_followup()});
  ScriptedBackend::record(dir.path(), conversation, {"  \n "});
  // The apply exchange is grounded on the broad description alone.
  conversation.pop_back();
  conversation.push_back({Role::user, prompts::apply_steps_followup()});
  ScriptedBackend::record(dir.path(), conversation, {"[[2, 0, 0, 3], [0, 0, 0, 0], "
                                                     "[0, 0, 0, 0], [4, 0, 0, 9]]"});

  ScriptedBackend backend(dir.path());
  const SolveTranscript transcript = solve_hierarchical(task, backend, {});
  REQUIRE(transcript.predicted_output.has_value());
  CHECK(*transcript.predicted_output == kAnswer157);
  REQUIRE_FALSE(transcript.warnings.empty());
  CHECK(transcript.warnings.front().find("detailed steps") != std::string::npos);
}

TEST_CASE("solve_hierarchical keeps all apply samples and uses the first parseable") {
  const Task task = fixtures::load_task("66e6c45b");
  fixtures::TempDir dir("scripted");

  const std::string broad = "Scatter the inner block to the corners.";
  const std::string steps = "For each of the four values, move it to its nearest corner.";
  std::vector<ChatMessage> conversation = prompts::build_hierarchical_opening(task);
  ScriptedBackend::record(dir.path(), conversation, {broad});
  conversation.push_back({Role::assistant, broad});
  conversation.push_back({Role::user, prompts::detailed_steps_followup()});
  ScriptedBackend::record(dir.path(), conversation, {steps});
  conversation.push_back({Role::assistant, steps});
  conversation.push_back({Role::user, prompts::apply_steps_followup()});
  ScriptedBackend::record(dir.path(), conversation,
                          {"cannot say", "[[2, 0, 0, 3], [0, 0, 0, 0], [0, 0, 0, 0], "
                                         "[4, 0, 0, 9]]",
                           "[[9]]"});

  ScriptedBackend backend(dir.path());
  CompletionParams params;
  params.sample_count = 3;
  const SolveTranscript transcript = solve_hierarchical(task, backend, params);
  CHECK(transcript.raw_completions.size() == 5);  // broad + steps + 3 apply samples
  REQUIRE(transcript.predicted_output.has_value());
  CHECK(*transcript.predicted_output == kAnswer157);
}

TEST_CASE("describe_pair is an isolated pass-through per pair") {
  const Task task = fixtures::load_task("66e6c45b");
  fixtures::TempDir dir("scripted");
  ScriptedBackend::record(
      dir.path(),
      {{Role::user, prompts::build_pair_description_prompt(task.train[0])}},
      {"first description"});
  ScriptedBackend::record(
      dir.path(),
      {{Role::user, prompts::build_pair_description_prompt(task.train[1])}},
      {"second description"});
  ScriptedBackend backend(dir.path());
  CHECK(describe_pair(task.train[0], backend, {}) == "first description");
  CHECK(describe_pair(task.train[1], backend, {}) == "second description");

  TaskPair no_output{task.test.front().input, std::nullopt};
  try {
    describe_pair(no_output, backend, {});
    FAIL("expected precondition error");
  } catch (const error& e) {
    CHECK(e.code() == errc::precondition);
  }
}

TEST_CASE("collate_descriptions numbers every description into one request") {
  const std::vector<std::string> three = {"move objects", "rotate them", "recolor them"};
  const std::string prompt = prompts::build_collation_prompt(three);
  CHECK(prompt.find("1. move objects") != std::string::npos);
  CHECK(prompt.find("2. rotate them") != std::string::npos);
  CHECK(prompt.find("3. recolor them") != std::string::npos);

  fixtures::TempDir dir("scripted");
  ScriptedBackend::record(dir.path(), {{Role::user, prompt}}, {"collated"});
  ScriptedBackend::record(dir.path(),
                          {{Role::user, prompts::build_collation_prompt({"only one"})}},
                          {"only one"});
  ScriptedBackend backend(dir.path());
  CHECK(collate_descriptions(three, backend, {}) == "collated");
  CHECK(collate_descriptions({"only one"}, backend, {}) == "only one");
  try {
    collate_descriptions({}, backend, {});
    FAIL("expected precondition error");
  } catch (const error& e) {
    CHECK(e.code() == errc::precondition);
  }
}

TEST_CASE("HttpBackend speaks the chat-completions protocol with retry") {
  httplib::Server server;
  std::atomic<int> hits{0};
  json seen_body;
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const int hit = ++hits;
    if (hit == 1) {
      res.status = 429;  // rate limited once, the client must retry
      res.set_content("slow down", "text/plain");
      return;
    }
    seen_body = json::parse(req.body);
    seen_auth = req.get_header_value("Authorization");
    const json reply = {
        {"choices",
         json::array({{{"message", {{"role", "assistant"}, {"content", "answer [[1, 2], [3, 4]]"}}}},
                      {{"message", {{"role", "assistant"}, {"content", "alt [[5]]"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&server]() { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("ARC_LLM_API_KEY", "test-key-123", 1);
  HttpBackendConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port);
  config.max_retries = 2;
  config.initial_backoff_ms = 1;
  HttpBackend backend(config);

  CompletionParams params;
  params.model_name = "test-model";
  params.temperature = 0.5;
  params.sample_count = 2;
  const std::vector<std::string> completions =
      backend.complete({{Role::user, "solve it"}}, params);

  server.stop();
  server_thread.join();

  REQUIRE(completions.size() == 2);
  CHECK(completions[0] == "answer [[1, 2], [3, 4]]");
  CHECK(completions[1] == "alt [[5]]");
  CHECK(hits.load() == 2);
  CHECK(seen_auth == "Bearer test-key-123");
  CHECK(seen_body["model"] == "test-model");
  CHECK(seen_body["temperature"] == 0.5);
  CHECK(seen_body["n"] == 2);
  REQUIRE(seen_body["messages"].is_array());
  CHECK(seen_body["messages"][0]["role"] == "user");
  CHECK(seen_body["messages"][0]["content"] == "solve it");
}

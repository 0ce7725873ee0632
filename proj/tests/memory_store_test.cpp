#include <fstream>
#include <random>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "arc/memory.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace arc;

namespace {

MemoryEntry entry_with(const std::string& id, MemoryKind kind, const std::string& text,
                       std::vector<double> embedding, const std::string& source = "task") {
  return MemoryEntry{id, kind, text, std::move(embedding), source, "2024-01-01T00:00:00Z"};
}

std::vector<double> basis(int dimension, int axis) {
  std::vector<double> v(static_cast<std::size_t>(dimension), 0.0);
  v[static_cast<std::size_t>(axis)] = 1.0;
  return v;
}

std::vector<double> random_unit(std::mt19937& rng, int dimension) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dimension));
  double norm_sq = 0.0;
  for (double& x : v) {
    x = normal(rng);
    norm_sq += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
  return v;
}

int count_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  return lines;
}

}  // namespace

TEST_CASE("the local embedder is deterministic and unit-normalized") {
  HashedBagEmbedder embedder;
  CHECK(embedder.dimension() == 256);
  const std::vector<double> a = embedder.embed("Rotate the object, then shift it.");
  const std::vector<double> b = embedder.embed("Rotate the object, then shift it.");
  CHECK(a == b);  // bitwise stable
  double norm_sq = 0.0;
  for (double x : a) norm_sq += x * x;
  CHECK(std::abs(norm_sq - 1.0) < 1e-12);

  // Same bag of tokens regardless of punctuation and case.
  CHECK(embedder.embed("ROTATE the OBJECT then SHIFT it") ==
        embedder.embed("rotate, the? object... then shift -> it"));

  // Token-free text still embeds to a unit vector.
  const std::vector<double> empty = embedder.embed("?!");
  CHECK(empty[0] == 1.0);
}

TEST_CASE("insert then retrieve ranks the same text first with similarity 1") {
  fixtures::TempDir dir("memory");
  HashedBagEmbedder embedder;
  MemoryStore store(dir.path(), embedder.dimension());
  store.insert(entry_with("a", MemoryKind::broad, "scatter the block to the corners",
                          embedder.embed("scatter the block to the corners")));
  store.insert(entry_with("b", MemoryKind::broad, "subsample the even lattice",
                          embedder.embed("subsample the even lattice")));
  const auto hits =
      store.top_k(embedder.embed("scatter the block to the corners"), MemoryKind::broad, 5);
  REQUIRE(hits.size() == 2);
  CHECK(hits.front().first.id == "a");
  CHECK(hits.front().second == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("duplicate ids are rejected") {
  fixtures::TempDir dir("memory");
  HashedBagEmbedder embedder;
  MemoryStore store(dir.path(), embedder.dimension());
  store.insert(entry_with("dup", MemoryKind::broad, "text", embedder.embed("text")));
  try {
    store.insert(entry_with("dup", MemoryKind::broad, "text", embedder.embed("text")));
    FAIL("expected duplicate_id");
  } catch (const error& e) {
    CHECK(e.code() == errc::duplicate_id);
  }
}

TEST_CASE("insert validates dimension and norm") {
  fixtures::TempDir dir("memory");
  MemoryStore store(dir.path(), 8);
  try {
    store.insert(entry_with("short", MemoryKind::broad, "text", {1.0, 0.0}));
    FAIL("expected dimension_mismatch");
  } catch (const error& e) {
    CHECK(e.code() == errc::dimension_mismatch);
  }
  std::vector<double> unnormalized(8, 0.5);
  CHECK_THROWS_AS(store.insert(entry_with("bad", MemoryKind::broad, "text", unnormalized)),
                  error);
  try {
    store.top_k(std::vector<double>{1.0, 0.0}, MemoryKind::broad, 1);
    FAIL("expected dimension_mismatch");
  } catch (const error& e) {
    CHECK(e.code() == errc::dimension_mismatch);
  }
}

TEST_CASE("one hundred inserts write one hundred records") {
  fixtures::TempDir dir("memory");
  std::mt19937 rng(808);
  MemoryStore store(dir.path(), 16);
  for (int i = 0; i < 100; ++i) {
    store.insert(entry_with("entry-" + std::to_string(i), MemoryKind::broad,
                            "text " + std::to_string(i), random_unit(rng, 16)));
  }
  CHECK(store.size() == 100);
  CHECK(store.size(MemoryKind::broad) == 100);
  CHECK(count_lines(dir.path() / "broad_instruct.jsonl") == 100);
}

TEST_CASE("top_k truncates to the store size") {
  fixtures::TempDir dir("memory");
  std::mt19937 rng(99);
  MemoryStore store(dir.path(), 8);
  for (int i = 0; i < 3; ++i) {
    store.insert(entry_with("e" + std::to_string(i), MemoryKind::detailed, "t",
                            random_unit(rng, 8)));
  }
  CHECK(store.top_k(random_unit(rng, 8), MemoryKind::detailed, 5).size() == 3);
  CHECK(store.top_k(random_unit(rng, 8), MemoryKind::broad, 5).empty());
}

TEST_CASE("top_k matches the brute-force scan including tie order") {
  fixtures::TempDir dir("memory");
  std::mt19937 rng(20240115);
  const int dimension = 16;
  MemoryStore store(dir.path(), dimension);
  std::vector<std::pair<std::string, std::vector<double>>> reference;
  for (int i = 0; i < 300; ++i) {
    const std::string id = "m" + std::to_string(1000 + i);
    const std::vector<double> v = random_unit(rng, dimension);
    store.insert(entry_with(id, MemoryKind::broad, "text", v));
    reference.emplace_back(id, v);
  }
  for (int q = 0; q < 100; ++q) {
    const std::vector<double> query = random_unit(rng, dimension);
    const auto got = store.top_k(query, MemoryKind::broad, 7);
    const auto expected = oracle::knn_ref(reference, query, 7);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].first.id == expected[i].id);
      CHECK(got[i].second == expected[i].similarity);
    }
  }
}

TEST_CASE("an orthogonal query ties at zero and orders by id") {
  fixtures::TempDir dir("memory");
  MemoryStore store(dir.path(), 16);
  store.insert(entry_with("zeta", MemoryKind::broad, "t", basis(16, 0)));
  store.insert(entry_with("alpha", MemoryKind::broad, "t", basis(16, 1)));
  store.insert(entry_with("mid", MemoryKind::broad, "t", basis(16, 2)));
  const auto hits = store.top_k(basis(16, 9), MemoryKind::broad, 3);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].first.id == "alpha");
  CHECK(hits[1].first.id == "mid");
  CHECK(hits[2].first.id == "zeta");
  for (const auto& [entry, similarity] : hits) CHECK(similarity == 0.0);
}

TEST_CASE("a reopened store answers identically") {
  fixtures::TempDir dir("memory");
  std::mt19937 rng(4242);
  const int dimension = 12;
  std::vector<double> query = random_unit(rng, dimension);
  std::vector<std::pair<std::string, double>> before;
  {
    MemoryStore store(dir.path(), dimension);
    for (int i = 0; i < 40; ++i) {
      store.insert(entry_with("e" + std::to_string(i),
                              i % 2 == 0 ? MemoryKind::broad : MemoryKind::detailed,
                              "text " + std::to_string(i), random_unit(rng, dimension)));
    }
    for (const auto& [entry, sim] : store.top_k(query, MemoryKind::broad, 10)) {
      before.emplace_back(entry.id, sim);
    }
  }
  MemoryStore reopened(dir.path(), dimension);
  CHECK(reopened.size() == 40);
  std::vector<std::pair<std::string, double>> after;
  for (const auto& [entry, sim] : reopened.top_k(query, MemoryKind::broad, 10)) {
    after.emplace_back(entry.id, sim);
  }
  CHECK(before == after);
}

TEST_CASE("refine_with_memory returns the naive description on an empty store") {
  const Task task = fixtures::load_task("66e6c45b");
  fixtures::TempDir memory_dir("memory");
  fixtures::TempDir scripted_dir("scripted");
  HashedBagEmbedder embedder;
  MemoryStore store(memory_dir.path(), embedder.dimension());
  ScriptedBackend::record(
      scripted_dir.path(),
      {{Role::user, prompts::build_refine_opening_prompt(task, MemoryKind::broad, {})}},
      {"scatter the inner block"});
  ScriptedBackend backend(scripted_dir.path());
  const RefineResult result =
      refine_with_memory(task, backend, embedder, store, MemoryKind::broad, {}, {});
  CHECK(result.text == "scatter the inner block");
  CHECK(result.iterations == 1);
  CHECK(result.empty_store_fallback);
  CHECK_FALSE(result.converged);
}

TEST_CASE("refine_with_memory converges on a fixed-point transcript") {
  const Task task = fixtures::load_task("66e6c45b");
  fixtures::TempDir memory_dir("memory");
  fixtures::TempDir scripted_dir("scripted");
  HashedBagEmbedder embedder;
  MemoryStore store(memory_dir.path(), embedder.dimension());
  store.insert(entry_with("past", MemoryKind::broad, "move values to corners",
                          embedder.embed("move values to corners")));

  const std::string description = "scatter the inner block to the corners";
  ScriptedBackend::record(
      scripted_dir.path(),
      {{Role::user, prompts::build_refine_opening_prompt(task, MemoryKind::broad, {})}},
      {description});
  ScriptedBackend::record(
      scripted_dir.path(),
      {{Role::user, prompts::build_refine_iteration_prompt(
                        task, MemoryKind::broad, description, {"move values to corners"}, {})}},
      {description});
  ScriptedBackend backend(scripted_dir.path());
  const RefineResult result =
      refine_with_memory(task, backend, embedder, store, MemoryKind::broad, {}, {});
  CHECK(result.iterations == 2);
  CHECK(result.converged);
  CHECK(result.text == description);
  REQUIRE(result.trace.size() == 2);
  CHECK(result.trace[1].similarity_to_previous == doctest::Approx(1.0));
  CHECK(result.trace[1].retrieved_ids == std::vector<std::string>{"past"});
}

TEST_CASE("refine_with_memory stops at the iteration cap when never converging") {
  const Task task = fixtures::load_task("66e6c45b");
  fixtures::TempDir memory_dir("memory");
  fixtures::TempDir scripted_dir("scripted");
  HashedBagEmbedder embedder;
  MemoryStore store(memory_dir.path(), embedder.dimension());
  store.insert(entry_with("past", MemoryKind::broad, "anchor",
                          embedder.embed("anchor")));

  // Pairwise-dissimilar texts under the hashed embedder.
  const std::string d1 = "alpha";
  const std::string d2 = "beta";
  const std::string d3 = "gamma";
  REQUIRE(cosine_similarity(embedder.embed(d1), embedder.embed(d2)) < 0.98);
  REQUIRE(cosine_similarity(embedder.embed(d2), embedder.embed(d3)) < 0.98);

  ScriptedBackend::record(
      scripted_dir.path(),
      {{Role::user, prompts::build_refine_opening_prompt(task, MemoryKind::broad, {})}}, {d1});
  ScriptedBackend::record(
      scripted_dir.path(),
      {{Role::user,
        prompts::build_refine_iteration_prompt(task, MemoryKind::broad, d1, {"anchor"}, {})}},
      {d2});
  ScriptedBackend::record(
      scripted_dir.path(),
      {{Role::user,
        prompts::build_refine_iteration_prompt(task, MemoryKind::broad, d2, {"anchor"}, {})}},
      {d3});
  ScriptedBackend backend(scripted_dir.path());
  RetrievalConfig config;  // max_refine_iters = 3
  const RefineResult result =
      refine_with_memory(task, backend, embedder, store, MemoryKind::broad, config, {});
  CHECK(result.iterations == 3);
  CHECK_FALSE(result.converged);
  CHECK(result.text == d3);
}

TEST_CASE("refine_with_memory honors a cap of one generation") {
  const Task task = fixtures::load_task("66e6c45b");
  fixtures::TempDir memory_dir("memory");
  fixtures::TempDir scripted_dir("scripted");
  HashedBagEmbedder embedder;
  MemoryStore store(memory_dir.path(), embedder.dimension());
  store.insert(entry_with("past", MemoryKind::broad, "anchor", embedder.embed("anchor")));
  ScriptedBackend::record(
      scripted_dir.path(),
      {{Role::user, prompts::build_refine_opening_prompt(task, MemoryKind::broad, {})}},
      {"one and done"});
  ScriptedBackend backend(scripted_dir.path());
  RetrievalConfig config;
  config.max_refine_iters = 1;
  const RefineResult result =
      refine_with_memory(task, backend, embedder, store, MemoryKind::broad, config, {});
  CHECK(result.iterations == 1);
  CHECK(result.text == "one and done");
  CHECK_FALSE(result.converged);
}

TEST_CASE("refine_with_memory retrieves the default five neighbours") {
  const Task task = fixtures::load_task("66e6c45b");
  fixtures::TempDir memory_dir("memory");
  fixtures::TempDir scripted_dir("scripted");
  HashedBagEmbedder embedder;
  MemoryStore store(memory_dir.path(), embedder.dimension());
  // Six identical texts: ties resolve by id, so m0..m4 are retrieved.
  for (int i = 0; i < 6; ++i) {
    store.insert(entry_with("m" + std::to_string(i), MemoryKind::detailed, "anchor anchor",
                            embedder.embed("anchor anchor")));
  }
  const std::string description = "subsample the lattice";
  const std::vector<std::string> neighbours(5, "anchor anchor");
  ScriptedBackend::record(
      scripted_dir.path(),
      {{Role::user, prompts::build_refine_opening_prompt(task, MemoryKind::detailed, {})}},
      {description});
  ScriptedBackend::record(
      scripted_dir.path(),
      {{Role::user, prompts::build_refine_iteration_prompt(task, MemoryKind::detailed,
                                                           description, neighbours, {})}},
      {description});
  ScriptedBackend backend(scripted_dir.path());
  const RefineResult result =
      refine_with_memory(task, backend, embedder, store, MemoryKind::detailed, {}, {});
  CHECK(result.converged);
  REQUIRE(result.trace.size() == 2);
  CHECK(result.trace[1].retrieved_ids ==
        std::vector<std::string>{"m0", "m1", "m2", "m3", "m4"});
}

TEST_CASE("concurrent readers stay consistent while a writer inserts") {
  fixtures::TempDir dir("memory");
  std::mt19937 rng(777);
  MemoryStore store(dir.path(), 8);
  store.insert(entry_with("seed", MemoryKind::broad, "t", random_unit(rng, 8)));
  const std::vector<double> query = random_unit(rng, 8);

  std::atomic<int> violations{0};
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&]() {
      std::size_t last_seen = 0;
      for (int i = 0; i < 300; ++i) {
        const auto hits = store.top_k(query, MemoryKind::broad, 1000);
        if (hits.size() < last_seen) ++violations;  // the store is append-only
        last_seen = hits.size();
        for (std::size_t j = 1; j < hits.size(); ++j) {
          if (hits[j - 1].second < hits[j].second) ++violations;  // sorted
        }
      }
    });
  }
  workers.emplace_back([&]() {
    for (int i = 0; i < 50; ++i) {
      store.insert(entry_with("w" + std::to_string(i), MemoryKind::broad, "t",
                              random_unit(rng, 8)));
    }
  });
  for (std::thread& t : workers) t.join();
  CHECK(violations.load() == 0);
  CHECK(store.size() == 51);
}

TEST_CASE("record_solution writes one linked entry per kind, once") {
  const Task task = fixtures::load_task("66e6c45b");
  fixtures::TempDir dir("memory");
  HashedBagEmbedder embedder;
  MemoryStore store(dir.path(), embedder.dimension());
  record_solution(task, "scatter to corners", "move each value to its corner", embedder, store);
  CHECK(store.size(MemoryKind::broad) == 1);
  CHECK(store.size(MemoryKind::detailed) == 1);
  const auto hits = store.top_k(embedder.embed("scatter to corners"), MemoryKind::broad, 1);
  REQUIRE(hits.size() == 1);
  CHECK(hits.front().first.source_task == "66e6c45b");
  CHECK(hits.front().first.id == "66e6c45b/broad");
  try {
    record_solution(task, "again", "again", embedder, store);
    FAIL("expected duplicate_id");
  } catch (const error& e) {
    CHECK(e.code() == errc::duplicate_id);
  }
}

TEST_CASE("the HTTP embedder posts the input and normalizes the reply") {
  httplib::Server server;
  std::string seen_body;
  std::string seen_auth;
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    seen_auth = req.get_header_value("Authorization");
    res.set_content(R"({"embedding": [3.0, 4.0, 0.0, 0.0]})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&server]() { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("ARC_EMBED_API_KEY", "embed-key-456", 1);
  HttpEmbedderConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port);
  config.dimension = 4;
  HttpEmbedder embedder(config);
  const std::vector<double> v = embedder.embed("hello grid");

  server.stop();
  server_thread.join();

  CHECK(nlohmann::json::parse(seen_body)["input"] == "hello grid");
  CHECK(seen_auth == "Bearer embed-key-456");
  REQUIRE(v.size() == 4);
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
}

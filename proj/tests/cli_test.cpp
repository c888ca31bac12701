#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "selfwire/cli.hpp"
#include "support/subprocess.hpp"

using namespace selfwire;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "selfwire");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::main(static_cast<int>(argv.size()), argv.data(), {out, err});
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("selfwire-cli-" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

const fs::path kFixture = fixture_dir() / "figure1";
const std::string kRegistry = (kFixture / "figure1.registry.json").string();
const std::string kQaOnto = (kFixture / "ontologies" / "qa.onto").string();

// Mock modules on a free port and a registry file pointing at them.
struct LiveFixture {
  TempDir dir;
  MockServer server{load_mock_config(kFixture / "figure1.mock.json")};
  std::string registry;

  LiveFixture() {
    server.bind("127.0.0.1", 0);
    server.start();
    fs::create_directories(fs::path(dir / "reg"));
    registry = dir / "reg/live.json";
    save_registry(rebase_module_urls(load_registry(kRegistry), server.origin()), registry);
  }
  ~LiveFixture() { server.stop(); }
};

}  // namespace

TEST(CliReason, Subsume) {
  auto same = invoke({"reason", "subsume", "--ontology", kQaOnto, "--sub", "<urn:qa#Question>", "--sup", "<urn:qa#Question>"});
  EXPECT_EQ(same.code, 0);
  EXPECT_EQ(same.out, "true\n");
  auto sub = invoke({"reason", "subsume", "--ontology", kQaOnto, "--sub", "<urn:qa#Tokens>", "--sup", "<urn:qa#Thing>"});
  EXPECT_EQ(sub.out, "true\n");
  auto disjoint = invoke({"reason", "subsume", "--ontology", kQaOnto, "--sub", "<urn:qa#Question>", "--sup", "<urn:qa#Audio>"});
  EXPECT_EQ(disjoint.code, 1);
  EXPECT_EQ(disjoint.out, "false\n");
  auto bad = invoke({"reason", "subsume", "--ontology", kQaOnto, "--sub", "(and <urn:qa#Question>", "--sup", "owl:Thing"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_TRUE(bad.out.empty());
  EXPECT_FALSE(bad.err.empty());
  auto missing = invoke({"reason", "subsume", "--ontology", "/nonexistent/x.onto", "--sub", "owl:Thing", "--sup", "owl:Thing"});
  EXPECT_EQ(missing.code, 3);
}

TEST(CliCompose, Figure1) {
  TempDir dir;
  auto r = invoke({"compose", "--registry", kRegistry, "--out", dir / "a.json"});
  EXPECT_EQ(r.code, 0);
  std::size_t count = std::stoul(r.out);
  EXPECT_GE(count, 20u);
  EXPECT_EQ(count, compose_oracle(load_registry(kRegistry)).size());
  auto j = nlohmann::json::parse(read_text_file(dir / "a.json"));
  EXPECT_EQ(j["pipelines"].size(), count);
  EXPECT_TRUE(r.err.empty());
}

TEST(CliCompose, TwiceIsByteIdentical) {
  TempDir dir;
  invoke({"compose", "--registry", kRegistry, "--out", dir / "a.json"});
  invoke({"compose", "--registry", kRegistry, "--out", dir / "b.json"});
  EXPECT_EQ(read_text_file(dir / "a.json"), read_text_file(dir / "b.json"));
}

TEST(CliCompose, EmptyRegistryFails) {
  TempDir dir;
  detail::write_file_atomically(dir / "empty.json", R"({"ontology_files": [], "modules": []})");
  auto r = invoke({"compose", "--registry", dir / "empty.json", "--out", dir / "out.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out, "0\n");
}

TEST(CliCompose, Flags) {
  TempDir dir;
  auto audio = invoke({"compose", "--registry", kRegistry, "--question-class", "<urn:qa#Audio>", "--max-len", "7", "--out",
                    dir / "a.json"});
  EXPECT_EQ(audio.code, 0);
  auto short_len = invoke({"compose", "--registry", kRegistry, "--max-len", "2", "--out", dir / "b.json"});
  EXPECT_EQ(short_len.code, 1);
  auto zero = invoke({"compose", "--registry", kRegistry, "--max-len", "0", "--out", dir / "c.json"});
  EXPECT_EQ(zero.code, 2);
  auto bad_iri = invoke({"compose", "--registry", kRegistry, "--answer-class", "Answer", "--out", dir / "d.json"});
  EXPECT_EQ(bad_iri.code, 2);
  auto no_out = invoke({"compose", "--registry", kRegistry});
  EXPECT_EQ(no_out.code, 2);
  auto missing = invoke({"compose", "--registry", dir / "nope.json", "--out", dir / "e.json"});
  EXPECT_EQ(missing.code, 3);
  auto refused = invoke({"compose", "--registry", "http://127.0.0.1:1", "--out", dir / "f.json"});
  EXPECT_EQ(refused.code, 3);
}

TEST(CliCompose, FromRegistryService) {
  TempDir dir;
  RegistryService service(load_registry(kRegistry));
  service.bind("127.0.0.1", 0);
  service.start();
  auto remote = invoke({"compose", "--registry", service.address(), "--out", dir / "remote.json"});
  auto local = invoke({"compose", "--registry", kRegistry, "--out", dir / "local.json"});
  service.stop();
  EXPECT_EQ(remote.code, 0);
  EXPECT_EQ(read_text_file(dir / "remote.json"), read_text_file(dir / "local.json"));
}

TEST(CliRun, AgainstMocks) {
  LiveFixture live;
  std::string out = live.dir / "run.json";
  auto r = invoke({"run", "--registry", live.registry, "--pipeline", "openqa-ner,openqa-query,qanary-executor", "--question",
                "What is the capital of Germany?", "--out", out});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "ok\n");
  auto j = nlohmann::json::parse(read_text_file(out));
  EXPECT_EQ(j["ok"], true);
  EXPECT_EQ(j["records"].size(), 3u);
  Graph g = parse_ntriples(read_text_file(out + ".nt"));
  Message m(g, Iri(std::string(kDefaultFocus)));
  EXPECT_TRUE(conforms(m, ClassExpr::named("urn:qa#Answer"), load_registry(kRegistry).ontology()));
}

TEST(CliRun, RepeatedRunsAreByteIdentical) {
  LiveFixture live;
  for (const char* name : {"a.json", "b.json"}) {
    auto r = invoke({"run", "--registry", live.registry, "--pipeline", "tbsl-pos,hawk-ner,hawk-linker,tbsl-templates,tbsl-query,qanary-executor",
                  "--question", "What is the capital of Germany?", "--focus", "urn:run:q7", "--out", live.dir / name});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(read_text_file(live.dir / "a.json"), read_text_file(live.dir / "b.json"));
  EXPECT_EQ(read_text_file(live.dir / "a.json.nt"), read_text_file(live.dir / "b.json.nt"));
  EXPECT_NE(read_text_file(live.dir / "a.json.nt").find("<urn:run:q7>"), std::string::npos);
}

TEST(CliRun, Failures) {
  LiveFixture live;
  std::string out = live.dir / "run.json";
  auto unknown = invoke({"run", "--registry", live.registry, "--pipeline", "nope", "--question", "q", "--out", out});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("nope"), std::string::npos);
  auto disconnected = invoke({"run", "--registry", live.registry, "--pipeline", "qanary-executor", "--question", "q", "--out", out});
  EXPECT_EQ(disconnected.code, 2);
  auto bad_focus = invoke({"run", "--registry", live.registry, "--pipeline", "openqa-ner", "--question", "q", "--focus", "nofocus", "--out", out});
  EXPECT_EQ(bad_focus.code, 2);
  auto unanswered = invoke({"run", "--registry", live.registry, "--pipeline", "openqa-ner", "--question", "q", "--out", out});
  EXPECT_EQ(unanswered.code, 1);
  EXPECT_EQ(unanswered.out, "NotAnswered\n");
  EXPECT_TRUE(fs::exists(out + ".nt"));

  live.server.stop();
  auto stopped = invoke({"run", "--registry", live.registry, "--pipeline", "openqa-ner", "--question", "q", "--timeout", "500", "--out", out});
  EXPECT_EQ(stopped.code, 3);
  EXPECT_EQ(nlohmann::json::parse(read_text_file(out))["failure"]["kind"], "StepFailed");
}

TEST(CliRun, TimeoutFromEnvironment) {
  TempDir dir;
  auto mocks = load_mock_config(kFixture / "figure1.mock.json");
  mocks.at("openqa-ner").latency_ms = 800;
  MockServer server(std::move(mocks));
  server.bind("127.0.0.1", 0);
  server.start();
  save_registry(rebase_module_urls(load_registry(kRegistry), server.origin()), dir / "r.json");
  std::vector<std::string> args{"run", "--registry", dir / "r.json", "--pipeline", "openqa-ner", "--question", "q", "--out", dir / "o.json"};

  setenv("SELFWIRE_TIMEOUT_MS", "100", 1);
  EXPECT_EQ(invoke(args).code, 3);
  auto with_flag = args;
  with_flag.insert(with_flag.end(), {"--timeout", "5000"});
  EXPECT_EQ(invoke(with_flag).code, 1);  // served, but not an answer
  setenv("SELFWIRE_TIMEOUT_MS", "soon", 1);
  EXPECT_EQ(invoke(args).code, 2);
  unsetenv("SELFWIRE_TIMEOUT_MS");
  EXPECT_EQ(invoke(args).code, 1);
  server.stop();
}

TEST(CliHelp, ListsEveryFlagWithDefaults) {
  auto run = invoke({"run", "--help"});
  EXPECT_EQ(run.code, 0);
  for (const char* flag : {"--registry", "--pipeline", "--question", "--focus", "--timeout", "--out"}) {
    EXPECT_NE(run.out.find(flag), std::string::npos) << flag;
  }
  EXPECT_NE(run.out.find(std::string(kDefaultFocus)), std::string::npos);
  auto compose = invoke({"compose", "--help"});
  for (const char* text : {"--question-class", "--answer-class", "--max-len", "[6]", "--max-multiplicity", "[1]",
                           "<urn:qa#Question>", "urn:qa#Answer"}) {
    EXPECT_NE(compose.out.find(text), std::string::npos) << text;
  }
  EXPECT_NE(invoke({"registry", "serve", "--help"}).out.find("--port"), std::string::npos);
  EXPECT_NE(invoke({"mock", "serve", "--help"}).out.find("[8790]"), std::string::npos);
  EXPECT_NE(invoke({"reason", "subsume", "--help"}).out.find("--ontology"), std::string::npos);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
}

TEST(CliServe, MockServeListensAndStopsOnSigint) {
  test_support::Subprocess p({SELFWIRE_CLI_PATH, "mock", "serve", "--config", (kFixture / "figure1.mock.json").string(), "--port", "0"});
  ASSERT_TRUE(p.started());
  std::string line = p.read_line();
  ASSERT_EQ(line.rfind("listening on http://127.0.0.1:", 0), 0u) << line;
  std::string origin = line.substr(std::string("listening on ").size());

  httplib::Client c(origin);
  auto res = c.Post("/qanary-executor", {{"X-Selfwire-Focus", "urn:x#q"}, {"X-Selfwire-Invocation", "i1"}}, "",
                    "application/n-triples");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);

  // A second server on the same port fails with an I/O exit code.
  test_support::Subprocess clash({SELFWIRE_CLI_PATH, "mock", "serve", "--config", (kFixture / "figure1.mock.json").string(),
                                  "--port", origin.substr(origin.rfind(':') + 1)});
  EXPECT_EQ(clash.wait(), 3);

  p.signal(SIGINT);
  EXPECT_EQ(p.wait(), 0);
}

TEST(CliServe, RegistryServeListensAndStopsOnSigint) {
  TempDir dir;
  save_registry(load_registry(kRegistry), dir / "r.json");
  test_support::Subprocess p({SELFWIRE_CLI_PATH, "registry", "serve", "--file", dir / "r.json", "--port", "0"});
  std::string line = p.read_line();
  ASSERT_EQ(line.rfind("listening on http://127.0.0.1:", 0), 0u) << line;
  std::string origin = line.substr(std::string("listening on ").size());
  EXPECT_EQ(open_registry(origin).modules(), load_registry(kRegistry).modules());
  p.signal(SIGINT);
  EXPECT_EQ(p.wait(), 0);
}

#pragma once

// Mock QA modules speaking the executor's wire protocol, and the shipped
// fixtures that use them.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "selfwire/composer.hpp"
#include "selfwire/rdf.hpp"
#include "selfwire/detail/server.hpp"
#include "selfwire/registry.hpp"

namespace selfwire {

struct MockBehavior {
  std::string module_id;
  std::vector<std::string> delta_template;  // N-Triples lines with {focus} / {invocation}
  std::vector<std::string> required_params;
  int latency_ms = 0;
  std::optional<std::size_t> fail_after;  // invocations served before answering 500

  friend bool operator==(const MockBehavior&, const MockBehavior&) = default;
};

namespace detail {

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

}  // namespace detail

// The delta a behavior produces for one invocation.
inline Graph instantiate(const MockBehavior& b, const std::string& focus, const std::string& invocation) {
  std::string doc;
  for (const auto& line : b.delta_template) {
    doc += detail::replace_all(detail::replace_all(line, "{focus}", focus), "{invocation}", invocation);
    doc += '\n';
  }
  return parse_ntriples(doc);
}

inline std::map<std::string, MockBehavior> parse_mock_config(const std::string& text, const std::string& source = "mock config") {
  using namespace detail;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw RegistryError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw RegistryError("expected object, got " + type_name(doc), "$");
  reject_unknown(doc, {"modules"}, "$");
  const auto& mods = require_array(doc, "modules", "");
  std::map<std::string, MockBehavior> out;
  for (std::size_t i = 0; i < mods.size(); ++i) {
    const std::string at = "modules[" + std::to_string(i) + "]";
    const auto& m = mods[i];
    if (!m.is_object()) throw RegistryError("expected object, got " + type_name(m), at);
    reject_unknown(m, {"id", "delta", "required_params", "latency_ms", "fail_after"}, at);
    MockBehavior b;
    b.module_id = require_string(m, "id", at);
    if (!valid_module_id(b.module_id)) throw RegistryError("id must match [a-z0-9-]+", child(at, "id"));
    const auto& delta = require_array(m, "delta", at);
    for (std::size_t k = 0; k < delta.size(); ++k) {
      if (!delta[k].is_string()) {
        throw RegistryError("expected string", child(at, "delta[" + std::to_string(k) + "]"));
      }
      b.delta_template.push_back(delta[k].get<std::string>());
    }
    if (auto it = m.find("required_params"); it != m.end()) {
      if (!it->is_array()) throw RegistryError("expected array", child(at, "required_params"));
      for (const auto& p : *it) {
        if (!p.is_string()) throw RegistryError("expected string", child(at, "required_params"));
        b.required_params.push_back(p.get<std::string>());
      }
    }
    if (auto it = m.find("latency_ms"); it != m.end()) {
      if (!it->is_number_integer() || it->get<int>() < 0) {
        throw RegistryError("expected non-negative integer", child(at, "latency_ms"));
      }
      b.latency_ms = it->get<int>();
    }
    if (auto it = m.find("fail_after"); it != m.end() && !it->is_null()) {
      if (!it->is_number_integer() || it->get<long long>() < 0) {
        throw RegistryError("expected non-negative integer or null", child(at, "fail_after"));
      }
      b.fail_after = it->get<std::size_t>();
    }
    // Every template line must instantiate to exactly one triple.
    for (std::size_t k = 0; k < b.delta_template.size(); ++k) {
      const std::string f = child(at, "delta[" + std::to_string(k) + "]");
      MockBehavior one{b.module_id, {b.delta_template[k]}, {}, 0, std::nullopt};
      try {
        if (instantiate(one, "urn:selfwire:check#focus", "i1").size() != 1) {
          throw RegistryError("template must hold exactly one triple", f);
        }
      } catch (const NTriplesError& e) {
        throw RegistryError(e.what(), f);
      }
    }
    std::string id = b.module_id;
    if (!out.emplace(id, std::move(b)).second) throw RegistryError("duplicate module id '" + id + "'", child(at, "id"));
  }
  return out;
}

inline std::map<std::string, MockBehavior> load_mock_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::ios_base::failure& e) {
    throw IoError(e.what());
  }
  return parse_mock_config(text, path.string());
}

class MockServer {
 public:
  explicit MockServer(std::map<std::string, MockBehavior> behaviors) {
    for (auto& [id, b] : behaviors) {
      auto slot = std::make_unique<Slot>();
      slot->behavior = std::move(b);
      slots_.emplace(id, std::move(slot));
    }
    server_.Post(R"(/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
  }

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  ~MockServer() { stop(); }

  // Port 0 picks a free port. Returns the bound port; throws IoError.
  int bind(const std::string& host, int port) {
    int bound = detail::bind_server(server_, host, port);
    host_ = host;
    port_ = bound;
    return bound;
  }

  void serve() { server_.listen_after_bind(); }

  void start() {
    thread_ = std::thread([this] { serve(); });
    server_.wait_until_ready();
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const noexcept { return port_; }
  std::string origin() const { return "http://" + host_ + ":" + std::to_string(port_); }

  std::size_t invocations(const std::string& id) const {
    auto it = slots_.find(id);
    return it == slots_.end() ? 0 : it->second->count.load();
  }

 private:
  struct Slot {
    MockBehavior behavior;
    std::atomic<std::size_t> count{0};
  };

  static void text_reply(httplib::Response& res, int status, const std::string& msg) {
    res.status = status;
    res.set_content(msg + "\n", "text/plain");
  }

  void handle(const httplib::Request& req, httplib::Response& res) {
    auto it = slots_.find(req.matches[1]);
    if (it == slots_.end()) return text_reply(res, 404, "no mock module '" + req.matches[1].str() + "'");
    Slot& slot = *it->second;
    const MockBehavior& b = slot.behavior;
    std::size_t n = ++slot.count;

    for (const auto& p : b.required_params) {
      if (!req.has_param(p)) return text_reply(res, 422, "missing query parameter '" + p + "'");
    }
    std::string focus = req.get_header_value("X-Selfwire-Focus");
    std::string invocation = req.get_header_value("X-Selfwire-Invocation");
    if (!Iri::valid(focus)) return text_reply(res, 422, "missing or invalid X-Selfwire-Focus header");
    if (invocation.empty()) return text_reply(res, 422, "missing X-Selfwire-Invocation header");
    if (b.latency_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(b.latency_ms));
    if (b.fail_after && n > *b.fail_after) return text_reply(res, 500, "configured failure");

    try {
      res.status = 200;
      res.set_content(serialize_ntriples(instantiate(b, focus, invocation)), "application/n-triples");
    } catch (const Error& e) {
      text_reply(res, 500, e.what());
    }
  }

  std::map<std::string, std::unique_ptr<Slot>> slots_;
  httplib::Server server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;
};

// Same registry with every module URL moved to `origin` (scheme://host:port),
// keeping paths.
inline Registry rebase_module_urls(const Registry& r, const std::string& origin) {
  std::vector<ModuleDescriptor> mods;
  for (const auto& [id, d] : r.modules()) {
    ModuleDescriptor copy = d;
    auto url = detail::parse_http_url(d.url);
    copy.url = origin + (url ? url->path : "/" + id);
    mods.push_back(std::move(copy));
  }
  return Registry(r.ontology(), std::move(mods), r.ontology_files());
}

struct Fixture {
  std::filesystem::path registry_file;
  std::vector<std::filesystem::path> ontology_files;
  std::filesystem::path mock_config_file;
  std::size_t expected_pipeline_count = 0;
};

#ifdef SELFWIRE_FIXTURE_DIR
inline std::filesystem::path fixture_dir() { return SELFWIRE_FIXTURE_DIR; }
#endif

// Loads <dir>/<name>.registry.json and <dir>/<name>.mock.json. Checks that
// registry and mock ids coincide, and counts pipelines with the exhaustive
// oracle under default compose settings.
inline Fixture load_fixture(const std::filesystem::path& dir, const std::string& name) {
  Fixture f;
  f.registry_file = dir / (name + ".registry.json");
  f.mock_config_file = dir / (name + ".mock.json");
  Registry r = load_registry(f.registry_file);
  f.ontology_files = r.ontology_files();
  auto mocks = load_mock_config(f.mock_config_file);
  for (const auto& [id, d] : r.modules()) {
    if (!mocks.count(id)) throw RegistryError("fixture module '" + id + "' has no mock behavior");
  }
  for (const auto& [id, b] : mocks) {
    if (!r.find(id)) throw RegistryError("mock behavior '" + id + "' has no registry entry");
  }
  f.expected_pipeline_count = compose_oracle(r).size();
  return f;
}

#ifdef SELFWIRE_FIXTURE_DIR
inline Fixture build_figure1_fixture() { return load_fixture(fixture_dir() / "figure1", "figure1"); }
#endif

}  // namespace selfwire

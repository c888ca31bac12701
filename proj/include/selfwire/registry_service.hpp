#pragma once

// HTTP front end for a registry, and the matching client.
//
//   GET    /modules        JSON array, sorted by id
//   GET    /modules/{id}   descriptor, or 404
//   POST   /modules        201 | 409 duplicate | 422 invalid
//   DELETE /modules/{id}   204 | 404
//   GET    /ontology       ontology document, text/plain

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "selfwire/detail/server.hpp"
#include "selfwire/registry.hpp"

namespace selfwire {

namespace detail {

inline void json_reply(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

inline void error_reply(httplib::Response& res, int status, const std::string& message,
                        const std::string& path = {}) {
  nlohmann::ordered_json body{{"error", message}};
  if (!path.empty()) body["path"] = path;
  json_reply(res, status, body);
}

}  // namespace detail

class RegistryService {
 public:
  // Mutations are written back to backing_file when given.
  explicit RegistryService(Registry initial, std::optional<std::filesystem::path> backing_file = {})
      : current_(std::make_shared<const Registry>(std::move(initial))), backing_(std::move(backing_file)) {
    routes();
  }

  RegistryService(const RegistryService&) = delete;
  RegistryService& operator=(const RegistryService&) = delete;

  ~RegistryService() { stop(); }

  // Port 0 picks a free port. Returns the bound port; throws IoError.
  int bind(const std::string& host, int port) {
    int bound = detail::bind_server(server_, host, port);
    host_ = host;
    port_ = bound;
    return bound;
  }

  // Blocks until stop().
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
  std::string address() const { return "http://" + host_ + ":" + std::to_string(port_); }

  std::shared_ptr<const Registry> snapshot() const {
    std::shared_lock lock(mu_);
    return current_;
  }

 private:
  void routes() {
    server_.Get("/modules", [this](const httplib::Request&, httplib::Response& res) {
      detail::json_reply(res, 200, modules_json(*snapshot()));
    });
    server_.Get(R"(/modules/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto snap = snapshot();
      if (const auto* d = snap->find(req.matches[1])) {
        detail::json_reply(res, 200, to_json(*d));
      } else {
        detail::error_reply(res, 404, "no module '" + req.matches[1].str() + "'");
      }
    });
    server_.Get("/ontology", [this](const httplib::Request&, httplib::Response& res) {
      res.status = 200;
      res.set_content(snapshot()->ontology().str(), "text/plain");
    });
    server_.Post("/modules", [this](const httplib::Request& req, httplib::Response& res) { post(req, res); });
    server_.Delete(R"(/modules/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::unique_lock lock(mu_);
      if (!current_->find(req.matches[1])) {
        detail::error_reply(res, 404, "no module '" + req.matches[1].str() + "'");
        return;
      }
      if (commit(current_->without_module(req.matches[1]), res)) res.status = 204;
    });
  }

  void post(const httplib::Request& req, httplib::Response& res) {
    ModuleDescriptor d;
    try {
      d = descriptor_from_json(nlohmann::json::parse(req.body));
    } catch (const nlohmann::json::parse_error& e) {
      detail::error_reply(res, 422, std::string("invalid JSON: ") + e.what());
      return;
    } catch (const RegistryError& e) {
      detail::error_reply(res, 422, e.what(), e.path());
      return;
    }
    std::unique_lock lock(mu_);
    if (current_->find(d.id)) {
      detail::error_reply(res, 409, "module '" + d.id + "' already exists", "id");
      return;
    }
    nlohmann::ordered_json body = to_json(d);
    if (commit(current_->with_module(std::move(d)), res)) detail::json_reply(res, 201, body);
  }

  // Caller holds the writer lock.
  bool commit(Registry next, httplib::Response& res) {
    if (backing_) {
      try {
        save_registry(next, *backing_);
      } catch (const Error& e) {
        detail::error_reply(res, 500, e.what());
        return false;
      }
    }
    current_ = std::make_shared<const Registry>(std::move(next));
    return true;
  }

  mutable std::shared_mutex mu_;
  std::shared_ptr<const Registry> current_;
  std::optional<std::filesystem::path> backing_;
  httplib::Server server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;
};

namespace detail {

inline std::string http_get(httplib::Client& client, const std::string& path) {
  auto res = client.Get(path);
  if (!res) throw IoError("GET " + path + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw IoError("GET " + path + " returned HTTP " + std::to_string(res->status));
  return res->body;
}

}  // namespace detail

// Reads a registry served by RegistryService at base_url.
inline Registry fetch_registry(const std::string& base_url) {
  auto url = detail::parse_http_url(base_url);
  if (!url) throw RegistryError("not an http(s) URL: '" + base_url + "'");
  if (url->scheme != "http") throw IoError("https registries are not supported by this build");
  std::string prefix = url->path;
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  httplib::Client client(url->origin());
  client.set_connection_timeout(std::chrono::seconds(5));
  client.set_read_timeout(std::chrono::seconds(10));

  Ontology onto = parse_ontology(detail::http_get(client, prefix + "/ontology"),
                                 Iri("urn:selfwire:ontology#remote"));
  nlohmann::json mods;
  try {
    mods = nlohmann::json::parse(detail::http_get(client, prefix + "/modules"));
  } catch (const nlohmann::json::parse_error& e) {
    throw RegistryError(std::string("invalid JSON from registry: ") + e.what());
  }
  if (!mods.is_array()) throw RegistryError("expected array of modules", "$");
  std::vector<ModuleDescriptor> modules;
  for (std::size_t i = 0; i < mods.size(); ++i) {
    modules.push_back(descriptor_from_json(mods[i], "[" + std::to_string(i) + "]"));
  }
  return Registry(std::move(onto), std::move(modules));
}

// A registry file path or an http(s) URL of a registry service.
inline Registry open_registry(const std::string& source) {
  if (source.rfind("http://", 0) == 0 || source.rfind("https://", 0) == 0) return fetch_registry(source);
  return load_registry(source);
}

}  // namespace selfwire

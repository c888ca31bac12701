#pragma once

// Module descriptors and the registry that holds them, with JSON
// persistence.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "selfwire/class_expr.hpp"
#include "selfwire/detail/url.hpp"
#include "selfwire/error.hpp"
#include "selfwire/ontology.hpp"

namespace selfwire {

struct ParamBinding {
  std::string param;  // URL query key
  Iri property;       // literal-valued property read off the focus

  friend bool operator==(const ParamBinding&, const ParamBinding&) = default;
};

using ParamMap = std::vector<ParamBinding>;

inline bool valid_module_id(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
  });
}

inline bool valid_param_name(std::string_view p) {
  auto head = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (p.empty() || !head(p.front())) return false;
  return std::all_of(p.begin(), p.end(), [&](char c) { return head(c) || (c >= '0' && c <= '9'); });
}

struct ModuleDescriptor {
  std::string id;
  std::string name;
  std::string system;
  std::string url;
  std::vector<ClassExpr> input;  // disjuncts; empty for start modules
  ClassExpr output_delta;
  ParamMap map;
  std::optional<Iri> ontology;  // informational: the vocabulary the module speaks

  bool is_start() const noexcept { return input.empty(); }

  // Throws RegistryError naming the offending field below `at`.
  void validate(const std::string& at = {}) const {
    auto field = [&](const std::string& f) { return at.empty() ? f : at + "." + f; };
    if (!valid_module_id(id)) throw RegistryError("id must match [a-z0-9-]+, got '" + id + "'", field("id"));
    if (!detail::parse_http_url(url)) throw RegistryError("not an absolute http(s) URL: '" + url + "'", field("url"));
    for (std::size_t i = 0; i < input.size(); ++i) {
      if (input[i].is_bottom()) {
        throw RegistryError("input disjunct is owl:Nothing", field("input[" + std::to_string(i) + "]"));
      }
    }
    if (output_delta.is_bottom()) throw RegistryError("output_delta is owl:Nothing", field("output_delta"));
    std::set<std::string> seen;
    for (std::size_t i = 0; i < map.size(); ++i) {
      const std::string f = field("map[" + std::to_string(i) + "].param");
      if (!valid_param_name(map[i].param)) {
        throw RegistryError("parameter name must match [A-Za-z_][A-Za-z0-9_]*, got '" + map[i].param + "'", f);
      }
      if (!seen.insert(map[i].param).second) throw RegistryError("duplicate parameter '" + map[i].param + "'", f);
    }
  }

  friend bool operator==(const ModuleDescriptor&, const ModuleDescriptor&) = default;
};

inline std::string module_iri(std::string_view id) { return std::string(vocab::kModulePrefix) + std::string(id); }

inline nlohmann::ordered_json to_json(const ModuleDescriptor& d) {
  nlohmann::ordered_json j;
  j["id"] = d.id;
  j["name"] = d.name;
  j["system"] = d.system;
  j["url"] = d.url;
  j["input"] = nlohmann::ordered_json::array();
  for (const auto& e : d.input) j["input"].push_back(e.str());
  j["output_delta"] = d.output_delta.str();
  j["map"] = nlohmann::ordered_json::array();
  for (const auto& b : d.map) j["map"].push_back({{"param", b.param}, {"property", b.property.str()}});
  if (d.ontology) j["ontology"] = d.ontology->str();
  return j;
}

namespace detail {

inline std::string type_name(const nlohmann::json& j) { return j.type_name(); }

inline std::string child(const std::string& at, const std::string& f) { return at.empty() ? f : at + "." + f; }

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& at) {
  auto it = obj.find(key);
  if (it == obj.end()) throw RegistryError(std::string("missing field '") + key + "'", child(at, key));
  return *it;
}


inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& at) {
  const auto& v = require(obj, key, at);
  if (!v.is_string()) throw RegistryError("expected string, got " + type_name(v), child(at, key));
  return v.get<std::string>();
}

inline const nlohmann::json& require_array(const nlohmann::json& obj, const char* key, const std::string& at) {
  const auto& v = require(obj, key, at);
  if (!v.is_array()) throw RegistryError("expected array, got " + type_name(v), child(at, key));
  return v;
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known, const std::string& at) {
  for (const auto& [k, v] : obj.items()) {
    bool ok = std::any_of(known.begin(), known.end(), [&](const char* n) { return k == n; });
    if (!ok) throw RegistryError("unknown field '" + k + "'", child(at, k));
  }
}

inline ClassExpr expr_field(const nlohmann::json& v, const std::string& at) {
  if (!v.is_string()) throw RegistryError("expected class expression string, got " + type_name(v), at);
  try {
    return parse_class_expr(v.get<std::string>());
  } catch (const ParseError& e) {
    throw RegistryError("unparseable class expression: " + std::string(e.what()), at);
  }
}

inline Iri iri_field(const nlohmann::json& v, const std::string& at) {
  if (!v.is_string()) throw RegistryError("expected IRI string, got " + type_name(v), at);
  try {
    return Iri(v.get<std::string>());
  } catch (const InvalidIri& e) {
    throw RegistryError(e.what(), at);
  }
}

}  // namespace detail

// Parses and validates one descriptor. `at` prefixes field paths in errors.
inline ModuleDescriptor descriptor_from_json(const nlohmann::json& j, const std::string& at = {}) {
  using namespace detail;
  if (!j.is_object()) throw RegistryError("expected object, got " + type_name(j), at);
  reject_unknown(j, {"id", "name", "system", "url", "input", "output_delta", "map", "ontology"}, at);
  ModuleDescriptor d;
  d.id = require_string(j, "id", at);
  d.name = require_string(j, "name", at);
  d.system = require_string(j, "system", at);
  d.url = require_string(j, "url", at);
  const auto& input = require_array(j, "input", at);
  for (std::size_t i = 0; i < input.size(); ++i) {
    d.input.push_back(expr_field(input[i], child(at, "input[" + std::to_string(i) + "]")));
  }
  d.output_delta = expr_field(require(j, "output_delta", at), child(at, "output_delta"));
  const auto& map = require_array(j, "map", at);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const std::string here = child(at, "map[" + std::to_string(i) + "]");
    if (!map[i].is_object()) throw RegistryError("expected object, got " + type_name(map[i]), here);
    reject_unknown(map[i], {"param", "property"}, here);
    std::string param = require_string(map[i], "param", here);
    d.map.push_back({std::move(param), iri_field(require(map[i], "property", here), child(here, "property"))});
  }
  if (auto it = j.find("ontology"); it != j.end()) d.ontology = iri_field(*it, child(at, "ontology"));
  d.validate(at);
  return d;
}

class Registry {
 public:
  Registry() = default;

  // ontology_files are remembered for persistence only; `ontology` is
  // authoritative.
  Registry(Ontology ontology, std::vector<ModuleDescriptor> modules,
           std::vector<std::filesystem::path> ontology_files = {})
      : ontology_(std::move(ontology)), ontology_files_(std::move(ontology_files)) {
    for (std::size_t i = 0; i < modules.size(); ++i) {
      std::string at = "modules[" + std::to_string(i) + "]";
      insert(std::move(modules[i]), at);
    }
  }

  const std::map<std::string, ModuleDescriptor>& modules() const noexcept { return modules_; }
  const Ontology& ontology() const noexcept { return ontology_; }
  const std::vector<std::filesystem::path>& ontology_files() const noexcept { return ontology_files_; }

  const ModuleDescriptor* find(const std::string& id) const {
    auto it = modules_.find(id);
    return it == modules_.end() ? nullptr : &it->second;
  }

  // Copy with one more module. Throws RegistryError on duplicates.
  Registry with_module(ModuleDescriptor d) const {
    Registry out = *this;
    out.insert(std::move(d), {});
    return out;
  }

  Registry without_module(const std::string& id) const {
    Registry out = *this;
    out.modules_.erase(id);
    return out;
  }

  friend bool operator==(const Registry& a, const Registry& b) {
    return a.modules_ == b.modules_ && a.ontology_ == b.ontology_;
  }

 private:
  void insert(ModuleDescriptor d, const std::string& at) {
    d.validate(at);
    std::string id = d.id;
    if (!modules_.emplace(id, std::move(d)).second) {
      throw RegistryError("duplicate module id '" + id + "'", detail::child(at, "id"));
    }
  }

  std::map<std::string, ModuleDescriptor> modules_;
  Ontology ontology_;
  std::vector<std::filesystem::path> ontology_files_;
};

inline std::string default_merged_iri() { return "urn:selfwire:ontology#merged"; }

// One ontology stays as it is; several are merged under a fixed IRI.
inline Ontology combine_ontologies(const std::vector<Ontology>& parts) {
  if (parts.empty()) return Ontology();
  if (parts.size() == 1) return parts.front();
  return Ontology::merge(parts, Iri(default_merged_iri()));
}

// Ontology file paths are resolved relative to the registry file.
inline Registry load_registry(const std::filesystem::path& path) {
  using namespace detail;
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::ios_base::failure& e) {
    throw IoError(e.what());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw RegistryError(path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw RegistryError("expected object, got " + type_name(doc), "$");
  reject_unknown(doc, {"ontology_files", "modules"}, "$");

  const auto& files = require_array(doc, "ontology_files", "");
  std::vector<Ontology> parts;
  std::vector<std::filesystem::path> resolved;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string at = "ontology_files[" + std::to_string(i) + "]";
    if (!files[i].is_string()) throw RegistryError("expected string, got " + type_name(files[i]), at);
    std::filesystem::path p = files[i].get<std::string>();
    if (p.is_relative()) p = path.parent_path() / p;
    p = std::filesystem::absolute(p).lexically_normal();
    try {
      parts.push_back(load_ontology(p));
    } catch (const std::ios_base::failure& e) {
      throw IoError(e.what());
    } catch (const ParseError& e) {
      throw RegistryError(e.what(), at);
    }
    resolved.push_back(p);
  }

  const auto& mods = require_array(doc, "modules", "");
  std::vector<ModuleDescriptor> modules;
  for (std::size_t i = 0; i < mods.size(); ++i) {
    modules.push_back(descriptor_from_json(mods[i], "modules[" + std::to_string(i) + "]"));
  }
  return Registry(combine_ontologies(parts), std::move(modules), std::move(resolved));
}

inline nlohmann::ordered_json modules_json(const Registry& r) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& [id, d] : r.modules()) arr.push_back(to_json(d));
  return arr;
}

namespace detail {

inline void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace detail

// Writes the registry document atomically. A registry built in memory
// without ontology files gets its non-empty ontology written beside the
// document as <stem>.ontology.
inline void save_registry(const Registry& r, const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::absolute(path).parent_path();
  nlohmann::ordered_json doc;
  doc["ontology_files"] = nlohmann::ordered_json::array();
  if (!r.ontology_files().empty()) {
    for (const auto& f : r.ontology_files()) doc["ontology_files"].push_back(fs::proximate(f, dir).generic_string());
  } else if (!(r.ontology() == Ontology())) {
    fs::path sidecar = dir / (path.stem().string() + ".ontology");
    detail::write_file_atomically(sidecar, r.ontology().str());
    doc["ontology_files"].push_back(sidecar.filename().generic_string());
  }
  doc["modules"] = modules_json(r);
  detail::write_file_atomically(path, doc.dump(2) + "\n");
}

// Start candidates for a pipeline on question_class, sorted by id.
inline std::vector<ModuleDescriptor> find_start_modules(const Registry& r, const ClassExpr& question_class) {
  std::vector<ModuleDescriptor> out;
  Description q = r.ontology().reasoner().describe(question_class);
  for (const auto& [id, d] : r.modules()) {
    bool accepts = d.is_start() ||
                   std::any_of(d.input.begin(), d.input.end(), [&](const ClassExpr& e) { return q.entails(e); });
    if (accepts) out.push_back(d);
  }
  return out;
}

}  // namespace selfwire

#pragma once

// Runs a pipeline against HTTP modules.
//
// Wire protocol per step: POST {url}?{params} with the canonical N-Triples
// of the current message as body and the headers
//   Content-Type: application/n-triples
//   X-Selfwire-Focus: <focus IRI>
//   X-Selfwire-Invocation: i<k>
// A module answers 200 with the N-Triples of its delta only.

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "selfwire/composer.hpp"
#include "selfwire/detail/url.hpp"
#include "selfwire/message.hpp"
#include "selfwire/registry.hpp"

namespace selfwire {

inline constexpr int kDefaultTimeoutMs = 10000;
inline constexpr std::string_view kDefaultFocus = "urn:selfwire:question#q1";

class MissingParameter : public Error {
 public:
  MissingParameter(std::string module_id, std::string param, std::string property)
      : Error("module '" + module_id + "': no literal for parameter '" + param + "' (property <" + property + ">)"),
        module_id_(std::move(module_id)), param_(std::move(param)), property_(std::move(property)) {}

  const std::string& module_id() const noexcept { return module_id_; }
  const std::string& param() const noexcept { return param_; }
  const std::string& property() const noexcept { return property_; }

 private:
  std::string module_id_, param_, property_;
};

// Unknown module id or a witness that does not connect step by step.
class InvalidPipeline : public Error {
 public:
  using Error::Error;
};

inline Message initial_message(const std::string& question_text, const Iri& focus, const ClassExpr& question_class) {
  const Term f = Term::iri(focus);
  const Term type = Term::iri(std::string(vocab::kRdfType));
  Graph g;
  g.emplace(f, type, Term::iri(std::string(vocab::kQaQuestion)));
  g.emplace(f, Term::iri(std::string(vocab::kQaText)), Term::literal(question_text));
  for (const auto& part : top_level_conjuncts(question_class)) {
    if (part.is_named()) g.emplace(f, type, Term::iri(part.iri()));
  }
  return Message(std::move(g), focus, question_class);
}

struct ModuleRequest {
  std::string url;   // with query string
  std::string body;  // canonical N-Triples
  std::vector<std::pair<std::string, std::string>> headers;
};

inline ModuleRequest build_request(const Message& msg, const ModuleDescriptor& desc, const std::string& invocation_id) {
  const Term f = msg.focus_term();
  std::string query;
  for (const auto& b : desc.map) {
    const Term prop = Term::iri(b.property);
    const Triple* hit = nullptr;
    for (const auto& t : msg.graph()) {
      if (t.s == f && t.p == prop && t.o.is_literal()) {
        hit = &t;
        break;
      }
    }
    if (!hit) throw MissingParameter(desc.id, b.param, b.property.str());
    query += query.empty() ? "?" : "&";
    query += b.param + "=" + detail::percent_encode(hit->o.value());
  }
  ModuleRequest out;
  out.url = desc.url + query;
  out.body = serialize_ntriples(msg.graph());
  out.headers = {{"Content-Type", "application/n-triples"},
                 {"X-Selfwire-Focus", msg.focus().str()},
                 {"X-Selfwire-Invocation", invocation_id}};
  return out;
}

struct InvocationRecord {
  std::string module_id;
  std::string invocation_id;
  std::string request_url;
  std::size_t request_bytes = 0;
  int response_status = 0;  // 0 when no response arrived
  std::size_t response_bytes = 0;
  long long duration_ms = 0;
  std::size_t delta_size = 0;
};

struct RunFailure {
  enum class Kind { step_failed, contract_violation, not_answered };
  Kind kind;
  std::size_t step;  // 1-based; 0 for not_answered
  std::string cause;
  bool transport = false;  // no HTTP response (refused, reset, timed out)
};

inline const char* to_string(RunFailure::Kind k) {
  switch (k) {
    case RunFailure::Kind::step_failed: return "StepFailed";
    case RunFailure::Kind::contract_violation: return "ContractViolation";
    case RunFailure::Kind::not_answered: return "NotAnswered";
  }
  return "";
}

struct RunResult {
  std::vector<std::string> pipeline;
  Message final_message;
  std::vector<InvocationRecord> records;
  bool ok = false;
  std::optional<RunFailure> failure;
};

namespace detail {

struct Response {
  int status = 0;
  std::string content_type;
  std::string body;
  std::string error;  // transport error when status == 0
};

inline Response http_post(const ModuleRequest& r, int timeout_ms) {
  auto url = parse_http_url(r.url.substr(0, r.url.find('?')));
  if (!url) return {0, {}, {}, "invalid module URL '" + r.url + "'"};
  if (url->scheme != "http") return {0, {}, {}, "https modules are not supported by this build"};
  std::string target = url->path.empty() ? "/" : url->path;
  if (auto q = r.url.find('?'); q != std::string::npos) target += r.url.substr(q);

  httplib::Client client(url->origin());
  auto timeout = std::chrono::milliseconds(timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  for (const auto& [k, v] : r.headers) {
    if (k != "Content-Type") headers.emplace(k, v);
  }
  auto res = client.Post(target, headers, r.body, "application/n-triples");
  if (!res) return {0, {}, {}, httplib::to_string(res.error())};
  return {res->status, res->get_header_value("Content-Type"), res->body, {}};
}

}  // namespace detail

inline Message step_message(const Message& before, const Delta& delta, const std::string& invocation_id,
                            const std::string& module_id, std::size_t step, ClassExpr acc) {
  Message merged = merge(before, delta, invocation_id);
  Graph g = merged.graph();
  const Term f = merged.focus_term();
  g.emplace(f, Term::iri(std::string(vocab::kProcessedBy)), Term::iri(module_iri(module_id)));
  g.emplace(f, Term::iri(std::string(vocab::kStep)),
            Term::literal(std::to_string(step), Iri(std::string(vocab::kXsdInteger))));
  return Message(std::move(g), merged.focus(), std::move(acc));
}

// Throws InvalidPipeline when an id is unknown or the witness does not
// connect step by step from the question class.
inline void validate_pipeline(const Registry& registry, const std::vector<std::string>& witness,
                              const ClassExpr& question_class) {
  ClassExpr acc = question_class;
  for (std::size_t k = 0; k < witness.size(); ++k) {
    const ModuleDescriptor* m = registry.find(witness[k]);
    if (!m) throw InvalidPipeline("unknown module id '" + witness[k] + "'");
    if (!connects(registry.ontology(), acc, *m)) {
      throw InvalidPipeline("step " + std::to_string(k + 1) + ": module '" + m->id + "' does not accept " + acc.str());
    }
    acc = accumulate(acc, *m);
  }
}

inline RunResult run_pipeline(const Registry& registry, const std::vector<std::string>& witness,
                              const ComposeRequest& req, const std::string& question_text,
                              int timeout_ms = kDefaultTimeoutMs, const Iri& focus = Iri(std::string(kDefaultFocus))) {
  req.validate();
  validate_pipeline(registry, witness, req.question_class);
  const Ontology& onto = registry.ontology();

  RunResult out{witness, initial_message(question_text, focus, req.question_class), {}, false, std::nullopt};
  auto fail = [&](RunFailure f) {
    out.failure = std::move(f);
    return out;
  };

  for (std::size_t k = 1; k <= witness.size(); ++k) {
    const ModuleDescriptor& m = *registry.find(witness[k - 1]);
    const std::string inv = "i" + std::to_string(k);
    InvocationRecord rec;
    rec.module_id = m.id;
    rec.invocation_id = inv;

    ModuleRequest request;
    try {
      request = build_request(out.final_message, m, inv);
    } catch (const MissingParameter& e) {
      return fail({RunFailure::Kind::step_failed, k, e.what()});
    }
    rec.request_url = request.url;
    rec.request_bytes = request.body.size();

    auto t0 = std::chrono::steady_clock::now();
    detail::Response res = detail::http_post(request, timeout_ms);
    rec.duration_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    rec.response_status = res.status;
    rec.response_bytes = res.body.size();

    if (res.status == 0) {
      out.records.push_back(rec);
      return fail({RunFailure::Kind::step_failed, k, "transport error: " + res.error, true});
    }
    if (res.status != 200) {
      out.records.push_back(rec);
      return fail({RunFailure::Kind::step_failed, k, "HTTP " + std::to_string(res.status)});
    }
    std::string ctype = res.content_type.substr(0, res.content_type.find(';'));
    if (!ctype.empty() && ctype != "application/n-triples") {
      out.records.push_back(rec);
      return fail({RunFailure::Kind::step_failed, k, "unexpected Content-Type '" + res.content_type + "'"});
    }
    Delta delta;
    try {
      delta.graph = parse_ntriples(res.body);
    } catch (const Error& e) {
      out.records.push_back(rec);
      return fail({RunFailure::Kind::step_failed, k, std::string("invalid N-Triples response: ") + e.what()});
    }
    rec.delta_size = delta.graph.size();
    out.records.push_back(rec);

    ClassExpr acc = accumulate(out.final_message.conforms_to(), m);
    out.final_message = step_message(out.final_message, delta, inv, m.id, k, acc);
    if (!conforms(out.final_message, acc, onto)) {
      return fail({RunFailure::Kind::contract_violation, k,
                   "message does not conform to " + acc.str() + " after module '" + m.id + "'"});
    }
  }

  if (!conforms(out.final_message, ClassExpr::named(req.answer_class), onto)) {
    return fail({RunFailure::Kind::not_answered, 0, "final message does not conform to <" + req.answer_class + ">"});
  }
  out.ok = true;
  return out;
}

// Records carry duration_ms only when with_timings is set.
inline nlohmann::ordered_json to_json(const RunResult& r, bool with_timings = false) {
  nlohmann::ordered_json j;
  j["ok"] = r.ok;
  j["pipeline"] = r.pipeline;
  j["focus"] = r.final_message.focus().str();
  j["final_type"] = r.final_message.conforms_to().str();
  j["final_triples"] = r.final_message.graph().size();
  j["records"] = nlohmann::ordered_json::array();
  for (const auto& rec : r.records) {
    nlohmann::ordered_json e;
    e["module_id"] = rec.module_id;
    e["invocation_id"] = rec.invocation_id;
    e["request_url"] = rec.request_url;
    e["request_bytes"] = rec.request_bytes;
    e["response_status"] = rec.response_status;
    e["response_bytes"] = rec.response_bytes;
    if (with_timings) e["duration_ms"] = rec.duration_ms;
    e["delta_size"] = rec.delta_size;
    j["records"].push_back(std::move(e));
  }
  if (r.failure) {
    j["failure"] = {{"kind", to_string(r.failure->kind)}, {"step", r.failure->step}, {"cause", r.failure->cause}};
  } else {
    j["failure"] = nullptr;
  }
  return j;
}

}  // namespace selfwire

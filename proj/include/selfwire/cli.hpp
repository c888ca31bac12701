#pragma once

// The `selfwire` command line.
//
// Exit codes: 0 success, 1 domain failure, 2 usage or input error, 3 I/O or
// network error.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>

#include "selfwire/composer.hpp"
#include "selfwire/executor.hpp"
#include "selfwire/mock.hpp"
#include "selfwire/registry_service.hpp"

namespace selfwire::cli {

enum ExitCode : int { kOk = 0, kDomainFailure = 1, kUsage = 2, kIo = 3 };

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline void write_output(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << content;
  f.flush();
  if (!f) throw IoError("cannot write " + path.string());
}

// Maps library exceptions to exit codes with one diagnostic line.
template <typename F>
int guarded(Streams io, F&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    io.err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const InvalidPipeline& e) {
    io.err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    io.err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

// Blocks SIGINT and SIGTERM in the calling thread (and the threads it
// starts afterwards), runs `start`, then waits for one of them.
template <typename Start, typename Stop>
int serve_until_signal(Streams io, const std::string& address, Start&& start, Stop&& stop) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigset_t old;
  pthread_sigmask(SIG_BLOCK, &set, &old);
  start();
  io.out << "listening on " << address << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  stop();
  pthread_sigmask(SIG_SETMASK, &old, nullptr);
  return kOk;
}

inline std::vector<std::string> split_ids(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string id;
  while (std::getline(ss, id, ',')) {
    if (!id.empty()) out.push_back(id);
  }
  return out;
}

}  // namespace detail

struct ReasonArgs {
  std::string ontology, sub, sup;
};

inline int cmd_reason(const ReasonArgs& a, Streams io) {
  return detail::guarded(io, [&] {
    Ontology onto = [&] {
      try {
        return load_ontology(a.ontology);
      } catch (const std::ios_base::failure& e) {
        throw IoError(e.what());
      }
    }();
    ClassExpr sub = parse_class_expr(a.sub);
    ClassExpr sup = parse_class_expr(a.sup);
    bool yes = subsumes(onto, sub, sup);
    io.out << (yes ? "true" : "false") << "\n";
    return yes ? kOk : kDomainFailure;
  });
}

struct ComposeArgs {
  std::string registry;
  std::string question_class = std::string("<") + std::string(vocab::kQaQuestion) + ">";
  std::string answer_class = std::string(vocab::kQaAnswer);
  std::size_t max_len = 6;
  std::size_t max_multiplicity = 1;
  std::string out;
};

inline int cmd_compose(const ComposeArgs& a, Streams io) {
  return detail::guarded(io, [&] {
    ComposeRequest req;
    req.question_class = parse_class_expr(a.question_class);
    req.answer_class = a.answer_class;
    req.max_len = a.max_len;
    req.max_multiplicity = a.max_multiplicity;
    req.validate();
    Registry r = open_registry(a.registry);
    ComposeResult res = compose(r, req);
    detail::write_output(a.out, to_json(res).dump(2) + "\n");
    io.out << res.pipelines.size() << "\n";
    return res.pipelines.empty() ? kDomainFailure : kOk;
  });
}

struct RunArgs {
  std::string registry;
  std::string pipeline;
  std::string question;
  std::string focus = std::string(kDefaultFocus);
  std::optional<int> timeout_ms;
  std::string out;
};

// --timeout, else SELFWIRE_TIMEOUT_MS, else the executor default.
inline int effective_timeout(const std::optional<int>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SELFWIRE_TIMEOUT_MS"); env && *env) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(env, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != std::string_view(env).size() || v <= 0) {
      throw Error(std::string("SELFWIRE_TIMEOUT_MS must be a positive integer, got '") + env + "'");
    }
    return v;
  }
  return kDefaultTimeoutMs;
}

inline int cmd_run(const RunArgs& a, Streams io) {
  return detail::guarded(io, [&] {
    int timeout = effective_timeout(a.timeout_ms);
    Iri focus(a.focus);
    std::vector<std::string> witness = detail::split_ids(a.pipeline);
    if (witness.empty()) throw InvalidPipeline("--pipeline names no modules");
    Registry r = open_registry(a.registry);
    RunResult res = run_pipeline(r, witness, {}, a.question, timeout, focus);
    detail::write_output(a.out, to_json(res).dump(2) + "\n");
    detail::write_output(a.out + ".nt", serialize_ntriples(res.final_message.graph()));
    if (res.ok) {
      io.out << "ok\n";
      return kOk;
    }
    const RunFailure& f = *res.failure;
    io.out << to_string(f.kind) << "\n";
    io.err << to_string(f.kind);
    if (f.step) io.err << " at step " << f.step;
    io.err << ": " << f.cause << "\n";
    return f.transport ? kIo : kDomainFailure;
  });
}

struct ServeArgs {
  std::string file;
  int port = 0;
};

inline int cmd_registry_serve(const ServeArgs& a, Streams io) {
  return detail::guarded(io, [&] {
    RegistryService service(load_registry(a.file), std::filesystem::path(a.file));
    service.bind("127.0.0.1", a.port);
    return detail::serve_until_signal(
        io, service.address(), [&] { service.start(); }, [&] { service.stop(); });
  });
}

inline int cmd_mock_serve(const ServeArgs& a, Streams io) {
  return detail::guarded(io, [&] {
    MockServer server(load_mock_config(a.file));
    server.bind("127.0.0.1", a.port);
    return detail::serve_until_signal(
        io, server.origin(), [&] { server.start(); }, [&] { server.stop(); });
  });
}

inline int main(int argc, const char* const* argv, Streams io = {std::cout, std::cerr}) {
  CLI::App app{"Self-wiring question answering pipelines over an EL module registry", "selfwire"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  auto* reason = app.add_subcommand("reason", "Query the reasoner");
  reason->require_subcommand(1);
  auto* subsume = reason->add_subcommand("subsume", "Print whether --sub is subsumed by --sup");
  ReasonArgs ra;
  subsume->add_option("--ontology", ra.ontology, "Ontology file")->required();
  subsume->add_option("--sub", ra.sub, "Subclass expression")->required();
  subsume->add_option("--sup", ra.sup, "Superclass expression")->required();

  auto* comp = app.add_subcommand("compose", "Enumerate complete pipelines");
  ComposeArgs ca;
  comp->add_option("--registry", ca.registry, "Registry file or registry service URL")->required();
  comp->add_option("--question-class", ca.question_class, "Class expression of the question");
  comp->add_option("--answer-class", ca.answer_class, "IRI of the answer class");
  comp->add_option("--max-len", ca.max_len, "Maximum pipeline length")->check(CLI::PositiveNumber);
  comp->add_option("--max-multiplicity", ca.max_multiplicity, "Maximum uses of one module")
      ->check(CLI::PositiveNumber);
  comp->add_option("--out", ca.out, "Output JSON file")->required();

  auto* run = app.add_subcommand("run", "Execute one pipeline against its modules");
  RunArgs rn;
  run->add_option("--registry", rn.registry, "Registry file or registry service URL")->required();
  run->add_option("--pipeline", rn.pipeline, "Comma-separated module ids in execution order")->required();
  run->add_option("--question", rn.question, "Question text")->required();
  run->add_option("--focus", rn.focus, "IRI of the question resource");
  run->add_option("--timeout", rn.timeout_ms, "Per-step timeout in ms (default: $SELFWIRE_TIMEOUT_MS or 10000)")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", rn.out, "Output JSON file; the final message goes to <out>.nt")->required();

  auto* reg = app.add_subcommand("registry", "Registry service");
  reg->require_subcommand(1);
  auto* reg_serve = reg->add_subcommand("serve", "Serve a registry file over HTTP until interrupted");
  ServeArgs rs{"", 8780};
  reg_serve->add_option("--file", rs.file, "Registry file, updated on mutation")->required();
  reg_serve->add_option("--port", rs.port, "TCP port, 0 for any free port")->check(CLI::Range(0, 65535));

  auto* mock = app.add_subcommand("mock", "Mock QA modules");
  mock->require_subcommand(1);
  auto* mock_serve = mock->add_subcommand("serve", "Serve mock modules until interrupted");
  ServeArgs ms{"", 8790};
  mock_serve->add_option("--config", ms.file, "Mock config file")->required();
  mock_serve->add_option("--port", ms.port, "TCP port, 0 for any free port")->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, io.out, io.err);
    return code == static_cast<int>(CLI::ExitCodes::Success) ? kOk : kUsage;
  }

  if (*subsume) return cmd_reason(ra, io);
  if (*comp) return cmd_compose(ca, io);
  if (*run) return cmd_run(rn, io);
  if (*reg_serve) return cmd_registry_serve(rs, io);
  if (*mock_serve) return cmd_mock_serve(ms, io);
  return kUsage;
}

}  // namespace selfwire::cli

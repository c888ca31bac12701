#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace selfwire {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax error in a class expression or ontology document. offset is a byte
// offset into the text handed to the parser.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), message_(what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }
  // Diagnostic without the offset suffix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t offset_;
};

class InconsistentOntology : public Error {
 public:
  using Error::Error;
};

// Invalid registry document or descriptor. path names the offending field,
// e.g. "modules[2].input[0]"; empty when the problem is not tied to one.
class RegistryError : public Error {
 public:
  RegistryError(const std::string& what, std::string path = {})
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Transport failure talking to a registry or module service, or a file that
// cannot be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace selfwire

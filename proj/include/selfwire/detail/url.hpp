#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace selfwire::detail {

// http(s)://host[:port][/path]. No userinfo, query or fragment.
struct HttpUrl {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;  // "" or starting with '/'

  std::string origin() const {
    std::string h = host.find(':') == std::string::npos ? host : "[" + host + "]";
    return scheme + "://" + h + ":" + std::to_string(port);
  }
};

inline std::optional<HttpUrl> parse_http_url(std::string_view url) {
  HttpUrl out;
  std::size_t rest;
  if (url.substr(0, 7) == "http://") {
    out.scheme = "http";
    out.port = 80;
    rest = 7;
  } else if (url.substr(0, 8) == "https://") {
    out.scheme = "https";
    out.port = 443;
    rest = 8;
  } else {
    return std::nullopt;
  }
  std::size_t slash = url.find('/', rest);
  std::string_view authority = url.substr(rest, slash == std::string_view::npos ? url.npos : slash - rest);
  out.path = slash == std::string_view::npos ? "" : std::string(url.substr(slash));
  if (authority.empty() || authority.find('@') != std::string_view::npos) return std::nullopt;
  if (out.path.find_first_of("?# ") != std::string::npos) return std::nullopt;

  std::size_t colon = authority.rfind(':');
  bool bracketed = authority.front() == '[';
  if (colon != std::string_view::npos && (!bracketed || authority[colon - 1] == ']')) {
    std::string_view digits = authority.substr(colon + 1);
    if (digits.empty() || digits.size() > 5) return std::nullopt;
    int port = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') return std::nullopt;
      port = port * 10 + (c - '0');
    }
    if (port == 0 || port > 65535) return std::nullopt;
    out.port = port;
    authority = authority.substr(0, colon);
  }
  if (bracketed) {
    if (authority.size() < 3 || authority.back() != ']') return std::nullopt;
    authority = authority.substr(1, authority.size() - 2);
  }
  for (char c : authority) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
              c == '-' || (bracketed && c == ':');
    if (!ok) return std::nullopt;
  }
  if (authority.empty()) return std::nullopt;
  out.host = std::string(authority);
  return out;
}

// RFC 3986 percent-encoding: everything but unreserved characters.
inline std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    bool unreserved = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '-' || c == '.' || c == '_' || c == '~';
    if (unreserved) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

}  // namespace selfwire::detail

#pragma once

#include <string>

#include <httplib.h>

#include "selfwire/error.hpp"

namespace selfwire::detail {

// SO_REUSEADDR only; httplib's defaults add SO_REUSEPORT.
inline void exclusive_socket_options(socket_t sock) {
  int yes = 1;
  setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
}

// Port 0 picks a free port. Returns the bound port; throws IoError.
inline int bind_server(httplib::Server& server, const std::string& host, int port) {
  server.set_socket_options(exclusive_socket_options);
  int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

}  // namespace selfwire::detail

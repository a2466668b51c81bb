#ifndef UAML_TOOLS_SERVER_HPP_
#define UAML_TOOLS_SERVER_HPP_

#include <filesystem>
#include <memory>
#include <string>

#include "uaml/service.hpp"

namespace uaml::cli {

// HTTP binding of service::Session.  Static files under ui_dir are served at
// "/"; a placeholder page is served when the directory has no index.html.
class ApiServer {
 public:
  ApiServer(const service::Session& session, std::filesystem::path ui_dir);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds host:port (port 0 picks a free port).  Returns the bound port or
  // -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace uaml::cli

#endif  // UAML_TOOLS_SERVER_HPP_

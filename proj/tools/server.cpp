#include "server.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace uaml::cli {

namespace {

constexpr const char* kPlaceholder =
    "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>uaml</title></head>\n"
    "<body><h1>uaml inference service</h1>\n"
    "<p>No UI bundle is installed. Endpoints: GET /api/model, POST /api/infer, "
    "GET /api/scenario/rows.</p></body></html>\n";

}  // namespace

struct ApiServer::Impl {
  const service::Session& session;
  std::filesystem::path ui_dir;
  httplib::Server server;

  Impl(const service::Session& s, std::filesystem::path dir)
      : session(s), ui_dir(std::move(dir)) {}
};

ApiServer::ApiServer(const service::Session& session, std::filesystem::path ui_dir)
    : impl_(std::make_unique<Impl>(session, std::move(ui_dir))) {
  auto& srv = impl_->server;
  const service::Session& s = impl_->session;
  auto reply = [](httplib::Response& res, const service::ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  srv.Get("/api/model", [&s, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, s.get_model());
  });
  srv.Get("/api/scenario/rows", [&s, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, s.get_scenario_rows());
  });
  srv.Post("/api/infer", [&s, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, s.post_infer(req.body));
  });

  const auto index = impl_->ui_dir / "index.html";
  if (!impl_->ui_dir.empty() && std::filesystem::exists(index)) {
    srv.set_mount_point("/", impl_->ui_dir.string());
  } else {
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholder, "text/html");
    });
  }
  srv.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info("{} {} -> {}", req.method, req.path, res.status);
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen() { return impl_->server.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace uaml::cli

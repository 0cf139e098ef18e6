#include "http_server.hpp"

#include <httplib.h>

#include "pcr/service.hpp"

namespace pcr {
namespace {

constexpr const char* kJson = "application/json; charset=utf-8";

void respond(const RecommendService* service, const httplib::Request& req, httplib::Response& res) {
  const auto reply = handle_api(service, req.method, req.path, req.body);
  res.status = reply.status;
  res.set_content(reply.body.dump(), kJson);
}

}  // namespace

void mount_api(httplib::Server& server, const RecommendService* service,
               const std::optional<std::filesystem::path>& ui_dir) {
  auto handler = [service](const httplib::Request& req, httplib::Response& res) {
    respond(service, req, res);
  };
  server.Get(R"(/api/v1/.*)", handler);
  server.Post(R"(/api/v1/.*)", handler);
  if (ui_dir) server.set_mount_point("/ui", ui_dir->string());
}

}  // namespace pcr

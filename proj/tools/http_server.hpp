#pragma once

#include <filesystem>
#include <optional>

namespace httplib {
class Server;
}

namespace pcr {

class RecommendService;

// Routes /api/v1/* to handle_api and, when `ui_dir` is given, serves it as
// static files under /ui. `service` must outlive the server.
void mount_api(httplib::Server& server, const RecommendService* service,
               const std::optional<std::filesystem::path>& ui_dir = std::nullopt);

}  // namespace pcr

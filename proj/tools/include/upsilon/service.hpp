#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "upsilon/error.hpp"
#include "upsilon/project.hpp"

namespace httplib {
class Server;
}

namespace upsilon {

// Transport-neutral request: the HTTP server and the tests both go through
// Service::handle.
struct ApiRequest {
  std::string method;
  std::string path;
  std::multimap<std::string, std::string> query;
  std::string body;
  std::string content_type;
  std::map<std::string, std::string> parts;  // multipart fields and files
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

int http_status(ErrorCode code);
nlohmann::json error_json(const Error& e);

// Writers are admitted strictly in arrival order.
class FifoMutex {
 public:
  void lock();
  void unlock();

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::uint64_t next_ = 0;
  std::uint64_t serving_ = 0;
};

class Service {
 public:
  explicit Service(const std::filesystem::path& root);
  ~Service();

  ApiResponse handle(const ApiRequest& req);

  // Blocks until stop() is called. Files under static_dir, if given, are
  // served below /ui.
  bool listen(const std::string& host, int port, const std::filesystem::path& static_dir = {});
  // Split form of listen: bind (port 0 picks a free one, returned), then
  // serve.
  int bind(const std::string& host, int port, const std::filesystem::path& static_dir = {});
  bool serve();
  void stop();

 private:
  ApiResponse dispatch(const ApiRequest& req);
  ApiResponse read(const ApiRequest& req);
  ApiResponse write(const ApiRequest& req);

  std::filesystem::path root_;
  Project project_;
  std::shared_mutex state_;
  FifoMutex writers_;
  std::unique_ptr<httplib::Server> server_;
};

// Shared by the CLI and POST /condition: samples or CSV plus mapping.
ObservationSet observations_from_json(const nlohmann::json& j);

}  // namespace upsilon

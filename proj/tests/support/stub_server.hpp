#pragma once

// Scripted local HTTP server for ingest tests. Serves cutouts of a known
// volume at the default OCP path shape and lets a test queue canned
// responses per path to inject faults.

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "connecto/volume.hpp"

namespace httplib {
class Server;
}

namespace connecto::testing {

struct CannedResponse {
  int status = 200;
  std::string body;
};

class StubServer {
 public:
  StubServer();
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  /// "http://127.0.0.1:<port>"
  std::string base() const;
  int port() const { return port_; }

  void serve_volume(Volume3D v);

  /// Responses consumed in order for requests to `path`; once exhausted the
  /// path falls through to the served volume.
  void script(const std::string& path, std::vector<CannedResponse> responses);

  /// Every request to `path` answers with `status`.
  void always(const std::string& path, int status);

  /// Artificial latency per request, to make overlap observable.
  void set_delay(std::chrono::milliseconds d);

  std::size_t hits(const std::string& path) const;
  std::size_t total_hits() const;
  std::size_t max_in_flight() const;

 private:
  void handle(const std::string& path, int& status, std::string& body);

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mu_;
  Volume3D volume_;
  bool have_volume_ = false;
  std::map<std::string, std::vector<CannedResponse>> scripts_;
  std::map<std::string, int> always_;
  std::map<std::string, std::size_t> hits_;
  std::size_t total_ = 0;
  std::size_t in_flight_ = 0;
  std::size_t max_in_flight_ = 0;
  std::chrono::milliseconds delay_{0};
};

/// Path the default template produces for a cutout of token/res/extent with
/// format "raw".
std::string cutout_path(const std::string& token, std::int64_t res, const Extent3D& e);

}  // namespace connecto::testing

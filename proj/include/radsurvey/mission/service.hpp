#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace radsurvey::mission {

/// HTTP JSON API over one mission directory. Mutating requests run one at a
/// time and must carry the state version they were made against; a stale
/// version is answered with 409 and leaves the mission untouched. Reads run
/// concurrently with each other.
class Service {
 public:
  /// Throws Io when the directory holds no readable mission.
  explicit Service(const std::filesystem::path& mission_dir);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// bind_address is "host:port" or just a port.
void serve(const std::filesystem::path& mission_dir, const std::string& bind_address);

}  // namespace radsurvey::mission

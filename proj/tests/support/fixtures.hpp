#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <regex>
#include <stdexcept>

#include "gesture/pose.hpp"

namespace fixtures {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("gesture-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline gesture::PoseFrame random_frame(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> xy(-0.2, 1.2), z(-0.5, 0.5), vis(0.0, 1.0);
  gesture::PoseFrame::Landmarks lms{};
  for (auto& p : lms) p = {xy(rng), xy(rng), z(rng), vis(rng)};
  return gesture::PoseFrame(lms);
}

inline std::string landmarks_text(const gesture::PoseFrame& f, std::size_t count = gesture::kLandmarkCount) {
  std::string out = "[";
  for (std::size_t i = 0; i < count; ++i) {
    const auto& p = f[i % gesture::kLandmarkCount];
    if (i) out += ",";
    out += "[" + std::to_string(p.x) + "," + std::to_string(p.y) + "," + std::to_string(p.z) + "," +
           std::to_string(p.visibility) + "]";
  }
  return out + "]";
}

/// Connects to 127.0.0.1:port, sends `payload`, half-closes and reads until
/// the server closes the connection.
inline std::string tcp_exchange(std::uint16_t port, const std::string& payload) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(fd);
    throw std::runtime_error("connect");
  }
  std::size_t sent = 0;
  while (sent < payload.size()) {
    const auto n = ::send(fd, payload.data() + sent, payload.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) break;
    sent += static_cast<std::size_t>(n);
  }
  ::shutdown(fd, SHUT_WR);
  std::string out;
  char buf[8192];
  for (;;) {
    const auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fd);
  return out;
}

/// Replaces every 16-hex-digit model checksum with a placeholder.
inline std::string mask_checksum(const std::string& text) {
  static const std::regex sum(R"("model":"[0-9a-f]{16}")");
  return std::regex_replace(text, sum, R"("model":"<checksum>")");
}

}  // namespace fixtures

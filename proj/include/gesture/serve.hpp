#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "gesture/dataio.hpp"
#include "gesture/nn.hpp"

namespace gesture {

/// Immutable inference state shared by every connection: the model, its
/// preprocessing flag and the checksum echoed in each prediction.
class Predictor {
 public:
  Predictor(Checkpoint checkpoint, std::string checksum);

  /// Loads a checkpoint and checksums its bytes. Throws CheckpointError.
  static Predictor from_file(const std::filesystem::path& path);

  const std::string& checksum() const noexcept { return checksum_; }
  const Checkpoint& checkpoint() const noexcept { return checkpoint_; }

  /// Applies normalize_frame first when the checkpoint was trained that way.
  Prediction predict(const PoseFrame& frame) const;

  /// One protocol line in, one line out (no trailing newline). Never throws
  /// for bad input; malformed lines yield an error message.
  std::string handle_line(std::string_view line) const;

 private:
  Checkpoint checkpoint_;
  std::string checksum_;
};

/// `{"type":"error","reason":...}`.
std::string error_message(std::string_view reason);

/// Answers every line of `in` on `out`; returns how many lines were errors.
std::size_t serve_stream(const Predictor& predictor, std::istream& in, std::ostream& out);

/// Newline-delimited TCP service. Each connection is handled on its own
/// thread; the predictor must outlive the server.
class TcpServer {
 public:
  /// Binds and listens immediately. Port 0 picks a free port.
  TcpServer(const Predictor& predictor, const std::string& host, std::uint16_t port);
  ~TcpServer();

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }

  /// Accepts connections until stop(); on return every connection has
  /// answered the complete lines it had received and been closed.
  void run();

  /// Async-signal-safe.
  void stop() noexcept;

 private:
  void handle_connection(int fd);

  const Predictor& predictor_;
  int listen_fd_ = -1;
  int wake_pipe_[2] = {-1, -1};
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
};

/// Splits "host:port". Throws std::invalid_argument.
std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint);

}  // namespace gesture

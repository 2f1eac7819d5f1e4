#include "gesture/serve.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <istream>
#include <list>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <system_error>
#include <thread>

#include "gesture/trainer.hpp"

namespace gesture {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string_view wire_reason(RecordError::Fault fault) {
  switch (fault) {
    case RecordError::Fault::arity: return "arity";
    case RecordError::Fault::nonfinite: return "nonfinite";
    default: return "parse";
  }
}

}  // namespace

Predictor::Predictor(Checkpoint checkpoint, std::string checksum)
    : checkpoint_(std::move(checkpoint)), checksum_(std::move(checksum)) {
  if (checkpoint_.model.input_dim() != kFrameWidth) {
    throw CheckpointError(CheckpointError::Kind::dims,
                          "model input width " + std::to_string(checkpoint_.model.input_dim()) +
                              " does not match a 33x4 frame");
  }
  if (checkpoint_.model.output_dim() != kClassCount) {
    throw CheckpointError(CheckpointError::Kind::dims, "model output width does not match the class table");
  }
}

Predictor Predictor::from_file(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const DataError& e) {
    throw CheckpointError(CheckpointError::Kind::io, e.what());
  }
  return Predictor(decode_checkpoint(bytes), model_checksum(bytes));
}

Prediction Predictor::predict(const PoseFrame& frame) const {
  return gesture::predict(checkpoint_.model,
                          checkpoint_.meta.normalize ? normalize_frame(frame) : frame);
}

std::string error_message(std::string_view reason) {
  ordered_json msg;
  msg["type"] = "error";
  msg["reason"] = reason;
  return msg.dump();
}

std::string Predictor::handle_line(std::string_view line) const {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  json msg;
  try {
    msg = parse_json_text(line);
  } catch (const RecordError& e) {
    return error_message(wire_reason(e.fault()));
  }
  if (!msg.is_object() || !msg.contains("type") || msg["type"] != "frame" || !msg.contains("landmarks")) {
    return error_message("parse");
  }
  ordered_json id = nullptr;
  if (msg.contains("id") && !msg["id"].is_null()) {
    if (!msg["id"].is_number_integer()) return error_message("parse");
    id = msg["id"];
  }

  PoseFrame frame;
  try {
    frame = frame_from_json(msg["landmarks"]);
  } catch (const RecordError& e) {
    return error_message(wire_reason(e.fault()));
  }

  Prediction p;
  try {
    p = predict(frame);
  } catch (const std::domain_error&) {
    // Normalizing a skeleton with no torso divides by zero.
    return error_message("nonfinite");
  }

  ordered_json out;
  out["type"] = "prediction";
  out["id"] = id;
  out["gesture"] = class_name(p.gesture);
  ordered_json probs;
  for (auto c : kAllClasses) probs[std::string(class_name(c))] = p.probabilities[index_of(c)];
  out["probs"] = probs;
  out["model"] = checksum_;
  return out.dump();
}

std::size_t serve_stream(const Predictor& predictor, std::istream& in, std::ostream& out) {
  std::size_t errors = 0;
  std::string line;
  while (std::getline(in, line)) {
    const auto reply = predictor.handle_line(line);
    if (reply.starts_with(R"({"type":"error")")) ++errors;
    out << reply << '\n' << std::flush;
  }
  return errors;
}

std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw std::invalid_argument("endpoint must look like host:port, got '" + std::string(endpoint) + "'");
  }
  const auto port_text = endpoint.substr(colon + 1);
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || value > 65535) {
    throw std::invalid_argument("invalid port '" + std::string(port_text) + "'");
  }
  return {std::string(endpoint.substr(0, colon)), static_cast<std::uint16_t>(value)};
}

// ---------------------------------------------------------------------------
// TCP

namespace {

std::system_error sys_error(const std::string& what) {
  return std::system_error(errno, std::generic_category(), what);
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

TcpServer::TcpServer(const Predictor& predictor, const std::string& host, std::uint16_t port)
    : predictor_(predictor) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE | AI_NUMERICSERV;
  addrinfo* found = nullptr;
  const auto port_text = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), port_text.c_str(), &hints, &found); rc != 0) {
    throw std::runtime_error("cannot resolve '" + host + "': " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, &::freeaddrinfo);

  int last_errno = 0;
  for (auto* ai = found; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) {
      last_errno = errno;
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      listen_fd_ = fd;
      break;
    }
    last_errno = errno;
    ::close(fd);
  }
  if (listen_fd_ < 0) {
    errno = last_errno;
    throw sys_error("cannot bind " + host + ":" + port_text);
  }

  sockaddr_storage bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port
                                            : reinterpret_cast<sockaddr_in*>(&bound)->sin_port);

  if (::pipe2(wake_pipe_, O_CLOEXEC | O_NONBLOCK) != 0) {
    ::close(listen_fd_);
    throw sys_error("pipe");
  }
}

TcpServer::~TcpServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
  for (int fd : wake_pipe_) {
    if (fd >= 0) ::close(fd);
  }
}

void TcpServer::stop() noexcept {
  stopping_.store(true);
  const char byte = 1;
  [[maybe_unused]] const auto n = ::write(wake_pipe_[1], &byte, 1);
}

void TcpServer::run() {
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::list<Worker> workers;

  while (!stopping_.load()) {
    pollfd fds[2] = {{listen_fd_, POLLIN, 0}, {wake_pipe_[0], POLLIN, 0}};
    if (::poll(fds, 2, -1) < 0) {
      if (errno == EINTR) continue;
      throw sys_error("poll");
    }
    if (fds[1].revents) break;
    if (!(fds[0].revents & POLLIN)) continue;

    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;

    workers.remove_if([](Worker& w) {
      if (!w.done->load()) return false;
      w.thread.join();
      return true;
    });
    auto done = std::make_shared<std::atomic<bool>>(false);
    workers.push_back({std::thread([this, fd, done] {
                         handle_connection(fd);
                         done->store(true);
                       }),
                       done});
  }
  stopping_.store(true);
  for (auto& w : workers) w.thread.join();
}

void TcpServer::handle_connection(int fd) {
  std::string pending;
  char buf[8192];

  auto answer_complete_lines = [&]() -> bool {
    std::size_t start = 0;
    std::string replies;
    for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n', start)) {
      replies += predictor_.handle_line(std::string_view(pending).substr(start, nl - start));
      replies += '\n';
      start = nl + 1;
    }
    pending.erase(0, start);
    return replies.empty() || send_all(fd, replies);
  };

  bool open = true;
  while (open) {
    if (stopping_.load()) {
      // Drain whatever already arrived, then close.
      for (;;) {
        const auto n = ::recv(fd, buf, sizeof buf, MSG_DONTWAIT);
        if (n <= 0) break;
        pending.append(buf, static_cast<std::size_t>(n));
      }
      answer_complete_lines();
      break;
    }
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (ready < 0 && errno != EINTR) break;
    if (ready <= 0) continue;

    const auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) {
      // Peer closed: a trailing unterminated line still gets its answer.
      if (!pending.empty()) pending += '\n';
      open = false;
    } else {
      pending.append(buf, static_cast<std::size_t>(n));
    }
    if (!answer_complete_lines()) break;
  }
  ::close(fd);
}

}  // namespace gesture

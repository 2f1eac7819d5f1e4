#include <gtest/gtest.h>

#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "gesture/serve.hpp"
#include "gesture/synth.hpp"
#include "../support/fixtures.hpp"

using namespace gesture;
using nlohmann::json;

namespace {

const std::string kData = GESTURE_TEST_DATA_DIR;

const Predictor& golden_predictor() {
  static const Predictor p = Predictor::from_file(kData + "/model.ckpt");
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string frame_line(const PoseFrame& f, std::optional<int> id) {
  json msg;
  msg["type"] = "frame";
  if (id) msg["id"] = *id;
  msg["landmarks"] = frame_to_json(f);
  return msg.dump();
}

std::string reason_of(const std::string& reply) {
  const auto j = json::parse(reply);
  EXPECT_EQ(j["type"], "error") << reply;
  return j.value("reason", "");
}

// Runs a server on an ephemeral port for the lifetime of the object.
class LiveServer {
 public:
  explicit LiveServer(const Predictor& p) : server_(p, "127.0.0.1", 0), thread_([this] { server_.run(); }) {}
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  std::uint16_t port() const { return server_.port(); }

 private:
  TcpServer server_;
  std::thread thread_;
};

}  // namespace

TEST(Protocol, GoldenTranscript) {
  std::istringstream in(slurp(kData + "/protocol_input.jsonl"));
  std::ostringstream out;
  EXPECT_EQ(serve_stream(golden_predictor(), in, out), 1u);
  EXPECT_EQ(fixtures::mask_checksum(out.str()), slurp(kData + "/protocol_expected.jsonl"));
}

TEST(Protocol, PredictionShape) {
  const auto reply = golden_predictor().handle_line(frame_line(synth::base_skeleton(), 41));
  const auto j = json::parse(reply);
  EXPECT_EQ(j["type"], "prediction");
  EXPECT_EQ(j["id"], 41);
  EXPECT_EQ(j["model"], golden_predictor().checksum());
  ASSERT_EQ(j["probs"].size(), 8u);
  double sum = 0, best = -1;
  std::string best_name;
  for (auto c : kAllClasses) {
    const double p = j["probs"][std::string(class_name(c))];
    sum += p;
    if (p > best) best = p, best_name = class_name(c);
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_EQ(j["gesture"], best_name);
  // Keys come in class order.
  EXPECT_LT(reply.find("\"attention\":"), reply.find("\"static\":"));
}

TEST(Protocol, ErrorReasons) {
  const auto& p = golden_predictor();
  EXPECT_EQ(reason_of(p.handle_line("hello")), "parse");
  EXPECT_EQ(reason_of(p.handle_line("")), "parse");
  EXPECT_EQ(reason_of(p.handle_line(R"({"type":"reset"})")), "parse");
  EXPECT_EQ(reason_of(p.handle_line(R"({"type":"frame","id":"x","landmarks":[]})")), "parse");

  std::mt19937_64 rng(1);
  const auto f = fixtures::random_frame(rng);
  const std::string short_frame =
      R"({"type":"frame","id":1,"landmarks":)" + fixtures::landmarks_text(f, 32) + "}";
  EXPECT_EQ(reason_of(p.handle_line(short_frame)), "arity");

  auto lms = fixtures::landmarks_text(f);
  const auto x0 = lms.find('[', 1) + 1;
  lms.replace(x0, lms.find(',', x0) - x0, "1e999");
  EXPECT_EQ(reason_of(p.handle_line(R"({"type":"frame","id":1,"landmarks":)" + lms + "}")), "nonfinite");
  EXPECT_EQ(error_message("arity"), R"({"type":"error","reason":"arity"})");
}

TEST(Protocol, ZeroFrameIsValidInput) {
  const auto j = json::parse(golden_predictor().handle_line(frame_line(PoseFrame{}, 3)));
  EXPECT_EQ(j["type"], "prediction");
}

TEST(Protocol, NormalizedModelRejectsDegenerateSkeleton) {
  auto c = load_checkpoint(kData + "/model.ckpt");
  c.meta.normalize = true;
  const Predictor p(c, "0000000000000000");
  EXPECT_EQ(reason_of(p.handle_line(frame_line(PoseFrame{}, 1))), "nonfinite");
  EXPECT_EQ(json::parse(p.handle_line(frame_line(synth::base_skeleton(), 1)))["type"], "prediction");
}

TEST(Protocol, CarriageReturnIsIgnored) {
  const auto line = frame_line(synth::base_skeleton(), 2);
  EXPECT_EQ(golden_predictor().handle_line(line + "\r"), golden_predictor().handle_line(line));
}

TEST(Protocol, RejectsModelsOfTheWrongShape) {
  const Checkpoint small{MlpModel(std::vector<std::size_t>{10, 8}), {}};
  EXPECT_THROW(Predictor(small, "x"), CheckpointError);
}

TEST(Endpoint, Parses) {
  EXPECT_EQ(parse_endpoint("127.0.0.1:0"), (std::pair<std::string, std::uint16_t>{"127.0.0.1", 0}));
  EXPECT_EQ(parse_endpoint("::1:8080").second, 8080);
  EXPECT_THROW(parse_endpoint("localhost"), std::invalid_argument);
  EXPECT_THROW(parse_endpoint("host:99999"), std::invalid_argument);
  EXPECT_THROW(parse_endpoint("host:12ab"), std::invalid_argument);
}

TEST(Tcp, PipelinedFramesAnswerInOrder) {
  LiveServer server(golden_predictor());
  ASSERT_NE(server.port(), 0);
  synth::SynthConfig c;
  c.subjects = 2;
  c.samples_per_class_per_subject = 3;
  c.distances = {1.0, 4.0};
  const auto ds = synth::generate(c);
  std::string payload;
  for (int i = 0; i < 100; ++i) payload += frame_line(ds.samples.at(static_cast<std::size_t>(i) % ds.size()).frame, 1000 + i) + "\n";
  const auto reply = fixtures::tcp_exchange(server.port(), payload);
  std::istringstream lines(reply);
  std::string line;
  int i = 0;
  while (std::getline(lines, line)) {
    const auto j = json::parse(line);
    EXPECT_EQ(j["type"], "prediction");
    EXPECT_EQ(j["id"], 1000 + i);
    ++i;
  }
  EXPECT_EQ(i, 100);
}

TEST(Tcp, MatchesStdio) {
  const auto input = slurp(kData + "/protocol_input.jsonl");
  std::istringstream in(input);
  std::ostringstream out;
  serve_stream(golden_predictor(), in, out);
  LiveServer server(golden_predictor());
  EXPECT_EQ(fixtures::tcp_exchange(server.port(), input), out.str());
}

TEST(Tcp, ConcurrentClientsAreIndependent) {
  LiveServer server(golden_predictor());
  const auto input = slurp(kData + "/protocol_input.jsonl");
  std::vector<std::string> replies(4);
  std::vector<std::thread> clients;
  for (std::size_t k = 0; k < replies.size(); ++k) {
    clients.emplace_back([&, k] { replies[k] = fixtures::tcp_exchange(server.port(), input); });
  }
  for (auto& t : clients) t.join();
  for (const auto& r : replies) EXPECT_EQ(r, replies[0]);
  EXPECT_EQ(std::count(replies[0].begin(), replies[0].end(), '\n'), 11);
}

TEST(Tcp, UnterminatedLastLineStillAnswered) {
  LiveServer server(golden_predictor());
  const auto reply = fixtures::tcp_exchange(server.port(), frame_line(synth::base_skeleton(), 5));
  EXPECT_EQ(json::parse(reply)["id"], 5);
}

TEST(Tcp, StopReturnsWithIdleConnection) {
  TcpServer server(golden_predictor(), "127.0.0.1", 0);
  std::thread runner([&] { server.run(); });
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(server.port());
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  const auto line = frame_line(synth::base_skeleton(), 9) + "\n";
  ::send(fd, line.data(), line.size(), MSG_NOSIGNAL);
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  server.stop();
  runner.join();
  std::string got;
  char buf[4096];
  for (;;) {
    const auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    got.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fd);
  EXPECT_EQ(json::parse(got.substr(0, got.find('\n')))["id"], 9);
}

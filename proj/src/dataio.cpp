#include "gesture/dataio.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gesture {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string describe(RecordError::Fault fault, std::size_t line, const std::string& detail) {
  std::string out = "record";
  if (line > 0) out += " on line " + std::to_string(line);
  out += " (" + std::string(fault_name(fault)) + "): " + detail;
  return out;
}

}  // namespace

RecordError::RecordError(Fault fault, std::size_t line, const std::string& detail)
    : DataError(describe(fault, line, detail)), fault_(fault), line_(line), detail_(detail) {}

std::string_view fault_name(RecordError::Fault fault) noexcept {
  switch (fault) {
    case RecordError::Fault::parse: return "parse";
    case RecordError::Fault::arity: return "arity";
    case RecordError::Fault::nonfinite: return "nonfinite";
    case RecordError::Fault::label: return "label";
    case RecordError::Fault::range: return "range";
  }
  return "parse";
}

PoseFrame frame_from_json(const json& landmarks, std::size_t line) {
  using Fault = RecordError::Fault;
  if (!landmarks.is_array()) throw RecordError(Fault::parse, line, "landmarks must be an array");
  if (landmarks.size() != kLandmarkCount) {
    throw RecordError(Fault::arity, line,
                      "expected 33 landmarks, got " + std::to_string(landmarks.size()));
  }
  PoseFrame::Landmarks ls;
  for (std::size_t k = 0; k < kLandmarkCount; ++k) {
    const auto& entry = landmarks[k];
    if (!entry.is_array()) {
      throw RecordError(Fault::parse, line, "landmark " + std::to_string(k) + " is not an array");
    }
    if (entry.size() != kChannels) {
      throw RecordError(Fault::arity, line,
                        "landmark " + std::to_string(k) + " has " + std::to_string(entry.size()) +
                            " values, expected 4");
    }
    std::array<double, kChannels> v{};
    for (std::size_t c = 0; c < kChannels; ++c) {
      if (!entry[c].is_number()) {
        throw RecordError(Fault::parse, line, "landmark " + std::to_string(k) + " has a non-number");
      }
      v[c] = entry[c].get<double>();
    }
    ls[k] = Landmark{v[0], v[1], v[2], v[3]};
  }
  try {
    return PoseFrame(ls);
  } catch (const InvalidPose& e) {
    const auto fault =
        e.fault() == InvalidPose::Fault::nonfinite ? Fault::nonfinite : Fault::range;
    throw RecordError(fault, line, e.what());
  }
}

ordered_json frame_to_json(const PoseFrame& frame) {
  ordered_json out = ordered_json::array();
  for (const auto& l : frame.landmarks()) out.push_back({l.x, l.y, l.z, l.visibility});
  return out;
}

std::string format_record(const Sample& sample) {
  ordered_json rec;
  rec["subject"] = sample.subject;
  rec["label"] = class_name(sample.label);
  rec["distance_m"] = sample.distance_m;
  rec["landmarks"] = frame_to_json(sample.frame);
  return rec.dump();
}

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw RecordError(RecordError::Fault::parse, 0, e.what());
  } catch (const json::out_of_range& e) {
    // 406: a number literal that overflows a double.
    if (e.id == 406) throw RecordError(RecordError::Fault::nonfinite, 0, e.what());
    throw RecordError(RecordError::Fault::parse, 0, e.what());
  }
}

Sample parse_record(std::string_view line, std::size_t line_number) {
  using Fault = RecordError::Fault;
  json rec;
  try {
    rec = parse_json_text(line);
  } catch (const RecordError& e) {
    throw RecordError(e.fault(), line_number, e.detail());
  }
  if (!rec.is_object()) throw RecordError(Fault::parse, line_number, "record is not an object");

  for (const char* key : {"subject", "label", "distance_m", "landmarks"}) {
    if (!rec.contains(key)) {
      throw RecordError(Fault::parse, line_number, std::string("missing field '") + key + "'");
    }
  }
  if (!rec["subject"].is_string()) throw RecordError(Fault::parse, line_number, "subject must be a string");
  if (!rec["label"].is_string()) throw RecordError(Fault::parse, line_number, "label must be a string");
  if (!rec["distance_m"].is_number()) {
    throw RecordError(Fault::parse, line_number, "distance_m must be a number");
  }

  Sample s;
  s.subject = rec["subject"].get<std::string>();
  const auto label_text = rec["label"].get<std::string>();
  const auto label = parse_class(label_text);
  if (!label) throw RecordError(Fault::label, line_number, "unknown label '" + label_text + "'");
  s.label = *label;
  s.distance_m = rec["distance_m"].get<double>();
  if (!std::isfinite(s.distance_m)) {
    throw RecordError(Fault::nonfinite, line_number, "distance_m is not finite");
  }
  if (s.distance_m <= 0.0) throw RecordError(Fault::range, line_number, "distance_m must be positive");

  s.frame = frame_from_json(rec["landmarks"], line_number);
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("error reading '" + path.string() + "'");
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw DataError("error writing '" + path.string() + "'");
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  Dataset ds;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ds.samples.push_back(parse_record(line, number));
  }
  if (in.bad()) throw DataError("error reading dataset '" + path.string() + "'");
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::string text;
  for (const auto& s : ds.samples) {
    text += format_record(s);
    text += '\n';
  }
  write_file(path, text);
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string encode_doubles(std::span<const double> values) {
  std::string bytes(values.size() * sizeof(double), '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (std::size_t b = 0; b < 8; ++b) {
      bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
  }
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<double> decode_doubles(std::string_view text) {
  using Kind = CheckpointError::Kind;
  if (text.size() % 4 != 0) throw CheckpointError(Kind::corrupt, "payload length is not a multiple of 4");
  std::size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;

  std::string bytes(3 * text.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(bytes.data()),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw CheckpointError(Kind::corrupt, "payload is not valid base64");
  const std::size_t len = static_cast<std::size_t>(n) - padding;
  if (len % sizeof(double) != 0) throw CheckpointError(Kind::corrupt, "payload is not a whole number of reals");

  std::vector<double> out(len / sizeof(double));
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  ckpt.model.check_consistent();
  ordered_json doc;
  doc["format"] = "gesture-mlp";
  doc["version"] = kCheckpointVersion;
  doc["dims"] = ckpt.model.dims();
  ordered_json classes = ordered_json::array();
  for (auto c : kAllClasses) classes.push_back(class_name(c));
  doc["classes"] = classes;

  const auto& m = ckpt.meta;
  ordered_json meta;
  meta["seed"] = m.seed;
  meta["epochs_run"] = m.epochs_run;
  meta["best_epoch"] = m.best_epoch;
  meta["final_train_loss"] = m.final_train_loss;
  meta["final_heldout_loss"] = m.final_heldout_loss;
  meta["held_out_subject"] = m.held_out_subject;
  meta["normalize"] = m.normalize;
  doc["metadata"] = meta;

  ordered_json layers = ordered_json::array();
  for (const auto& l : ckpt.model.layers()) {
    ordered_json entry;
    entry["weights"] = encode_doubles({l.weights.data(), static_cast<std::size_t>(l.weights.size())});
    entry["bias"] = encode_doubles({l.bias.data(), static_cast<std::size_t>(l.bias.size())});
    layers.push_back(entry);
  }
  doc["layers"] = layers;
  return doc.dump(2) + "\n";
}

Checkpoint decode_checkpoint(std::string_view text) {
  using Kind = CheckpointError::Kind;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CheckpointError(Kind::corrupt, e.what());
  }

  try {
    if (!doc.is_object() || doc.value("format", "") != "gesture-mlp") {
      throw CheckpointError(Kind::corrupt, "not a gesture model checkpoint");
    }
    if (!doc.contains("version")) throw CheckpointError(Kind::corrupt, "missing version");
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError(Kind::version, "unsupported version " + std::to_string(version) +
                                               " (expected " + std::to_string(kCheckpointVersion) + ")");
    }

    const auto& classes = doc.at("classes");
    if (!classes.is_array() || classes.size() != kClassCount) {
      throw CheckpointError(Kind::classes, "class table must list exactly 8 classes");
    }
    for (std::size_t i = 0; i < kClassCount; ++i) {
      if (classes[i].get<std::string>() != class_name(class_from_index(i))) {
        throw CheckpointError(Kind::classes, "class table entry " + std::to_string(i) + " is '" +
                                                 classes[i].get<std::string>() + "', expected '" +
                                                 std::string(class_name(class_from_index(i))) + "'");
      }
    }

    const auto dims = doc.at("dims").get<std::vector<std::size_t>>();
    const auto& layers = doc.at("layers");
    if (dims.size() < 2 || layers.size() + 1 != dims.size()) {
      throw CheckpointError(Kind::dims, "dims and layer list disagree");
    }
    if (dims.back() != kClassCount) {
      throw CheckpointError(Kind::dims, "output width " + std::to_string(dims.back()) +
                                            " does not match the class table");
    }

    std::vector<DenseLayer> built;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto w = decode_doubles(layers[i].at("weights").get<std::string>());
      const auto b = decode_doubles(layers[i].at("bias").get<std::string>());
      DenseLayer layer(dims[i], dims[i + 1]);
      if (w.size() != static_cast<std::size_t>(layer.weights.size()) ||
          b.size() != static_cast<std::size_t>(layer.bias.size())) {
        throw CheckpointError(Kind::corrupt, "layer " + std::to_string(i) + " payload has the wrong size");
      }
      std::copy(w.begin(), w.end(), layer.weights.data());
      std::copy(b.begin(), b.end(), layer.bias.data());
      built.push_back(std::move(layer));
    }

    const auto& meta = doc.at("metadata");
    TrainingMetadata m;
    m.seed = meta.at("seed").get<std::uint64_t>();
    m.epochs_run = meta.at("epochs_run").get<std::size_t>();
    m.best_epoch = meta.at("best_epoch").get<std::size_t>();
    m.final_train_loss = meta.at("final_train_loss").get<double>();
    m.final_heldout_loss = meta.at("final_heldout_loss").get<double>();
    m.held_out_subject = meta.at("held_out_subject").get<std::string>();
    m.normalize = meta.at("normalize").get<bool>();

    try {
      return Checkpoint{MlpModel(std::move(built)), m};
    } catch (const DimensionError& e) {
      throw CheckpointError(Kind::dims, e.what());
    }
  } catch (const json::exception& e) {
    throw CheckpointError(Kind::corrupt, e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw CheckpointError(CheckpointError::Kind::io, e.what());
  }
  return decode_checkpoint(text);
}

std::string model_checksum(std::string_view bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < 8; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0x0f];
  }
  return out;
}

}  // namespace gesture

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "densehar/errors.hpp"
#include "densehar/tensor.hpp"

namespace densehar {

// Binary model container, little-endian throughout:
//   magic "DENSEHAR" | u32 version | u32 kind | u64 json_len | config json
//   | u64 n_tensors | per tensor: u32 rank, u64 dims..., f64 payload
//   | u32 crc32 of everything after the magic.
enum class ModelKind : std::uint32_t { UNet = 1, WindowedCnn = 2, Fcn = 3, Knn = 4 };

inline const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::UNet: return "unet";
    case ModelKind::WindowedCnn: return "cnn";
    case ModelKind::Fcn: return "fcn";
    case ModelKind::Knn: return "knn";
  }
  return "unknown";
}

namespace detail {

inline constexpr std::array<char, 8> kModelMagic = {'D', 'E', 'N', 'S', 'E', 'H', 'A', 'R'};
inline constexpr std::uint32_t kModelVersion = 1;

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t n,
                           std::uint32_t crc = 0xFFFFFFFFu) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  for (std::size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc;
}

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t n) : data_(data), size_(n) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > size_) throw FormatError("model file truncated");
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace detail

struct ModelContainer {
  ModelKind kind;
  nlohmann::json config;
  std::vector<Tensor> tensors;
};

inline void save_model_container(const std::string& path, const ModelContainer& model) {
  detail::ByteWriter body;
  body.u32(detail::kModelVersion);
  body.u32(static_cast<std::uint32_t>(model.kind));
  const std::string config = model.config.dump();
  body.u64(config.size());
  body.raw(config.data(), config.size());
  body.u64(model.tensors.size());
  for (const Tensor& t : model.tensors) {
    body.u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape) body.u64(d);
    for (double v : t.data) body.f64(v);
  }
  const std::uint32_t crc = detail::crc32(body.bytes().data(), body.bytes().size()) ^ 0xFFFFFFFFu;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write model file '" + path + "'");
  out.write(detail::kModelMagic.data(), detail::kModelMagic.size());
  out.write(reinterpret_cast<const char*>(body.bytes().data()),
            static_cast<std::streamsize>(body.bytes().size()));
  detail::ByteWriter tail;
  tail.u32(crc);
  out.write(reinterpret_cast<const char*>(tail.bytes().data()), 4);
  if (!out) throw FormatError("short write to model file '" + path + "'");
}

inline ModelContainer load_model_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < detail::kModelMagic.size() + 4) {
    throw FormatError("model file '" + path + "' truncated");
  }
  if (std::memcmp(bytes.data(), detail::kModelMagic.data(), detail::kModelMagic.size()) != 0) {
    throw FormatError("model file '" + path + "' has wrong magic bytes");
  }
  const std::size_t body_size = bytes.size() - detail::kModelMagic.size() - 4;
  const std::uint8_t* body = bytes.data() + detail::kModelMagic.size();
  detail::ByteReader tail(body + body_size, 4);
  const std::uint32_t stored_crc = tail.u32();
  const std::uint32_t crc = detail::crc32(body, body_size) ^ 0xFFFFFFFFu;
  if (crc != stored_crc) throw FormatError("model file '" + path + "' failed checksum");

  detail::ByteReader reader(body, body_size);
  ModelContainer model;
  const std::uint32_t version = reader.u32();
  if (version != detail::kModelVersion) {
    throw FormatError("model file version " + std::to_string(version) + ", expected " +
                      std::to_string(detail::kModelVersion));
  }
  const std::uint32_t kind = reader.u32();
  if (kind < 1 || kind > 4) throw FormatError("unknown model kind tag " + std::to_string(kind));
  model.kind = static_cast<ModelKind>(kind);
  const std::uint64_t json_len = reader.u64();
  const std::string config_text = reader.str(json_len);
  model.config = nlohmann::json::parse(config_text, nullptr, false);
  if (model.config.is_discarded()) {
    throw FormatError("model file '" + path + "' carries malformed config json");
  }
  const std::uint64_t n_tensors = reader.u64();
  for (std::uint64_t i = 0; i < n_tensors; ++i) {
    const std::uint32_t rank = reader.u32();
    if (rank > 8) throw FormatError("model tensor rank " + std::to_string(rank) + " out of range");
    std::vector<std::size_t> shape(rank);
    std::size_t volume = 1;
    for (auto& d : shape) {
      d = reader.u64();
      if (d == 0 || d > (1ull << 32)) throw FormatError("model tensor extent out of range");
      volume *= d;
    }
    if (volume * 8 > reader.remaining()) throw FormatError("model file truncated");
    std::vector<double> data(volume);
    for (auto& v : data) v = reader.f64();
    model.tensors.emplace_back(std::move(shape), std::move(data));
  }
  if (reader.remaining() != 0) {
    throw FormatError("model file '" + path + "' has trailing bytes");
  }
  return model;
}

}  // namespace densehar

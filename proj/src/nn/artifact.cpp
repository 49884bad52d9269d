#include "cardnet/nn/artifact.hpp"

#include <bit>
#include <cstring>

#include "cardnet/error.hpp"
#include "../io.hpp"

namespace cardnet::nn {

namespace {

constexpr char kMagic[8] = {'C', 'A', 'R', 'D', 'N', 'E', 'T', 'M'};

static_assert(std::endian::native == std::endian::little, "artifact I/O assumes a little-endian host");

void put_string(std::vector<std::uint8_t>& out, std::string_view s) {
  detail::put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::string_view name) : bytes_(bytes), name_(name) {}

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError(std::string(name_) + ": truncated model artifact");
  }
  std::uint32_t u32() {
    need(4);
    auto v = detail::get_u32(&bytes_[pos_]);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    auto v = detail::get_u64(&bytes_[pos_]);
    pos_ += 8;
    return v;
  }
  std::string str() {
    auto n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(&bytes_[pos_]), n);
    pos_ += n;
    return s;
  }
  void floats(std::vector<float>& out, std::size_t n) {
    if (n > bytes_.size() / 4) throw FormatError(std::string(name_) + ": tensor larger than file");
    need(n * 4);
    out.resize(n);
    std::memcpy(out.data(), &bytes_[pos_], n * 4);
    pos_ += n * 4;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::string_view name_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> Artifact::serialize() const {
  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  detail::put_u32(out, kArtifactVersion);
  put_string(out, kind);
  put_string(out, config.dump());
  detail::put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_string(out, t.name);
    detail::put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) detail::put_u64(out, d);
    const auto* p = reinterpret_cast<const std::uint8_t*>(t.data.data());
    out.insert(out.end(), p, p + t.data.size() * sizeof(float));
  }
  return out;
}

Artifact Artifact::deserialize(std::span<const std::uint8_t> bytes, std::string_view name) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw FormatError(std::string(name) + ": not a model artifact");
  Reader r(bytes.subspan(8), name);
  const auto version = r.u32();
  if (version != kArtifactVersion)
    throw FormatError(std::string(name) + ": unsupported artifact version " + std::to_string(version));
  Artifact a;
  a.kind = r.str();
  try {
    a.config = nlohmann::json::parse(r.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string(name) + ": bad config snapshot: " + e.what());
  }
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t;
    t.name = r.str();
    const auto rank = r.u32();
    if (rank > 8) throw FormatError(std::string(name) + ": tensor rank too large");
    std::uint64_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      t.shape.push_back(r.u64());
      total *= t.shape.back();
    }
    r.floats(t.data, static_cast<std::size_t>(total));
    a.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw FormatError(std::string(name) + ": trailing bytes in model artifact");
  return a;
}

void Artifact::save(const std::filesystem::path& path) const { detail::write_bytes(path, serialize()); }

Artifact Artifact::load(const std::filesystem::path& path) {
  return deserialize(detail::read_bytes(path), path.string());
}

void Artifact::expect_kind(std::string_view expected) const {
  if (kind != expected)
    throw FormatError("model artifact is of kind '" + kind + "', expected '" + std::string(expected) + "'");
}

const Tensor& Artifact::tensor(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw FormatError("model artifact has no tensor '" + std::string(name) + "'");
}

template <class T>
void Artifact::store(std::span<Param<T>* const> params) {
  for (const auto* p : params) {
    Tensor t;
    t.name = p->name;
    t.shape.assign(p->shape.begin(), p->shape.end());
    t.data.assign(p->value.begin(), p->value.end());
    tensors.push_back(std::move(t));
  }
}

template <class T>
void Artifact::restore(std::span<Param<T>* const> params) const {
  for (auto* p : params) {
    const auto& t = tensor(p->name);
    if (!std::equal(t.shape.begin(), t.shape.end(), p->shape.begin(), p->shape.end()))
      throw FormatError("tensor '" + p->name + "' has a shape that does not match the config");
    std::copy(t.data.begin(), t.data.end(), p->value.begin());
  }
}

template void Artifact::store<float>(std::span<Param<float>* const>);
template void Artifact::store<double>(std::span<Param<double>* const>);
template void Artifact::restore<float>(std::span<Param<float>* const>) const;
template void Artifact::restore<double>(std::span<Param<double>* const>) const;

}  // namespace cardnet::nn

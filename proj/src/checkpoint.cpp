#include "monsoon/checkpoint.hpp"

#include <cstring>

#include "monsoon/errors.hpp"
#include "monsoon/util.hpp"

namespace monsoon {

namespace {

constexpr char kMagic[4] = {'M', 'N', 'C', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t read_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

std::uint64_t read_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

void append_f64_le(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  append_u64(out, bits);  // append_u64 is byte-order independent
}

double read_f64_le(const char* p) {
  std::uint64_t bits = read_u64(p);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void save_checkpoint(const std::vector<NamedTensor>& params, const nlohmann::json& config,
                     const std::string& path) {
  nlohmann::json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["config"] = config;
  auto& plist = manifest["params"] = nlohmann::json::array();
  for (const auto& p : params) {
    plist.push_back(nlohmann::json{{"name", p.name},
                                   {"shape", p.value.shape()},
                                   {"dtype", "f64"},
                                   {"count", p.value.size()}});
  }
  const std::string mtext = manifest.dump();

  std::string out;
  out.append(kMagic, 4);
  append_u32(out, kFormatVersion);
  append_u64(out, mtext.size());
  out += mtext;
  for (const auto& p : params)
    for (std::int64_t i = 0; i < p.value.size(); ++i) append_f64_le(out, p.value[i]);
  write_file_atomic(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string data = read_text_file(path);
  if (data.size() < 16 || std::memcmp(data.data(), kMagic, 4) != 0)
    raise(ErrorCode::CorruptCheckpoint, "bad magic in " + path);
  const std::uint32_t version = read_u32(data.data() + 4);
  if (version != kFormatVersion)
    raise(ErrorCode::VersionMismatch,
          "checkpoint format version " + std::to_string(version) + ", expected " +
              std::to_string(kFormatVersion));
  const std::uint64_t mlen = read_u64(data.data() + 8);
  if (16 + mlen > data.size()) raise(ErrorCode::CorruptCheckpoint, "truncated manifest in " + path);

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(data.substr(16, mlen));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::CorruptCheckpoint, std::string("unreadable manifest: ") + e.what());
  }

  Checkpoint ckpt;
  ckpt.config = manifest.value("config", nlohmann::json::object());
  std::size_t offset = 16 + mlen;
  for (const auto& entry : manifest.at("params")) {
    if (entry.at("dtype").get<std::string>() != "f64")
      raise(ErrorCode::VersionMismatch, "unsupported dtype in checkpoint");
    const auto shape = entry.at("shape").get<std::vector<int>>();
    const auto count = entry.at("count").get<std::int64_t>();
    if (shape_size(shape) != count)
      raise(ErrorCode::CorruptCheckpoint, "manifest shape/count disagreement");
    if (offset + static_cast<std::size_t>(count) * 8 > data.size())
      raise(ErrorCode::CorruptCheckpoint, "buffer extends past end of file");
    Tensor t(shape);
    for (std::int64_t i = 0; i < count; ++i)
      t[i] = read_f64_le(data.data() + offset + static_cast<std::size_t>(i) * 8);
    offset += static_cast<std::size_t>(count) * 8;
    ckpt.params.push_back(NamedTensor{entry.at("name").get<std::string>(), std::move(t)});
  }
  if (offset != data.size())
    raise(ErrorCode::CorruptCheckpoint, "trailing bytes after parameter buffers");
  return ckpt;
}

void load_into(std::vector<NamedTensor>& dst, const Checkpoint& checkpoint) {
  if (dst.size() != checkpoint.params.size())
    raise(ErrorCode::VersionMismatch, "parameter count mismatch: model has " +
                                          std::to_string(dst.size()) + ", checkpoint has " +
                                          std::to_string(checkpoint.params.size()));
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const auto& src = checkpoint.params[i];
    if (dst[i].name != src.name || !dst[i].value.same_shape(src.value))
      raise(ErrorCode::VersionMismatch, "parameter '" + dst[i].name +
                                            "' does not match checkpoint entry '" + src.name + "'");
    dst[i].value = src.value;
  }
}

}  // namespace monsoon

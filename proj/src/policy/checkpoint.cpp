#include "policy/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <fmt/format.h>

#include "common/errors.hpp"
#include "common/io.hpp"

namespace dpa::policy {
namespace {

constexpr std::string_view kMagic = "DPAGCKPT";

static_assert(std::endian::native == std::endian::little, "checkpoint codec assumes little endian");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) fail(ErrorCode::kIo, "truncated checkpoint");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) fail(ErrorCode::kIo, "truncated checkpoint");
    const std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const PolicyParams& params, std::size_t num_slots) {
  std::string out(kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(num_slots));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(kNumHeads));
  for (HeadId id : kAllHeads) {
    const Matrix& m = params.head(id);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(role_of(id)));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(id));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) put<double>(out, v);
  }
  return out;
}

PolicyParams decode_checkpoint(std::string_view bytes, std::size_t* num_slots) {
  Reader in(bytes);
  if (in.take(kMagic.size()) != kMagic) fail(ErrorCode::kIo, "not a checkpoint (bad magic)");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) fail(ErrorCode::kIo, fmt::format("unsupported checkpoint version {}", version));
  const auto slots = in.get<std::uint32_t>();
  const auto heads = in.get<std::uint32_t>();
  if (heads != kNumHeads) fail(ErrorCode::kIo, fmt::format("checkpoint has {} heads, expected {}", heads, kNumHeads));
  PolicyParams params = zero_params(slots);
  for (std::uint32_t h = 0; h < heads; ++h) {
    const auto role = in.get<std::uint8_t>();
    const auto id = in.get<std::uint8_t>();
    if (id >= kNumHeads) fail(ErrorCode::kIo, "checkpoint head id out of range");
    const auto head_id = static_cast<HeadId>(id);
    if (role != static_cast<std::uint8_t>(role_of(head_id))) fail(ErrorCode::kIo, "checkpoint role tag mismatch");
    const auto rows = in.get<std::uint32_t>();
    const auto cols = in.get<std::uint32_t>();
    Matrix& m = params.head(head_id);
    if (rows != m.rows() || cols != m.cols()) {
      fail(ErrorCode::kIo, fmt::format("checkpoint {} head is {}x{}, schema expects {}x{}", to_string(head_id), rows,
                                       cols, m.rows(), m.cols()));
    }
    for (double& v : m.data()) v = in.get<double>();
  }
  if (!in.done()) fail(ErrorCode::kIo, "trailing bytes after checkpoint");
  if (!params.all_finite()) fail(ErrorCode::kNumeric, "checkpoint contains non-finite weights");
  if (num_slots != nullptr) *num_slots = slots;
  return params;
}

std::string checkpoint_text(const PolicyParams& params) {
  std::string out;
  for (HeadId id : kAllHeads) {
    const Matrix& m = params.head(id);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) out += fmt::format("{} {} {} {:.17g}\n", to_string(id), r, c, m(r, c));
    }
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params, std::size_t num_slots) {
  write_file_atomic(path, encode_checkpoint(params, num_slots));
}

PolicyParams load_checkpoint(const std::filesystem::path& path, std::size_t* num_slots) {
  return decode_checkpoint(read_file(path), num_slots);
}

}  // namespace dpa::policy

/**
 * Copyright 2026 The fedsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedsim/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fedsim/errors.hpp"
#include "fedsim/random.hpp"

namespace fedsim {

namespace {

constexpr unsigned char kMagic[4] = {'M', 'F', 'C', 'K'};

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  template <typename T>
  void integer(T value) {
    auto u = static_cast<std::make_unsigned_t<T>>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<unsigned char>((u >> (8 * i)) & 0xff));
  }
  void real(double value) { integer(std::bit_cast<std::uint64_t>(value)); }
  std::vector<unsigned char> take() { return std::move(out_); }
  const std::vector<unsigned char>& data() const { return out_; }

 private:
  std::vector<unsigned char> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> in) : in_(in) {}

  std::span<const unsigned char> bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  T integer() {
    need(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  double real() { return std::bit_cast<double>(integer<std::uint64_t>()); }
  /// Element count that must fit in the remaining bytes at `unit` bytes each.
  std::size_t count(std::size_t unit) {
    const auto n = integer<std::uint64_t>();
    if (unit != 0 && n > remaining() / unit) throw FormatError("checkpoint: truncated (count " + std::to_string(n) + ")");
    return static_cast<std::size_t>(n);
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("checkpoint: truncated");
  }
  std::span<const unsigned char> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> encode_checkpoint(const FLContext& ctx, std::uint64_t config_digest) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.integer<std::uint16_t>(kCheckpointVersion);
  w.integer<std::uint64_t>(config_digest);
  w.integer<std::uint64_t>(ctx.seed);
  w.integer<std::int64_t>(ctx.round);
  w.integer<std::uint32_t>(static_cast<std::uint32_t>(ctx.global_params.shape().size()));
  for (const auto& s : ctx.global_params.shape()) {
    w.integer<std::int64_t>(s.rows);
    w.integer<std::int64_t>(s.cols);
  }
  const auto& values = ctx.global_params.values();
  w.integer<std::uint64_t>(static_cast<std::uint64_t>(values.size()));
  for (Index i = 0; i < values.size(); ++i) w.real(values[i]);
  w.integer<std::uint64_t>(ctx.history.size());
  for (const auto& r : ctx.history) {
    w.integer<std::int64_t>(r.round);
    w.integer<std::uint64_t>(r.selected_ids.size());
    for (ClientId id : r.selected_ids) w.integer<std::int32_t>(id);
    w.real(r.global_metrics.accuracy);
    w.real(r.global_metrics.loss);
    w.integer<std::int64_t>(r.global_metrics.sample_count);
    w.integer<std::int64_t>(r.bytes_up);
    w.integer<std::int64_t>(r.bytes_down);
    w.real(r.wall_time);
  }
  w.integer<std::uint64_t>(fnv1a64(w.data().data(), w.data().size()));
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const unsigned char> bytes) {
  Reader r(bytes);
  const auto magic = r.bytes(sizeof kMagic);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw FormatError("checkpoint: bad magic");
  const auto version = r.integer<std::uint16_t>();
  if (version != kCheckpointVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));

  Checkpoint cp;
  cp.config_digest = r.integer<std::uint64_t>();
  auto& ctx = cp.context;
  ctx.seed = r.integer<std::uint64_t>();
  ctx.round = r.integer<std::int64_t>();
  const auto layers = r.integer<std::uint32_t>();
  if (layers > r.remaining() / 16) throw FormatError("checkpoint: truncated layer table");
  std::vector<LayerShape> shape(layers);
  for (auto& s : shape) {
    s.rows = r.integer<std::int64_t>();
    s.cols = r.integer<std::int64_t>();
  }
  const auto n = r.count(8);
  Eigen::VectorXd values(static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) values[static_cast<Index>(i)] = r.real();
  try {
    ctx.global_params = ParamVector(std::move(values), std::move(shape));
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint: invalid parameters: ") + e.what());
  }
  const auto records = r.count(8);
  ctx.history.resize(records);
  for (auto& rec : ctx.history) {
    rec.round = r.integer<std::int64_t>();
    const auto ids = r.count(4);
    rec.selected_ids.resize(ids);
    for (auto& id : rec.selected_ids) id = r.integer<std::int32_t>();
    rec.global_metrics.accuracy = r.real();
    rec.global_metrics.loss = r.real();
    rec.global_metrics.sample_count = r.integer<std::int64_t>();
    rec.bytes_up = r.integer<std::int64_t>();
    rec.bytes_down = r.integer<std::int64_t>();
    rec.wall_time = r.real();
  }
  const std::size_t body = r.position();
  const auto checksum = r.integer<std::uint64_t>();
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes");
  if (checksum != fnv1a64(bytes.data(), body)) throw FormatError("checkpoint: checksum mismatch");
  if (static_cast<std::int64_t>(ctx.history.size()) != ctx.round) {
    throw FormatError("checkpoint: history length differs from round counter");
  }
  return cp;
}

void save_checkpoint(const std::filesystem::path& path, const FLContext& ctx, std::uint64_t config_digest) {
  const auto bytes = encode_checkpoint(ctx, config_digest);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes);
}

FLContext resume_checkpoint(const std::filesystem::path& path, std::uint64_t expected_digest) {
  auto cp = load_checkpoint(path);
  if (cp.config_digest != expected_digest) {
    std::ostringstream msg;
    msg << "checkpoint " << path.string() << " was written by config digest " << std::hex << cp.config_digest
        << ", current config digest is " << expected_digest;
    throw DigestMismatchError(msg.str());
  }
  return std::move(cp.context);
}

}  // namespace fedsim

// Copyright 2026 the truce-ts authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "truce/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::train {

namespace {

constexpr const char* kMagic = "truce-checkpoint";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  explicit Reader(const std::string& b) : b_(b) {}
  std::string line() {
    const std::size_t end = b_.find('\n', pos_);
    if (end == std::string::npos) throw SchemaError("checkpoint: truncated header");
    std::string s = b_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return s;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw SchemaError("checkpoint: truncated tensor data");
  }
  const std::string& b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  const std::string manifest = c.manifest.dump(2);
  std::string out = std::string(kMagic) + " " + std::to_string(kCheckpointFormat) + "\n" +
                    std::to_string(manifest.size()) + "\n" + manifest + "\n";
  put_u32(out, static_cast<std::uint32_t>(c.params.size()));
  for (const auto& [name, t] : c.params) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (num::real v : t.storage()) put_f32(out, static_cast<float>(v));
  }
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  std::istringstream head(r.line());
  std::string magic;
  int version = -1;
  head >> magic >> version;
  if (magic != kMagic) throw SchemaError("not a checkpoint file");
  if (version != kCheckpointFormat)
    throw SchemaError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointFormat) + ")");
  Checkpoint c;
  try {
    const std::size_t len = std::stoul(r.line());
    c.manifest = nlohmann::json::parse(r.bytes(len));
    if (r.bytes(1) != "\n") throw SchemaError("checkpoint: malformed manifest");
  } catch (const std::logic_error& e) {  // stoul and json parse errors
    throw SchemaError(std::string("checkpoint manifest: ") + e.what());
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::string name = r.bytes(r.u32());
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 4) throw SchemaError("checkpoint: tensor " + name + " has rank " + std::to_string(rank));
    num::Shape shape;
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<int>(r.u32()));
      n *= static_cast<std::uint32_t>(shape.back());
      if (n > bytes.size()) throw SchemaError("checkpoint: tensor " + name + " larger than the file");
    }
    num::Tensor t(shape);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<num::real>(r.f32());
    c.params.emplace(name, std::move(t));
  }
  if (!r.done()) throw SchemaError("checkpoint: trailing bytes");
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const std::string bytes = serialize_checkpoint(c);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace truce::inline TRUCE_PRECISION::train

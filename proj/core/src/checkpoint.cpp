#include "sflab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <unordered_map>

namespace sflab::nn {

namespace {

constexpr char kMagic[8] = {'S', 'F', 'L', 'A', 'B', 'C', 'K', 'P'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error("checkpoint: truncated file");
  return v;
}

std::string get_string(std::istream& in) {
  const std::uint32_t n = get_u32(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw Error("checkpoint: truncated string");
  return s;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("checkpoint: cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(checkpoint.metadata.size()));
  for (const auto& [k, v] : checkpoint.metadata) {
    put_string(out, k);
    put_string(out, v);
  }
  put_u32(out, static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const auto& t : checkpoint.tensors) {
    put_string(out, t.name);
    put_u32(out, static_cast<std::uint32_t>(t.value.rows()));
    put_u32(out, static_cast<std::uint32_t>(t.value.cols()));
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) {
        const double v = t.value(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    }
  }
  if (!out) throw Error("checkpoint: write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error("checkpoint: bad magic in " + path.string());
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion) throw Error("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint cp;
  const std::uint32_t n_meta = get_u32(in);
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = get_string(in);
    cp.metadata[k] = get_string(in);
  }
  const std::uint32_t n = get_u32(in);
  cp.tensors.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    CheckpointTensor t;
    t.name = get_string(in);
    const std::uint32_t rows = get_u32(in);
    const std::uint32_t cols = get_u32(in);
    t.value.resize(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) {
        double v = 0.0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        t.value(r, c) = v;
      }
    }
    if (!in) throw Error("checkpoint: truncated tensor " + t.name);
    cp.tensors.push_back(std::move(t));
  }
  return cp;
}

Checkpoint make_checkpoint(std::span<const Parameter* const> params, std::map<std::string, std::string> metadata) {
  Checkpoint cp;
  cp.metadata = std::move(metadata);
  cp.tensors.reserve(params.size());
  for (const Parameter* p : params) cp.tensors.push_back({p->name, p->value});
  return cp;
}

void restore_checkpoint(const Checkpoint& checkpoint, std::span<Parameter* const> params) {
  std::unordered_map<std::string, const CheckpointTensor*> by_name;
  for (const auto& t : checkpoint.tensors) by_name[t.name] = &t;
  if (by_name.size() != params.size()) {
    throw Error("checkpoint: tensor count " + std::to_string(by_name.size()) + " does not match model (" +
                std::to_string(params.size()) + ")");
  }
  for (Parameter* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw Error("checkpoint: missing tensor " + p->name);
    const Matrix& v = it->second->value;
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols()) {
      throw DimensionError("checkpoint: shape mismatch for " + p->name);
    }
    p->value = v;
  }
}

}  // namespace sflab::nn

#include "mpqa/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <unordered_set>

namespace mpqa {

namespace {

constexpr char kMagic[8] = {'M', 'P', 'Q', 'A', 'C', 'K', 'P', '1'};

void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw CheckpointError("checkpoint truncated");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw CheckpointError("checkpoint truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  const uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointEntries& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open for writing: " + path);
  out.write(kMagic, 8);
  put_u64(out, entries.size());
  for (const auto& [name, m] : entries) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<uint32_t>(m.rows()));
    put_u32(out, static_cast<uint32_t>(m.cols()));
    for (size_t i = 0; i < m.size(); ++i) put_f64(out, m[i]);
  }
  if (!out) throw CheckpointError("write failed: " + path);
}

CheckpointEntries load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw CheckpointError("not a checkpoint file: " + path);
  }
  const uint64_t count = get_u64(in);
  CheckpointEntries entries;
  entries.reserve(count);
  for (uint64_t e = 0; e < count; ++e) {
    const uint32_t name_len = get_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw CheckpointError("checkpoint truncated");
    const uint32_t rows = get_u32(in);
    const uint32_t cols = get_u32(in);
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    for (size_t i = 0; i < m.size(); ++i) m[i] = get_f64(in);
    entries.emplace_back(std::move(name), std::move(m));
  }
  return entries;
}

void save_params(const std::string& path, const ParameterStore& store) {
  CheckpointEntries entries;
  entries.reserve(store.count());
  for (const auto& name : store.names()) entries.emplace_back(name, store.get(name).value);
  save_checkpoint(path, entries);
}

void load_params(const std::string& path, ParameterStore& store) {
  CheckpointEntries entries = load_checkpoint(path);
  std::unordered_set<std::string> seen;
  for (auto& [name, m] : entries) {
    if (!store.contains(name)) throw CheckpointError("unknown parameter in checkpoint: " + name);
    Parameter& p = store.get(name);
    if (!p.value.same_shape(m)) {
      throw CheckpointError("shape mismatch for " + name + ": store " + p.value.shape_str() +
                            " vs file " + m.shape_str());
    }
    p.value = std::move(m);
    seen.insert(name);
  }
  for (const auto& name : store.names()) {
    if (!seen.count(name)) throw CheckpointError("parameter missing from checkpoint: " + name);
  }
}

}  // namespace mpqa

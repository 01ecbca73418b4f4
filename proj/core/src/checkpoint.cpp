#include "kgicu/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "kgicu/errors.hpp"

namespace kgicu {

namespace {

constexpr char kMagic[8] = {'K', 'G', 'C', 'K', 'P', 'T', '1', '\n'};

void put_u64(std::ostream& out, uint64_t value) {
  char bytes[8];
  for (int i = 0; i < 8; ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw DataError("checkpoint: truncated file");
  uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= static_cast<uint64_t>(bytes[i]) << (8 * i);
  return value;
}

void put_f64(std::ostream& out, double value) {
  put_u64(out, std::bit_cast<uint64_t>(value));
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const uint64_t size = get_u64(in);
  std::string s(size, '\0');
  in.read(s.data(), static_cast<std::streamsize>(size));
  if (!in) throw DataError("checkpoint: truncated string");
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& config_text,
                     const ParameterSet& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  put_string(out, config_text);
  put_u64(out, params.size());
  for (const auto& [param_path, tensor] : params) {
    put_string(out, param_path);
    put_u64(out, tensor.rows());
    put_u64(out, tensor.cols());
    for (double v : tensor.values()) put_f64(out, v);
  }
  if (!out) throw DataError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("checkpoint: " + path + " is not a checkpoint file");
  Checkpoint ckpt;
  ckpt.config_text = get_string(in);
  const uint64_t count = get_u64(in);
  for (uint64_t i = 0; i < count; ++i) {
    const std::string param_path = get_string(in);
    const uint64_t rows = get_u64(in);
    const uint64_t cols = get_u64(in);
    std::vector<double> values(rows * cols);
    for (double& v : values) v = get_f64(in);
    ckpt.params.add(param_path, Tensor(rows, cols, std::move(values)));
  }
  return ckpt;
}

}  // namespace kgicu

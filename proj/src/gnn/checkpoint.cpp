#include "explore/gnn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace explore::gnn {

namespace {

constexpr char kMagic[8] = {'X', 'G', 'N', 'N', 'C', 'K', 'P', 'T'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(os, bits);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated stream");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("checkpoint: truncated stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  const std::uint64_t bits = get_u64(is);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void save_checkpoint(const PolicyParameters& params, std::ostream& os) {
  os.write(kMagic, 8);
  put_u32(os, static_cast<std::uint32_t>(params.version));
  put_u32(os, params.kind == LayerKind::GCN ? 0u : 1u);
  put_u32(os, static_cast<std::uint32_t>(params.hidden));
  put_u32(os, static_cast<std::uint32_t>(params.propagation_steps));
  put_u32(os, static_cast<std::uint32_t>(params.tensors.size()));
  for (const auto& [name, tensor] : params.tensors) {
    put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, 2);
    put_u64(os, static_cast<std::uint64_t>(tensor.rows()));
    put_u64(os, static_cast<std::uint64_t>(tensor.cols()));
    for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.cols(); ++c) put_f64(os, tensor(r, c));
    }
  }
  if (!os) throw std::runtime_error("checkpoint: write failed");
}

PolicyParameters load_checkpoint(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  PolicyParameters p;
  p.version = static_cast<int>(get_u32(is));
  if (p.version != 1) throw std::runtime_error("checkpoint: unsupported version");
  const std::uint32_t kind = get_u32(is);
  if (kind > 1) throw std::runtime_error("checkpoint: unknown layer kind");
  p.kind = kind == 0 ? LayerKind::GCN : LayerKind::GGNN;
  p.hidden = static_cast<int>(get_u32(is));
  p.propagation_steps = static_cast<int>(get_u32(is));
  const std::uint32_t count = get_u32(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = get_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw std::runtime_error("checkpoint: truncated stream");
    const std::uint32_t ndim = get_u32(is);
    if (ndim != 2) throw std::runtime_error("checkpoint: tensors must be 2-d");
    const auto rows = static_cast<Eigen::Index>(get_u64(is));
    const auto cols = static_cast<Eigen::Index>(get_u64(is));
    if (rows < 0 || cols < 0 || rows * cols > (1ll << 30)) {
      throw std::runtime_error("checkpoint: implausible tensor shape");
    }
    Eigen::MatrixXd tensor(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) tensor(r, c) = get_f64(is);
    }
    p.tensors[name] = std::move(tensor);
  }
  return p;
}

void save_checkpoint_file(const PolicyParameters& params, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
  save_checkpoint(params, os);
}

PolicyParameters load_checkpoint_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  return load_checkpoint(is);
}

}  // namespace explore::gnn

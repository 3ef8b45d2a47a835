#include "cfris/channel_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cfris {
namespace {

constexpr char kMagic[4] = {'C', 'F', 'C', 'H'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("channel fixture: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(std::istream& in) {
  const std::uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void put_matrix(std::ostream& out, const CMat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_f32(out, static_cast<float>(m(r, c).real()));
      put_f32(out, static_cast<float>(m(r, c).imag()));
    }
  }
}

CMat get_matrix(std::istream& in, int rows, int cols) {
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const float re = get_f32(in);
      const float im = get_f32(in);
      m(r, c) = cxd(re, im);
    }
  }
  return m;
}

}  // namespace

void dump_channels(const ChannelSet& set, std::ostream& out) {
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  const int S = set.plan.S;
  const int K = set.num_ues;
  const int rx = S > 0 ? static_cast<int>(set.G[0].rows()) : 0;
  const int qm = S > 0 ? static_cast<int>(set.G[0].cols()) : 0;
  const int nt = (S > 0 && K > 0) ? static_cast<int>(set.H[0][0].cols()) : 0;
  put_u32(out, static_cast<std::uint32_t>(S));
  put_u32(out, static_cast<std::uint32_t>(K));
  put_u32(out, static_cast<std::uint32_t>(rx));
  put_u32(out, static_cast<std::uint32_t>(qm));
  put_u32(out, static_cast<std::uint32_t>(nt));
  for (int slot = 0; slot < S; ++slot) put_matrix(out, set.G[slot]);
  for (int slot = 0; slot < S; ++slot) {
    for (int k = 0; k < K; ++k) put_matrix(out, set.H[slot][k]);
  }
  for (int slot = 0; slot < S; ++slot) {
    for (int k = 0; k < K; ++k) put_matrix(out, set.R[slot][k]);
  }
  if (!out) throw std::runtime_error("channel fixture: write failed");
}

void dump_channels(const ChannelSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  dump_channels(set, out);
}

ChannelSet load_channels(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("channel fixture: bad magic");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw std::runtime_error("channel fixture: unsupported version " + std::to_string(version));
  }
  const int S = static_cast<int>(get_u32(in));
  const int K = static_cast<int>(get_u32(in));
  const int rx = static_cast<int>(get_u32(in));
  const int qm = static_cast<int>(get_u32(in));
  const int nt = static_cast<int>(get_u32(in));
  if (S < 2 || S % 2 != 0) throw std::runtime_error("channel fixture: invalid subcarrier count");
  ChannelSet set;
  set.plan = SubcarrierPlan{S};
  set.num_ues = K;
  set.G.resize(S);
  set.H.assign(S, std::vector<CMat>(K));
  set.R.assign(S, std::vector<CMat>(K));
  for (int slot = 0; slot < S; ++slot) set.G[slot] = get_matrix(in, rx, qm);
  for (int slot = 0; slot < S; ++slot) {
    for (int k = 0; k < K; ++k) set.H[slot][k] = get_matrix(in, qm, nt);
  }
  for (int slot = 0; slot < S; ++slot) {
    for (int k = 0; k < K; ++k) set.R[slot][k] = get_matrix(in, rx, nt);
  }
  return set;
}

ChannelSet load_channels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return load_channels(in);
}

}  // namespace cfris

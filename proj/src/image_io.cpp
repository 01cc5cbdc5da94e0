#include "latentdem/forward.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>

namespace latentdem {
namespace {

constexpr std::array<char, 7> kMagic{'L', 'D', 'E', 'M', 'F', '3', '2'};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for reading");
  return f;
}

void put_u32_le(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

std::uint32_t get_u32_le(std::istream& is, const std::string& path) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw Error("'" + path + "': truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

// PGM header tokens may be separated by whitespace and '#' comments.
std::string pgm_token(std::istream& is) {
  std::string tok;
  int c;
  while ((c = is.get()) != EOF) {
    if (c == '#') {
      while ((c = is.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

void write_pgm(const std::string& path, const Image& x) {
  auto f = open_out(path);
  f << "P5\n" << x.cols << " " << x.rows << "\n255\n";
  std::vector<unsigned char> buf(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = std::clamp(x.pixels[i], 0.0, 1.0);
    buf[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!f) throw Error("write failed: '" + path + "'");
}

Image read_pgm(const std::string& path) {
  auto f = open_in(path);
  if (pgm_token(f) != "P5") throw Error("'" + path + "': not a binary PGM (P5)");
  int cols = 0, rows = 0, maxval = 0;
  try {
    cols = std::stoi(pgm_token(f));
    rows = std::stoi(pgm_token(f));
    maxval = std::stoi(pgm_token(f));
  } catch (const std::exception&) {
    throw Error("'" + path + "': malformed PGM header");
  }
  if (rows <= 0 || cols <= 0 || maxval <= 0 || maxval > 255) throw Error("'" + path + "': unsupported PGM");
  std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
  if (!f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw Error("'" + path + "': truncated PGM data");
  }
  Image out(rows, cols);
  for (std::size_t i = 0; i < buf.size(); ++i) out.pixels[static_cast<Eigen::Index>(i)] = buf[i] / double(maxval);
  return out;
}

void write_ldemf32(const std::string& path, const Image& x) {
  auto f = open_out(path);
  f.write(kMagic.data(), kMagic.size());
  put_u32_le(f, static_cast<std::uint32_t>(x.rows));
  put_u32_le(f, static_cast<std::uint32_t>(x.cols));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(x.pixels[i]));
    put_u32_le(f, bits);
  }
  if (!f) throw Error("write failed: '" + path + "'");
}

Image read_ldemf32(const std::string& path) {
  auto f = open_in(path);
  std::array<char, 7> magic{};
  if (!f.read(magic.data(), magic.size()) || magic != kMagic) throw Error("'" + path + "': bad LDEMF32 magic");
  const std::uint32_t rows = get_u32_le(f, path);
  const std::uint32_t cols = get_u32_le(f, path);
  if (rows == 0 || cols == 0 || rows > (1u << 15) || cols > (1u << 15)) {
    throw Error("'" + path + "': implausible LDEMF32 dimensions");
  }
  Image out(static_cast<int>(rows), static_cast<int>(cols));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.pixels[i] = std::bit_cast<float>(get_u32_le(f, path));
  }
  return out;
}

Image read_image(const std::string& path) {
  std::array<char, 7> head{};
  {
    auto f = open_in(path);
    f.read(head.data(), head.size());
  }
  if (head == kMagic) return read_ldemf32(path);
  if (head[0] == 'P' && head[1] == '5') return read_pgm(path);
  throw Error("'" + path + "': unrecognized image format");
}

void write_kernel(const std::string& path, const Kernel& k) {
  auto f = open_out(path);
  f << k.size << "\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int i = 0; i < k.size; ++i) {
    for (int j = 0; j < k.size; ++j) f << (j ? " " : "") << k.at(i, j);
    f << "\n";
  }
  if (!f) throw Error("write failed: '" + path + "'");
}

Kernel read_kernel(const std::string& path) {
  auto f = open_in(path);
  int k = 0;
  if (!(f >> k)) throw Error("'" + path + "': missing kernel size");
  std::vector<double> v(static_cast<std::size_t>(k > 0 ? k * k : 0));
  for (auto& x : v) {
    if (!(f >> x)) throw Error("'" + path + "': expected " + std::to_string(k * k) + " kernel values");
  }
  return Kernel(k, std::move(v));
}

}  // namespace latentdem

#include "latentdem/forward.hpp"

#include "latentdem/simd.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace latentdem {

// ---------------------------------------------------------------------------
// Kernel

Kernel::Kernel(int k) : size(k), values(static_cast<std::size_t>(k) * k, 0.0) {
  if (k < 1 || k % 2 == 0) throw Error("kernel: size must be a positive odd integer, got " + std::to_string(k));
}

Kernel::Kernel(int k, std::vector<double> v) : Kernel(k) {
  if (v.size() != values.size()) throw Error("kernel: expected " + std::to_string(values.size()) + " values");
  values = std::move(v);
}

Kernel Kernel::delta(int k) {
  Kernel out(k);
  out.at(k / 2, k / 2) = 1.0;
  return out;
}

Kernel Kernel::uniform(int k) {
  Kernel out(k);
  for (auto& v : out.values) v = 1.0 / (static_cast<double>(k) * k);
  return out;
}

Kernel Kernel::gaussian(int k, double width) { return gaussian(k, width, width, 0.0); }

Kernel Kernel::gaussian(int k, double width_u, double width_v, double angle) {
  if (!(width_u > 0.0 && width_v > 0.0)) throw Error("kernel: gaussian widths must be positive");
  Kernel out(k);
  const int r = k / 2;
  const double c = std::cos(angle), s = std::sin(angle);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double y = i - r, x = j - r;
      const double u = c * x + s * y, v = -s * x + c * y;
      const double w = std::exp(-0.5 * (u * u / (width_u * width_u) + v * v / (width_v * width_v)));
      out.at(i, j) = w;
      total += w;
    }
  }
  for (auto& v : out.values) v /= total;
  return out;
}

Kernel Kernel::motion(int k, double length, double angle) {
  if (!(length >= 0.0)) throw Error("kernel: motion length must be non-negative");
  Kernel out(k);
  const int r = k / 2;
  const int samples = 64;
  for (int n = 0; n < samples; ++n) {
    const double tpos = (samples == 1 ? 0.0 : (static_cast<double>(n) / (samples - 1) - 0.5)) * length;
    const double x = r + tpos * std::cos(angle);
    const double y = r + tpos * std::sin(angle);
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    const std::array<std::tuple<int, int, double>, 4> taps{{{y0, x0, (1 - fy) * (1 - fx)},
                                                           {y0, x0 + 1, (1 - fy) * fx},
                                                           {y0 + 1, x0, fy * (1 - fx)},
                                                           {y0 + 1, x0 + 1, fy * fx}}};
    for (const auto& [yy, xx, w] : taps) {
      if (yy >= 0 && yy < k && xx >= 0 && xx < k) out.at(yy, xx) += w;
    }
  }
  const double total = out.sum();
  if (total <= 0.0) throw Error("kernel: motion path left the support");
  for (auto& v : out.values) v /= total;
  return out;
}

Kernel Kernel::from_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
  auto num = [&](std::size_t i) {
    try {
      return std::stod(parts.at(i));
    } catch (const std::exception&) {
      throw Error("kernel spec '" + spec + "': bad or missing field " + std::to_string(i));
    }
  };
  if (parts.empty()) throw Error("kernel spec is empty");
  const std::string& kind = parts[0];
  if (kind == "gaussian" && parts.size() == 3) return gaussian(static_cast<int>(num(1)), num(2));
  if (kind == "aniso" && parts.size() == 5) return gaussian(static_cast<int>(num(1)), num(2), num(3), num(4));
  if (kind == "motion" && parts.size() == 4) return motion(static_cast<int>(num(1)), num(2), num(3));
  if (kind == "uniform" && parts.size() == 2) return uniform(static_cast<int>(num(1)));
  if (kind == "delta" && parts.size() == 2) return delta(static_cast<int>(num(1)));
  throw Error("kernel spec '" + spec + "' not understood");
}

double Kernel::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

bool Kernel::is_valid(double tol) const {
  for (double v : values) {
    if (!(v >= 0.0)) return false;
  }
  return std::abs(sum() - 1.0) <= tol;
}

Image Kernel::embed(int rows, int cols) const {
  if (size > rows || size > cols) {
    throw Error("kernel of size " + std::to_string(size) + " does not fit a " + std::to_string(rows) + "x" +
                std::to_string(cols) + " grid");
  }
  Image g(rows, cols);
  const int r = radius();
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      g.at(((i - r) % rows + rows) % rows, ((j - r) % cols + cols) % cols) += at(i, j);
    }
  }
  return g;
}

Kernel Kernel::crop(const Image& grid, int k) {
  Kernel out(k);
  if (k > grid.rows || k > grid.cols) throw Error("kernel crop larger than grid");
  const int r = k / 2;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      out.at(i, j) = grid.at(((i - r) % grid.rows + grid.rows) % grid.rows, ((j - r) % grid.cols + grid.cols) % grid.cols);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pose

double PoseParam::normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

double PoseParam::angular_difference(double a, double b) {
  double d = normalize_angle(a - b);
  if (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
  return d;
}

// ---------------------------------------------------------------------------
// Convolution

namespace {

Image spectral_convolve(const Image& x, const ComplexGrid& spectrum, bool adjoint) {
  ComplexGrid fx = fft2(x);
  ComplexGrid prod(x.rows, x.cols);
  simd::active().spectral_product(simd::as_doubles(fx.data.data()), simd::as_doubles(spectrum.data.data()),
                                  simd::as_doubles(prod.data.data()), fx.data.size(), adjoint);
  return ifft2_real(prod);
}

}  // namespace

Image convolve(const Image& x, const Kernel& k) {
  if (k.size > x.rows || k.size > x.cols) throw Error("convolve: kernel larger than image");
  return spectral_convolve(x, fft2(k.embed(x.rows, x.cols)), false);
}

Image convolve_grid(const Image& a, const Image& b) {
  require_same_shape(a, b, "convolve_grid");
  return spectral_convolve(a, fft2(b), false);
}

Image add_noise(const Image& x, double sigma, RandomStream& rng) {
  if (sigma < 0.0) throw Error("add_noise: sigma must be non-negative");
  if (sigma == 0.0) return x;
  Image out = x;
  for (Eigen::Index i = 0; i < out.size(); ++i) out.pixels[i] += sigma * rng.normal();
  return out;
}

ConvolutionOperator::ConvolutionOperator(Kernel k, int rows, int cols, double sigma)
    : ForwardOperator(sigma), kernel_(std::move(k)), rows_(rows), cols_(cols), spectrum_(fft2(kernel_.embed(rows, cols))) {}

Image ConvolutionOperator::apply(const Image& x) const {
  if (x.rows != rows_ || x.cols != cols_) throw Error("convolution operator: image shape mismatch");
  return spectral_convolve(x, spectrum_, false);
}

Image ConvolutionOperator::adjoint(const Image& y) const {
  if (y.rows != rows_ || y.cols != cols_) throw Error("convolution operator: image shape mismatch");
  return spectral_convolve(y, spectrum_, true);
}

// ---------------------------------------------------------------------------
// Rotation

namespace {

struct Tap {
  Eigen::Index src;
  double weight;
};

// Bilinear taps for each output pixel: out(p) = sum_k w_k x(src_k). The
// source point is R(-angle) (p - c) + c, wrapped periodically.
std::vector<std::array<Tap, 4>> rotation_taps(int n, double angle) {
  const double c = 0.5 * (n - 1);
  const double cs = std::cos(angle), sn = std::sin(angle);
  std::vector<std::array<Tap, 4>> taps(static_cast<std::size_t>(n) * n);
  auto wrap = [n](int v) { return ((v % n) + n) % n; };
  for (int r = 0; r < n; ++r) {
    for (int col = 0; col < n; ++col) {
      const double dx = col - c, dy = r - c;
      const double sx = cs * dx + sn * dy + c;
      const double sy = -sn * dx + cs * dy + c;
      const double fx0 = std::floor(sx), fy0 = std::floor(sy);
      const double fx = sx - fx0, fy = sy - fy0;
      const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
      auto idx = [&](int yy, int xx) { return static_cast<Eigen::Index>(wrap(yy)) * n + wrap(xx); };
      taps[static_cast<std::size_t>(r) * n + col] = {{{idx(y0, x0), (1 - fy) * (1 - fx)},
                                                      {idx(y0, x0 + 1), (1 - fy) * fx},
                                                      {idx(y0 + 1, x0), fy * (1 - fx)},
                                                      {idx(y0 + 1, x0 + 1), fy * fx}}};
    }
  }
  return taps;
}

void require_square(const Image& x) {
  if (x.rows != x.cols) throw Error("view_transform: image must be square");
}

}  // namespace

Image view_transform(const Image& x, const PoseParam& p) {
  require_square(x);
  if (p.angle == 0.0) return x;
  const auto taps = rotation_taps(x.rows, p.angle);
  Image out(x.rows, x.cols);
  for (std::size_t i = 0; i < taps.size(); ++i) {
    double v = 0.0;
    for (const Tap& t : taps[i]) v += t.weight * x.pixels[t.src];
    out.pixels[static_cast<Eigen::Index>(i)] = v;
  }
  return out;
}

Image view_transform_adjoint(const Image& y, const PoseParam& p) {
  require_square(y);
  if (p.angle == 0.0) return y;
  const auto taps = rotation_taps(y.rows, p.angle);
  Image out(y.rows, y.cols);
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double v = y.pixels[static_cast<Eigen::Index>(i)];
    for (const Tap& t : taps[i]) out.pixels[t.src] += t.weight * v;
  }
  return out;
}

}  // namespace latentdem

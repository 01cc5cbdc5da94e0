#include "latentdem/forward.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace latentdem {
namespace {

// FFTW's planner is not thread-safe; execution with new arrays is. Plans are
// built once per (rows, cols, direction) and never destroyed.
fftw_plan plan_for(int rows, int cols, int sign) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard lock(mu);
  auto key = std::make_tuple(rows, cols, sign);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const auto n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  auto* in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  fftw_plan p = fftw_plan_dft_2d(rows, cols, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  if (p == nullptr) throw Error("fft: planner failed");
  cache.emplace(key, p);
  return p;
}

ComplexGrid transform(const ComplexGrid& x, int sign) {
  if (x.rows <= 0 || x.cols <= 0) throw Error("fft: empty grid");
  ComplexGrid in = x;
  ComplexGrid out(x.rows, x.cols);
  fftw_execute_dft(plan_for(x.rows, x.cols, sign), reinterpret_cast<fftw_complex*>(in.data.data()),
                   reinterpret_cast<fftw_complex*>(out.data.data()));
  return out;
}

}  // namespace

ComplexGrid fft2(const ComplexGrid& x) { return transform(x, FFTW_FORWARD); }

ComplexGrid fft2(const Image& x) {
  ComplexGrid g(x.rows, x.cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) g.data[static_cast<std::size_t>(i)] = x.pixels[i];
  return fft2(g);
}

ComplexGrid ifft2(const ComplexGrid& x) {
  ComplexGrid out = transform(x, FFTW_BACKWARD);
  const double scale = 1.0 / (static_cast<double>(x.rows) * x.cols);
  for (auto& v : out.data) v *= scale;
  return out;
}

Image ifft2_real(const ComplexGrid& x) {
  const ComplexGrid g = ifft2(x);
  Image out(x.rows, x.cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.pixels[i] = g.data[static_cast<std::size_t>(i)].real();
  return out;
}

}  // namespace latentdem

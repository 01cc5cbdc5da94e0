#include "latentdem/rng.hpp"

#include <cmath>
#include <numbers>

namespace latentdem {
namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t seed, std::string_view name)
    : key_(mix64(mix64(seed) ^ hash_name(name))) {}

RandomStream RandomStream::substream(std::string_view name) const {
  return RandomStream(mix64(key_ ^ hash_name(name)), 0, 0);
}

std::uint64_t RandomStream::next_word() {
  // Two rounds keep consecutive counters decorrelated across nearby keys.
  const std::uint64_t c = counter_++;
  return mix64(mix64(key_ + c * 0xd1b54a32d192ed03ULL) ^ key_);
}

double RandomStream::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(next_word() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec RandomStream::normal_vector(Eigen::Index n) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

}  // namespace latentdem

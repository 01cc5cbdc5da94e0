#pragma once

#include "latentdem/types.hpp"

#include <cstdint>
#include <string_view>

namespace latentdem {

/// Counter-based random stream. Every output is a pure function of
/// (seed, name, position), so a trajectory can be audited or replayed from
/// the position recorded in its trace.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view name);

  /// Uniform in the open interval (0, 1).
  double uniform();
  /// Standard normal (Box-Muller, cosine branch; two words per draw).
  double normal();
  Vec normal_vector(Eigen::Index n);

  /// Number of 64-bit words consumed so far.
  [[nodiscard]] std::uint64_t position() const { return counter_; }
  [[nodiscard]] std::uint64_t key() const { return key_; }

  /// Derived stream with an independent key.
  [[nodiscard]] RandomStream substream(std::string_view name) const;

 private:
  RandomStream(std::uint64_t key, std::uint64_t, int) : key_(key) {}
  std::uint64_t next_word();

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

std::uint64_t hash_name(std::string_view name);

}  // namespace latentdem

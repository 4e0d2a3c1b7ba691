#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace fkpath {

/// Philox4x32-10 block function (Salmon et al., SC'11). Counter-based: the
/// output is a pure function of (counter, key), so any stream position can be
/// addressed directly and streams never need to be advanced in lockstep.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Reproducible Gaussian/uniform stream addressed by (seed, stream_index).
///
/// The seed is the Philox key; the stream index occupies the upper half of
/// the 128-bit counter and the block number the lower half. Two streams with
/// distinct (seed, stream_index) therefore never share a counter block.
/// Satisfies UniformRandomBitGenerator (32-bit words).
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xffffffffu; }
  result_type operator()() {
    if (pos_ == 4) refill();
    return words_[pos_++];
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Boost.Random ziggurat on this stream's words).
  double normal();
  void fill_normal(std::span<double> out, double stddev = 1.0);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> words_{};
  int pos_ = 4;
};

}  // namespace fkpath

#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace mba {

/// Fixed-length presence bitmap, one bit per basket.
class Bitmap {
 public:
  Bitmap() = default;
  explicit Bitmap(std::size_t nbits)
      : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

  std::size_t size() const { return nbits_; }

  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }

  bool test(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  std::uint64_t popcount() const {
    std::uint64_t total = 0;
    for (std::uint64_t w : words_) total += std::popcount(w);
    return total;
  }

  /// dst &= src over the word arrays.
  static void and_into(std::vector<std::uint64_t>& dst, const Bitmap& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] &= src.words_[i];
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace mba

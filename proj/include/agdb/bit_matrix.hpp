#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace agdb {

/// Dense square boolean matrix stored row-major in 64-bit words.
class BitMatrix {
 public:
  BitMatrix() = default;
  explicit BitMatrix(std::size_t n) : n_(n), words_((n * n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }

  bool test(std::size_t row, std::size_t col) const {
    auto bit = row * n_ + col;
    return (words_[bit >> 6] >> (bit & 63)) & 1U;
  }
  void set(std::size_t row, std::size_t col, bool value = true) {
    auto bit = row * n_ + col;
    auto mask = std::uint64_t{1} << (bit & 63);
    if (value)
      words_[bit >> 6] |= mask;
    else
      words_[bit >> 6] &= ~mask;
  }

  std::size_t count() const;

  /// Text form "n:HEX": n, then the n*n cells row-major packed four per hex
  /// digit, most significant bit first, zero padded to a whole digit.
  std::string to_hex() const;
  /// Throws MalformedInput on a malformed string.
  static BitMatrix from_hex(std::string_view text);

  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace agdb

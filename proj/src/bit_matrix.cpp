#include "agdb/bit_matrix.hpp"

#include <bit>
#include <charconv>

#include "agdb/error.hpp"

namespace agdb {

std::size_t BitMatrix::count() const {
  std::size_t total = 0;
  for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::string BitMatrix::to_hex() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = std::to_string(n_) + ":";
  const std::size_t cells = n_ * n_;
  for (std::size_t start = 0; start < cells; start += 4) {
    unsigned nibble = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      nibble <<= 1;
      auto bit = start + k;
      if (bit < cells && test(bit / n_, bit % n_)) nibble |= 1;
    }
    out += kHex[nibble];
  }
  return out;
}

BitMatrix BitMatrix::from_hex(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(ErrorCode::MalformedInput, "bit matrix lacks ':'");
  std::size_t n = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + colon, n);
  if (ec != std::errc{} || p != text.data() + colon)
    throw Error(ErrorCode::MalformedInput, "bad bit matrix dimension");
  auto hex = text.substr(colon + 1);
  const std::size_t cells = n * n;
  if (hex.size() != (cells + 3) / 4)
    throw Error(ErrorCode::MalformedInput, "bit matrix payload has wrong length");
  BitMatrix m(n);
  for (std::size_t d = 0; d < hex.size(); ++d) {
    char c = hex[d];
    unsigned nibble = 0;
    if (c >= '0' && c <= '9') nibble = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') nibble = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') nibble = static_cast<unsigned>(c - 'A' + 10);
    else throw Error(ErrorCode::MalformedInput, "bad hex digit in bit matrix");
    for (std::size_t k = 0; k < 4; ++k) {
      auto bit = d * 4 + k;
      if ((nibble >> (3 - k)) & 1U) {
        if (bit >= cells) throw Error(ErrorCode::MalformedInput, "bit matrix padding is not zero");
        m.set(bit / n, bit % n);
      }
    }
  }
  return m;
}

}  // namespace agdb

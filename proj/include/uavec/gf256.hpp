#pragma once

// Arithmetic and dense Gauss-Jordan elimination over GF(2^8).
//
// The field is generated by the reduction polynomial x^8 + x^4 + x^3 + x + 1
// (0x11B). Multiplication goes through log/antilog tables generated at
// compile time with the primitive element 0x03.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavec::gf256 {

inline constexpr unsigned kReductionPolynomial = 0x11B;
inline constexpr unsigned kFieldOrder = 256;

namespace detail {

// Shift-and-add product reduced mod 0x11B. Used only to build the tables.
constexpr std::uint8_t slow_mul(std::uint8_t a, std::uint8_t b) {
  unsigned x = a;
  unsigned y = b;
  unsigned p = 0;
  while (y != 0) {
    if (y & 1u) p ^= x;
    x <<= 1;
    if (x & 0x100u) x ^= kReductionPolynomial;
    y >>= 1;
  }
  return static_cast<std::uint8_t>(p);
}

struct Tables {
  std::array<std::uint8_t, 512> exp{};
  std::array<std::uint8_t, 256> log{};
};

constexpr Tables make_tables() {
  Tables t;
  std::uint8_t x = 1;
  for (int i = 0; i < 255; ++i) {
    t.exp[i] = x;
    t.log[x] = static_cast<std::uint8_t>(i);
    x = slow_mul(x, 0x03);
  }
  for (int i = 255; i < 512; ++i) t.exp[i] = t.exp[i - 255];
  return t;
}

inline constexpr Tables kTables = make_tables();

}  // namespace detail

/// An element of GF(256). Addition and subtraction are both XOR.
class Element {
 public:
  constexpr Element() = default;
  constexpr explicit Element(std::uint8_t v) : value_(v) {}

  constexpr std::uint8_t value() const { return value_; }
  constexpr bool is_zero() const { return value_ == 0; }

  friend constexpr Element operator+(Element a, Element b) {
    return Element(static_cast<std::uint8_t>(a.value_ ^ b.value_));
  }
  friend constexpr Element operator-(Element a, Element b) { return a + b; }
  friend constexpr Element operator*(Element a, Element b) {
    if (a.value_ == 0 || b.value_ == 0) return Element{};
    const auto& t = detail::kTables;
    return Element(t.exp[t.log[a.value_] + t.log[b.value_]]);
  }
  constexpr Element& operator+=(Element o) { return *this = *this + o; }
  constexpr Element& operator*=(Element o) { return *this = *this * o; }
  friend constexpr bool operator==(Element, Element) = default;

 private:
  std::uint8_t value_ = 0;
};

constexpr Element mul(Element a, Element b) { return a * b; }

/// Multiplicative inverse; throws on zero.
constexpr Element inverse(Element a) {
  if (a.is_zero()) throw std::domain_error("gf256: zero has no inverse");
  const auto& t = detail::kTables;
  return Element(t.exp[255 - t.log[a.value()]]);
}

constexpr Element operator/(Element a, Element b) { return a * inverse(b); }

/// dst[i] += c * src[i] over byte rows.
inline void axpy(std::span<std::uint8_t> dst, Element c,
                 std::span<const std::uint8_t> src) {
  if (c.is_zero()) return;
  const auto& t = detail::kTables;
  const unsigned lc = t.log[c.value()];
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (src[i] != 0) dst[i] ^= t.exp[lc + t.log[src[i]]];
  }
}

/// row[i] *= c over a byte row.
inline void scale(std::span<std::uint8_t> row, Element c) {
  const auto& t = detail::kTables;
  if (c.is_zero()) {
    for (auto& b : row) b = 0;
    return;
  }
  const unsigned lc = t.log[c.value()];
  for (auto& b : row) {
    if (b != 0) b = t.exp[lc + t.log[b]];
  }
}

/// Dense row-major matrix over GF(256).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Element& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Element operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Element> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Element> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Element(1);
    return m;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Element> data_;
};

using ByteRow = std::vector<std::uint8_t>;

struct SolveResult {
  std::size_t rank = 0;
  // Present exactly when rank == cols. Row j is the value of unknown j.
  std::optional<std::vector<ByteRow>> solution;
};

/// Gauss-Jordan elimination of `m` with the same row operations applied to
/// `rhs`. Pivots are the first nonzero entry at or below the current row in
/// each column, so the result does not depend on scheduling.
///
/// For an overdetermined consistent system (rows > cols, full column rank)
/// the returned solution is the unique one.
inline SolveResult rank_and_solve(Matrix m, std::vector<ByteRow> rhs) {
  if (rhs.size() != m.rows()) {
    throw std::invalid_argument("rank_and_solve: rhs has " + std::to_string(rhs.size()) +
                                " rows, matrix has " + std::to_string(m.rows()));
  }
  for (const auto& r : rhs) {
    if (r.size() != rhs.front().size()) {
      throw std::invalid_argument("rank_and_solve: rhs rows differ in length");
    }
  }
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && m(pivot, c).is_zero()) ++pivot;
    if (pivot == rows) continue;
    if (pivot != rank) {
      for (std::size_t k = 0; k < cols; ++k) std::swap(m(pivot, k), m(rank, k));
      std::swap(rhs[pivot], rhs[rank]);
    }
    const Element inv = inverse(m(rank, c));
    for (std::size_t k = c; k < cols; ++k) m(rank, k) *= inv;
    scale(rhs[rank], inv);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank) continue;
      const Element f = m(r, c);
      if (f.is_zero()) continue;
      for (std::size_t k = c; k < cols; ++k) m(r, k) += f * m(rank, k);
      axpy(rhs[r], f, rhs[rank]);
    }
    ++rank;
  }

  SolveResult out;
  out.rank = rank;
  if (rank == cols) {
    // Full column rank puts the pivots on the leading diagonal.
    rhs.resize(cols);
    out.solution = std::move(rhs);
  }
  return out;
}

/// Rank only; no right-hand side.
inline std::size_t rank(const Matrix& m) {
  return rank_and_solve(m, std::vector<ByteRow>(m.rows())).rank;
}

}  // namespace uavec::gf256

#pragma once

// Random linear fountain code over GF(256).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "uavec/gf256.hpp"
#include "uavec/random.hpp"

namespace uavec::fountain {

using gf256::ByteRow;
using gf256::Element;

/// The beta source messages of one device, all of equal length.
struct SourceBlock {
  std::size_t payload_len = 0;
  std::vector<ByteRow> messages;

  std::size_t beta() const { return messages.size(); }

  void validate() const {
    if (messages.empty()) throw std::invalid_argument("SourceBlock: beta must be >= 1");
    for (const auto& m : messages) {
      if (m.size() != payload_len) {
        throw std::invalid_argument("SourceBlock: message length differs from payload_len");
      }
    }
  }

  static SourceBlock random(std::size_t beta, std::size_t payload_len, Rng& rng) {
    SourceBlock b;
    b.payload_len = payload_len;
    b.messages.assign(beta, ByteRow(payload_len));
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& m : b.messages)
      for (auto& x : m) x = static_cast<std::uint8_t>(byte(rng));
    return b;
  }
};

/// c_j = sum_l alpha_l * psi_l. An uncoded message l carries the unit
/// coefficient vector e_l.
struct CodedFrame {
  std::vector<Element> coefficients;
  ByteRow payload;

  static CodedFrame unit(const SourceBlock& block, std::size_t l) {
    CodedFrame f;
    f.coefficients.assign(block.beta(), Element{});
    f.coefficients[l] = Element(1);
    f.payload = block.messages[l];
    return f;
  }
};

/// Draws coefficients uniformly over all 256 field elements, zero included.
inline std::vector<CodedFrame> encode(const SourceBlock& block, std::size_t count, Rng& rng) {
  block.validate();
  if (count == 0) throw std::invalid_argument("encode: count must be >= 1");
  std::uniform_int_distribution<int> coef(0, 255);
  std::vector<CodedFrame> frames(count);
  for (auto& f : frames) {
    f.coefficients.resize(block.beta());
    f.payload.assign(block.payload_len, 0);
    for (std::size_t l = 0; l < block.beta(); ++l) {
      const Element a(static_cast<std::uint8_t>(coef(rng)));
      f.coefficients[l] = a;
      gf256::axpy(f.payload, a, block.messages[l]);
    }
  }
  return frames;
}

struct DecodeResult {
  bool success = false;
  std::size_t rank = 0;
  std::optional<std::vector<ByteRow>> messages;
};

/// All-or-nothing: succeeds iff the received coefficient matrix has rank beta.
inline DecodeResult decode(const std::vector<CodedFrame>& frames, std::size_t beta) {
  if (beta == 0) throw std::invalid_argument("decode: beta must be >= 1");
  gf256::Matrix m(frames.size(), beta);
  std::vector<ByteRow> rhs;
  rhs.reserve(frames.size());
  for (std::size_t r = 0; r < frames.size(); ++r) {
    const auto& f = frames[r];
    if (f.coefficients.size() != beta) {
      throw std::invalid_argument("decode: coefficient vector length differs from beta");
    }
    if (f.payload.size() != frames.front().payload.size()) {
      throw std::invalid_argument("decode: inconsistent payload lengths");
    }
    for (std::size_t c = 0; c < beta; ++c) m(r, c) = f.coefficients[c];
    rhs.push_back(f.payload);
  }
  auto solved = gf256::rank_and_solve(std::move(m), std::move(rhs));
  DecodeResult out;
  out.rank = solved.rank;
  out.success = solved.solution.has_value();
  out.messages = std::move(solved.solution);
  return out;
}

/// Probability that z uniform random combinations of beta sources over
/// GF(q) have full rank: prod_{v=0}^{beta-1} (1 - q^(v-z)), or 0 if z < beta.
inline double decode_probability(long z, long beta, double q = 256.0) {
  if (q < 2.0) throw std::invalid_argument("decode_probability: q must be >= 2");
  if (beta < 1) throw std::invalid_argument("decode_probability: beta must be >= 1");
  if (z < beta) return 0.0;
  double p = 1.0;
  for (long v = 0; v < beta; ++v) p *= 1.0 - std::pow(q, static_cast<double>(v - z));
  return p;
}

}  // namespace uavec::fountain

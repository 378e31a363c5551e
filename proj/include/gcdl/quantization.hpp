#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gcdl/losses.hpp"
#include "gcdl/method.hpp"
#include "gcdl/rng.hpp"

namespace gcdl {

struct CodecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One worker's broadcast: w sign bits plus the Euclidean norm of the encoded
// vector. Bit k lives in bits[k / 8] at position k % 8 (LSB first), with
// +1 stored as 1.
struct WorkerPayload {
  std::vector<std::uint8_t> bits;
  std::size_t w = 0;
  double norm = 0.0;

  int sign(std::size_t k) const {
    return ((bits[k >> 3] >> (k & 7)) & 1u) ? +1 : -1;
  }
};

struct BitBudget {
  std::size_t w = 0;
  std::size_t zeta = 64;  // bits to ship one real scalar
};

// Stochastic sign quantizer: bit k is +1 with probability
// 1/2 + f_k / (2 ||f||), independently across k, and the payload carries
// ||f||. A zero vector yields norm 0 with all bits +1, which decodes to the
// zero vector.
WorkerPayload quantize(const Vector& f, RngStream& rng);

// Entry k of the decoded vector is sign_k * norm.
Vector dequantize(const WorkerPayload& payload);
void add_dequantized(const WorkerPayload& payload, Vector& acc);

// Bits transmitted per non-straggler worker per iteration: w + zeta for the
// 1-bit methods, w * zeta for the real-valued baseline.
std::uint64_t payload_bits(Method method, const BitBudget& budget);

// Wire format: ceil(w/8) packed sign bytes (padding bits zero), then the norm
// as an 8-byte big-endian IEEE-754 double.
std::vector<std::uint8_t> encode_payload(const WorkerPayload& payload);
WorkerPayload decode_payload(std::span<const std::uint8_t> bytes, std::size_t w);

}  // namespace gcdl

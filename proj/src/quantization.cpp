#include "gcdl/quantization.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace gcdl {
namespace {

std::size_t packed_bytes(std::size_t w) { return (w + 7) / 8; }

}  // namespace

WorkerPayload quantize(const Vector& f, RngStream& rng) {
  double norm_sq = 0.0;
  for (double v : f) {
    if (!std::isfinite(v)) throw std::invalid_argument("quantize input is not finite");
    norm_sq += v * v;
  }
  if (!std::isfinite(norm_sq)) throw std::invalid_argument("quantize input overflows");

  WorkerPayload payload;
  payload.w = f.size();
  payload.bits.assign(packed_bytes(f.size()), 0);
  if (norm_sq == 0.0) {
    // Degenerate input: norm 0 decodes to the zero vector regardless of bits.
    for (std::size_t k = 0; k < f.size(); ++k) payload.bits[k >> 3] |= 1u << (k & 7);
    payload.norm = 0.0;
    return payload;
  }
  const double norm = std::sqrt(norm_sq);
  payload.norm = norm;
  const double half_inv = 0.5 / norm;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double prob_plus = 0.5 + f[k] * half_inv;
    if (rng.next_double() < prob_plus) payload.bits[k >> 3] |= 1u << (k & 7);
  }
  return payload;
}

Vector dequantize(const WorkerPayload& payload) {
  Vector out(payload.w, 0.0);
  add_dequantized(payload, out);
  return out;
}

void add_dequantized(const WorkerPayload& payload, Vector& acc) {
  const double norm = payload.norm;
  for (std::size_t k = 0; k < payload.w; ++k) {
    acc[k] += payload.sign(k) > 0 ? norm : -norm;
  }
}

std::uint64_t payload_bits(Method method, const BitBudget& budget) {
  if (budget.w < 1 || budget.zeta < 1) {
    throw std::invalid_argument("bit budget requires w >= 1 and zeta >= 1");
  }
  switch (method) {
    case Method::kOneBitGC:
    case Method::kIgnoreStragglers1Bit:
      return static_cast<std::uint64_t>(budget.w) + budget.zeta;
    case Method::kSGC:
      return static_cast<std::uint64_t>(budget.w) * budget.zeta;
  }
  return 0;
}

std::vector<std::uint8_t> encode_payload(const WorkerPayload& payload) {
  std::vector<std::uint8_t> out(payload.bits);
  out.resize(packed_bytes(payload.w) + 8);
  const std::uint64_t raw = std::bit_cast<std::uint64_t>(payload.norm);
  for (int b = 0; b < 8; ++b) {
    out[packed_bytes(payload.w) + b] = static_cast<std::uint8_t>(raw >> (56 - 8 * b));
  }
  return out;
}

WorkerPayload decode_payload(std::span<const std::uint8_t> bytes, std::size_t w) {
  const std::size_t nbits = packed_bytes(w);
  if (bytes.size() != nbits + 8) {
    throw CodecError("payload has wrong length for dimension");
  }
  WorkerPayload payload;
  payload.w = w;
  payload.bits.assign(bytes.begin(), bytes.begin() + nbits);
  if (w % 8 != 0 && nbits > 0) {
    const std::uint8_t pad_mask = static_cast<std::uint8_t>(0xFFu << (w % 8));
    if (payload.bits[nbits - 1] & pad_mask) {
      throw CodecError("payload has nonzero padding bits");
    }
  }
  std::uint64_t raw = 0;
  for (int b = 0; b < 8; ++b) {
    raw = (raw << 8) | bytes[nbits + b];
  }
  payload.norm = std::bit_cast<double>(raw);
  if (!std::isfinite(payload.norm) || payload.norm < 0.0) {
    throw CodecError("payload norm is invalid");
  }
  return payload;
}

}  // namespace gcdl

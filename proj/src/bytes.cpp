#include "ostore/bytes.hpp"

#include "ostore/errors.hpp"

namespace ostore {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kWrongItemSize: return "WrongItemSize";
    case ErrorCode::kMessageTooLarge: return "MessageTooLarge";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kPlaintextTooLarge: return "PlaintextTooLarge";
    case ErrorCode::kAuthFailure: return "AuthFailure";
    case ErrorCode::kMalformed: return "Malformed";
    case ErrorCode::kKeyCollision: return "KeyCollision";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kMissIntolerance: return "MissIntolerance";
    case ErrorCode::kCacheOverflow: return "CacheOverflow";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kRehashLoop: return "RehashLoop";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kNormalizationBroken: return "NormalizationBroken";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kUnknownOpKind: return "UnknownOpKind";
    case ErrorCode::kMissingRttEntry: return "MissingRttEntry";
    case ErrorCode::kUnsupported: return "Unsupported";
  }
  return "Unknown";
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(ErrorCode::kMalformed, "odd hex length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::kMalformed, "bad hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

void ByteWriter::u16(std::uint16_t v) {
  out_.push_back(static_cast<std::uint8_t>(v >> 8));
  out_.push_back(static_cast<std::uint8_t>(v));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteReader::need(std::size_t n) const {
  if (in_.size() - pos_ < n) throw Error(ErrorCode::kMalformed, "truncated encoding");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return in_[pos_++];
}

std::uint16_t ByteReader::u16() {
  need(2);
  std::uint16_t v = static_cast<std::uint16_t>((in_[pos_] << 8) | in_[pos_ + 1]);
  pos_ += 2;
  return v;
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_ + i];
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_ + i];
  pos_ += 8;
  return v;
}

ByteView ByteReader::raw(std::size_t n) {
  need(n);
  ByteView out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

}  // namespace ostore

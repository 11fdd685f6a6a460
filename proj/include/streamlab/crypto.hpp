#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <string_view>
#include <vector>

#include "streamlab/common.hpp"

namespace streamlab {

// Records cross stage boundaries AES-GCM sealed: 96-bit nonce, 128-bit tag.
struct Ciphertext {
  std::array<uint8_t, 12> nonce{};
  std::vector<uint8_t> body;
  std::array<uint8_t, 16> tag{};
};

// Built-in development key; real deployments would provision one per enclave.
constexpr std::array<uint8_t, 16> kDefaultKey = {
    0x53, 0x74, 0x72, 0x65, 0x61, 0x6d, 0x4c, 0x61,
    0x62, 0x4b, 0x65, 0x79, 0x30, 0x30, 0x30, 0x31};

std::array<uint8_t, 16> parse_key_hex(std::string_view hex);

// Length-prefixed little-endian record codec.
std::vector<uint8_t> encode_record(const EventRecord& rec);
EventRecord decode_record(const uint8_t* data, size_t len);

class AesGcmCipher {
 public:
  explicit AesGcmCipher(std::array<uint8_t, 16> key);

  // Seals a record under a fresh nonce. Nonces never repeat for the life of
  // the process: a per-instance prefix plus a per-call counter.
  Ciphertext encrypt(const EventRecord& rec) const;

  // Opens a sealed record. Throws AuthFailure when the tag does not verify
  // and MalformedPayload when the plaintext does not decode.
  EventRecord decrypt(const Ciphertext& ct) const;

 private:
  std::array<uint8_t, 16> key_;
  uint32_t nonce_prefix_;
  mutable std::atomic<uint64_t> nonce_counter_{0};
};

std::array<uint8_t, 32> sha256(const uint8_t* data, size_t len);
std::string sha256_hex(const std::vector<uint8_t>& data);
std::string sha256_hex_str(const std::string& data);

// Incremental digest for data too large to hold at once. hex() finalizes;
// update after that throws.
class Sha256Stream {
 public:
  Sha256Stream();
  ~Sha256Stream();
  Sha256Stream(const Sha256Stream&) = delete;
  Sha256Stream& operator=(const Sha256Stream&) = delete;

  void update(std::string_view data);
  std::string hex();

 private:
  void* ctx_;
  bool done_ = false;
};

}  // namespace streamlab

#include "streamlab/crypto.hpp"

#include <openssl/evp.h>

#include <cstring>

namespace streamlab {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

struct Reader {
  const uint8_t* p;
  size_t left;

  void need(size_t n) const {
    if (left < n) throw MalformedPayload("truncated record");
  }
  uint8_t u8() {
    need(1);
    uint8_t v = *p;
    ++p;
    --left;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(p[i]) << (8 * i);
    p += 4;
    left -= 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
    p += 8;
    left -= 8;
    return v;
  }
  std::string str(uint32_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p), n);
    p += n;
    left -= n;
    return s;
  }
};

constexpr uint8_t kTagInt = 0;
constexpr uint8_t kTagFloat = 1;
constexpr uint8_t kTagStr = 2;

}  // namespace

const char* schema_name(SchemaId id) {
  switch (id) {
    case SchemaId::Person: return "person";
    case SchemaId::Auction: return "auction";
    case SchemaId::Bid: return "bid";
    case SchemaId::Flight: return "flight";
    case SchemaId::Derived: return "derived";
  }
  return "unknown";
}

bool value_equal(const Value& a, const Value& b) {
  if (a.index() != b.index()) {
    // Mixed int/float compare numerically.
    if (std::holds_alternative<std::string>(a) ||
        std::holds_alternative<std::string>(b))
      return false;
    auto num = [](const Value& v) {
      return std::holds_alternative<int64_t>(v)
                 ? double(std::get<int64_t>(v))
                 : std::get<double>(v);
    };
    return num(a) == num(b);
  }
  return a == b;
}

std::string value_to_string(const Value& v) {
  if (std::holds_alternative<int64_t>(v))
    return std::to_string(std::get<int64_t>(v));
  if (std::holds_alternative<double>(v)) {
    char buf[32];
    snprintf(buf, sizeof buf, "%.17g", std::get<double>(v));
    return buf;
  }
  return std::get<std::string>(v);
}

std::vector<uint8_t> encode_record(const EventRecord& rec) {
  std::vector<uint8_t> out;
  put_u64(out, rec.seq);
  out.push_back(uint8_t(rec.schema));
  put_u64(out, uint64_t(rec.ts));
  put_u32(out, uint32_t(rec.fields.size()));
  for (const auto& f : rec.fields) {
    put_u32(out, uint32_t(f.name.size()));
    out.insert(out.end(), f.name.begin(), f.name.end());
    if (std::holds_alternative<int64_t>(f.value)) {
      out.push_back(kTagInt);
      put_u64(out, uint64_t(std::get<int64_t>(f.value)));
    } else if (std::holds_alternative<double>(f.value)) {
      out.push_back(kTagFloat);
      uint64_t bits;
      double d = std::get<double>(f.value);
      std::memcpy(&bits, &d, 8);
      put_u64(out, bits);
    } else {
      const std::string& s = std::get<std::string>(f.value);
      out.push_back(kTagStr);
      put_u32(out, uint32_t(s.size()));
      out.insert(out.end(), s.begin(), s.end());
    }
  }
  return out;
}

EventRecord decode_record(const uint8_t* data, size_t len) {
  Reader r{data, len};
  EventRecord rec;
  rec.seq = r.u64();
  uint8_t schema = r.u8();
  if (schema > uint8_t(SchemaId::Derived))
    throw MalformedPayload("bad schema id");
  rec.schema = SchemaId(schema);
  rec.ts = int64_t(r.u64());
  uint32_t nfields = r.u32();
  if (nfields > 1u << 16) throw MalformedPayload("absurd field count");
  rec.fields.reserve(nfields);
  for (uint32_t i = 0; i < nfields; ++i) {
    Field f;
    f.name = r.str(r.u32());
    uint8_t tag = r.u8();
    if (tag == kTagInt) {
      f.value = int64_t(r.u64());
    } else if (tag == kTagFloat) {
      uint64_t bits = r.u64();
      double d;
      std::memcpy(&d, &bits, 8);
      f.value = d;
    } else if (tag == kTagStr) {
      f.value = r.str(r.u32());
    } else {
      throw MalformedPayload("bad value tag");
    }
    rec.fields.push_back(std::move(f));
  }
  if (r.left != 0) throw MalformedPayload("trailing bytes");
  return rec;
}

std::array<uint8_t, 16> parse_key_hex(std::string_view hex) {
  if (hex.size() != 32) throw InvalidSpec("key must be 32 hex chars");
  std::array<uint8_t, 16> key{};
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw InvalidSpec("bad hex digit in key");
  };
  for (size_t i = 0; i < 16; ++i)
    key[i] = uint8_t(nib(hex[2 * i]) << 4 | nib(hex[2 * i + 1]));
  return key;
}

namespace {
std::atomic<uint32_t> g_cipher_instances{1};
}

AesGcmCipher::AesGcmCipher(std::array<uint8_t, 16> key)
    : key_(key),
      nonce_prefix_(g_cipher_instances.fetch_add(1, std::memory_order_relaxed)) {}

Ciphertext AesGcmCipher::encrypt(const EventRecord& rec) const {
  std::vector<uint8_t> plain = encode_record(rec);
  Ciphertext ct;
  uint64_t ctr = nonce_counter_.fetch_add(1, std::memory_order_relaxed);
  for (int i = 0; i < 4; ++i) ct.nonce[i] = uint8_t(nonce_prefix_ >> (8 * i));
  for (int i = 0; i < 8; ++i) ct.nonce[4 + i] = uint8_t(ctr >> (8 * i));

  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw Error("EVP_CIPHER_CTX_new failed");
  ct.body.resize(plain.size());
  int len = 0;
  int ok = EVP_EncryptInit_ex(ctx, EVP_aes_128_gcm(), nullptr, nullptr, nullptr) &&
           EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_IVLEN, 12, nullptr) &&
           EVP_EncryptInit_ex(ctx, nullptr, nullptr, key_.data(), ct.nonce.data()) &&
           (plain.empty() ||
            EVP_EncryptUpdate(ctx, ct.body.data(), &len, plain.data(),
                              int(plain.size()))) &&
           EVP_EncryptFinal_ex(ctx, ct.body.data() + len, &len) &&
           EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, 16, ct.tag.data());
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) throw Error("AES-GCM encryption failed");
  return ct;
}

EventRecord AesGcmCipher::decrypt(const Ciphertext& ct) const {
  std::vector<uint8_t> plain(ct.body.size());
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw Error("EVP_CIPHER_CTX_new failed");
  int len = 0;
  int ok = EVP_DecryptInit_ex(ctx, EVP_aes_128_gcm(), nullptr, nullptr, nullptr) &&
           EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_IVLEN, 12, nullptr) &&
           EVP_DecryptInit_ex(ctx, nullptr, nullptr, key_.data(), ct.nonce.data()) &&
           (ct.body.empty() ||
            EVP_DecryptUpdate(ctx, plain.data(), &len, ct.body.data(),
                              int(ct.body.size()))) &&
           EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_TAG, 16,
                               const_cast<uint8_t*>(ct.tag.data()));
  int final_ok = ok ? EVP_DecryptFinal_ex(ctx, plain.data() + len, &len) : 0;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) throw Error("AES-GCM decryption failed");
  if (final_ok <= 0) throw AuthFailure();
  return decode_record(plain.data(), plain.size());
}

std::array<uint8_t, 32> sha256(const uint8_t* data, size_t len) {
  std::array<uint8_t, 32> out{};
  unsigned int outlen = 0;
  EVP_Digest(data, len, out.data(), &outlen, EVP_sha256(), nullptr);
  return out;
}

static std::string to_hex(const std::array<uint8_t, 32>& d) {
  static const char* hex = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (uint8_t b : d) {
    s.push_back(hex[b >> 4]);
    s.push_back(hex[b & 0xf]);
  }
  return s;
}

std::string sha256_hex(const std::vector<uint8_t>& data) {
  return to_hex(sha256(data.data(), data.size()));
}

std::string sha256_hex_str(const std::string& data) {
  return to_hex(sha256(reinterpret_cast<const uint8_t*>(data.data()),
                       data.size()));
}

Sha256Stream::Sha256Stream() {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 init failed");
  }
  ctx_ = ctx;
}

Sha256Stream::~Sha256Stream() {
  EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

void Sha256Stream::update(std::string_view data) {
  if (done_) throw Error("sha256 stream already finalized");
  if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(),
                       data.size()) != 1)
    throw Error("sha256 update failed");
}

std::string Sha256Stream::hex() {
  if (done_) throw Error("sha256 stream already finalized");
  done_ = true;
  std::array<uint8_t, 32> out{};
  unsigned int outlen = 0;
  if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(),
                         &outlen) != 1)
    throw Error("sha256 final failed");
  return to_hex(out);
}

}  // namespace streamlab

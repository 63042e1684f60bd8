/* Copyright 2026 The Dagcache Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef DAGCACHE_FINGERPRINT_HPP_
#define DAGCACHE_FINGERPRINT_HPP_

#include <openssl/evp.h>

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

namespace dagcache {

// 128-bit content digest identifying "the same computation" across jobs.
// Collisions are treated as negligible; there is no collision handling.
struct Fingerprint {
  std::array<std::uint64_t, 2> words{0, 0};

  friend auto operator<=>(const Fingerprint&, const Fingerprint&) = default;

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(32, '0');
    for (int w = 0; w < 2; ++w) {
      for (int i = 0; i < 16; ++i) {
        out[w * 16 + i] = digits[(words[w] >> (60 - 4 * i)) & 0xf];
      }
    }
    return out;
  }

  // Inverse of hex(); returns false on malformed input.
  static bool from_hex(const std::string& s, Fingerprint* out) {
    if (s.size() != 32) return false;
    Fingerprint fp;
    for (int w = 0; w < 2; ++w) {
      std::uint64_t v = 0;
      for (int i = 0; i < 16; ++i) {
        char c = s[w * 16 + i];
        std::uint64_t d;
        if (c >= '0' && c <= '9') d = static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') d = static_cast<std::uint64_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') d = static_cast<std::uint64_t>(c - 'A' + 10);
        else return false;
        v = (v << 4) | d;
      }
      fp.words[w] = v;
    }
    *out = fp;
    return true;
  }
};

struct FingerprintHash {
  std::size_t operator()(const Fingerprint& fp) const noexcept {
    // The digest is already uniform; the low word is as good as any mix.
    return static_cast<std::size_t>(fp.words[0]);
  }
};

namespace detail {

// Incremental byte buffer hashed with SHA-256, truncated to 128 bits.
// All multi-byte values are appended little-endian and length-prefixed by
// the caller so that distinct field sequences cannot collide structurally.
class DigestBuffer {
 public:
  void put_u8(std::uint8_t v) { buf_.push_back(v); }

  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }

  void put_string(const std::string& s) {
    put_u64(s.size());
    put_bytes(s.data(), s.size());
  }

  void put_fingerprint(const Fingerprint& fp) {
    put_u64(fp.words[0]);
    put_u64(fp.words[1]);
  }

  Fingerprint finish() const {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int md_len = 0;
    EVP_Digest(buf_.data(), buf_.size(), md, &md_len, EVP_sha256(), nullptr);
    Fingerprint fp;
    std::memcpy(&fp.words[0], md, 8);
    std::memcpy(&fp.words[1], md + 8, 8);
    return fp;
  }

 private:
  std::vector<std::uint8_t> buf_;
};

}  // namespace detail
}  // namespace dagcache

template <>
struct std::hash<dagcache::Fingerprint> {
  std::size_t operator()(const dagcache::Fingerprint& fp) const noexcept {
    return dagcache::FingerprintHash{}(fp);
  }
};

#endif  // DAGCACHE_FINGERPRINT_HPP_

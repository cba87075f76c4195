// Copyright 2026 The noisykeys Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "noisykeys/bitkeys.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace noisykeys {

namespace {

void append_le64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::uint64_t parse_u64_field(std::string_view field, const char* what) {
  if (field.empty()) throw ParseError(std::string("empty ") + what);
  std::uint64_t v = 0;
  for (char c : field) {
    if (c < '0' || c > '9') {
      throw ParseError(std::string("non-numeric ") + what + ": '" +
                       std::string(field) + "'");
    }
    std::uint64_t d = static_cast<std::uint64_t>(c - '0');
    if (v > (UINT64_MAX - d) / 10) {
      throw ParseError(std::string(what) + " out of range");
    }
    v = v * 10 + d;
  }
  return v;
}

}  // namespace

// --- BitVec -----------------------------------------------------------------

BitVec BitVec::from_bit_string(std::string_view s) {
  BitVec out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[s.size() - 1 - i];
    if (c == '1') {
      out.set(i, true);
    } else if (c != '0') {
      throw std::invalid_argument("bit string may contain only 0 and 1");
    }
  }
  return out;
}

void BitVec::set_word(std::size_t w, std::uint64_t value) {
  words_[w] = value;
  const std::size_t top = nbits_ % 64;
  if (top != 0 && w == words_.size() - 1) {
    words_[w] &= (std::uint64_t{1} << top) - 1;
  }
}

BitVec BitVec::complement() const {
  BitVec out(nbits_);
  for (std::size_t w = 0; w < words_.size(); ++w) {
    out.set_word(w, ~words_[w]);
  }
  return out;
}

std::string BitVec::to_bit_string() const {
  std::string s(nbits_, '0');
  for (std::size_t i = 0; i < nbits_; ++i) {
    if (get(i)) s[nbits_ - 1 - i] = '1';
  }
  return s;
}

std::size_t hamming(const BitVec& x, const BitVec& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("hamming: length mismatch");
  }
  std::size_t d = 0;
  auto xw = x.words();
  auto yw = y.words();
  for (std::size_t i = 0; i < xw.size(); ++i) {
    d += static_cast<std::size_t>(std::popcount(xw[i] ^ yw[i]));
  }
  return d;
}

void NoiseConfig::validate() const {
  if (n == 0) throw std::invalid_argument("NoiseConfig: n must be >= 1");
  if (!(p_f >= 0.0 && p_f <= 0.5)) {
    throw std::invalid_argument("NoiseConfig: p_f must be in [0, 0.5]");
  }
  if (hash_seed.empty()) {
    throw std::invalid_argument("NoiseConfig: hash_seed must be non-empty");
  }
}

// --- SipHash-2-4 -------------------------------------------------------------

namespace {

inline std::uint64_t rotl64(std::uint64_t x, int b) {
  return (x << b) | (x >> (64 - b));
}

inline void sip_round(std::uint64_t& v0, std::uint64_t& v1, std::uint64_t& v2,
                      std::uint64_t& v3) {
  v0 += v1;
  v1 = rotl64(v1, 13);
  v1 ^= v0;
  v0 = rotl64(v0, 32);
  v2 += v3;
  v3 = rotl64(v3, 16);
  v3 ^= v2;
  v0 += v3;
  v3 = rotl64(v3, 21);
  v3 ^= v0;
  v2 += v1;
  v1 = rotl64(v1, 17);
  v1 ^= v2;
  v2 = rotl64(v2, 32);
}

inline std::uint64_t load_le64(const unsigned char* p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);  // little-endian hosts only; static_assert below
  return v;
}

static_assert(std::endian::native == std::endian::little,
              "key interchange assumes little-endian word loads");

// Fixed derivation key ("noisykeys.prf.v1" split into two words).
constexpr PrfKey kDerivationKey{0x6e6f6973796b6579ull, 0x732e7072662e7631ull};

}  // namespace

std::uint64_t siphash24(PrfKey key, std::span<const unsigned char> msg) {
  std::uint64_t v0 = key.k0 ^ 0x736f6d6570736575ull;
  std::uint64_t v1 = key.k1 ^ 0x646f72616e646f6dull;
  std::uint64_t v2 = key.k0 ^ 0x6c7967656e657261ull;
  std::uint64_t v3 = key.k1 ^ 0x7465646279746573ull;

  const std::size_t len = msg.size();
  const std::size_t full = len / 8;
  for (std::size_t i = 0; i < full; ++i) {
    const std::uint64_t m = load_le64(msg.data() + 8 * i);
    v3 ^= m;
    sip_round(v0, v1, v2, v3);
    sip_round(v0, v1, v2, v3);
    v0 ^= m;
  }

  std::uint64_t last = static_cast<std::uint64_t>(len & 0xff) << 56;
  for (std::size_t i = 8 * full; i < len; ++i) {
    last |= static_cast<std::uint64_t>(msg[i]) << (8 * (i - 8 * full));
  }
  v3 ^= last;
  sip_round(v0, v1, v2, v3);
  sip_round(v0, v1, v2, v3);
  v0 ^= last;

  v2 ^= 0xff;
  sip_round(v0, v1, v2, v3);
  sip_round(v0, v1, v2, v3);
  sip_round(v0, v1, v2, v3);
  sip_round(v0, v1, v2, v3);
  return v0 ^ v1 ^ v2 ^ v3;
}

std::uint64_t siphash24(PrfKey key, std::string_view msg) {
  return siphash24(
      key, std::span<const unsigned char>(
               reinterpret_cast<const unsigned char*>(msg.data()), msg.size()));
}

PrfKey derive_key(std::string_view seed, std::string_view domain) {
  if (domain.size() > 255) throw std::invalid_argument("domain too long");
  std::string msg;
  msg.reserve(domain.size() + seed.size() + 2);
  msg.push_back(static_cast<char>(domain.size()));
  msg.append(domain);
  msg.push_back('\0');
  msg.append(seed);
  PrfKey out;
  out.k0 = siphash24(kDerivationKey, msg);
  msg[domain.size() + 1] = '\1';
  out.k1 = siphash24(kDerivationKey, msg);
  return out;
}

// --- operations ---------------------------------------------------------------

HashCode hash_value(std::string_view value, std::string_view seed,
                    std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("hash_value: n must be >= 1");
  if (seed.empty()) throw std::invalid_argument("hash_value: empty seed");
  const PrfKey key = derive_key(seed, "hash");
  BitVec out(n);
  const std::size_t nwords = (n + 63) / 64;
  std::string msg(value);
  const std::size_t base = msg.size();
  msg.resize(base + 8);
  for (std::size_t j = 0; j < nwords; ++j) {
    for (int b = 0; b < 8; ++b) {
      msg[base + b] = static_cast<char>((j >> (8 * b)) & 0xff);
    }
    out.set_word(j, siphash24(key, msg));
  }
  return out;
}

std::mt19937_64 noise_stream(std::string_view noise_seed,
                             std::uint64_t source_id, std::uint64_t key_id) {
  const PrfKey key = derive_key(noise_seed, "noise");
  std::string msg;
  append_le64(msg, source_id);
  append_le64(msg, key_id);
  return std::mt19937_64(siphash24(key, msg));
}

BitVec add_noise(const BitVec& code, double p_f, std::mt19937_64& rng) {
  if (!(p_f >= 0.0 && p_f <= 0.5)) {
    throw std::invalid_argument("add_noise: p_f must be in [0, 0.5]");
  }
  // P(flip) = threshold / 2^64; exact at the endpoints (0 -> never,
  // 0.5 -> 2^63), resolution 2^-64 elsewhere.
  const auto threshold = static_cast<std::uint64_t>(
      std::rint(static_cast<long double>(p_f) * 18446744073709551616.0L));
  BitVec out = code;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (rng() < threshold) out.flip(i);
  }
  return out;
}

BitVec median_key(std::span<const BitVec> keys, const HashCode& reference) {
  if (keys.empty()) throw std::invalid_argument("median_key: empty key set");
  const std::size_t n = reference.size();
  for (const BitVec& k : keys) {
    if (k.size() != n) {
      throw std::invalid_argument("median_key: length mismatch");
    }
  }
  BitVec out(n);
  const std::size_t z = keys.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t ones = 0;
    for (const BitVec& k : keys) ones += k.get(i);
    if (2 * ones > z) {
      out.set(i, true);
    } else if (2 * ones == z) {
      out.set(i, reference.get(i));
    }
  }
  return out;
}

// --- wire encoding ------------------------------------------------------------

std::string encode_key(const NoisyKey& key) {
  const std::size_t n = key.bits.size();
  const std::size_t nbytes = (n + 7) / 8;
  std::string out = std::to_string(key.source_id);
  out.push_back(',');
  out += std::to_string(key.key_id);
  out.push_back(',');
  auto words = key.bits.words();
  for (std::size_t b = 0; b < nbytes; ++b) {
    const unsigned byte =
        static_cast<unsigned>((words[b / 8] >> (8 * (b % 8))) & 0xff);
    out.push_back(kHexDigits[byte >> 4]);
    out.push_back(kHexDigits[byte & 0xf]);
  }
  return out;
}

NoisyKey decode_key(std::string_view line, std::uint32_t n) {
  const std::size_t c1 = line.find(',');
  const std::size_t c2 = (c1 == std::string_view::npos)
                             ? std::string_view::npos
                             : line.find(',', c1 + 1);
  if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
    throw ParseError("expected 3 comma-separated fields");
  }
  NoisyKey key;
  key.source_id = parse_u64_field(line.substr(0, c1), "source_id");
  key.key_id = parse_u64_field(line.substr(c1 + 1, c2 - c1 - 1), "key_id");
  const std::string_view hex = line.substr(c2 + 1);
  const std::size_t nbytes = (n + 7) / 8;
  if (hex.size() != 2 * nbytes) {
    throw ParseError("expected " + std::to_string(2 * nbytes) +
                     " hex digits for n=" + std::to_string(n) + ", got " +
                     std::to_string(hex.size()));
  }
  key.bits = BitVec(n);
  std::uint64_t word = 0;
  std::size_t w = 0;
  for (std::size_t b = 0; b < nbytes; ++b) {
    const int hi = hex_nibble(hex[2 * b]);
    const int lo = hex_nibble(hex[2 * b + 1]);
    if (hi < 0 || lo < 0) throw ParseError("malformed hex digit");
    word |= static_cast<std::uint64_t>(hi << 4 | lo) << (8 * (b % 8));
    if (b % 8 == 7 || b == nbytes - 1) {
      const std::uint64_t masked_in = word;
      key.bits.set_word(w, word);
      if (key.bits.words()[w] != masked_in) {
        throw ParseError("bits beyond n=" + std::to_string(n) +
                         " must be zero");
      }
      word = 0;
      ++w;
    }
  }
  return key;
}

std::string session_tag(std::string_view hash_seed) {
  const std::uint64_t tag =
      siphash24(derive_key(hash_seed, "session"), std::string_view{});
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i) {
    out[15 - i] = kHexDigits[(tag >> (4 * i)) & 0xf];
  }
  return out;
}

void write_key_set(std::ostream& out, const KeySet& set) {
  out << "nkf1,n=" << set.n << ",session=" << set.session << "\n";
  for (const NoisyKey& key : set.keys) {
    out << encode_key(key) << "\n";
  }
}

KeySet read_key_set(std::istream& in) {
  KeySet set;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header");
  std::istringstream header(line);
  std::string magic, nfield, sfield;
  if (!std::getline(header, magic, ',') || magic != "nkf1") {
    throw ParseError("line 1: expected nkf1 header, got '" + line + "'");
  }
  if (!std::getline(header, nfield, ',') || nfield.rfind("n=", 0) != 0) {
    throw ParseError("line 1: missing n= field");
  }
  const std::uint64_t n64 = parse_u64_field(
      std::string_view(nfield).substr(2), "header n");
  if (n64 == 0 || n64 > UINT32_MAX) throw ParseError("line 1: bad n");
  set.n = static_cast<std::uint32_t>(n64);
  if (!std::getline(header, sfield, ',') || sfield.rfind("session=", 0) != 0) {
    throw ParseError("line 1: missing session= field");
  }
  set.session = sfield.substr(8);
  if (set.session.size() != 16) {
    throw ParseError("line 1: session tag must be 16 hex digits");
  }

  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      NoisyKey key = decode_key(line, set.n);
      if (!seen.emplace(key.source_id, key.key_id).second) {
        throw ParseError("duplicate (source_id, key_id)");
      }
      set.keys.push_back(std::move(key));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return set;
}

void write_key_set_file(const std::string& path, const KeySet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_key_set(out, set);
  if (!out) throw std::runtime_error("write failed: " + path);
}

KeySet read_key_set_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  try {
    return read_key_set(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace noisykeys

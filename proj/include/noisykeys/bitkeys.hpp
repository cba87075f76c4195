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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace noisykeys {

// Thrown when a key-set file or key record is malformed. The message names
// the offending line where one is known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-length bit sequence backed by 64-bit words. Bit i lives at
// words()[i / 64] bit (i % 64); bits above size() are kept zero so equality
// and popcount operate on whole words.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t nbits)
      : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

  // Parses a conventional binary numeral: the leftmost character is the
  // most significant bit (index size()-1), the rightmost is bit 0.
  static BitVec from_bit_string(std::string_view s);

  std::size_t size() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }

  bool get(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(std::size_t i, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  std::span<const std::uint64_t> words() const { return words_; }
  // Writes word w; bits beyond size() are masked off.
  void set_word(std::size_t w, std::uint64_t value);

  BitVec complement() const;

  // Renders as a binary numeral, most significant bit first.
  std::string to_bit_string() const;

  friend bool operator==(const BitVec&, const BitVec&) = default;

 private:
  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

// Number of disagreeing positions. Throws std::invalid_argument on length
// mismatch. Symmetric and satisfies the triangle inequality.
std::size_t hamming(const BitVec& x, const BitVec& y);

// Output of the shared public hash applied to one value.
using HashCode = BitVec;

// A hash code after per-bit random flips, tagged with its origin.
// (source_id, key_id) is unique within a key set.
struct NoisyKey {
  BitVec bits;
  std::uint64_t source_id = 0;
  std::uint64_t key_id = 0;

  friend bool operator==(const NoisyKey&, const NoisyKey&) = default;
};

// Session parameters. hash_seed is shared by all sources; noise_seed is
// private per source.
struct NoiseConfig {
  std::uint32_t n = 0;
  double p_f = 0.0;
  std::string hash_seed;
  std::string noise_seed;

  // Throws std::invalid_argument unless n >= 1, 0 <= p_f <= 0.5 and
  // hash_seed is non-empty.
  void validate() const;
};

// --- keyed PRF -------------------------------------------------------------
//
// SipHash-2-4 with 128-bit key, 64-bit output. Used for hash-code expansion,
// seed derivation, session tags and simulator streams. The exact construction
// is normative for cross-implementation key exchange and is spelled out in
// the README.

struct PrfKey {
  std::uint64_t k0 = 0;
  std::uint64_t k1 = 0;
};

std::uint64_t siphash24(PrfKey key, std::span<const unsigned char> msg);
std::uint64_t siphash24(PrfKey key, std::string_view msg);

// Derives a PRF key from an opaque seed, separated by a short domain label:
// k_i = SipHash24(fixed key, byte(len(domain)) || domain || byte(i) || seed).
PrfKey derive_key(std::string_view seed, std::string_view domain);

// --- operations ------------------------------------------------------------

// Maps a value to an n-bit hash code: block j supplies bits 64j..64j+63
// (least significant bit first) with block j = SipHash24(k, value || LE64(j))
// and k = derive_key(seed, "hash"). Deterministic in (value, seed, n).
// Throws std::invalid_argument if n == 0 or seed is empty.
HashCode hash_value(std::string_view value, std::string_view seed,
                    std::uint32_t n);

// Deterministic per-key bit-flip stream: mt19937_64 seeded with
// SipHash24(derive_key(noise_seed, "noise"), LE64(source_id) || LE64(key_id)).
std::mt19937_64 noise_stream(std::string_view noise_seed,
                             std::uint64_t source_id, std::uint64_t key_id);

// Flips each bit independently with probability p_f, consuming one 64-bit
// draw per position. Throws std::invalid_argument unless 0 <= p_f <= 0.5
// (larger p_f is a relabeling, not more obfuscation).
BitVec add_noise(const BitVec& code, double p_f, std::mt19937_64& rng);

// Positionwise majority over keys; an exact tie takes the reference bit.
// Throws std::invalid_argument on an empty key set or mismatched lengths.
BitVec median_key(std::span<const BitVec> keys, const HashCode& reference);

// --- wire encoding ----------------------------------------------------------
//
// One record per line: "<source_id>,<key_id>,<hex>", where <hex> packs the
// bits into ceil(n/8) bytes, bit 0 being the least significant bit of the
// first byte, rendered as ordinary two-digit hex pairs.

std::string encode_key(const NoisyKey& key);
// Throws ParseError on malformed hex, wrong bit count or missing fields.
// Unused high bits of the final byte must be zero.
NoisyKey decode_key(std::string_view line, std::uint32_t n);

// A parsed key-set file. Header line: "nkf1,n=<bits>,session=<hex16>".
struct KeySet {
  std::uint32_t n = 0;
  std::string session;  // 16 lowercase hex chars
  std::vector<NoisyKey> keys;
};

// 16-hex-char tag identifying a hash seed without revealing it:
// hex(SipHash24(derive_key(hash_seed, "session"), "")).
std::string session_tag(std::string_view hash_seed);

void write_key_set(std::ostream& out, const KeySet& set);
// Throws ParseError naming the line number on malformed input, and on
// duplicate (source_id, key_id) records.
KeySet read_key_set(std::istream& in);

void write_key_set_file(const std::string& path, const KeySet& set);
KeySet read_key_set_file(const std::string& path);

}  // namespace noisykeys

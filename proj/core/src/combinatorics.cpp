/*
 * Copyright 2026 The siterank Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "siterank/combinatorics.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace siterank {

namespace {
__extension__ using Uint128 = unsigned __int128;
}  // namespace

std::uint64_t binomial(int m, int s) {
  if (m > kMaxObjectives) {
    throw std::overflow_error("binomial: m = " + std::to_string(m) + " exceeds 64");
  }
  if (m < 0 || s < 0 || s > m) {
    throw std::out_of_range("binomial: need 0 <= s <= m (m = " + std::to_string(m) +
                            ", s = " + std::to_string(s) + ")");
  }
  if (s > m - s) s = m - s;
  // result * (m - s + i) / i stays an exact integer at every step; the
  // 128-bit product cannot overflow for m <= 64.
  Uint128 result = 1;
  for (int i = 1; i <= s; ++i) {
    result = result * static_cast<unsigned>(m - s + i) / static_cast<unsigned>(i);
  }
  if (result > UINT64_MAX) throw std::overflow_error("binomial overflow");
  return static_cast<std::uint64_t>(result);
}

Combination::Combination(std::vector<int> indices, int m) : indices_(std::move(indices)), m_(m) {
  if (m < 1 || m > kMaxObjectives) throw std::out_of_range("combination: m out of range");
  if (indices_.empty()) throw std::out_of_range("combination: empty index set");
  for (std::size_t p = 0; p < indices_.size(); ++p) {
    if (indices_[p] < 1 || indices_[p] > m) {
      throw std::out_of_range("combination: index " + std::to_string(indices_[p]) +
                              " outside 1.." + std::to_string(m));
    }
    if (p > 0 && indices_[p] <= indices_[p - 1]) {
      throw std::invalid_argument("combination: indices must be strictly increasing");
    }
  }
}

Combination Combination::First(int m, int s) {
  if (s < 1 || s > m) throw std::out_of_range("combination: need 1 <= s <= m");
  std::vector<int> idx(static_cast<std::size_t>(s));
  for (int p = 0; p < s; ++p) idx[static_cast<std::size_t>(p)] = p + 1;
  return Combination(std::move(idx), m);
}

std::uint64_t Combination::bitmask() const {
  std::uint64_t mask = 0;
  for (int j : indices_) mask |= std::uint64_t{1} << (j - 1);
  return mask;
}

bool Combination::Advance() {
  const int s = size();
  int p = s - 1;
  while (p >= 0 && indices_[static_cast<std::size_t>(p)] == m_ - s + p + 1) --p;
  if (p < 0) return false;
  ++indices_[static_cast<std::size_t>(p)];
  for (int q = p + 1; q < s; ++q) {
    indices_[static_cast<std::size_t>(q)] = indices_[static_cast<std::size_t>(q - 1)] + 1;
  }
  return true;
}

std::uint64_t rank(const Combination& c) {
  // Count sets that precede c: at each position p, every smaller value v
  // between the previous index and c[p] starts a block of C(m - v, s - p - 1).
  const int m = c.m();
  const int s = c.size();
  std::uint64_t r = 0;
  int prev = 0;
  for (int p = 0; p < s; ++p) {
    for (int v = prev + 1; v < c[p]; ++v) r += binomial(m - v, s - p - 1);
    prev = c[p];
  }
  return r + 1;
}

Combination unrank(int m, int s, std::uint64_t k) {
  if (s < 1 || s > m) throw std::out_of_range("unrank: need 1 <= s <= m");
  const std::uint64_t total = binomial(m, s);
  if (k < 1 || k > total) {
    throw std::out_of_range("unrank: k = " + std::to_string(k) + " outside 1.." +
                            std::to_string(total));
  }
  std::uint64_t remaining = k - 1;
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(s));
  int v = 1;
  for (int p = 0; p < s; ++p) {
    for (;; ++v) {
      const std::uint64_t block = binomial(m - v, s - p - 1);
      if (remaining < block) break;
      remaining -= block;
    }
    idx.push_back(v);
    ++v;
  }
  return Combination(std::move(idx), m);
}

std::vector<Combination> enumerate_combinations(int m, int s) {
  if (s < 1 || s > m) throw std::out_of_range("enumerate_combinations: need 1 <= s <= m");
  std::vector<Combination> out;
  out.reserve(static_cast<std::size_t>(binomial(m, s)));
  Combination c = Combination::First(m, s);
  do {
    out.push_back(c);
  } while (c.Advance());
  return out;
}

}  // namespace siterank

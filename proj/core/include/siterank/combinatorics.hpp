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

#pragma once

#include <cstdint>
#include <vector>

namespace siterank {

inline constexpr int kMaxObjectives = 64;

// Exact binomial coefficient C(m, s). Throws std::overflow_error for m > 64
// and std::out_of_range unless 0 <= s <= m.
std::uint64_t binomial(int m, int s);

// One index set L_{s,k}: strictly increasing 1-based objective indices.
class Combination {
 public:
  Combination() = default;
  // Validates ordering and range against m.
  Combination(std::vector<int> indices, int m);

  // (1, 2, ..., s)
  static Combination First(int m, int s);

  const std::vector<int>& indices() const { return indices_; }
  int size() const { return static_cast<int>(indices_.size()); }
  int m() const { return m_; }
  int operator[](int pos) const { return indices_[static_cast<std::size_t>(pos)]; }

  // Bit (j - 1) set for every member index j.
  std::uint64_t bitmask() const;

  // Steps to the lexicographic successor; false (and unchanged) at the last set.
  bool Advance();

  friend bool operator==(const Combination&, const Combination&) = default;

 private:
  std::vector<int> indices_;
  int m_ = 0;
};

// 1-based lexicographic rank of `c` among all size-s subsets of {1..m}.
std::uint64_t rank(const Combination& c);

// The k-th (1-based) subset in lexicographic order. Throws std::out_of_range
// unless 1 <= k <= binomial(m, s).
Combination unrank(int m, int s, std::uint64_t k);

// All size-s subsets in lexicographic order. Throws std::out_of_range unless
// 1 <= s <= m. Intended for small m; the sweep streams via Advance().
std::vector<Combination> enumerate_combinations(int m, int s);

// Calls fn(const Combination&) for ranks [first_k, last_k] inclusive.
template <typename Fn>
void for_each_combination(int m, int s, std::uint64_t first_k, std::uint64_t last_k, Fn&& fn) {
  if (first_k > last_k) return;
  Combination c = unrank(m, s, first_k);
  for (std::uint64_t k = first_k;; ++k) {
    fn(static_cast<const Combination&>(c));
    if (k == last_k || !c.Advance()) break;
  }
}

}  // namespace siterank

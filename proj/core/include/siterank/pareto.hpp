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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "siterank/combinatorics.hpp"
#include "siterank/dataset.hpp"

namespace siterank {

// Front membership per site: 1 = non-dominated within the evaluated columns.
class ParetoMask {
 public:
  ParetoMask() = default;
  explicit ParetoMask(std::size_t n) : bits_(n, 0) {}
  explicit ParetoMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v = true) { bits_[i] = v ? 1 : 0; }
  std::size_t count() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend bool operator==(const ParetoMask&, const ParetoMask&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// a dominates b on `columns` (1-based objective indices) under maximization:
// a_j >= b_j for every j and a_j > b_j for at least one.
bool dominates(std::span<const double> a, std::span<const double> b, const Combination& columns);

// First Pareto front of `matrix` restricted to `columns`. Sort-based: rows are
// visited in descending lexicographic order, so a row can only be dominated by
// one already on the front.
ParetoMask non_dominated_mask(const ScaledMatrix& matrix, const Combination& columns);

// Plain all-pairs O(n^2 s) front. Kept as the reference the fast path must
// match bit for bit.
ParetoMask non_dominated_mask_reference(const ScaledMatrix& matrix, const Combination& columns);

// Reusable scratch space for repeated front extraction on one matrix. Not
// thread-safe; give each worker its own.
class FrontFinder {
 public:
  explicit FrontFinder(const ScaledMatrix& matrix);

  // Indices of front members in ascending row order.
  const std::vector<std::size_t>& Front(const Combination& columns);

 private:
  const ScaledMatrix& matrix_;
  std::vector<double> packed_;  // n x s gathered sub-matrix
  std::vector<std::size_t> order_;
  std::vector<std::size_t> front_;
};

}  // namespace siterank

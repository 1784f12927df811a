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

#include "siterank/pareto.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace siterank {

namespace {

bool DominatesPacked(const double* a, const double* b, std::size_t s) {
  bool strict = false;
  for (std::size_t j = 0; j < s; ++j) {
    if (a[j] < b[j]) return false;
    if (a[j] > b[j]) strict = true;
  }
  return strict;
}

void CheckColumns(const ScaledMatrix& matrix, const Combination& columns) {
  if (columns.size() == 0) throw std::invalid_argument("empty column set");
  if (columns.indices().back() > static_cast<int>(matrix.cols)) {
    throw std::out_of_range("column index exceeds matrix width");
  }
}

}  // namespace

std::size_t ParetoMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool dominates(std::span<const double> a, std::span<const double> b, const Combination& columns) {
  bool strict = false;
  for (int j : columns.indices()) {
    const auto c = static_cast<std::size_t>(j - 1);
    if (a[c] < b[c]) return false;
    if (a[c] > b[c]) strict = true;
  }
  return strict;
}

ParetoMask non_dominated_mask_reference(const ScaledMatrix& matrix, const Combination& columns) {
  CheckColumns(matrix, columns);
  ParetoMask mask(matrix.rows);
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    bool dominated = false;
    for (std::size_t o = 0; o < matrix.rows && !dominated; ++o) {
      dominated = o != i && dominates(matrix.row(o), matrix.row(i), columns);
    }
    mask.set(i, !dominated);
  }
  return mask;
}

FrontFinder::FrontFinder(const ScaledMatrix& matrix) : matrix_(matrix) {
  order_.resize(matrix.rows);
  front_.reserve(matrix.rows);
}

const std::vector<std::size_t>& FrontFinder::Front(const Combination& columns) {
  CheckColumns(matrix_, columns);
  const std::size_t n = matrix_.rows;
  const auto s = static_cast<std::size_t>(columns.size());
  front_.clear();
  if (n == 0) return front_;

  if (s == 1) {
    const auto c = static_cast<std::size_t>(columns[0] - 1);
    double best = matrix_.at(0, c);
    for (std::size_t i = 1; i < n; ++i) best = std::max(best, matrix_.at(i, c));
    for (std::size_t i = 0; i < n; ++i) {
      if (matrix_.at(i, c) == best) front_.push_back(i);
    }
    return front_;
  }

  packed_.resize(n * s);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = matrix_.values.data() + i * matrix_.cols;
    for (std::size_t p = 0; p < s; ++p) {
      packed_[i * s + p] = row[columns[static_cast<int>(p)] - 1];
    }
  }
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  const double* base = packed_.data();
  std::sort(order_.begin(), order_.end(), [base, s](std::size_t a, std::size_t b) {
    const double* ra = base + a * s;
    const double* rb = base + b * s;
    for (std::size_t p = 0; p < s; ++p) {
      if (ra[p] != rb[p]) return ra[p] > rb[p];
    }
    return a < b;
  });

  // A row later in descending lexicographic order can never dominate an
  // earlier one, and dominance is transitive, so testing each candidate
  // against the current front is sufficient.
  for (std::size_t candidate : order_) {
    const double* rc = base + candidate * s;
    bool dominated = false;
    for (std::size_t f : front_) {
      if (DominatesPacked(base + f * s, rc, s)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front_.push_back(candidate);
  }
  std::sort(front_.begin(), front_.end());
  return front_;
}

ParetoMask non_dominated_mask(const ScaledMatrix& matrix, const Combination& columns) {
  FrontFinder finder(matrix);
  ParetoMask mask(matrix.rows);
  for (std::size_t i : finder.Front(columns)) mask.set(i);
  return mask;
}

}  // namespace siterank

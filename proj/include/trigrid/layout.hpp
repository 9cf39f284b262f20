/*
 * Copyright 2026 The trigrid Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "trigrid/location.hpp"
#include "trigrid/patch.hpp"

namespace trigrid {

class MeshOracle;

enum class Dim : std::uint8_t { kLevel, kRow, kColor, kColumn, kExtra };

// Physical layout request: dimension order (outermost first), alignment of
// the first compute-domain column in elements, horizontal halo width.
struct LayoutSpec {
  std::array<Dim, 5> order = {Dim::kExtra, Dim::kLevel, Dim::kRow, Dim::kColor,
                              Dim::kColumn};
  int alignment = 8;
  int halo = 1;

  // Letters outermost first: k=level i=row c=color j=column x=extra,
  // e.g. "xkicj" (the default).
  static LayoutSpec parse(std::string_view letters, int alignment = 8,
                          int halo = 1);
  std::string letters() const;
  bool column_innermost() const { return order[4] == Dim::kColumn; }
};

// Concrete strided layout of one storage. Rows and columns span
// [-H, I+H) and [-H, J+H). When the column is innermost its padded extent is
// rounded up to a multiple of the alignment and `front_pad` shifts the buffer
// so that column 0 of every (row, color, level, extra) line is aligned.
class Layout {
 public:
  Layout() = default;
  Layout(const LayoutSpec& spec, const PatchSpec& patch, LocationType loc,
         int levels, int extra);

  // Throws BoundsError naming the axis.
  std::ptrdiff_t offset(int i, int c, int j, int k = 0, int x = 0) const;
  std::ptrdiff_t offset_unchecked(int i, int c, int j, int k, int x) const {
    return origin_ + i * stride_[0] + c * stride_[1] + j * stride_[2] +
           k * stride_[3] + x * stride_[4];
  }

  // Strides for (row, color, column, level, extra).
  const std::array<std::ptrdiff_t, 5>& strides() const { return stride_; }
  std::ptrdiff_t origin() const { return origin_; }
  std::size_t size() const { return size_; }
  std::ptrdiff_t front_pad() const { return front_pad_; }
  // Padded extent of the column dimension (the row length when innermost).
  int row_length() const { return col_extent_; }
  const LayoutSpec& spec() const { return spec_; }
  int halo() const { return spec_.halo; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int colors() const { return colors_; }
  int levels() const { return levels_; }
  int extra() const { return extra_; }

 private:
  LayoutSpec spec_;
  int rows_ = 0, cols_ = 0, colors_ = 1, levels_ = 1, extra_ = 1;
  int col_extent_ = 0;
  std::array<std::ptrdiff_t, 5> stride_{};
  std::ptrdiff_t origin_ = 0;
  std::ptrdiff_t front_pad_ = 0;
  std::size_t size_ = 0;
};

// Linear offset of an element under `layout` for a K-level field.
std::ptrdiff_t sn_offset(const LayoutSpec& layout, const PatchSpec& spec,
                         LocationType loc, int i, int c, int j, int k = 0,
                         int x = 0);

enum class Numbering : std::uint8_t { kSN, kUN, kHN };
enum class AccessMethod : std::uint8_t { kDirect, kIndirect };

std::string_view name(Numbering n);
std::string_view name(AccessMethod a);
Numbering parse_numbering(std::string_view s);
AccessMethod parse_access(std::string_view s);

// Direct access needs strides, so it is only defined for SN.
void validate_combination(Numbering n, AccessMethod a);
bool numbering_defined(Numbering n, LocationType loc);

// Element id (lexicographic (i, c, j)) <-> storage rank.
struct Permutation {
  Numbering numbering = Numbering::kSN;
  LocationType location = LocationType::kVertices;
  std::vector<int> forward;  // id -> rank
  std::vector<int> inverse;  // rank -> id

  std::size_t size() const { return forward.size(); }
  bool is_bijection() const;
};

Permutation make_permutation(Numbering numbering, const PatchSpec& spec,
                             LocationType loc);
Permutation make_permutation(Numbering numbering, const MeshOracle& mesh,
                             LocationType loc);

// Rank of (x, y) along the Hilbert curve filling an n x n grid, n a power of
// two. The first-order curve visits (0,0), (0,1), (1,1), (1,0).
long hilbert_rank(long n, long x, long y);

// Offsets touched by a column sweep, one inner vector per (level, row,
// color) line of J consecutive compute-domain columns.
using SweepPattern = std::vector<std::vector<std::ptrdiff_t>>;
SweepPattern column_sweep(const Layout& layout);
// Same sweep over a flat permuted storage (offset = level * N + rank).
SweepPattern column_sweep(const Permutation& perm, const PatchSpec& spec,
                          int levels);

// Fraction of W-lane groups whose offsets are consecutive and increasing.
// Each line is split into groups of W; a trailing partial group counts.
double coalescing_fraction(const SweepPattern& pattern, int lanes);

}  // namespace trigrid

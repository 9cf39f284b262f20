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

#include "trigrid/layout.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "trigrid/error.hpp"
#include "trigrid/mesh_oracle.hpp"

namespace trigrid {
namespace {

constexpr int dim_index(Dim d) {
  switch (d) {
    case Dim::kRow: return 0;
    case Dim::kColor: return 1;
    case Dim::kColumn: return 2;
    case Dim::kLevel: return 3;
    case Dim::kExtra: return 4;
  }
  return 0;
}

constexpr const char* kAxisNames[5] = {"row", "color", "column", "level", "extra"};

long round_up(long v, long a) { return (v + a - 1) / a * a; }

}  // namespace

LayoutSpec LayoutSpec::parse(std::string_view letters, int alignment, int halo) {
  if (letters.size() != 5)
    throw ConfigError("layout must name 5 dimensions (k,i,c,j,x), got '" +
                      std::string(letters) + "'");
  LayoutSpec spec;
  spec.alignment = alignment;
  spec.halo = halo;
  std::array<bool, 5> seen{};
  for (std::size_t n = 0; n < 5; ++n) {
    Dim d;
    switch (letters[n]) {
      case 'k': d = Dim::kLevel; break;
      case 'i': d = Dim::kRow; break;
      case 'c': d = Dim::kColor; break;
      case 'j': d = Dim::kColumn; break;
      case 'x': d = Dim::kExtra; break;
      default:
        throw ConfigError("layout letter '" + std::string(1, letters[n]) +
                          "' is not one of k,i,c,j,x");
    }
    if (seen[dim_index(d)])
      throw ConfigError("layout repeats dimension '" + std::string(1, letters[n]) + "'");
    seen[dim_index(d)] = true;
    spec.order[n] = d;
  }
  if (alignment < 1) throw ConfigError("alignment must be >= 1");
  if (halo < 0) throw ConfigError("halo must be >= 0");
  return spec;
}

std::string LayoutSpec::letters() const {
  std::string s;
  for (Dim d : order) s.push_back("icjkx"[dim_index(d)]);
  return s;
}

Layout::Layout(const LayoutSpec& spec, const PatchSpec& patch, LocationType loc,
               int levels, int extra)
    : spec_(spec),
      rows_(patch.rows),
      cols_(patch.cols),
      colors_(trigrid::colors(loc)),
      levels_(levels),
      extra_(extra) {
  if (spec.alignment < 1) throw ConfigError("alignment must be >= 1");
  const int H = spec.halo;
  col_extent_ = cols_ + 2 * H;
  if (spec.column_innermost()) col_extent_ = static_cast<int>(round_up(col_extent_, spec.alignment));
  const std::array<long, 5> extent = {rows_ + 2 * H, colors_, col_extent_, levels_, extra_};
  long stride = 1;
  for (int n = 4; n >= 0; --n) {
    const int d = dim_index(spec.order[n]);
    stride_[d] = stride;
    stride *= extent[d];
  }
  const std::ptrdiff_t raw_origin = H * stride_[0] + H * stride_[2];
  front_pad_ = (spec.alignment - raw_origin % spec.alignment) % spec.alignment;
  origin_ = front_pad_ + raw_origin;
  size_ = static_cast<std::size_t>(front_pad_ + stride);
}

std::ptrdiff_t Layout::offset(int i, int c, int j, int k, int x) const {
  const int H = spec_.halo;
  const std::array<int, 5> v = {i, c, j, k, x};
  const std::array<int, 5> lo = {-H, 0, -H, 0, 0};
  const std::array<int, 5> hi = {rows_ + H, colors_, cols_ + H, levels_, extra_};
  for (int d = 0; d < 5; ++d) {
    if (v[d] < lo[d] || v[d] >= hi[d]) throw BoundsError(kAxisNames[d], v[d], lo[d], hi[d]);
  }
  return offset_unchecked(i, c, j, k, x);
}

std::ptrdiff_t sn_offset(const LayoutSpec& layout, const PatchSpec& spec,
                         LocationType loc, int i, int c, int j, int k, int x) {
  return Layout(layout, spec, loc, spec.levels, 1).offset(i, c, j, k, x);
}

std::string_view name(Numbering n) {
  switch (n) {
    case Numbering::kSN: return "sn";
    case Numbering::kUN: return "un";
    case Numbering::kHN: return "hn";
  }
  return "?";
}

std::string_view name(AccessMethod a) {
  return a == AccessMethod::kDirect ? "direct" : "indirect";
}

Numbering parse_numbering(std::string_view s) {
  if (s == "sn") return Numbering::kSN;
  if (s == "un") return Numbering::kUN;
  if (s == "hn") return Numbering::kHN;
  throw ConfigError("unknown numbering '" + std::string(s) + "' (sn, un, hn)");
}

AccessMethod parse_access(std::string_view s) {
  if (s == "direct") return AccessMethod::kDirect;
  if (s == "indirect") return AccessMethod::kIndirect;
  throw ConfigError("unknown access method '" + std::string(s) + "' (direct, indirect)");
}

void validate_combination(Numbering n, AccessMethod a) {
  if (a == AccessMethod::kDirect && n != Numbering::kSN)
    throw ConfigError("direct access requires structured numbering (got " +
                      std::string(name(n)) + ")");
}

bool numbering_defined(Numbering n, LocationType loc) {
  return !(n == Numbering::kHN && loc == LocationType::kEdges);
}

bool Permutation::is_bijection() const {
  const std::size_t n = forward.size();
  if (inverse.size() != n) return false;
  for (std::size_t id = 0; id < n; ++id) {
    const int r = forward[id];
    if (r < 0 || static_cast<std::size_t>(r) >= n || inverse[r] != static_cast<int>(id))
      return false;
  }
  for (std::size_t r = 0; r < n; ++r) {
    const int id = inverse[r];
    if (id < 0 || static_cast<std::size_t>(id) >= n || forward[id] != static_cast<int>(r))
      return false;
  }
  return true;
}

long hilbert_rank(long n, long x, long y) {
  if (n < 1 || (n & (n - 1)) != 0)
    throw ConfigError("hilbert side must be a power of two, got " + std::to_string(n));
  if (x < 0 || x >= n) throw BoundsError("x", x, 0, n);
  if (y < 0 || y >= n) throw BoundsError("y", y, 0, n);
  long d = 0;
  for (long s = n / 2; s > 0; s /= 2) {
    const long rx = (x & s) > 0;
    const long ry = (y & s) > 0;
    d += s * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = n - 1 - x;
        y = n - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

Permutation make_permutation(Numbering numbering, const PatchSpec& spec,
                             LocationType loc) {
  if (!numbering_defined(numbering, loc))
    throw UnsupportedError("numbering " + std::string(name(numbering)) +
                           " is not defined for " + std::string(name(loc)));
  const int I = spec.rows;
  const int J = spec.cols;
  const int C = colors(loc);
  const int n = static_cast<int>(element_count(spec, loc));
  Permutation p;
  p.numbering = numbering;
  p.location = loc;
  p.forward.resize(n);
  p.inverse.resize(n);
  switch (numbering) {
    case Numbering::kSN:
      std::iota(p.forward.begin(), p.forward.end(), 0);
      break;
    case Numbering::kUN:
      // Colors interleaved within a row: (i, j, c) order.
      for (int id = 0; id < n; ++id) {
        const Coord x = structured_coord(spec, loc, id);
        p.forward[id] = (x.i * J + x.j) * C + x.c;
      }
      break;
    case Numbering::kHN: {
      // Quad embedding (i, C*j + c), padded to a power-of-two square.
      long side = 1;
      while (side < I || side < static_cast<long>(C) * J) side *= 2;
      std::vector<std::pair<long, int>> keyed(n);
      for (int id = 0; id < n; ++id) {
        const Coord x = structured_coord(spec, loc, id);
        keyed[id] = {hilbert_rank(side, x.i, static_cast<long>(C) * x.j + x.c), id};
      }
      std::sort(keyed.begin(), keyed.end());
      for (int r = 0; r < n; ++r) p.forward[keyed[r].second] = r;
      break;
    }
  }
  for (int id = 0; id < n; ++id) p.inverse[p.forward[id]] = id;
  return p;
}

Permutation make_permutation(Numbering numbering, const MeshOracle& mesh,
                             LocationType loc) {
  return make_permutation(numbering, mesh.spec(), loc);
}

SweepPattern column_sweep(const Layout& layout) {
  SweepPattern out;
  for (int k = 0; k < layout.levels(); ++k)
    for (int i = 0; i < layout.rows(); ++i)
      for (int c = 0; c < layout.colors(); ++c) {
        std::vector<std::ptrdiff_t> line(layout.cols());
        for (int j = 0; j < layout.cols(); ++j) line[j] = layout.offset(i, c, j, k, 0);
        out.push_back(std::move(line));
      }
  return out;
}

SweepPattern column_sweep(const Permutation& perm, const PatchSpec& spec,
                          int levels) {
  SweepPattern out;
  const int C = colors(perm.location);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(perm.size());
  for (int k = 0; k < levels; ++k)
    for (int i = 0; i < spec.rows; ++i)
      for (int c = 0; c < C; ++c) {
        std::vector<std::ptrdiff_t> line(spec.cols);
        for (int j = 0; j < spec.cols; ++j)
          line[j] = k * n + perm.forward[structured_id(spec, perm.location, {i, c, j})];
        out.push_back(std::move(line));
      }
  return out;
}

double coalescing_fraction(const SweepPattern& pattern, int lanes) {
  if (lanes < 1) throw ConfigError("lane count must be >= 1");
  std::size_t groups = 0;
  std::size_t coalesced = 0;
  for (const auto& line : pattern) {
    for (std::size_t g = 0; g < line.size(); g += lanes) {
      const std::size_t end = std::min(line.size(), g + lanes);
      bool ok = true;
      for (std::size_t n = g + 1; n < end; ++n) ok = ok && line[n] == line[n - 1] + 1;
      ++groups;
      coalesced += ok ? 1 : 0;
    }
  }
  return groups == 0 ? 1.0 : static_cast<double>(coalesced) / static_cast<double>(groups);
}

}  // namespace trigrid

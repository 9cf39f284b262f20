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

#include "trigrid/connectivity.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <string>

#include "trigrid/error.hpp"
#include "trigrid/mesh_oracle.hpp"

namespace trigrid {
namespace {

using L = LocationType;
constexpr L V = L::kVertices;
constexpr L C = L::kCells;
constexpr L E = L::kEdges;

// Generated from MeshOracle at an interior element of a 6x6 patch; the
// connectivity tests regenerate and compare them.
constexpr NeighborOffset kV2V[1][6] = {
    {{-1, 0, 1, V, V}, {-1, 0, 0, V, V}, {0, 0, -1, V, V}, {1, 0, -1, V, V}, {1, 0, 0, V, V}, {0, 0, 1, V, V}}};
constexpr NeighborOffset kV2C[1][6] = {
    {{-1, 1, 0, V, C}, {-1, 0, 0, V, C}, {-1, 1, -1, V, C}, {0, 0, -1, V, C}, {0, 1, -1, V, C}, {0, 0, 0, V, C}}};
constexpr NeighborOffset kV2E[1][6] = {
    {{-1, 2, 0, V, E}, {-1, 1, 0, V, E}, {0, 0, -1, V, E}, {0, 2, -1, V, E}, {0, 1, 0, V, E}, {0, 0, 0, V, E}}};
constexpr NeighborOffset kC2V[2][3] = {
    {{0, 0, 1, C, V}, {0, 0, 0, C, V}, {1, 0, 0, C, V}},
    {{0, 0, 1, C, V}, {1, 0, 0, C, V}, {1, 0, 1, C, V}}};
constexpr NeighborOffset kC2C[2][3] = {
    {{-1, 1, 0, C, C}, {0, 1, -1, C, C}, {0, 1, 0, C, C}},
    {{0, 0, 1, C, C}, {0, 0, 0, C, C}, {1, 0, 0, C, C}}};
constexpr NeighborOffset kC2E[2][3] = {
    {{0, 0, 0, C, E}, {0, 1, 0, C, E}, {0, 2, 0, C, E}},
    {{0, 1, 1, C, E}, {0, 2, 0, C, E}, {1, 0, 0, C, E}}};
constexpr NeighborOffset kE2V[3][2] = {
    {{0, 0, 0, E, V}, {0, 0, 1, E, V}},
    {{0, 0, 0, E, V}, {1, 0, 0, E, V}},
    {{0, 0, 1, E, V}, {1, 0, 0, E, V}}};
constexpr NeighborOffset kE2C[3][2] = {
    {{-1, 1, 0, E, C}, {0, 0, 0, E, C}},
    {{0, 0, 0, E, C}, {0, 1, -1, E, C}},
    {{0, 0, 0, E, C}, {0, 1, 0, E, C}}};
constexpr NeighborOffset kE2E[3][4] = {
    {{-1, 1, 1, E, E}, {-1, 2, 0, E, E}, {0, 1, 0, E, E}, {0, 2, 0, E, E}},
    {{0, 0, 0, E, E}, {0, 2, -1, E, E}, {1, 0, -1, E, E}, {0, 2, 0, E, E}},
    {{0, 0, 0, E, E}, {0, 1, 0, E, E}, {1, 0, 0, E, E}, {0, 1, 1, E, E}}};

constexpr std::array<int, 6> kVertexEdgeSigns = {-1, -1, -1, 1, 1, 1};

template <std::size_t Colors, std::size_t N>
std::span<const NeighborOffset> row(const NeighborOffset (&t)[Colors][N], int color) {
  return std::span<const NeighborOffset>(t[color], N);
}

struct Fault {
  LocationType from = V, to = V;
  int color = 0;
  std::array<NeighborOffset, 6> row{};
};
std::atomic<bool> g_fault_active{false};
Fault g_fault;

}  // namespace

int relation_size(LocationType from, LocationType to) {
  if (from == V) return 6;
  if (from == C) return 3;
  return to == E ? 4 : 2;
}

StructuredOffsets structured_offsets(LocationType from, LocationType to, int color) {
  if (color < 0 || color >= colors(from))
    throw ConfigError("color " + std::to_string(color) + " out of range for " +
                      std::string(name(from)));
  std::span<const NeighborOffset> e;
  switch (from) {
    case V:
      e = to == V ? row(kV2V, color) : to == C ? row(kV2C, color) : row(kV2E, color);
      break;
    case C:
      e = to == V ? row(kC2V, color) : to == C ? row(kC2C, color) : row(kC2E, color);
      break;
    case E:
      e = to == V ? row(kE2V, color) : to == C ? row(kE2C, color) : row(kE2E, color);
      break;
  }
  if (g_fault_active.load(std::memory_order_acquire) && g_fault.from == from &&
      g_fault.to == to && g_fault.color == color) {
    e = std::span<const NeighborOffset>(g_fault.row.data(), e.size());
  }
  return {from, to, color, e};
}

std::size_t connectivity_mismatches(const MeshOracle& mesh, LocationType from, LocationType to) {
  const PatchSpec& g = mesh.spec();
  std::size_t bad = 0;
  for (int id = 0; id < static_cast<int>(mesh.count(from)); ++id) {
    const Coord x = mesh.coord(from, id);
    const auto expected = mesh.neighbors(from, to, id);
    const auto entries = structured_offsets(from, to, x.c).entries;
    if (entries.size() != expected.size()) {
      bad += std::max(entries.size(), expected.size());
      continue;
    }
    for (std::size_t n = 0; n < entries.size(); ++n) {
      const NeighborOffset& o = entries[n];
      const Coord y{wrap_index(x.i + o.di, g.rows), o.color, wrap_index(x.j + o.dj, g.cols)};
      if (o.from != from || o.to != to || o.color < 0 || o.color >= colors(to) ||
          structured_id(g, to, y) != expected[n].id) {
        ++bad;
      }
    }
  }
  return bad;
}

namespace testing {

ScopedOffsetFault::ScopedOffsetFault(LocationType from, LocationType to, int color, int entry,
                                     NeighborOffset replacement) {
  const auto entries = structured_offsets(from, to, color).entries;
  if (entry < 0 || entry >= static_cast<int>(entries.size())) {
    throw ConfigError("fault entry out of range");
  }
  g_fault_active.store(false, std::memory_order_release);
  g_fault.from = from;
  g_fault.to = to;
  g_fault.color = color;
  std::copy(entries.begin(), entries.end(), g_fault.row.begin());
  g_fault.row[entry] = replacement;
  g_fault_active.store(true, std::memory_order_release);
}

ScopedOffsetFault::~ScopedOffsetFault() { g_fault_active.store(false, std::memory_order_release); }

}  // namespace testing

Reach relation_reach(LocationType from, LocationType to) {
  Reach r;
  for (int c = 0; c < colors(from); ++c) {
    for (const NeighborOffset& o : structured_offsets(from, to, c).entries) {
      r.imin = std::min(r.imin, o.di);
      r.imax = std::max(r.imax, o.di);
      r.jmin = std::min(r.jmin, o.dj);
      r.jmax = std::max(r.jmax, o.dj);
    }
  }
  return r;
}

std::span<const int> structured_vertex_edge_signs() { return kVertexEdgeSigns; }

std::vector<int> assign_edge_signs(const MeshOracle& mesh) {
  std::vector<int> signs;
  const int nv = static_cast<int>(mesh.count(V));
  for (int v = 0; v < nv; ++v)
    for (const MeshNeighbor& n : mesh.neighbors(V, E, v)) signs.push_back(n.slot == 0 ? 1 : -1);
  return signs;
}

NeighborTable build_neighbor_table(const MeshOracle& mesh, LocationType from,
                                   LocationType to, const Permutation& perm_from,
                                   const Permutation& perm_to, bool with_signs) {
  if (perm_from.location != from || perm_from.size() != mesh.count(from))
    throw ConfigError("source permutation does not match location " + std::string(name(from)));
  if (perm_to.location != to || perm_to.size() != mesh.count(to))
    throw ConfigError("target permutation does not match location " + std::string(name(to)));
  if (with_signs && !(from == V && to == E))
    throw UnsupportedError("signs are only defined for the vertex->edge relation");
  NeighborTable t;
  t.from = from;
  t.to = to;
  const int n = static_cast<int>(mesh.count(from));
  t.begin.reserve(n + 1);
  t.begin.push_back(0);
  for (int r = 0; r < n; ++r) {
    const int id = perm_from.inverse[r];
    for (const MeshNeighbor& nb : mesh.neighbors(from, to, id)) {
      t.indices.push_back(perm_to.forward[nb.id]);
      if (with_signs) t.signs.push_back(nb.slot == 0 ? 1 : -1);
    }
    t.begin.push_back(static_cast<int>(t.indices.size()));
  }
  return t;
}

}  // namespace trigrid

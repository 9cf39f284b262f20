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
#include <span>
#include <vector>

#include "trigrid/location.hpp"
#include "trigrid/patch.hpp"

namespace trigrid {

// Structured coordinate of an element: diamond row, color, diamond column.
struct Coord {
  int i = 0;
  int c = 0;
  int j = 0;
  bool operator==(const Coord&) const = default;
};

// Lexicographic (i, c, j) id of an in-domain element.
inline int structured_id(const PatchSpec& spec, LocationType loc, Coord x) {
  return (x.i * colors(loc) + x.c) * spec.cols + x.j;
}

inline Coord structured_coord(const PatchSpec& spec, LocationType loc, int id) {
  const int j = id % spec.cols;
  const int rest = id / spec.cols;
  return {rest / colors(loc), rest % colors(loc), j};
}

// One neighbor of an element. `center6` is the neighbor's centre in lattice
// units scaled by 6 (exact for vertices, edge midpoints and centroids),
// expressed in the frame where the owning element sits at its in-domain
// position. `slot` is the endpoint index for edge/vertex incidences (0 for
// the lexicographically smaller endpoint), -1 otherwise.
struct MeshNeighbor {
  int id = 0;
  std::array<int, 2> center6{};
  int slot = -1;
  bool operator==(const MeshNeighbor&) const = default;
};

// Unstructured ground truth for a periodic patch.
//
// Geometry: lattice point (i, j) sits at x = j + i/2, y = -i*sqrt(3)/2, so
// rows grow downwards. Diamond (i, j) splits along the short diagonal into
//   color 0 (downward): (i, j), (i, j+1), (i+1, j)
//   color 1 (upward):   (i, j+1), (i+1, j+1), (i+1, j)
// Edge colors: 0 = (i,j)-(i,j+1), 1 = (i,j)-(i+1,j), 2 = (i,j+1)-(i+1,j).
//
// Only the two triangles per diamond are prescribed. Edges are discovered by
// deduplicating cell sides modulo the periodic translations and every
// relation is derived by incidence. Neighbor lists are sorted
// counterclockwise around the element centre, starting at a bearing of 15
// degrees from the column axis.
class MeshOracle {
 public:
  static MeshOracle build(const PatchSpec& spec);

  const PatchSpec& spec() const { return spec_; }
  std::size_t count(LocationType loc) const;
  Coord coord(LocationType loc, int id) const { return structured_coord(spec_, loc, id); }

  std::span<const MeshNeighbor> neighbors(LocationType from, LocationType to,
                                          int id) const;
  std::size_t neighbor_count(LocationType from, LocationType to, int id) const {
    return neighbors(from, to, id).size();
  }

  // Centre of an in-domain element, lattice units x 6.
  std::array<int, 2> center6(LocationType loc, int id) const;

  bool operator==(const MeshOracle&) const;

 private:
  struct Relation {
    std::vector<int> begin;  // CSR row starts, size count+1
    std::vector<MeshNeighbor> entries;
  };
  Relation& rel(LocationType from, LocationType to) {
    return relations_[index_of(from) * 3 + index_of(to)];
  }
  const Relation& rel(LocationType from, LocationType to) const {
    return relations_[index_of(from) * 3 + index_of(to)];
  }

  PatchSpec spec_;
  std::array<Relation, 9> relations_;
};

// Counterclockwise bearing of a lattice displacement (x6 units) in degrees,
// measured from the start bearing used for neighbor ordering, in [0, 360).
double neighbor_bearing(std::array<int, 2> delta6);

}  // namespace trigrid

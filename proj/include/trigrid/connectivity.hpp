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

#include <span>
#include <vector>

#include "trigrid/layout.hpp"
#include "trigrid/location.hpp"

namespace trigrid {

class MeshOracle;

// Neighbor of an element at (i, c, j): the element (i + di, color, j + dj),
// wrapped periodically. `color` is absolute.
struct NeighborOffset {
  int di = 0;
  int color = 0;
  int dj = 0;
  LocationType from = LocationType::kVertices;
  LocationType to = LocationType::kVertices;
  bool operator==(const NeighborOffset&) const = default;
};

struct StructuredOffsets {
  LocationType from;
  LocationType to;
  int color;
  std::span<const NeighborOffset> entries;
};

// Neighbor count of a relation: 2 (edge->vertex, edge->cell), 3 (cell->*),
// 4 (edge->edge) or 6 (vertex->*).
int relation_size(LocationType from, LocationType to);

// Frozen per-color tables. Entries run counterclockwise around the element
// centre starting at a bearing of 15 degrees from the column axis; for
// edge->vertex the first entry is the lexicographically smaller endpoint.
// Throws ConfigError when color >= colors(from).
StructuredOffsets structured_offsets(LocationType from, LocationType to, int color);

// Bounding box of (di, dj) over all colors of a relation.
struct Reach {
  int imin = 0, imax = 0, jmin = 0, jmax = 0;
};
Reach relation_reach(LocationType from, LocationType to);

// Sign of the n-th vertex->edge entry: +1 when the vertex is the first
// endpoint of that edge, -1 otherwise.
std::span<const int> structured_vertex_edge_signs();

// Explicit CSR neighbor lists in permuted numbering (indirect access).
struct NeighborTable {
  LocationType from = LocationType::kVertices;
  LocationType to = LocationType::kVertices;
  std::vector<int> begin;    // size count+1
  std::vector<int> indices;  // neighbor ranks
  std::vector<int> signs;    // parallel to indices; empty when not requested

  std::size_t size() const { return begin.empty() ? 0 : begin.size() - 1; }
  int count(int rank) const { return begin[rank + 1] - begin[rank]; }
  std::span<const int> neighbors(int rank) const {
    return std::span<const int>(indices).subspan(begin[rank], count(rank));
  }
  std::span<const int> neighbor_signs(int rank) const {
    return std::span<const int>(signs).subspan(begin[rank], count(rank));
  }
};

// Row r lists the to-neighbors of element perm_from.inverse[r] as ranks of
// perm_to, in the same order as the structured offsets. Signs are attached
// for the vertex->edge relation when `with_signs` is set.
NeighborTable build_neighbor_table(const MeshOracle& mesh, LocationType from,
                                   LocationType to, const Permutation& perm_from,
                                   const Permutation& perm_to,
                                   bool with_signs = false);

// Per (vertex, incident edge) sign in oracle vertex->edge order (CSR aligned
// with MeshOracle::neighbors(kVertices, kEdges, v)): +1 for the edge's
// lexicographically smaller endpoint, -1 for the other.
std::vector<int> assign_edge_signs(const MeshOracle& mesh);

// Number of (element, entry) pairs where the structured offsets, applied with
// periodic wrap, disagree with the oracle's ordered neighbor list.
std::size_t connectivity_mismatches(const MeshOracle& mesh, LocationType from, LocationType to);

namespace testing {

// Replaces one structured offset entry while alive. Negative controls only;
// not thread-safe against concurrent construction.
class ScopedOffsetFault {
 public:
  ScopedOffsetFault(LocationType from, LocationType to, int color, int entry,
                    NeighborOffset replacement);
  ~ScopedOffsetFault();
  ScopedOffsetFault(const ScopedOffsetFault&) = delete;
  ScopedOffsetFault& operator=(const ScopedOffsetFault&) = delete;
};

}  // namespace testing
}  // namespace trigrid

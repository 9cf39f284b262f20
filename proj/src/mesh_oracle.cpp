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

#include "trigrid/mesh_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "trigrid/error.hpp"

namespace trigrid {
namespace {

struct Pt {
  int i = 0;
  int j = 0;
  Pt operator+(Pt o) const { return {i + o.i, j + o.j}; }
  Pt operator-(Pt o) const { return {i - o.i, j - o.j}; }
  auto operator<=>(const Pt&) const = default;
};

using Center6 = std::array<int, 2>;

Center6 scaled(Pt p, int f) { return {p.i * f, p.j * f}; }
Center6 add(Center6 a, Center6 b) { return {a[0] + b[0], a[1] + b[1]}; }
Center6 sub(Center6 a, Center6 b) { return {a[0] - b[0], a[1] - b[1]}; }

std::array<Pt, 3> cell_points(int i, int c, int j) {
  if (c == 0) return {Pt{i, j}, Pt{i, j + 1}, Pt{i + 1, j}};
  return {Pt{i, j + 1}, Pt{i + 1, j + 1}, Pt{i + 1, j}};
}

Center6 centroid6(const std::array<Pt, 3>& p) {
  return {2 * (p[0].i + p[1].i + p[2].i), 2 * (p[0].j + p[1].j + p[2].j)};
}

Center6 midpoint6(Pt p, Pt q) { return {3 * (p.i + q.i), 3 * (p.j + q.j)}; }

struct EdgeGeom {
  Pt p;  // lexicographically smaller endpoint, in the edge's own frame
  Pt q;
};

}  // namespace

double neighbor_bearing(std::array<int, 2> delta6) {
  const double di = delta6[0];
  const double dj = delta6[1];
  const double x = dj + 0.5 * di;
  const double y = -0.5 * std::numbers::sqrt3 * di;
  const double deg = std::atan2(y, x) * 180.0 / std::numbers::pi;
  return std::fmod(deg - 15.0 + 720.0, 360.0);
}

std::size_t MeshOracle::count(LocationType loc) const {
  return static_cast<std::size_t>(colors(loc) * spec_.rows * spec_.cols);
}

std::span<const MeshNeighbor> MeshOracle::neighbors(LocationType from,
                                                    LocationType to,
                                                    int id) const {
  const Relation& r = rel(from, to);
  return std::span<const MeshNeighbor>(r.entries)
      .subspan(r.begin[id], r.begin[id + 1] - r.begin[id]);
}

std::array<int, 2> MeshOracle::center6(LocationType loc, int id) const {
  const Coord x = coord(loc, id);
  switch (loc) {
    case LocationType::kVertices:
      return scaled(Pt{x.i, x.j}, 6);
    case LocationType::kCells:
      return centroid6(cell_points(x.i, x.c, x.j));
    case LocationType::kEdges: {
      static constexpr Pt kDelta[3][2] = {
          {{0, 0}, {0, 1}}, {{0, 0}, {1, 0}}, {{0, 1}, {1, 0}}};
      const Pt a{x.i, x.j};
      return midpoint6(a + kDelta[x.c][0], a + kDelta[x.c][1]);
    }
  }
  return {};
}

bool MeshOracle::operator==(const MeshOracle& o) const {
  if (!(spec_ == o.spec_)) return false;
  for (std::size_t r = 0; r < relations_.size(); ++r) {
    if (relations_[r].begin != o.relations_[r].begin ||
        relations_[r].entries != o.relations_[r].entries)
      return false;
  }
  return true;
}

MeshOracle MeshOracle::build(const PatchSpec& spec) {
  spec.validate();
  MeshOracle mesh;
  mesh.spec_ = spec;
  const int I = spec.rows;
  const int J = spec.cols;
  const int nv = I * J;
  const int nc = 2 * I * J;
  const int ne = 3 * I * J;

  auto wrap_pt = [&](Pt p) { return Pt{wrap_index(p.i, I), wrap_index(p.j, J)}; };
  auto vertex_id = [&](Pt p) {
    const Pt w = wrap_pt(p);
    return w.i * J + w.j;
  };

  // Cells in (i, c, j) order, each in its own frame.
  std::vector<std::array<Pt, 3>> cells(nc);
  for (int id = 0; id < nc; ++id) {
    const Coord x = structured_coord(spec, LocationType::kCells, id);
    cells[id] = cell_points(x.i, x.c, x.j);
  }

  // Discover edges as cell sides modulo periodic translation.
  using SideKey = std::tuple<int, int, int, int>;
  std::map<SideKey, int> side_to_edge;
  std::vector<EdgeGeom> edges(ne);
  std::vector<bool> edge_seen(ne, false);
  auto side_key = [&](Pt p, Pt q) {
    const Pt w = wrap_pt(p);
    const Pt d = q - p;
    return SideKey{w.i, w.j, d.i, d.j};
  };
  for (const auto& pts : cells) {
    for (int s = 0; s < 3; ++s) {
      Pt p = pts[s];
      Pt q = pts[(s + 1) % 3];
      if (q < p) std::swap(p, q);
      const SideKey key = side_key(p, q);
      if (side_to_edge.count(key)) continue;
      const Pt w = wrap_pt(p);
      const Pt d = q - p;
      int color = -1;
      Pt anchor = w;
      if (d == Pt{0, 1}) {
        color = 0;
      } else if (d == Pt{1, 0}) {
        color = 1;
      } else if (d == Pt{1, -1}) {
        color = 2;
        anchor = Pt{w.i, w.j - 1};
      } else {
        throw std::logic_error("mesh oracle: unexpected side direction");
      }
      const Pt anchor_w = wrap_pt(anchor);
      const Pt shift = anchor_w - anchor;
      const int eid =
          structured_id(spec, LocationType::kEdges, {anchor_w.i, color, anchor_w.j});
      if (edge_seen[eid]) throw std::logic_error("mesh oracle: duplicate edge");
      edge_seen[eid] = true;
      edges[eid] = EdgeGeom{w + shift, w + d + shift};
      side_to_edge.emplace(key, eid);
    }
  }
  if (std::count(edge_seen.begin(), edge_seen.end(), true) != ne)
    throw std::logic_error("mesh oracle: edge count mismatch");

  const std::array<int, 3> counts = {nv, nc, ne};
  std::array<std::vector<std::vector<MeshNeighbor>>, 9> lists;
  for (LocationType from : kAllLocations)
    for (LocationType to : kAllLocations)
      lists[index_of(from) * 3 + index_of(to)].resize(counts[index_of(from)]);
  auto push = [&](LocationType from, LocationType to, int id, MeshNeighbor n) {
    lists[index_of(from) * 3 + index_of(to)][id].push_back(n);
  };
  using L = LocationType;

  // Edge incidences: edge -> vertex, vertex -> edge, vertex -> vertex.
  for (int e = 0; e < ne; ++e) {
    const EdgeGeom& g = edges[e];
    const Center6 mid = midpoint6(g.p, g.q);
    const Pt ends[2] = {g.p, g.q};
    for (int slot = 0; slot < 2; ++slot) {
      const Pt v = ends[slot];
      const Pt other = ends[1 - slot];
      const Pt shift = wrap_pt(v) - v;
      push(L::kEdges, L::kVertices, e, {vertex_id(v), scaled(v, 6), slot});
      push(L::kVertices, L::kEdges, vertex_id(v),
           {e, add(mid, scaled(shift, 6)), slot});
      push(L::kVertices, L::kVertices, vertex_id(v),
           {vertex_id(other), scaled(other + shift, 6), -1});
    }
  }

  // Cell incidences: cell -> vertex, vertex -> cell, cell -> edge, edge -> cell.
  // side_mid6[c][s] is the midpoint of side s in the cell frame.
  std::vector<std::array<std::pair<int, Center6>, 3>> cell_sides(nc);
  for (int c = 0; c < nc; ++c) {
    const auto& pts = cells[c];
    const Center6 cen = centroid6(pts);
    for (const Pt& p : pts) {
      const Pt shift = wrap_pt(p) - p;
      push(L::kCells, L::kVertices, c, {vertex_id(p), scaled(p, 6), -1});
      push(L::kVertices, L::kCells, vertex_id(p), {c, add(cen, scaled(shift, 6)), -1});
    }
    for (int s = 0; s < 3; ++s) {
      Pt p = pts[s];
      Pt q = pts[(s + 1) % 3];
      if (q < p) std::swap(p, q);
      const int e = side_to_edge.at(side_key(p, q));
      const Pt to_edge = edges[e].p - p;
      const Center6 mid = midpoint6(p, q);
      cell_sides[c][s] = {e, mid};
      push(L::kCells, L::kEdges, c, {e, mid, -1});
      push(L::kEdges, L::kCells, e, {c, add(cen, scaled(to_edge, 6)), -1});
    }
  }

  // cell -> cell across each edge.
  for (int e = 0; e < ne; ++e) {
    const auto& adj = lists[index_of(L::kEdges) * 3 + index_of(L::kCells)][e];
    if (adj.size() != 2) throw std::logic_error("mesh oracle: edge without two cells");
    for (int a = 0; a < 2; ++a) {
      const MeshNeighbor& self = adj[a];
      const MeshNeighbor& other = adj[1 - a];
      const Center6 to_own = sub(mesh.center6(L::kCells, self.id), self.center6);
      push(L::kCells, L::kCells, self.id, {other.id, add(other.center6, to_own), -1});
    }
  }

  // edge -> edge: the other sides of both adjacent cells.
  for (int c = 0; c < nc; ++c) {
    for (int s1 = 0; s1 < 3; ++s1) {
      const auto& [e1, mid1] = cell_sides[c][s1];
      const Center6 to_own = sub(mesh.center6(L::kEdges, e1), mid1);
      for (int s2 = 0; s2 < 3; ++s2) {
        if (s2 == s1) continue;
        const auto& [e2, mid2] = cell_sides[c][s2];
        push(L::kEdges, L::kEdges, e1, {e2, add(mid2, to_own), -1});
      }
    }
  }

  for (LocationType from : kAllLocations) {
    for (LocationType to : kAllLocations) {
      auto& per_elem = lists[index_of(from) * 3 + index_of(to)];
      Relation& r = mesh.rel(from, to);
      r.begin.assign(1, 0);
      for (int id = 0; id < static_cast<int>(per_elem.size()); ++id) {
        auto& v = per_elem[id];
        const Center6 own = mesh.center6(from, id);
        std::stable_sort(v.begin(), v.end(),
                         [&](const MeshNeighbor& a, const MeshNeighbor& b) {
                           return neighbor_bearing(sub(a.center6, own)) <
                                  neighbor_bearing(sub(b.center6, own));
                         });
        r.entries.insert(r.entries.end(), v.begin(), v.end());
        r.begin.push_back(static_cast<int>(r.entries.size()));
      }
    }
  }
  return mesh;
}

}  // namespace trigrid

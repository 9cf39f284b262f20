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

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "trigrid/connectivity.hpp"
#include "trigrid/layout.hpp"
#include "trigrid/mesh_oracle.hpp"
#include "trigrid/stencil.hpp"

using namespace trigrid;
using L = LocationType;

namespace {

constexpr L kAll[] = {L::kVertices, L::kCells, L::kEdges};

// Offsets regenerated from the oracle at an interior element of a 6x6 patch.
std::vector<NeighborOffset> regenerate(L from, L to, int color) {
  const PatchSpec p{6, 6, 1, 1};
  const MeshOracle m = MeshOracle::build(p);
  const int id = structured_id(p, from, {2, color, 2});
  std::vector<NeighborOffset> out;
  for (const auto& n : m.neighbors(from, to, id)) {
    const Coord c = m.coord(to, n.id);
    out.push_back({c.i - 2, c.c, c.j - 2, from, to});
  }
  return out;
}

}  // namespace

TEST_CASE("frozen tables equal the tables regenerated from the oracle") {
  for (L from : kAll)
    for (L to : kAll) {
      CHECK(relation_size(from, to) == int(regenerate(from, to, 0).size()));
      for (int c = 0; c < colors(from); ++c) {
        const auto want = regenerate(from, to, c);
        const auto got = structured_offsets(from, to, c);
        CHECK(got.from == from);
        CHECK(got.to == to);
        REQUIRE(got.entries.size() == want.size());
        for (std::size_t n = 0; n < want.size(); ++n) {
          CHECK(got.entries[n].di == want[n].di);
          CHECK(got.entries[n].dj == want[n].dj);
          CHECK(got.entries[n].color == want[n].color);
        }
      }
    }
  CHECK_THROWS(structured_offsets(L::kCells, L::kEdges, 2));
}

TEST_CASE("offsets reproduce the oracle exhaustively on patches up to 8x8") {
  for (int I = 2; I <= 8; ++I)
    for (int J = 2; J <= 8; ++J) {
      const PatchSpec p{I, J, 1, 1};
      const MeshOracle m = MeshOracle::build(p);
      for (L from : kAll)
        for (L to : kAll) {
          CHECK(connectivity_mismatches(m, from, to) == 0);
          // same check spelled out, as sets and as sequences
          for (std::size_t id = 0; id < m.count(from); ++id) {
            const Coord x = m.coord(from, int(id));
            const auto entries = structured_offsets(from, to, x.c).entries;
            const auto ref = m.neighbors(from, to, int(id));
            REQUIRE(entries.size() == ref.size());
            for (std::size_t n = 0; n < ref.size(); ++n) {
              const auto [wi, wj] = wrap(p, x.i + entries[n].di, x.j + entries[n].dj);
              REQUIRE(structured_id(p, to, {wi, entries[n].color, wj}) == ref[n].id);
            }
          }
        }
    }
}

TEST_CASE("declared relation extents cover every offset") {
  for (L from : kAll)
    for (L to : kAll) {
      const Reach r = relation_reach(from, to);
      const Extent e = relation_extent(from, to);
      CHECK(e.imin == r.imin);
      CHECK(e.imax == r.imax);
      CHECK(e.jmin == r.jmin);
      CHECK(e.jmax == r.jmax);
      for (int c = 0; c < colors(from); ++c)
        for (const auto& n : structured_offsets(from, to, c).entries) {
          CHECK(n.di >= r.imin);
          CHECK(n.di <= r.imax);
          CHECK(n.dj >= r.jmin);
          CHECK(n.dj <= r.jmax);
        }
    }
}

TEST_CASE("edge to vertex starts at the smaller endpoint") {
  for (int c = 0; c < 3; ++c) {
    const auto e = structured_offsets(L::kEdges, L::kVertices, c).entries;
    CHECK(std::pair{e[0].di, e[0].dj} < std::pair{e[1].di, e[1].dj});
  }
}

TEST_CASE("duality: edge to vertex then vertex to edge recovers the edge") {
  const PatchSpec p{5, 4, 1, 1};
  const MeshOracle m = MeshOracle::build(p);
  for (std::size_t e = 0; e < m.count(L::kEdges); ++e)
    for (const auto& v : m.neighbors(L::kEdges, L::kVertices, int(e))) {
      const auto back = m.neighbors(L::kVertices, L::kEdges, v.id);
      CHECK(std::count_if(back.begin(), back.end(),
                          [&](const MeshNeighbor& n) { return n.id == int(e); }) == 1);
    }
}

TEST_CASE("edge signs cancel pairwise") {
  for (int I : {2, 3, 6})
    for (int J : {2, 5}) {
      const MeshOracle m = MeshOracle::build({I, J, 1, 1});
      const std::vector<int> signs = assign_edge_signs(m);
      std::map<int, std::vector<int>> per_edge;
      std::size_t n = 0;
      long total = 0;
      for (std::size_t v = 0; v < m.count(L::kVertices); ++v) {
        int plus = 0;
        for (const auto& e : m.neighbors(L::kVertices, L::kEdges, int(v))) {
          const int s = signs[n++];
          CHECK((s == 1 || s == -1));
          per_edge[e.id].push_back(s);
          total += s;
          plus += s > 0;
        }
        if (I == 2 && J == 2) CHECK(m.neighbor_count(L::kVertices, L::kEdges, int(v)) == 6);
        (void)plus;
      }
      CHECK(n == signs.size());
      CHECK(total == 0);
      for (const auto& [e, s] : per_edge) {
        REQUIRE(s.size() == 2);
        CHECK(s[0] + s[1] == 0);
      }
    }
  // the structured sign row agrees with the oracle signs at every vertex
  const MeshOracle m = MeshOracle::build({4, 4, 1, 1});
  const std::vector<int> signs = assign_edge_signs(m);
  const auto row = structured_vertex_edge_signs();
  for (std::size_t v = 0; v < m.count(L::kVertices); ++v)
    for (int n = 0; n < 6; ++n) CHECK(signs[v * 6 + n] == row[n]);
}

TEST_CASE("neighbor tables under permutations") {
  const PatchSpec p{4, 4, 1, 1};
  const MeshOracle m = MeshOracle::build(p);
  for (L from : kAll)
    for (L to : kAll) {
      const auto id_from = make_permutation(Numbering::kSN, m, from);
      const auto id_to = make_permutation(Numbering::kSN, m, to);
      const NeighborTable t = build_neighbor_table(m, from, to, id_from, id_to);
      REQUIRE(t.size() == m.count(from));
      for (std::size_t x = 0; x < t.size(); ++x) {
        const auto ref = m.neighbors(from, to, int(x));
        const auto got = t.neighbors(int(x));
        REQUIRE(got.size() == ref.size());
        for (std::size_t n = 0; n < ref.size(); ++n) CHECK(got[n] == ref[n].id);
      }
      for (Numbering nf : {Numbering::kUN, Numbering::kHN})
        for (Numbering nt : {Numbering::kUN, Numbering::kHN}) {
          if (!numbering_defined(nf, from) || !numbering_defined(nt, to)) continue;
          const auto pf = make_permutation(nf, m, from);
          const auto pt = make_permutation(nt, m, to);
          const NeighborTable u = build_neighbor_table(m, from, to, pf, pt);
          for (std::size_t x = 0; x < m.count(from); ++x) {
            const auto ref = m.neighbors(from, to, int(x));
            const auto got = u.neighbors(pf.forward[x]);
            for (std::size_t n = 0; n < ref.size(); ++n) CHECK(got[n] == pt.forward[ref[n].id]);
          }
        }
    }
  const auto pv = make_permutation(Numbering::kUN, m, L::kVertices);
  const auto pe = make_permutation(Numbering::kUN, m, L::kEdges);
  const NeighborTable s = build_neighbor_table(m, L::kVertices, L::kEdges, pv, pe, true);
  std::map<int, int> sum, hits;
  for (std::size_t r = 0; r < s.size(); ++r)
    for (int n = 0; n < s.count(int(r)); ++n) {
      sum[s.neighbors(int(r))[n]] += s.neighbor_signs(int(r))[n];
      ++hits[s.neighbors(int(r))[n]];
    }
  for (const auto& [e, v] : sum) {
    CHECK(v == 0);
    CHECK(hits[e] == 2);
  }
  CHECK_THROWS(build_neighbor_table(m, L::kCells, L::kEdges, pv, pe));
}

TEST_CASE("offset fault hook is scoped") {
  const MeshOracle m = MeshOracle::build({4, 4, 1, 1});
  const auto row = structured_offsets(L::kVertices, L::kEdges, 0).entries;
  const NeighborOffset original = row[0];
  {
    testing::ScopedOffsetFault fault(L::kVertices, L::kEdges, 0, 0, row[1]);
    CHECK(connectivity_mismatches(m, L::kVertices, L::kEdges) > 0);
  }
  CHECK(structured_offsets(L::kVertices, L::kEdges, 0).entries[0] == original);
  CHECK(connectivity_mismatches(m, L::kVertices, L::kEdges) == 0);
}

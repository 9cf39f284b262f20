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

#include <fstream>
#include <set>
#include <sstream>

#include "trigrid/error.hpp"
#include "trigrid/layout.hpp"
#include "trigrid/mesh_oracle.hpp"

using namespace trigrid;
using L = LocationType;

TEST_CASE("layout letters round trip") {
  CHECK(LayoutSpec{}.letters() == "xkicj");
  CHECK(LayoutSpec::parse("kxicj").letters() == "kxicj");
  CHECK_THROWS_AS(LayoutSpec::parse("xkic"), ConfigError);
  CHECK_THROWS_AS(LayoutSpec::parse("xkicc"), ConfigError);
  CHECK_THROWS_AS(LayoutSpec::parse("xkicj", 0), ConfigError);
}

TEST_CASE("stride-1 and alignment contracts, exhaustive on small patches") {
  for (const char* order : {"xkicj", "kxicj", "xkcij", "kicxj"})
    for (int A : {1, 3, 8})
      for (int H : {0, 1, 2})
        for (int I : {2, 3})
          for (int J : {2, 5})
            for (L loc : kAllLocations) {
              const PatchSpec p{I, J, 2, H};
              const LayoutSpec spec = LayoutSpec::parse(order, A, H);
              const Layout lay(spec, p, loc, 2, 2);
              std::set<std::ptrdiff_t> seen;
              for (int x = 0; x < 2; ++x)
                for (int k = 0; k < 2; ++k)
                  for (int i = -H; i < I + H; ++i)
                    for (int c = 0; c < colors(loc); ++c) {
                      REQUIRE(lay.offset(i, c, 0, k, x) % A == 0);
                      for (int j = -H; j < J + H; ++j) {
                        const auto o = lay.offset(i, c, j, k, x);
                        REQUIRE(o >= 0);
                        REQUIRE(o < std::ptrdiff_t(lay.size()));
                        REQUIRE(seen.insert(o).second);
                        if (j + 1 < J + H) REQUIRE(lay.offset(i, c, j + 1, k, x) == o + 1);
                      }
                    }
            }
}

TEST_CASE("padded row length re-derived from the alignment predicate") {
  const PatchSpec p{4, 4, 1, 1};
  const Layout lay(LayoutSpec::parse("xkicj", 8, 1), p, L::kVertices, 1, 1);
  // smallest row stride that keeps column 0 of every row aligned and fits halo
  int want = 0;
  for (int len = 4 + 2; want == 0; ++len)
    if (len % 8 == 0) want = len;
  CHECK(lay.row_length() == want);
  CHECK(want == 8);
  CHECK(lay.strides()[0] == 8);
  CHECK(sn_offset(LayoutSpec::parse("xkicj", 8, 1), p, L::kVertices, 1, 0, 0) % 8 == 0);
}

TEST_CASE("out-of-bounds offsets name the axis") {
  const PatchSpec p{3, 3, 2, 1};
  const Layout lay(LayoutSpec{}, p, L::kCells, 2, 1);
  auto axis_of = [&](auto f) {
    try {
      f();
    } catch (const BoundsError& e) {
      return e.axis();
    }
    return std::string("none");
  };
  CHECK(axis_of([&] { (void)lay.offset(-2, 0, 0); }) == "row");
  CHECK(axis_of([&] { (void)lay.offset(0, 2, 0); }) == "color");
  CHECK(axis_of([&] { (void)lay.offset(0, 0, 4); }) == "column");
  CHECK(axis_of([&] { (void)lay.offset(0, 0, 0, 2); }) == "level");
  CHECK(axis_of([&] { (void)lay.offset(0, 0, 0, 0, 1); }) == "extra");
}

TEST_CASE("numbering and access combinations") {
  CHECK_NOTHROW(validate_combination(Numbering::kSN, AccessMethod::kDirect));
  CHECK_THROWS_AS(validate_combination(Numbering::kUN, AccessMethod::kDirect), Error);
  CHECK_THROWS_AS(validate_combination(Numbering::kHN, AccessMethod::kDirect), Error);
  for (Numbering n : {Numbering::kSN, Numbering::kUN, Numbering::kHN})
    CHECK_NOTHROW(validate_combination(n, AccessMethod::kIndirect));
  CHECK(parse_numbering("hn") == Numbering::kHN);
  CHECK(parse_access("indirect") == AccessMethod::kIndirect);
  CHECK_THROWS_AS(parse_numbering("zz"), ConfigError);
  CHECK_THROWS_AS(make_permutation(Numbering::kHN, PatchSpec{4, 4, 1, 1}, L::kEdges),
                  UnsupportedError);
}

TEST_CASE("permutations are bijections with the documented orders") {
  for (int I = 2; I <= 8; ++I)
    for (int J = 2; J <= 8; ++J) {
      const PatchSpec p{I, J, 1, 1};
      for (L loc : kAllLocations) {
        const int C = colors(loc);
        const Permutation sn = make_permutation(Numbering::kSN, p, loc);
        const Permutation un = make_permutation(Numbering::kUN, p, loc);
        REQUIRE(sn.is_bijection());
        REQUIRE(un.is_bijection());
        for (int id = 0; id < int(sn.size()); ++id) {
          REQUIRE(sn.inverse[sn.forward[id]] == id);
          const Coord x = structured_coord(p, loc, id);
          REQUIRE(sn.forward[id] == id);
          REQUIRE(un.forward[id] == (x.i * J + x.j) * C + x.c);
        }
        if (numbering_defined(Numbering::kHN, loc))
          REQUIRE(make_permutation(Numbering::kHN, p, loc).is_bijection());
      }
    }
  const PatchSpec p{2, 2, 1, 1};
  CHECK(make_permutation(Numbering::kUN, p, L::kCells).forward !=
        make_permutation(Numbering::kSN, p, L::kCells).forward);
  CHECK(make_permutation(Numbering::kUN, p, L::kVertices).forward ==
        make_permutation(Numbering::kSN, p, L::kVertices).forward);
}

TEST_CASE("hilbert curve matches the golden visit order") {
  std::ifstream in(TRIGRID_TEST_DATA "/golden/hilbert.txt");
  REQUIRE(in);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    long n, d, x, y;
    ss >> n >> d >> x >> y;
    CHECK(hilbert_rank(n, x, y) == d);
    ++rows;
  }
  CHECK(rows == 4 + 16 + 64);
  CHECK(hilbert_rank(8, 0, 0) == 0);
  CHECK_THROWS(hilbert_rank(4, 4, 0));
  CHECK_THROWS(hilbert_rank(3, 0, 0));
}

TEST_CASE("hilbert bijection and adjacency for n up to 32") {
  for (long n = 2; n <= 32; n *= 2) {
    std::vector<std::pair<long, long>> at(n * n, {-1, -1});
    for (long x = 0; x < n; ++x)
      for (long y = 0; y < n; ++y) {
        const long r = hilbert_rank(n, x, y);
        REQUIRE(r >= 0);
        REQUIRE(r < n * n);
        REQUIRE(at[r].first == -1);
        at[r] = {x, y};
      }
    for (long r = 1; r < n * n; ++r)
      REQUIRE(std::abs(at[r].first - at[r - 1].first) + std::abs(at[r].second - at[r - 1].second) ==
              1);
  }
}

TEST_CASE("HN cells walk 4-adjacent quad cells on a 4x4 patch") {
  const PatchSpec p{4, 4, 1, 1};
  const Permutation hn = make_permutation(Numbering::kHN, p, L::kCells);
  REQUIRE(hn.is_bijection());
  for (std::size_t r = 1; r < hn.size(); ++r) {
    const Coord a = structured_coord(p, L::kCells, hn.inverse[r - 1]);
    const Coord b = structured_coord(p, L::kCells, hn.inverse[r]);
    const int dx = std::abs(a.i - b.i), dy = std::abs((2 * a.j + a.c) - (2 * b.j + b.c));
    CHECK(dx + dy == 1);
  }
}

TEST_CASE("coalescing fraction") {
  const PatchSpec p{4, 16, 3, 1};
  for (L loc : kAllLocations) {
    const Layout lay(LayoutSpec{}, p, loc, 3, 1);
    CHECK(coalescing_fraction(column_sweep(lay), 8) == 1.0);
    CHECK(coalescing_fraction(column_sweep(make_permutation(Numbering::kSN, p, loc), p, 3), 8) ==
          1.0);
  }
  const Permutation un = make_permutation(Numbering::kUN, p, L::kCells);
  CHECK(coalescing_fraction(column_sweep(un, p, 3), 8) < 1.0);
  CHECK(coalescing_fraction(column_sweep(un, p, 3), 1) == 1.0);
  const Permutation hn = make_permutation(Numbering::kHN, p, L::kCells);
  CHECK(coalescing_fraction(column_sweep(hn, p, 3), 1) == 1.0);

  // hand-built pattern: one good group, one broken group
  CHECK(coalescing_fraction({{0, 1, 2, 3, 10, 11, 13, 14}}, 4) == 0.5);
  CHECK(coalescing_fraction({{0, 1, 2}}, 8) == 1.0);
}

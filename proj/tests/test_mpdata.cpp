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

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

#include "trigrid/error.hpp"
#include "trigrid/executor.hpp"
#include "trigrid/mpdata.hpp"

using namespace trigrid;
using L = LocationType;

namespace {

MultiStageSpec single(StageSpec s) {
  return make_multistage(ExecutionPolicy::kForward, cache({}), std::move(s));
}

double mass(const MpdataFields& f) {
  const PatchSpec& g = f.pD.patch();
  double m = 0;
  for (int k = 0; k < g.levels; ++k)
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) m += f.pD.peek(i, 0, j, k) * f.dual_volumes.peek(i, 0, j);
  return m;
}

template <class F>
void each(const Field& f, F fn) {
  const PatchSpec& g = f.patch();
  for (int k = 0; k < f.levels(); ++k)
    for (int i = 0; i < g.rows; ++i)
      for (int c = 0; c < colors(f.location()); ++c)
        for (int j = 0; j < g.cols; ++j) fn(i, c, j, k);
}

bool bitwise(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

MpdataFields random_fields(const PatchSpec& p, std::uint64_t seed, bool unit_rho = false,
                           GeometryMode geo = GeometryMode::kRandom) {
  MpdataFields f = make_mpdata_fields(p);
  init_geometry(f, geo, seed);
  randomize_state(f, seed, unit_rho);
  return f;
}

// flux at edge (1, 0, 1), whose endpoints are vertices (1,1) and (1,2)
double probe_flux(bool centred, double vn, double p0, double p1) {
  const PatchSpec p{4, 4, 1, 1};
  MpdataFields f = make_mpdata_fields(p);
  f.vn.fill(vn);
  f.pD.poke(1, 0, 1, 0, 0, p0);
  f.pD.poke(1, 0, 2, 0, 0, p1);
  Bindings b;
  b.bind("flux", f.flux).bind("pD", f.pD).bind("vn", f.vn);
  StageSpec s = centred ? centred_flux_stage("flux", "pD", "vn") : upwind_flux_stage("flux", "pD", "vn");
  run_naive(compose(p, b, {single(std::move(s))}));
  return f.flux.peek(1, 0, 1);
}

}  // namespace

TEST_CASE("edge fluxes: worked values") {
  CHECK(probe_flux(true, 2.0, 3.0, 5.0) == 8.0);
  CHECK(probe_flux(true, 0.0, 3.0, 5.0) == 0.0);
  CHECK(probe_flux(false, 2.0, 3.0, 5.0) == 6.0);
  CHECK(probe_flux(false, -2.0, 3.0, 5.0) == -10.0);
}

TEST_CASE("edge fluxes match a loop over the oracle's endpoints") {
  const PatchSpec p{4, 4, 2, 1};
  const MeshOracle m = MeshOracle::build(p);
  for (bool centred : {false, true}) {
    MpdataFields f = random_fields(p, 17);
    Bindings b;
    b.bind("flux", f.flux).bind("pD", f.pD).bind("vn", f.vn);
    run_naive(compose(p, b, {single(centred ? centred_flux_stage("flux", "pD", "vn")
                                            : upwind_flux_stage("flux", "pD", "vn"))}));
    each(f.flux, [&](int i, int c, int j, int k) {
      const int id = structured_id(p, L::kEdges, {i, c, j});
      const auto ends = m.neighbors(L::kEdges, L::kVertices, id);
      const Coord a = m.coord(L::kVertices, ends[0].id), z = m.coord(L::kVertices, ends[1].id);
      const double v = f.vn.peek(i, c, j, k);
      const double pa = f.pD.peek(a.i, 0, a.j, k), pz = f.pD.peek(z.i, 0, z.j, k);
      const double want = centred ? 0.5 * v * (pz + pa)
                                  : std::max(0.0, v) * pa + std::min(0.0, v) * pz;
      CHECK(f.flux.peek(i, c, j, k) == want);
    });
  }
}

TEST_CASE("vertical flux with boundary scaling") {
  const PatchSpec p{2, 2, 3, 1};
  for (double w : {1.0, -1.0})
    for (double pivbz : {0.0, 0.5}) {
      MpdataFields f = make_mpdata_fields(p);
      f.wn.fill(w);
      each(f.pD, [&](int i, int c, int j, int k) { f.pD.poke(i, c, j, k, 0, k == 0 ? 4.0 : 7.0); });
      Bindings b;
      b.bind("fluz", f.fluz).bind("pD", f.pD).bind("wn", f.wn).bind("pivbz", pivbz);
      run_naive(compose(p, b, {single(upwind_fluz_stage("fluz", "pD", "wn", "pivbz",
                                                        VerticalBoundary::kScaledCopy))}));
      CHECK(f.fluz.peek(1, 0, 1, 1) == (w > 0 ? 4.0 : -7.0));
      CHECK(f.fluz.peek(1, 0, 1, 2) == (w > 0 ? 7.0 : -7.0));
      CHECK(f.fluz.peek(1, 0, 1, 0) == pivbz * f.fluz.peek(1, 0, 1, 1));
      CHECK(f.fluz.peek(1, 0, 1, 3) == pivbz * f.fluz.peek(1, 0, 1, 2));
    }
  // the alternative boundary: scaled products on every level
  MpdataFields f = make_mpdata_fields(p);
  f.wn.fill(-1.0);
  each(f.pD, [&](int i, int c, int j, int k) { f.pD.poke(i, c, j, k, 0, 1.0 + k); });
  Bindings b;
  b.bind("fluz", f.fluz).bind("pD", f.pD).bind("wn", f.wn).bind("pivbz", 0.5);
  run_naive(compose(p, b, {single(upwind_fluz_stage("fluz", "pD", "wn", "pivbz",
                                                    VerticalBoundary::kScaledEverywhere))}));
  CHECK(f.fluz.peek(0, 0, 0, 0) == 0.5 * std::min(0.0, -1.0 * 2.0));
}

TEST_CASE("flux divergence") {
  const PatchSpec p{4, 4, 3, 1};
  const MeshOracle m = MeshOracle::build(p);
  auto run_div = [&](MpdataFields& f) {
    Bindings b;
    b.bind("divVD", f.divVD).bind("flux", f.flux).bind("fluz", f.fluz)
        .bind("dual_volumes", f.dual_volumes).bind("edge_signs", f.edge_signs);
    run_naive(compose(p, b, {single(fluxdiv_stage("divVD", "flux", "fluz", "dual_volumes",
                                                  "edge_signs"))}));
  };
  SUBCASE("constant flux telescopes") {
    MpdataFields f = random_fields(p, 5);
    f.flux.fill(2.75);
    f.fluz.fill(0.0);
    run_div(f);
    for (int k = 0; k < 3; ++k) {
      double s = 0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) s += f.divVD.peek(i, 0, j, k) * f.dual_volumes.peek(i, 0, j);
      CHECK(std::abs(s) <= 1e-12 * 2.75 * 48);
    }
  }
  SUBCASE("zero in, zero out") {
    MpdataFields f = random_fields(p, 5);
    f.flux.fill(0.0);
    f.fluz.fill(0.0);
    run_div(f);
    each(f.divVD, [&](int i, int c, int j, int k) { CHECK(f.divVD.peek(i, c, j, k) == 0.0); });
  }
  SUBCASE("random inputs against a double loop") {
    MpdataFields f = random_fields(p, 6);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1, 1);
    each(f.flux, [&](int i, int c, int j, int k) { f.flux.poke(i, c, j, k, 0, u(rng)); });
    each(f.fluz, [&](int i, int c, int j, int k) { f.fluz.poke(i, c, j, k, 0, u(rng)); });
    run_div(f);
    const std::vector<int> signs = assign_edge_signs(m);
    for (int k = 0; k < 3; ++k)
      for (int v = 0; v < 16; ++v) {
        double acc = 0;
        int n = 0;
        for (const auto& e : m.neighbors(L::kVertices, L::kEdges, v)) {
          const Coord x = m.coord(L::kEdges, e.id);
          acc = acc + signs[v * 6 + n++] * f.flux.peek(x.i, x.c, x.j, k);
        }
        const Coord x = m.coord(L::kVertices, v);
        const double want = (acc + (f.fluz.peek(x.i, 0, x.j, k + 1) - f.fluz.peek(x.i, 0, x.j, k))) /
                            f.dual_volumes.peek(x.i, 0, x.j);
        CHECK(f.divVD.peek(x.i, 0, x.j, k) == want);
      }
  }
}

TEST_CASE("cell divergence, simple and with precomputed weights") {
  const PatchSpec p{4, 4, 2, 1};
  auto run_both = [&](MpdataFields& f, Field& d1, Field& d2) {
    Bindings b;
    b.bind("d1", d1).bind("d2", d2).bind("vn", f.vn).bind("edge_length", f.edge_length)
        .bind("cell_area", f.cell_area).bind("weights", f.weights);
    run_naive(compose(p, b,
                      {make_multistage(ExecutionPolicy::kParallel, cache({}),
                                       div_simple_stage("d1", "vn", "edge_length", "cell_area"),
                                       div_precomputed_stage("d2", "vn", "weights"))}));
  };
  Field d1 = make_storage(p, L::kCells, kSelector3D, "d1");
  Field d2 = make_storage(p, L::kCells, kSelector3D, "d2");

  MpdataFields f = random_fields(p, 8);
  f.weights.fill(1.0);
  f.vn.fill(1.0);
  run_both(f, d1, d2);
  each(d2, [&](int i, int c, int j, int k) { CHECK(d2.peek(i, c, j, k) == 3.0); });

  f.vn.fill(0.0);
  precompute_weights(f.edge_length, f.cell_area, f.weights);
  run_both(f, d1, d2);
  each(d1, [&](int i, int c, int j, int k) {
    CHECK(d1.peek(i, c, j, k) == 0.0);
    CHECK(d2.peek(i, c, j, k) == 0.0);
  });

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    MpdataFields g = random_fields(p, seed);
    run_both(g, d1, d2);
    each(d1, [&](int i, int c, int j, int k) {
      double scale = 0;
      for (const auto& e : structured_offsets(L::kCells, L::kEdges, c).entries) {
        const auto [wi, wj] = wrap(p, i + e.di, j + e.dj);
        scale += std::abs(g.edge_length.peek(wi, e.color, wj) * g.vn.peek(wi, e.color, wj, k));
      }
      scale /= g.cell_area.peek(i, c, j);
      CHECK(std::abs(d1.peek(i, c, j, k) - d2.peek(i, c, j, k)) <= 1e-15 * scale);
    });
  }
}

TEST_CASE("precomputed weights") {
  const PatchSpec p{4, 4, 1, 1};
  MpdataFields f = make_mpdata_fields(p);
  f.edge_length.fill(2.0);
  f.cell_area.fill(4.0);
  precompute_weights(f.edge_length, f.cell_area, f.weights);
  each(f.cell_area, [&](int i, int c, int j, int) {
    for (int n = 0; n < 3; ++n) CHECK(f.weights.peek(i, c, j, 0, n) == 0.5);
  });

  init_geometry(f, GeometryMode::kRandom, 12);
  const MeshOracle m = MeshOracle::build(p);
  each(f.cell_area, [&](int i, int c, int j, int) {
    const int id = structured_id(p, L::kCells, {i, c, j});
    double perimeter = 0, weighted = 0;
    int n = 0;
    for (const auto& e : m.neighbors(L::kCells, L::kEdges, id)) {
      const Coord x = m.coord(L::kEdges, e.id);
      const double l = f.edge_length.peek(x.i, x.c, x.j);
      CHECK(f.weights.peek(i, c, j, 0, n) == l / f.cell_area.peek(i, c, j));
      weighted += f.weights.peek(i, c, j, 0, n) * f.cell_area.peek(i, c, j);
      perimeter += l;
      ++n;
    }
    CHECK(weighted == doctest::Approx(perimeter).epsilon(1e-14));
  });

  f.cell_area.poke(0, 0, 0, 0, 0, 0.0);
  CHECK_THROWS_AS(precompute_weights(f.edge_length, f.cell_area, f.weights), ConfigError);
}

TEST_CASE("unit geometry") {
  const PatchSpec p{3, 3, 1, 1};
  MpdataFields f = make_mpdata_fields(p);
  init_geometry(f, GeometryMode::kUnit);
  CHECK(f.edge_length.peek(1, 2, 1) == 1.0);
  CHECK(f.cell_area.peek(1, 1, 1) == doctest::Approx(std::sqrt(3.0) / 4));
  CHECK(f.dual_volumes.peek(1, 0, 1) == doctest::Approx(std::sqrt(3.0) / 2));
  // dual volumes tile the plane: total equals total cell area
  double dual = 0, cells = 0;
  each(f.dual_volumes, [&](int i, int c, int j, int) { dual += f.dual_volumes.peek(i, c, j); });
  each(f.cell_area, [&](int i, int c, int j, int) { cells += f.cell_area.peek(i, c, j); });
  CHECK(dual == doctest::Approx(cells));
}

TEST_CASE("advance solution leaves pD alone without divergence or time") {
  const PatchSpec p{4, 4, 3, 1};
  MpdataFields f = random_fields(p, 3);
  const auto before = to_flat(f.pD, make_permutation(Numbering::kSN, p, L::kVertices));
  f.divVD.fill(0.0);
  Bindings b;
  b.bind("pD", f.pD).bind("divVD", f.divVD).bind("rho", f.rho).bind("dt", 0.3);
  run_naive(compose(p, b, {single(advance_solution_stage("pD", "divVD", "rho", "dt"))}));
  CHECK(bitwise(to_flat(f.pD, make_permutation(Numbering::kSN, p, L::kVertices)), before));

  MpdataFields g = random_fields(p, 3);
  run_naive(build_mpdata_computation(g, {1.0, 0.0}));
  CHECK(bitwise(to_flat(g.pD, make_permutation(Numbering::kSN, p, L::kVertices)), before));
}

TEST_CASE("build rejects bad parameters") {
  MpdataFields f = random_fields({4, 4, 1, 1}, 1);
  CHECK_THROWS_AS(build_mpdata_computation(f, {}), ConfigError);
  MpdataFields g = random_fields({4, 4, 3, 1}, 1);
  CHECK_THROWS_AS(build_mpdata_computation(g, {1.0, -0.1}), ConfigError);
  g.rho.poke(2, 0, 2, 1, 0, 0.0);
  CHECK_THROWS_AS(build_mpdata_computation(g, {}), ConfigError);
}

TEST_CASE("composed step: shape, oracle and executor equivalence") {
  const PatchSpec p{4, 4, 4, 1};
  {
    MpdataFields f = random_fields(p, 1);
    const Computation comp = build_mpdata_computation(f, {});
    REQUIRE(comp.multistages().size() == 1);
    const MultiStageSpec& ms = comp.multistages()[0];
    CHECK(ms.policy == ExecutionPolicy::kForward);
    REQUIRE(ms.stages.size() == 4);
    CHECK(ms.stages[0].name == "upwind_flux");
    CHECK(ms.stages[1].name == "upwind_fluz");
    CHECK(ms.stages[2].name == "fluxdiv");
    CHECK(ms.stages[3].name == "advance_solution");
    CHECK(ms.cached("flux"));
    CHECK(ms.cached("fluz"));
    CHECK(ms.cached("divVD"));
    CHECK_FALSE(ms.cached("pD"));
  }
  const MeshOracle mesh = MeshOracle::build(p);
  const Permutation pv = make_permutation(Numbering::kSN, mesh, L::kVertices);
  const Permutation pe = make_permutation(Numbering::kSN, mesh, L::kEdges);
  const OracleTables tables = make_oracle_tables(mesh, pv, pe);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const MpdataParams params{0.25 * double(seed % 5), 0.05, seed % 2 ? VerticalBoundary::kScaledCopy
                                                                   : VerticalBoundary::kScaledEverywhere};
    MpdataFields a = random_fields(p, seed), b = random_fields(p, seed);
    OracleState os{p.levels, to_flat(a.pD, pv), to_flat(a.vn, pe), to_flat(a.wn, pv),
                   to_flat(a.rho, pv), to_flat(a.dual_volumes, pv)};
    reference_oracle_step(os, tables, params);
    run_naive(build_mpdata_computation(a, params), {ExecutorKind::kNaive, {}, 1, true});
    run_fused(build_mpdata_computation(b, params), {ExecutorKind::kFused, {3, 2}, 2, true});
    CHECK(bitwise(to_flat(a.pD, pv), os.pD));
    CHECK(bitwise(to_flat(b.pD, pv), os.pD));
  }
}

TEST_CASE("oracle with zero velocities leaves pD unchanged") {
  const PatchSpec p{4, 4, 4, 1};
  const MeshOracle mesh = MeshOracle::build(p);
  const Permutation pv = make_permutation(Numbering::kUN, mesh, L::kVertices);
  const Permutation pe = make_permutation(Numbering::kUN, mesh, L::kEdges);
  MpdataFields f = random_fields(p, 4);
  OracleState os{p.levels, to_flat(f.pD, pv), std::vector<double>(3 * 16 * 4, 0.0),
                 std::vector<double>(16 * 5, 0.0), to_flat(f.rho, pv), to_flat(f.dual_volumes, pv)};
  const std::vector<double> before = os.pD;
  reference_oracle_step(os, make_oracle_tables(mesh, pv, pe), {});
  CHECK(bitwise(os.pD, before));
}

TEST_CASE("relabelled oracle runs agree with the structured run") {
  const PatchSpec p{4, 4, 3, 1};
  const MeshOracle mesh = MeshOracle::build(p);
  const Permutation sv = make_permutation(Numbering::kSN, mesh, L::kVertices);
  MpdataFields f = random_fields(p, 14);
  run_naive(build_mpdata_computation(f, {0.5, 0.1}));
  const std::vector<double> want = to_flat(f.pD, sv);
  for (Numbering n : {Numbering::kUN, Numbering::kHN}) {
    MpdataFields g = random_fields(p, 14);
    const Permutation pv = make_permutation(n, mesh, L::kVertices);
    const Permutation pe = make_permutation(Numbering::kUN, mesh, L::kEdges);
    OracleState os{p.levels, to_flat(g.pD, pv), to_flat(g.vn, pe), to_flat(g.wn, pv),
                   to_flat(g.rho, pv), to_flat(g.dual_volumes, pv)};
    reference_oracle_step(os, make_oracle_tables(mesh, pv, pe), {0.5, 0.1});
    from_flat(g.pD, pv, os.pD);
    CHECK(bitwise(to_flat(g.pD, sv), want));
  }
}

TEST_CASE("conservation with closed vertical boundaries") {
  const PatchSpec p{5, 6, 4, 1};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    MpdataFields f = random_fields(p, seed, true);
    const double before = mass(f);
    run_naive(build_mpdata_computation(f, {0.0, 0.1}));
    CHECK(std::abs(mass(f) - before) <= 1e-12 * std::abs(before));
  }
}

TEST_CASE("open boundaries: the mass change is the boundary flux") {
  const PatchSpec p{4, 5, 3, 1};
  MpdataFields f = random_fields(p, 2, true, GeometryMode::kUnit);
  const double before = mass(f);
  const double dt = 0.1;
  run_naive(build_mpdata_computation(f, {0.7, dt}));
  double boundary = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j) boundary += f.fluz.peek(i, 0, j, 3) - f.fluz.peek(i, 0, j, 0);
  CHECK(mass(f) - before == doctest::Approx(-dt * boundary).epsilon(1e-12));
}

TEST_CASE("linearity in pD") {
  const PatchSpec p{4, 4, 3, 1};
  const Permutation pv = make_permutation(Numbering::kSN, p, L::kVertices);
  const double alpha = 0.75, beta = -1.25;
  MpdataFields a = random_fields(p, 31), b = random_fields(p, 31), c = random_fields(p, 31);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 1);
  each(b.pD, [&](int i, int cc, int j, int k) { b.pD.poke(i, cc, j, k, 0, u(rng)); });
  each(c.pD, [&](int i, int cc, int j, int k) {
    c.pD.poke(i, cc, j, k, 0, alpha * a.pD.peek(i, cc, j, k) + beta * b.pD.peek(i, cc, j, k));
  });
  for (MpdataFields* f : {&a, &b, &c}) run_naive(build_mpdata_computation(*f, {0.5, 0.1}));
  const auto ra = to_flat(a.pD, pv), rb = to_flat(b.pD, pv), rc = to_flat(c.pD, pv);
  for (std::size_t n = 0; n < ra.size(); ++n) {
    const double want = alpha * ra[n] + beta * rb[n];
    CHECK(std::abs(rc[n] - want) <= 1e-12 * (std::abs(alpha * ra[n]) + std::abs(beta * rb[n])));
  }
}

TEST_CASE("sign preservation for non-negative velocities and a small step") {
  const PatchSpec p{5, 5, 4, 1};
  MpdataFields f = random_fields(p, 44, true, GeometryMode::kUnit);
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(0, 1);
  each(f.vn, [&](int i, int c, int j, int k) { f.vn.poke(i, c, j, k, 0, u(rng)); });
  each(f.wn, [&](int i, int c, int j, int k) { f.wn.poke(i, c, j, k, 0, u(rng)); });
  each(f.pD, [&](int i, int c, int j, int k) { f.pD.poke(i, c, j, k, 0, u(rng) < 0.3 ? 0.0 : u(rng)); });
  // outflow per vertex is at most 4 (three edges, one interface) over a dual
  // volume of sqrt(3)/2, so dt = 0.2 keeps dt * outflow / dual below one
  run_naive(build_mpdata_computation(f, {0.0, 0.2}));
  each(f.pD, [&](int i, int c, int j, int k) { CHECK(f.pD.peek(i, c, j, k) >= 0.0); });
}

TEST_CASE("presets and csv input") {
  const PatchSpec p{4, 4, 2, 1};
  Field a = make_storage(p, L::kVertices, kSelector3D, "pD");
  apply_preset(a, "uniform(2.5)");
  each(a, [&](int i, int c, int j, int k) { CHECK(a.peek(i, c, j, k) == 2.5); });
  apply_preset(a, "uniform");
  CHECK(a.peek(3, 0, 3, 1) == 1.0);
  apply_preset(a, "gaussian-bump");
  double peak = 0;
  each(a, [&](int i, int c, int j, int k) { peak = std::max(peak, a.peek(i, c, j, k)); });
  CHECK(a.peek(2, 0, 2, 0) == peak);
  CHECK(a.peek(0, 0, 0, 0) < peak);
  Field b = make_storage(p, L::kVertices, kSelector3D, "pD");
  apply_preset(a, "random(7)");
  apply_preset(b, "random(7)");
  each(a, [&](int i, int c, int j, int k) { CHECK(a.peek(i, c, j, k) == b.peek(i, c, j, k)); });
  CHECK_THROWS_AS(apply_preset(a, "sine"), ConfigError);
  CHECK_THROWS_AS(apply_preset(a, "uniform(x)"), ConfigError);

  const std::string path = "trigrid_test_init.csv";
  {
    std::ofstream out(path);
    out << "# element_id,level,value\n5,1,3.25\n0,0,-1\n";
  }
  a.fill(0.0);
  load_csv(a, path);
  CHECK(a.peek(1, 0, 1, 1) == 3.25);
  CHECK(a.peek(0, 0, 0, 0) == -1.0);
  {
    std::ofstream out(path);
    out << "99,0,1\n";
  }
  CHECK_THROWS_AS(load_csv(a, path), ConfigError);
  {
    std::ofstream out(path);
    out << "1;0;1\n";
  }
  CHECK_THROWS_AS(load_csv(a, path), ConfigError);
  {
    std::ofstream out(path);
    out << "element_id,level,value\n1,0,1,9\n";
  }
  CHECK_THROWS_AS(load_csv(a, path), ConfigError);
  {
    std::ofstream out(path);
    out << "1,0,2.5x\n";
  }
  CHECK_THROWS_AS(load_csv(a, path), ConfigError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_csv(a, "/nonexistent/dir/x.csv"), IoError);
}

TEST_CASE("flat storage round trip") {
  const PatchSpec p{4, 4, 2, 1};
  MpdataFields f = random_fields(p, 2);
  const Permutation pe = make_permutation(Numbering::kUN, p, L::kEdges);
  const auto flat = to_flat(f.vn, pe);
  Field g = make_storage(p, L::kEdges, kSelector3D, "vn");
  from_flat(g, pe, flat);
  each(g, [&](int i, int c, int j, int k) { CHECK(g.peek(i, c, j, k) == f.vn.peek(i, c, j, k)); });
}

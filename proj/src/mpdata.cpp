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

#include "trigrid/mpdata.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace trigrid {

namespace {

using L = LocationType;
constexpr double kSqrt3 = 1.7320508075688772;

template <int Color>
struct UpwindFlux {
  static constexpr Accessor flux = out(0, L::kEdges);
  static constexpr Accessor pD = in(1, L::kVertices, relation_extent(L::kEdges, L::kVertices));
  static constexpr Accessor vn = in(2, L::kEdges);
  static constexpr std::array args{flux, pD, vn};

  static void Do(Evaluation& eval) {
    const auto off = structured_offsets(L::kEdges, L::kVertices, Color).entries;
    const double v = eval(vn);
    const double pos = v > 0 ? v : 0.;
    const double neg = v < 0 ? v : 0.;
    eval.write(flux, pos * eval(pD.at(off[0])) + neg * eval(pD.at(off[1])));
  }
};

template <int Color>
struct CentredFlux {
  static constexpr Accessor flux = out(0, L::kEdges);
  static constexpr Accessor pD = in(1, L::kVertices, relation_extent(L::kEdges, L::kVertices));
  static constexpr Accessor vn = in(2, L::kEdges);
  static constexpr std::array args{flux, pD, vn};

  static void Do(Evaluation& eval) {
    eval.write(flux, 0.5 * eval(vn) * eval.reduce(L::kVertices, pD, sum));
  }
};

template <VerticalBoundary B>
struct UpwindFluz {
  static constexpr Accessor fluz = inout(0, L::kVertices, {0, 0, 0, 0, -1, 0});
  static constexpr Accessor pD = in(1, L::kVertices, {0, 0, 0, 0, -1, 1});
  static constexpr Accessor wn = in(2, L::kVertices, {0, 0, 0, 0, 0, 1});
  static constexpr Accessor pivbz = global(3);
  static constexpr std::array args{fluz, pD, wn, pivbz};

  static double upwind(double w, double below, double above) {
    if constexpr (B == VerticalBoundary::kScaledCopy) {
      return std::max(0.0, w) * below + std::min(0.0, w) * above;
    } else {
      return std::max(0.0, w * below) + std::min(0.0, w * above);
    }
  }
  static void Do(Evaluation& eval) {
    const double f = upwind(eval(wn), eval(pD.k(-1)), eval(pD));
    if constexpr (B == VerticalBoundary::kScaledCopy) {
      eval.write(fluz, f);
    } else {
      eval.write(fluz, eval(pivbz) * f);
    }
  }
  static void Do(Evaluation& eval, kminimum_t) {
    eval.write(fluz, eval(pivbz) * upwind(eval(wn.k(1)), eval(pD), eval(pD.k(1))));
  }
  static void Do(Evaluation& eval, kmaximum_t) {
    eval.write(fluz, eval(pivbz) * eval(fluz.k(-1)));
  }
};

struct FluxDiv {
  static constexpr Accessor divVD = out(0, L::kVertices);
  static constexpr Accessor flux = in(1, L::kEdges, relation_extent(L::kVertices, L::kEdges));
  static constexpr Accessor fluz = in(2, L::kVertices, {0, 0, 0, 0, 0, 1});
  static constexpr Accessor dual_volumes = in(3, L::kVertices);
  static constexpr Accessor edge_signs = in(4, L::kVertices, {}, true);
  static constexpr std::array args{divVD, flux, fluz, dual_volumes, edge_signs};

  static void Do(Evaluation& eval) {
    const auto off = structured_offsets(L::kVertices, L::kEdges, 0).entries;
    double acc = 0.0;
    for (std::size_t n = 0; n < off.size(); ++n) {
      acc += eval(edge_signs.extra_index(static_cast<int>(n))) * eval(flux.at(off[n]));
    }
    eval.write(divVD, (acc + (eval(fluz.k(1)) - eval(fluz))) / eval(dual_volumes));
  }
};

struct AdvanceSolution {
  static constexpr Accessor pD = inout(0, L::kVertices);
  static constexpr Accessor divVD = in(1, L::kVertices);
  static constexpr Accessor rho = in(2, L::kVertices);
  static constexpr Accessor dt = global(3);
  static constexpr std::array args{pD, divVD, rho, dt};

  static void Do(Evaluation& eval) {
    eval.write(pD, eval(pD) - eval(dt) * eval(divVD) / eval(rho));
  }
};

template <int Color>
struct DivSimple {
  static constexpr Accessor div = out(0, L::kCells);
  static constexpr Accessor vn = in(1, L::kEdges, relation_extent(L::kCells, L::kEdges));
  static constexpr Accessor edge_length = in(2, L::kEdges, relation_extent(L::kCells, L::kEdges));
  static constexpr Accessor cell_area = in(3, L::kCells);
  static constexpr std::array args{div, vn, edge_length, cell_area};

  static void Do(Evaluation& eval) {
    eval.write(div, eval.reduce(L::kEdges, edge_length, vn, prod) / eval(cell_area));
  }
};

template <int Color>
struct DivPrecomputed {
  static constexpr Accessor div = out(0, L::kCells);
  static constexpr Accessor flux = in(1, L::kEdges, relation_extent(L::kCells, L::kEdges));
  static constexpr Accessor weights = in(2, L::kCells, {}, true);
  static constexpr std::array args{div, flux, weights};

  static void Do(Evaluation& eval) {
    const auto off = structured_offsets(L::kCells, L::kEdges, Color).entries;
    int e = 0;
    double red = 0.;
    for (const NeighborOffset& n : off) {
      red += eval(flux.at(n)) * eval(weights.extra_index(e));
      ++e;
    }
    eval.write(div, red);
  }
};

template <class Fn>
void for_compute_domain(const Field& f, Fn fn) {
  const PatchSpec& g = f.patch();
  for (int k = 0; k < f.levels(); ++k)
    for (int i = 0; i < g.rows; ++i)
      for (int c = 0; c < colors(f.location()); ++c)
        for (int j = 0; j < g.cols; ++j) fn(i, c, j, k);
}

void fill_random(Field& f, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  for_compute_domain(f, [&](int i, int c, int j, int k) { f.poke(i, c, j, k, 0, u(rng)); });
}

// Element centre in lattice coordinates (row, column).
std::array<double, 2> lattice_centre(LocationType loc, int i, int c, int j) {
  switch (loc) {
    case L::kVertices:
      return {double(i), double(j)};
    case L::kCells:
      return c == 0 ? std::array<double, 2>{i + 1.0 / 3, j + 1.0 / 3}
                    : std::array<double, 2>{i + 2.0 / 3, j + 2.0 / 3};
    case L::kEdges:
      if (c == 0) return {double(i), j + 0.5};
      if (c == 1) return {i + 0.5, double(j)};
      return {i + 0.5, j + 0.5};
  }
  return {0, 0};
}

}  // namespace

MpdataFields make_mpdata_fields(const PatchSpec& patch, const FieldOptions& options) {
  FieldOptions staggered = options;
  staggered.staggered = true;
  const Selector extra2d{true, true, true, false, true};
  return MpdataFields{
      make_storage(patch, L::kVertices, kSelector3D, "pD", 0, options),
      make_storage(patch, L::kEdges, kSelector3D, "vn", 0, options),
      make_storage(patch, L::kVertices, kSelector3D, "wn", 0, staggered),
      make_storage(patch, L::kVertices, kSelector3D, "rho", 0, options),
      make_storage(patch, L::kEdges, kSelector3D, "flux", 0, options),
      make_storage(patch, L::kVertices, kSelector3D, "fluz", 0, staggered),
      make_storage(patch, L::kVertices, kSelector3D, "divVD", 0, options),
      make_storage(patch, L::kVertices, kSelector2D, "dual_volumes", 0, options),
      make_storage(patch, L::kVertices, extra2d, "edge_signs", 6, options),
      make_storage(patch, L::kEdges, kSelector2D, "edge_length", 0, options),
      make_storage(patch, L::kCells, kSelector2D, "cell_area", 0, options),
      make_storage(patch, L::kCells, extra2d, "weights", 3, options),
  };
}

void init_geometry(MpdataFields& f, GeometryMode mode, std::uint64_t seed) {
  if (mode == GeometryMode::kUnit) {
    f.edge_length.fill(1.0);
    f.cell_area.fill(kSqrt3 / 4);
    f.dual_volumes.fill(kSqrt3 / 2);
  } else {
    std::mt19937_64 rng(seed);
    fill_random(f.edge_length, rng, 0.5, 1.5);
    fill_random(f.cell_area, rng, 0.5, 1.5);
    fill_random(f.dual_volumes, rng, 0.5, 1.5);
  }
  const PatchSpec& g = f.pD.patch();
  const MeshOracle mesh = MeshOracle::build(g);
  const std::vector<int> signs = assign_edge_signs(mesh);
  for (std::size_t v = 0; v < mesh.count(L::kVertices); ++v) {
    const Coord x = mesh.coord(L::kVertices, static_cast<int>(v));
    for (int n = 0; n < 6; ++n) f.edge_signs.poke(x.i, 0, x.j, 0, n, signs[v * 6 + n]);
  }
  precompute_weights(f.edge_length, f.cell_area, f.weights);
}

void randomize_state(MpdataFields& f, std::uint64_t seed, bool unit_rho) {
  std::mt19937_64 rng(seed);
  fill_random(f.pD, rng, 0.5, 1.5);
  fill_random(f.vn, rng, -1.0, 1.0);
  fill_random(f.wn, rng, -1.0, 1.0);
  if (unit_rho) {
    f.rho.fill(1.0);
  } else {
    fill_random(f.rho, rng, 0.5, 1.5);
  }
}

void apply_preset(Field& field, const std::string& preset) {
  const auto open = preset.find('(');
  const std::string head = preset.substr(0, open);
  std::string arg;
  if (open != std::string::npos) {
    if (preset.back() != ')') throw ConfigError("malformed preset '" + preset + "'");
    arg = preset.substr(open + 1, preset.size() - open - 2);
  }
  if (head == "uniform") {
    double v = 1.0;
    if (!arg.empty()) {
      try {
        v = std::stod(arg);
      } catch (const std::exception&) {
        throw ConfigError("malformed preset '" + preset + "'");
      }
    }
    field.fill(v);
  } else if (head == "random") {
    std::uint64_t seed = 0;
    try {
      seed = arg.empty() ? 0 : std::stoull(arg);
    } catch (const std::exception&) {
      throw ConfigError("malformed preset '" + preset + "'");
    }
    std::mt19937_64 rng(seed);
    fill_random(field, rng, 0.0, 1.0);
  } else if (head == "gaussian-bump" && arg.empty()) {
    const PatchSpec& g = field.patch();
    const double ci = g.rows / 2.0, cj = g.cols / 2.0;
    const double sigma = std::max(0.5, std::min(g.rows, g.cols) / 6.0);
    for_compute_domain(field, [&](int i, int c, int j, int k) {
      const auto p = lattice_centre(field.location(), i, c, j);
      const double dx = (p[1] - cj) + (p[0] - ci) / 2;
      const double dy = (p[0] - ci) * kSqrt3 / 2;
      field.poke(i, c, j, k, 0, 1.0 + std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma)));
    });
  } else {
    throw ConfigError("unknown preset '" + preset +
                      "' (expected uniform, uniform(v), gaussian-bump or random(seed))");
  }
}

namespace {

// "id,level,value" with nothing else on the line but surrounding blanks.
bool parse_row(const std::string& line, long& id, long& level, double& value) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (cells.size() != 3) return false;
  auto trimmed = [](const std::string& t) {
    const auto b = t.find_first_not_of(" \t\r");
    const auto e = t.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
  };
  auto whole = [](const std::string& t, auto& out) {
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    return !t.empty() && r.ec == std::errc() && r.ptr == t.data() + t.size();
  };
  return whole(trimmed(cells[0]), id) && whole(trimmed(cells[1]), level) &&
         whole(trimmed(cells[2]), value);
}

}  // namespace

void load_csv(Field& field, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  const PatchSpec& g = field.patch();
  const long count = static_cast<long>(field.element_count());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && !std::isdigit(static_cast<unsigned char>(line[0])) && line[0] != '-' &&
        line[0] != '+') {
      continue;  // header
    }
    long id = -1, level = -1;
    double value = 0;
    if (!parse_row(line, id, level, value)) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected id,level,value");
    }
    if (id < 0 || id >= count) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": element id " +
                        std::to_string(id) + " outside [0," + std::to_string(count) + ")");
    }
    if (level < 0 || level >= field.levels()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": level " +
                        std::to_string(level) + " outside [0," +
                        std::to_string(field.levels()) + ")");
    }
    const Coord x = structured_coord(g, field.location(), static_cast<int>(id));
    field.poke(x.i, x.c, x.j, static_cast<int>(level), 0, value);
  }
}

void precompute_weights(const Field& edge_length, const Field& cell_area, Field& weights) {
  if (edge_length.location() != L::kEdges || cell_area.location() != L::kCells ||
      weights.location() != L::kCells || weights.extra() != 3) {
    throw ConfigError("precompute_weights expects edge lengths, cell areas and a 3-wide cell field");
  }
  const PatchSpec& g = cell_area.patch();
  for (int i = 0; i < g.rows; ++i) {
    for (int c = 0; c < 2; ++c) {
      for (int j = 0; j < g.cols; ++j) {
        const double a = cell_area.peek(i, c, j);
        if (!(a > 0)) throw ConfigError("cell_area must be positive");
        const auto off = structured_offsets(L::kCells, L::kEdges, c).entries;
        for (int n = 0; n < 3; ++n) {
          const double l = edge_length.peek(wrap_index(i + off[n].di, g.rows), off[n].color,
                                            wrap_index(j + off[n].dj, g.cols));
          if (!(l > 0)) throw ConfigError("edge_length must be positive");
          for (int k = 0; k < weights.levels(); ++k) weights.poke(i, c, j, k, n, l / a);
        }
      }
    }
  }
}

StageSpec upwind_flux_stage(const std::string& flux, const std::string& pD, const std::string& vn) {
  return make_stage<UpwindFlux>("upwind_flux", L::kEdges, {flux, pD, vn});
}

StageSpec centred_flux_stage(const std::string& flux, const std::string& pD, const std::string& vn) {
  return make_stage<CentredFlux>("centred_flux", L::kEdges, {flux, pD, vn});
}

StageSpec upwind_fluz_stage(const std::string& fluz, const std::string& pD, const std::string& wn,
                            const std::string& pivbz, VerticalBoundary boundary) {
  if (boundary == VerticalBoundary::kScaledCopy) {
    return make_stage<UpwindFluz<VerticalBoundary::kScaledCopy>>("upwind_fluz", L::kVertices,
                                                                 {fluz, pD, wn, pivbz});
  }
  return make_stage<UpwindFluz<VerticalBoundary::kScaledEverywhere>>(
      "upwind_fluz", L::kVertices, {fluz, pD, wn, pivbz});
}

StageSpec fluxdiv_stage(const std::string& divVD, const std::string& flux, const std::string& fluz,
                        const std::string& dual_volumes, const std::string& edge_signs) {
  return make_stage<FluxDiv>("fluxdiv", L::kVertices,
                             {divVD, flux, fluz, dual_volumes, edge_signs});
}

StageSpec advance_solution_stage(const std::string& pD, const std::string& divVD,
                                 const std::string& rho, const std::string& dt) {
  return make_stage<AdvanceSolution>("advance_solution", L::kVertices, {pD, divVD, rho, dt});
}

StageSpec div_simple_stage(const std::string& div, const std::string& vn,
                           const std::string& edge_length, const std::string& cell_area) {
  return make_stage<DivSimple>("div_simple", L::kCells, {div, vn, edge_length, cell_area});
}

StageSpec div_precomputed_stage(const std::string& div, const std::string& flux,
                                const std::string& weights) {
  return make_stage<DivPrecomputed>("div_precomputed", L::kCells, {div, flux, weights});
}

Computation build_mpdata_computation(MpdataFields& f, const MpdataParams& params) {
  const PatchSpec& g = f.pD.patch();
  if (g.levels < 2) {
    throw ConfigError("MPDATA needs levels >= 2 for an interior vertical flux, got " +
                      std::to_string(g.levels));
  }
  if (!(params.dt >= 0)) throw ConfigError("dt must be >= 0");
  for_compute_domain(f.rho, [&](int i, int c, int j, int k) {
    if (f.rho.peek(i, c, j, k) == 0.0) {
      throw ConfigError("rho is zero at vertex (" + std::to_string(i) + "," +
                        std::to_string(j) + ") level " + std::to_string(k));
    }
  });
  Bindings b;
  b.bind("pD", f.pD)
      .bind("vn", f.vn)
      .bind("wn", f.wn)
      .bind("rho", f.rho)
      .bind("flux", f.flux)
      .bind("fluz", f.fluz)
      .bind("divVD", f.divVD)
      .bind("dual_volumes", f.dual_volumes)
      .bind("edge_signs", f.edge_signs)
      .bind("pivbz", params.pivbz)
      .bind("dt", params.dt);
  MultiStageSpec ms = make_multistage(
      ExecutionPolicy::kForward, cache({"flux", "fluz", "divVD"}),
      upwind_flux_stage("flux", "pD", "vn"),
      upwind_fluz_stage("fluz", "pD", "wn", "pivbz", params.boundary),
      fluxdiv_stage("divVD", "flux", "fluz", "dual_volumes", "edge_signs"),
      advance_solution_stage("pD", "divVD", "rho", "dt"));
  ms.name = "upwind_fluxes";
  return compose(g, std::move(b), {std::move(ms)});
}

std::vector<double> to_flat(const Field& field, const Permutation& perm) {
  if (perm.location != field.location()) throw ConfigError("permutation location mismatch");
  const PatchSpec& g = field.patch();
  const std::size_t n = field.element_count();
  const int levels = field.levels(), extra = field.extra();
  std::vector<double> flat(n * levels * extra);
  for (std::size_t id = 0; id < n; ++id) {
    const Coord x = structured_coord(g, field.location(), static_cast<int>(id));
    const std::size_t r = perm.forward[id];
    for (int e = 0; e < extra; ++e)
      for (int k = 0; k < levels; ++k)
        flat[(static_cast<std::size_t>(e) * levels + k) * n + r] = field.peek(x.i, x.c, x.j, k, e);
  }
  return flat;
}

void from_flat(Field& field, const Permutation& perm, const std::vector<double>& flat) {
  if (perm.location != field.location()) throw ConfigError("permutation location mismatch");
  const PatchSpec& g = field.patch();
  const std::size_t n = field.element_count();
  const int levels = field.levels(), extra = field.extra();
  if (flat.size() != n * levels * extra) throw ConfigError("flat array size mismatch");
  for (std::size_t id = 0; id < n; ++id) {
    const Coord x = structured_coord(g, field.location(), static_cast<int>(id));
    const std::size_t r = perm.forward[id];
    for (int e = 0; e < extra; ++e)
      for (int k = 0; k < levels; ++k)
        field.poke(x.i, x.c, x.j, k, e, flat[(static_cast<std::size_t>(e) * levels + k) * n + r]);
  }
}

OracleTables make_oracle_tables(const MeshOracle& mesh, const Permutation& vertices,
                                const Permutation& edges) {
  return {build_neighbor_table(mesh, L::kEdges, L::kVertices, edges, vertices),
          build_neighbor_table(mesh, L::kVertices, L::kEdges, vertices, edges, true)};
}

void reference_oracle_step(OracleState& s, const OracleTables& t, const MpdataParams& params) {
  const int nlev = s.levels;
  const std::size_t nv = t.vertex_edges.size();
  const std::size_t ne = t.edge_vertices.size();
  std::vector<double> flux(nlev * ne), fluz((nlev + 1) * nv), div(nlev * nv);

  for (std::size_t e = 0; e < ne; ++e) {
    const auto ends = t.edge_vertices.neighbors(static_cast<int>(e));
    for (int k = 0; k < nlev; ++k) {
      const double zpos = std::max(0.0, s.vn[k * ne + e]);
      const double zneg = std::min(0.0, s.vn[k * ne + e]);
      flux[k * ne + e] = s.pD[k * nv + ends[0]] * zpos + s.pD[k * nv + ends[1]] * zneg;
    }
  }

  const double pivbz = params.pivbz;
  for (std::size_t v = 0; v < nv; ++v) {
    auto pd = [&](int k) { return s.pD[k * nv + v]; };
    auto w = [&](int k) { return s.wn[k * nv + v]; };
    if (params.boundary == VerticalBoundary::kScaledCopy) {
      for (int k = 1; k < nlev; ++k) {
        fluz[k * nv + v] = std::max(0.0, w(k)) * pd(k - 1) + std::min(0.0, w(k)) * pd(k);
      }
      fluz[v] = pivbz * fluz[nv + v];
    } else {
      for (int k = 1; k < nlev; ++k) {
        fluz[k * nv + v] =
            pivbz * (std::max(0.0, w(k) * pd(k - 1)) + std::min(0.0, w(k) * pd(k)));
      }
      fluz[v] = pivbz * (std::max(0.0, w(1) * pd(0)) + std::min(0.0, w(1) * pd(1)));
    }
    fluz[nlev * nv + v] = pivbz * fluz[(nlev - 1) * nv + v];
  }

  for (std::size_t v = 0; v < nv; ++v) {
    const auto edges = t.vertex_edges.neighbors(static_cast<int>(v));
    const auto signs = t.vertex_edges.neighbor_signs(static_cast<int>(v));
    for (int k = 0; k < nlev; ++k) {
      double acc = 0.0;
      for (std::size_t n = 0; n < edges.size(); ++n) {
        acc += static_cast<double>(signs[n]) * flux[k * ne + edges[n]];
      }
      div[k * nv + v] = (acc + (fluz[(k + 1) * nv + v] - fluz[k * nv + v])) / s.dual_volumes[v];
    }
  }

  for (std::size_t x = 0; x < nlev * nv; ++x) {
    s.pD[x] = s.pD[x] - params.dt * div[x] / s.rho[x];
  }
}

}  // namespace trigrid

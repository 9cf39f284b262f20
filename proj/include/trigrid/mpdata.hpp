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

#include <cstdint>
#include <string>
#include <vector>

#include "trigrid/connectivity.hpp"
#include "trigrid/field.hpp"
#include "trigrid/layout.hpp"
#include "trigrid/mesh_oracle.hpp"
#include "trigrid/stencil.hpp"

namespace trigrid {

// How the bottom interface flux is formed.
enum class VerticalBoundary : std::uint8_t {
  // fluz(0) = pivbz * fluz(1); products taken after clipping the velocity.
  kScaledCopy,
  // Every level scaled by pivbz and products clipped instead of the
  // velocity: fluz(0) = pivbz * (max(0, wn(1) pD(0)) + min(0, wn(1) pD(1))).
  kScaledEverywhere,
};

struct MpdataParams {
  double pivbz = 1.0;
  double dt = 0.1;
  VerticalBoundary boundary = VerticalBoundary::kScaledCopy;
};

struct MpdataFields {
  Field pD, vn, wn, rho, flux, fluz, divVD;
  Field dual_volumes, edge_signs;
  Field edge_length, cell_area, weights;
};

MpdataFields make_mpdata_fields(const PatchSpec& patch, const FieldOptions& options = {});

enum class GeometryMode : std::uint8_t { kUnit, kRandom };

// Unit equilateral geometry (l = 1, A = sqrt(3)/4, dual = sqrt(3)/2) or
// random positive values; signs from assign_edge_signs, weights = l/A.
void init_geometry(MpdataFields& f, GeometryMode mode, std::uint64_t seed = 0);

// Random state: pD in [0.5, 1.5), vn and wn in [-1, 1), rho in [0.5, 1.5)
// (or 1 when unit_rho). Halos are left for the executor to fill.
void randomize_state(MpdataFields& f, std::uint64_t seed, bool unit_rho = false);

// Named presets: "uniform", "uniform(v)", "gaussian-bump", "random(seed)".
void apply_preset(Field& field, const std::string& preset);
// CSV rows "element_id,level,value" (structured ids); '#' lines skipped.
void load_csv(Field& field, const std::string& path);

// weights(cell, n) = l(n-th edge of cell) / A(cell), n in cell->edge order.
void precompute_weights(const Field& edge_length, const Field& cell_area, Field& weights);

// Stages, each usable on its own.
StageSpec upwind_flux_stage(const std::string& flux, const std::string& pD, const std::string& vn);
StageSpec centred_flux_stage(const std::string& flux, const std::string& pD, const std::string& vn);
StageSpec upwind_fluz_stage(const std::string& fluz, const std::string& pD, const std::string& wn,
                            const std::string& pivbz, VerticalBoundary boundary);
StageSpec fluxdiv_stage(const std::string& divVD, const std::string& flux, const std::string& fluz,
                        const std::string& dual_volumes, const std::string& edge_signs);
StageSpec advance_solution_stage(const std::string& pD, const std::string& divVD,
                                 const std::string& rho, const std::string& dt);
StageSpec div_simple_stage(const std::string& div, const std::string& vn,
                           const std::string& edge_length, const std::string& cell_area);
StageSpec div_precomputed_stage(const std::string& div, const std::string& flux,
                                const std::string& weights);

// One forward multistage: upwind_flux, upwind_fluz, fluxdiv, advance_solution
// with flux, fluz and divVD cached. Throws ConfigError for K < 2, dt < 0 or
// a zero rho.
Computation build_mpdata_computation(MpdataFields& f, const MpdataParams& params);

// Flat storage [level * N + rank] in a permuted numbering.
std::vector<double> to_flat(const Field& field, const Permutation& perm);
void from_flat(Field& field, const Permutation& perm, const std::vector<double>& flat);

// Plain-loop state for the reference step.
struct OracleState {
  int levels = 0;
  std::vector<double> pD, vn, wn, rho, dual_volumes;
};

struct OracleTables {
  NeighborTable edge_vertices;  // edge -> its two endpoints
  NeighborTable vertex_edges;   // vertex -> edges, with signs
};

OracleTables make_oracle_tables(const MeshOracle& mesh, const Permutation& vertices,
                                const Permutation& edges);

// One upwind step with explicit loops over neighbor tables. Updates s.pD.
void reference_oracle_step(OracleState& s, const OracleTables& t, const MpdataParams& params);

}  // namespace trigrid

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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "trigrid/field.hpp"
#include "trigrid/stencil.hpp"

namespace trigrid {

enum class ExecutorKind : std::uint8_t { kNaive, kFused };

std::string_view name(ExecutorKind kind);
ExecutorKind parse_executor(std::string_view text);

// Horizontal tile in diamond rows/columns; 0 means the whole compute domain.
struct TileSpec {
  int i = 0;
  int j = 0;
};

struct RunOptions {
  ExecutorKind executor = ExecutorKind::kNaive;
  TileSpec tile{};
  int workers = 1;
  // Bounds and cache-residency checks on every access.
  bool check = false;
};

struct RunStats {
  std::vector<std::pair<std::string, double>> multistage_seconds;
  // Body invocations per stage, apron recomputation included.
  std::map<std::string, std::uint64_t> updates;
  double seconds = 0.0;
};

// Fills the halo of the primary space with periodic images. Uncounted.
void halo_update(Field& field);

// Stage by stage over the full compute domain; every intermediate goes
// through memory and every output is halo-updated after its stage.
RunStats run_naive(const Computation& comp, const RunOptions& options = {});

// One pass per tile: stages interleaved level by level, cached fields kept
// in per-tile sliding windows and recomputed on an apron around the tile.
RunStats run_fused(const Computation& comp, const RunOptions& options = {});

RunStats run(const Computation& comp, const RunOptions& options);

// Per-stage aprons and vertical lags of the fused schedule.
struct FusedPlan {
  std::vector<Extent> apron;      // horizontal region grown around the tile
  std::vector<int> lag;           // steps a stage trails the sweep front
  std::vector<int> window;        // resident levels per cached output, 0 if none
  std::vector<bool> shadowed;     // output written to a shadow buffer
  int steps = 0;
};

// Throws CompositionError(kFusionHazard) when the multistage cannot be fused.
FusedPlan plan_fused(const Computation& comp, std::size_t multistage);

struct TimingResult {
  double median = 0.0;
  std::vector<double> samples;
};

// One warm-up run, then `reps` timed runs with traffic counting disabled.
TimingResult time_computation(const Computation& comp, const RunOptions& options,
                              int reps = 10);

}  // namespace trigrid

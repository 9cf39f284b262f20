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
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace trigrid {

struct BenchConfig {
  int rows = 128;
  int cols = 128;
  int levels = 80;
  int halo = 1;
  // Empty numbering/access/executor select every legal value.
  std::string numbering;
  std::string access;
  std::string executor;
  int tile_i = 0;
  int tile_j = 0;
  int workers = 1;
  int alignment = 8;
  std::string layout = "xkicj";
  int reps = 10;
  std::uint64_t seed = 1;
  std::string out;
  bool ignore_2d = false;
  std::optional<long long> nodes_override;
  std::optional<long long> edges_override;
  bool assert_speedup = false;
  double dt = 0.1;
  double pivbz = 1.0;
  std::string init = "gaussian-bump";
  std::string init_csv;
  // Negative controls for verify.
  bool inject_sign_fault = false;
  bool inject_offset_fault = false;

  // Throws ConfigError on any inconsistent combination.
  void validate() const;
};

struct BenchRecord {
  std::string experiment;
  std::string numbering;
  std::string access;
  std::string executor;
  int rows = 0;
  int cols = 0;
  int levels = 0;
  std::string metric;
  double value = 0.0;
  std::string units;

  // Wall-clock derived; excluded from the determinism contract.
  bool timing() const { return units == "seconds" || units == "GB/s" || units == "speedup"; }
};

struct BenchResult {
  std::vector<BenchRecord> records;
  // False when an asserted invariant failed.
  bool ok = true;
};

BenchResult run_indexing(const BenchConfig& config);
BenchResult run_fusion(const BenchConfig& config);
BenchResult run_mpdata(const BenchConfig& config);
BenchResult run_verify(const BenchConfig& config);
// Structured offset tables of the nine relations as
// "from,to,color,entry,di,to_color,dj" CSV.
void write_connectivity(std::ostream& os);

// Table 2 style totals: edges * (er + ew) + nodes * (nr + nw).
long long paper_traffic_total(long long nodes, long long edges, int edge_reads, int edge_writes,
                              int node_reads, int node_writes);

inline constexpr const char* kCsvHeader =
    "experiment,numbering,access,executor,rows,cols,levels,metric,value,units";

// Header plus records in configuration-lexicographic order.
void write_csv(std::vector<BenchRecord> records, std::ostream& os);
// Throws ConfigError naming the path when it cannot be written.
void emit_csv(const std::vector<BenchRecord>& records, const std::string& path);

}  // namespace trigrid

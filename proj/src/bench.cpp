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

#include "trigrid/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <tuple>

#include "trigrid/connectivity.hpp"
#include "trigrid/executor.hpp"
#include "trigrid/kernels.hpp"
#include "trigrid/layout.hpp"
#include "trigrid/mesh_oracle.hpp"
#include "trigrid/mpdata.hpp"

namespace trigrid {

namespace {

using L = LocationType;
constexpr int kLanes = 8;
constexpr long long kPaperNodes = 71424;
constexpr long long kPaperEdges = 213199;

PatchSpec patch_of(const BenchConfig& c) { return {c.rows, c.cols, c.levels, c.halo}; }

FieldOptions options_of(const BenchConfig& c) {
  FieldOptions o;
  o.layout = LayoutSpec::parse(c.layout, c.alignment, c.halo);
  return o;
}

struct Recorder {
  const BenchConfig& cfg;
  std::string experiment;
  std::vector<BenchRecord> records;

  void add(std::string_view numbering, std::string_view access, std::string_view executor,
           std::string metric, double value, std::string units) {
    records.push_back({experiment, std::string(numbering), std::string(access),
                       std::string(executor), cfg.rows, cfg.cols, cfg.levels, std::move(metric),
                       value, std::move(units)});
  }
};

std::vector<ExecutorKind> executors_of(const BenchConfig& c) {
  if (!c.executor.empty()) return {parse_executor(c.executor)};
  return {ExecutorKind::kNaive, ExecutorKind::kFused};
}

RunOptions run_options(const BenchConfig& c, ExecutorKind e) {
  RunOptions o;
  o.executor = e;
  o.tile = {c.tile_i, c.tile_j};
  o.workers = c.workers;
  return o;
}

std::vector<const Field*> mpdata_bound(const MpdataFields& f) {
  return {&f.pD, &f.vn, &f.wn, &f.rho, &f.flux, &f.fluz, &f.divVD, &f.dual_volumes, &f.edge_signs};
}

std::vector<const Field*> kernel_bound(const KernelFields& f, Kernel k) {
  if (k == Kernel::kK1) return {&f.A, &f.B};
  return {&f.A, &f.B, &f.tmp, &f.fac1};
}

template <class Fields>
void reset(const Fields& fields) {
  for (const Field* f : fields) const_cast<Field*>(f)->reset_counters();
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Sum of pD * dual_volumes over the compute domain.
double mass(const Field& pD, const Field& dual) {
  const PatchSpec& g = pD.patch();
  double m = 0.0;
  for (int k = 0; k < pD.levels(); ++k)
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) m += pD.peek(i, 0, j, k) * dual.peek(i, 0, j);
  return m;
}

// Published Table 1 bandwidths (GB/s), informational only.
double published_bandwidth(Kernel k, Numbering n, AccessMethod a) {
  const bool k1 = k == Kernel::kK1;
  if (a == AccessMethod::kDirect) return k1 ? 211 : 226;
  switch (n) {
    case Numbering::kSN: return k1 ? 270 : 269;
    case Numbering::kUN: return k1 ? 130 : 135;
    case Numbering::kHN: return k1 ? 256 : 240;
  }
  return 0;
}

struct MpdataSetup {
  MpdataFields f;
  MpdataParams p;
};

MpdataSetup make_mpdata(const PatchSpec& g, const FieldOptions& opts, GeometryMode geometry,
                        std::uint64_t seed, const MpdataParams& p, bool unit_rho) {
  MpdataSetup s{make_mpdata_fields(g, opts), p};
  init_geometry(s.f, geometry, seed);
  randomize_state(s.f, seed, unit_rho);
  return s;
}

OracleState oracle_state(const MpdataFields& f, const Permutation& pv, const Permutation& pe) {
  return {f.pD.levels(), to_flat(f.pD, pv), to_flat(f.vn, pe), to_flat(f.wn, pv),
          to_flat(f.rho, pv), to_flat(f.dual_volumes, pv)};
}

Numbering edge_numbering(Numbering vertices) {
  return numbering_defined(vertices, L::kEdges) ? vertices : Numbering::kUN;
}

}  // namespace

void BenchConfig::validate() const {
  patch_of(*this).validate();
  if (!numbering.empty()) parse_numbering(numbering);
  if (!access.empty()) parse_access(access);
  if (!executor.empty()) parse_executor(executor);
  if (!numbering.empty() && !access.empty()) {
    validate_combination(parse_numbering(numbering), parse_access(access));
  }
  if (!executor.empty() && access == "indirect") {
    throw ConfigError("--executor " + executor +
                      " applies to direct access only; indirect access runs plain loops");
  }
  if (!executor.empty() && !numbering.empty() && numbering != "sn") {
    throw ConfigError("--executor " + executor + " needs structured numbering (got " +
                      numbering + ")");
  }
  if (tile_i < 0 || tile_j < 0) throw ConfigError("--tile-i/--tile-j must be >= 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (alignment < 1) throw ConfigError("--align must be >= 1");
  LayoutSpec::parse(layout, alignment, halo);
  if (reps < 3) throw ConfigError("--reps must be >= 3, got " + std::to_string(reps));
  if (nodes_override && *nodes_override <= 0) throw ConfigError("--nodes-override must be > 0");
  if (edges_override && *edges_override <= 0) throw ConfigError("--edges-override must be > 0");
  if (!(dt >= 0)) throw ConfigError("dt must be >= 0");
}

long long paper_traffic_total(long long nodes, long long edges, int edge_reads, int edge_writes,
                              int node_reads, int node_writes) {
  return edges * (edge_reads + edge_writes) + nodes * (node_reads + node_writes);
}

BenchResult run_indexing(const BenchConfig& cfg) {
  cfg.validate();
  const PatchSpec g = patch_of(cfg);
  const FieldOptions opts = options_of(cfg);
  const MeshOracle mesh = MeshOracle::build(g);
  const Permutation sn = make_permutation(Numbering::kSN, mesh, L::kCells);

  std::vector<std::pair<Numbering, AccessMethod>> combos = {
      {Numbering::kSN, AccessMethod::kDirect},
      {Numbering::kSN, AccessMethod::kIndirect},
      {Numbering::kUN, AccessMethod::kIndirect},
      {Numbering::kHN, AccessMethod::kIndirect}};
  std::erase_if(combos, [&](const auto& c) {
    return (!cfg.numbering.empty() && c.first != parse_numbering(cfg.numbering)) ||
           (!cfg.access.empty() && c.second != parse_access(cfg.access));
  });

  Recorder rec{cfg, "indexing", {}};
  BenchResult result;
  for (Kernel kernel : {Kernel::kK1, Kernel::kK2}) {
    const std::string kn = kernel == Kernel::kK1 ? "k1_" : "k2_";
    // Reference run: direct access, instrumented.
    KernelFields ref = make_kernel_fields(g, opts);
    init_kernel_fields(ref, cfg.seed);
    const Computation ref_comp = build_kernel(kernel, ref);
    const auto bound = kernel_bound(ref, kernel);
    reset(bound);
    run_naive(ref_comp, {});
    const double bytes = 8.0 * traffic_report(bound, false, cfg.ignore_2d).distinct_total();
    const std::vector<double> expected = to_flat(ref.B, sn);

    for (const auto& [numbering, access] : combos) {
      const std::string_view nn = name(numbering), an = name(access);
      if (access == AccessMethod::kDirect) {
        for (ExecutorKind e : executors_of(cfg)) {
          KernelFields f = make_kernel_fields(g, opts);
          init_kernel_fields(f, cfg.seed);
          const Computation comp = build_kernel(kernel, f);
          for (const Field* p : kernel_bound(f, kernel)) const_cast<Field*>(p)->set_counting(false);
          run(comp, run_options(cfg, e));
          const bool same = bitwise_equal(to_flat(f.B, sn), expected);
          result.ok &= same;
          const double t = time_computation(comp, run_options(cfg, e), cfg.reps).median;
          const std::string_view en = name(e);
          rec.add(nn, an, en, kn + "compulsory_bytes", bytes, "bytes");
          rec.add(nn, an, en, kn + "coalescing_fraction",
                  coalescing_fraction(column_sweep(f.B.layout()), kLanes), "fraction");
          rec.add(nn, an, en, kn + "matches_reference", same, "bool");
          rec.add(nn, an, en, kn + "median_seconds", t, "seconds");
          rec.add(nn, an, en, kn + "effective_bandwidth", bytes / t / 1e9, "GB/s");
        }
      } else {
        KernelFields f = make_kernel_fields(g, opts);
        init_kernel_fields(f, cfg.seed);
        IndirectKernel ik = make_indirect_kernel(mesh, numbering, f);
        ik.run(kernel);
        std::vector<double> back(ik.B.size());
        const std::size_t n = ik.perm.size();
        for (int k = 0; k < ik.levels; ++k)
          for (std::size_t id = 0; id < n; ++id) back[k * n + id] = ik.B[k * n + ik.perm.forward[id]];
        const bool same = bitwise_equal(back, expected);
        result.ok &= same;
        std::vector<double> samples;
        ik.run(kernel);
        for (int r = 0; r < cfg.reps; ++r) {
          const auto t0 = std::chrono::steady_clock::now();
          ik.run(kernel);
          samples.push_back(
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        const double t = median(samples);
        rec.add(nn, an, "none", kn + "compulsory_bytes", bytes, "bytes");
        rec.add(nn, an, "none", kn + "coalescing_fraction",
                coalescing_fraction(column_sweep(ik.perm, g, ik.levels), kLanes), "fraction");
        rec.add(nn, an, "none", kn + "matches_reference", same, "bool");
        rec.add(nn, an, "none", kn + "median_seconds", t, "seconds");
        rec.add(nn, an, "none", kn + "effective_bandwidth", bytes / t / 1e9, "GB/s");
      }
      rec.add(nn, an, "reference", kn + "published_bandwidth",
              published_bandwidth(kernel, numbering, access), "GB/s (P100, informational)");
    }
  }
  result.records = std::move(rec.records);
  return result;
}

BenchResult run_fusion(const BenchConfig& cfg) {
  cfg.validate();
  Recorder rec{cfg, "fusion", {}};
  BenchResult result;

  const long long nodes = cfg.nodes_override.value_or(kPaperNodes);
  const long long edges = cfg.edges_override.value_or(kPaperEdges);
  const long long unfused = paper_traffic_total(nodes, edges, 1, 1, 7, 3);
  const long long fused = paper_traffic_total(nodes, edges, 0, 0, 4, 1);
  rec.add("sn", "direct", "naive", "model_nodes", double(nodes), "count");
  rec.add("sn", "direct", "naive", "model_edges", double(edges), "count");
  rec.add("sn", "direct", "naive", "model_total_per_plane", double(unfused), "accesses");
  rec.add("sn", "direct", "fused", "model_total_per_plane", double(fused), "accesses");
  rec.add("sn", "direct", "naive/fused", "model_ratio", double(unfused) / double(fused), "ratio");

  const PatchSpec g = patch_of(cfg);
  if (g.levels < 2) throw ConfigError("fusion needs --levels >= 2");
  const FieldOptions opts = options_of(cfg);
  MpdataParams params;
  params.dt = cfg.dt;
  params.pivbz = cfg.pivbz;
  const Permutation pv = make_permutation(Numbering::kSN, g, L::kVertices);
  const double n_nodes = double(element_count(g, L::kVertices));
  const double n_edges = double(element_count(g, L::kEdges));
  const double planes = g.levels;

  std::map<ExecutorKind, double> distinct, seconds;
  std::map<ExecutorKind, std::vector<double>> outputs;
  for (ExecutorKind e : {ExecutorKind::kNaive, ExecutorKind::kFused}) {
    MpdataSetup s = make_mpdata(g, opts, GeometryMode::kUnit, cfg.seed, params, false);
    const Computation comp = build_mpdata_computation(s.f, params);
    const auto bound = mpdata_bound(s.f);
    reset(bound);
    const RunStats stats = run(comp, run_options(cfg, e));
    outputs[e] = to_flat(s.f.pD, pv);
    const TrafficReport tr = traffic_report(bound, false, cfg.ignore_2d);
    const std::string_view en = name(e);
    const double nr = tr.distinct_reads(L::kVertices), nw = tr.distinct_writes(L::kVertices);
    const double er = tr.distinct_reads(L::kEdges), ew = tr.distinct_writes(L::kEdges);
    distinct[e] = double(tr.distinct_total());
    rec.add("sn", "direct", en, "distinct_node_reads", nr, "accesses");
    rec.add("sn", "direct", en, "distinct_node_writes", nw, "accesses");
    rec.add("sn", "direct", en, "distinct_edge_reads", er, "accesses");
    rec.add("sn", "direct", en, "distinct_edge_writes", ew, "accesses");
    rec.add("sn", "direct", en, "distinct_total", distinct[e], "accesses");
    rec.add("sn", "direct", en, "node_reads_per_node_plane", nr / (n_nodes * planes), "per_element");
    rec.add("sn", "direct", en, "node_writes_per_node_plane", nw / (n_nodes * planes), "per_element");
    rec.add("sn", "direct", en, "edge_reads_per_edge_plane", er / (n_edges * planes), "per_element");
    rec.add("sn", "direct", en, "edge_writes_per_edge_plane", ew / (n_edges * planes), "per_element");
    std::uint64_t updates = 0;
    for (const auto& [stage, u] : stats.updates) {
      rec.add("sn", "direct", en, "updates_" + stage, double(u), "count");
      updates += u;
    }
    for (const Field* f : bound) const_cast<Field*>(f)->set_counting(false);
    seconds[e] = time_computation(comp, run_options(cfg, e), cfg.reps).median;
    rec.add("sn", "direct", en, "median_seconds", seconds[e], "seconds");
    rec.add("sn", "direct", en, "seconds_per_update", seconds[e] / double(updates), "seconds");
  }
  const double ratio = distinct[ExecutorKind::kNaive] / distinct[ExecutorKind::kFused];
  const bool same = bitwise_equal(outputs[ExecutorKind::kNaive], outputs[ExecutorKind::kFused]);
  rec.add("sn", "direct", "naive/fused", "distinct_ratio", ratio, "ratio");
  rec.add("sn", "direct", "naive/fused", "bitwise_equal", same, "bool");
  rec.add("sn", "direct", "naive/fused", "measured_speedup",
          seconds[ExecutorKind::kNaive] / seconds[ExecutorKind::kFused], "speedup");
  rec.add("sn", "direct", "reference", "published_speedup_vs_directives", 2.1,
          "speedup (K80, informational)");
  result.ok = same && ratio >= 2.0;
  if (cfg.assert_speedup) {
    const bool faster = seconds[ExecutorKind::kFused] <= seconds[ExecutorKind::kNaive];
    rec.add("sn", "direct", "naive/fused", "assert_speedup", faster, "bool");
    result.ok &= faster;
  }
  result.records = std::move(rec.records);
  return result;
}

BenchResult run_mpdata(const BenchConfig& cfg) {
  cfg.validate();
  Recorder rec{cfg, "mpdata", {}};
  BenchResult result;
  const PatchSpec g = patch_of(cfg);
  const FieldOptions opts = options_of(cfg);
  MpdataParams params;
  params.dt = cfg.dt;
  params.pivbz = cfg.pivbz;
  const Numbering nv = cfg.numbering.empty() ? Numbering::kSN : parse_numbering(cfg.numbering);
  const MeshOracle mesh = MeshOracle::build(g);
  const Permutation pv = make_permutation(nv, mesh, L::kVertices);
  const Permutation pe = make_permutation(edge_numbering(nv), mesh, L::kEdges);
  const Permutation sv = make_permutation(Numbering::kSN, mesh, L::kVertices);

  auto setup = [&] {
    MpdataSetup s = make_mpdata(g, opts, GeometryMode::kUnit, cfg.seed, params, true);
    if (!cfg.init_csv.empty()) {
      s.f.pD.fill(0.0);
      load_csv(s.f.pD, cfg.init_csv);
    } else {
      apply_preset(s.f.pD, cfg.init);
    }
    return s;
  };

  MpdataSetup base = setup();
  OracleState os = oracle_state(base.f, pv, pe);
  reference_oracle_step(os, make_oracle_tables(mesh, pv, pe), params);
  std::vector<double> oracle(os.pD.size());
  const std::size_t n = pv.size();
  for (int k = 0; k < os.levels; ++k)
    for (std::size_t id = 0; id < n; ++id) oracle[k * n + id] = os.pD[k * n + pv.forward[id]];

  for (ExecutorKind e : executors_of(cfg)) {
    MpdataSetup s = setup();
    const double before = mass(s.f.pD, s.f.dual_volumes);
    const Computation comp = build_mpdata_computation(s.f, params);
    const RunStats stats = run(comp, run_options(cfg, e));
    const double after = mass(s.f.pD, s.f.dual_volumes);
    const std::vector<double> out = to_flat(s.f.pD, sv);
    const bool same = bitwise_equal(out, oracle);
    result.ok &= same;
    const std::string_view en = name(e);
    rec.add(name(nv), "direct", en, "oracle_bitwise_equal", same, "bool");
    rec.add(name(nv), "direct", en, "mass_before", before, "mass");
    rec.add(name(nv), "direct", en, "mass_after", after, "mass");
    rec.add(name(nv), "direct", en, "mass_relative_change", std::abs(after - before) / std::abs(before),
            "ratio");
    rec.add(name(nv), "direct", en, "pd_min", *std::min_element(out.begin(), out.end()), "value");
    rec.add(name(nv), "direct", en, "pd_max", *std::max_element(out.begin(), out.end()), "value");
    rec.add(name(nv), "direct", en, "step_seconds", stats.seconds, "seconds");
  }
  result.records = std::move(rec.records);
  return result;
}

namespace {

struct VerifyContext {
  const BenchConfig& cfg;
  Recorder& rec;
  bool ok = true;

  void check(const std::string& name, bool pass) {
    rec.add("", "", "", name, pass ? 1.0 : 0.0, "pass");
    ok &= pass;
  }
};

void corrupt_sign(MpdataFields& f) {
  f.edge_signs.poke(0, 0, 0, 0, 0, -f.edge_signs.peek(0, 0, 0, 0, 0));
}

bool check_connectivity() {
  for (int I = 2; I <= 8; ++I) {
    for (int J = 2; J <= 8; ++J) {
      const MeshOracle mesh = MeshOracle::build({I, J, 1, 1});
      for (L from : kAllLocations)
        for (L to : kAllLocations)
          if (connectivity_mismatches(mesh, from, to) != 0) return false;
    }
  }
  return true;
}

bool check_permutations() {
  for (int I = 2; I <= 8; ++I) {
    for (int J = 2; J <= 8; ++J) {
      const PatchSpec g{I, J, 1, 1};
      for (Numbering n : {Numbering::kSN, Numbering::kUN, Numbering::kHN})
        for (L loc : kAllLocations)
          if (numbering_defined(n, loc) && !make_permutation(n, g, loc).is_bijection()) return false;
    }
  }
  return true;
}

bool check_hilbert() {
  for (long n = 2; n <= 32; n *= 2) {
    std::vector<std::pair<long, long>> at(n * n, {-1, -1});
    for (long x = 0; x < n; ++x)
      for (long y = 0; y < n; ++y) {
        const long r = hilbert_rank(n, x, y);
        if (r < 0 || r >= n * n || at[r].first >= 0) return false;
        at[r] = {x, y};
      }
    for (long r = 1; r < n * n; ++r) {
      if (std::abs(at[r].first - at[r - 1].first) + std::abs(at[r].second - at[r - 1].second) != 1)
        return false;
    }
  }
  return true;
}

bool check_layouts() {
  for (const char* order : {"xkicj", "xkcij", "kxicj"}) {
    for (int a : {1, 4, 8}) {
      for (int H : {0, 1, 2}) {
        const PatchSpec g{3, 5, 2, H};
        const LayoutSpec spec = LayoutSpec::parse(order, a, H);
        for (L loc : kAllLocations) {
          const Layout lay(spec, g, loc, g.levels, 1);
          if (lay.strides()[2] != 1) return false;
          for (int k = 0; k < g.levels; ++k)
            for (int i = 0; i < g.rows; ++i)
              for (int c = 0; c < colors(loc); ++c)
                if (lay.offset(i, c, 0, k) % a != 0) return false;
        }
      }
    }
  }
  return true;
}

bool check_executor_equivalence(std::uint64_t seed0, bool sign_fault) {
  const PatchSpec g{4, 4, 4, 1};
  for (std::uint64_t seed = seed0; seed < seed0 + 5; ++seed) {
    MpdataParams p;
    p.pivbz = 0.5;
    MpdataSetup a = make_mpdata(g, {}, GeometryMode::kRandom, seed, p, false);
    MpdataSetup b = make_mpdata(g, {}, GeometryMode::kRandom, seed, p, false);
    if (sign_fault) {
      corrupt_sign(a.f);
      corrupt_sign(b.f);
    }
    run_naive(build_mpdata_computation(a.f, p));
    run_fused(build_mpdata_computation(b.f, p), {ExecutorKind::kFused, {3, 2}, 2, true});
    const Permutation pv = make_permutation(Numbering::kSN, g, L::kVertices);
    if (!bitwise_equal(to_flat(a.f.pD, pv), to_flat(b.f.pD, pv))) return false;
    for (Kernel k : {Kernel::kK1, Kernel::kK2}) {
      KernelFields x = make_kernel_fields(g), y = make_kernel_fields(g);
      init_kernel_fields(x, seed);
      init_kernel_fields(y, seed);
      run_naive(build_kernel(k, x));
      run_fused(build_kernel(k, y), {ExecutorKind::kFused, {2, 3}, 2, true});
      const Permutation pc = make_permutation(Numbering::kSN, g, L::kCells);
      if (!bitwise_equal(to_flat(x.B, pc), to_flat(y.B, pc))) return false;
    }
  }
  return true;
}

bool check_oracle_equivalence(std::uint64_t seed0, bool sign_fault) {
  const PatchSpec g{5, 6, 4, 1};
  const MeshOracle mesh = MeshOracle::build(g);
  const Permutation sv = make_permutation(Numbering::kSN, mesh, L::kVertices);
  for (Numbering n : {Numbering::kSN, Numbering::kUN, Numbering::kHN}) {
    const Permutation pv = make_permutation(n, mesh, L::kVertices);
    const Permutation pe = make_permutation(edge_numbering(n), mesh, L::kEdges);
    const OracleTables tables = make_oracle_tables(mesh, pv, pe);
    for (std::uint64_t seed = seed0; seed < seed0 + 3; ++seed) {
      MpdataParams p;
      p.pivbz = 0.7;
      MpdataSetup s = make_mpdata(g, {}, GeometryMode::kRandom, seed, p, false);
      OracleState os = oracle_state(s.f, pv, pe);
      if (sign_fault) corrupt_sign(s.f);
      run_naive(build_mpdata_computation(s.f, p));
      reference_oracle_step(os, tables, p);
      const std::vector<double> got = to_flat(s.f.pD, pv);
      if (!bitwise_equal(got, os.pD)) return false;
    }
  }
  (void)sv;
  return true;
}

bool check_conservation(std::uint64_t seed0, bool sign_fault) {
  const PatchSpec g{6, 5, 3, 1};
  for (std::uint64_t seed = seed0; seed < seed0 + 5; ++seed) {
    MpdataParams p;
    p.pivbz = 0.0;
    MpdataSetup s = make_mpdata(g, {}, GeometryMode::kRandom, seed, p, true);
    if (sign_fault) corrupt_sign(s.f);
    const double before = mass(s.f.pD, s.f.dual_volumes);
    run_naive(build_mpdata_computation(s.f, p));
    const double after = mass(s.f.pD, s.f.dual_volumes);
    if (!(std::abs(after - before) <= 1e-12 * std::abs(before))) return false;
  }
  return true;
}

bool check_relabeling(std::uint64_t seed) {
  const PatchSpec g{6, 5, 3, 1};
  const MeshOracle mesh = MeshOracle::build(g);
  const Permutation sn = make_permutation(Numbering::kSN, mesh, L::kCells);
  for (Kernel k : {Kernel::kK1, Kernel::kK2}) {
    KernelFields f = make_kernel_fields(g);
    init_kernel_fields(f, seed);
    run_naive(build_kernel(k, f));
    const std::vector<double> expected = to_flat(f.B, sn);
    for (Numbering n : {Numbering::kSN, Numbering::kUN, Numbering::kHN}) {
      IndirectKernel ik = make_indirect_kernel(mesh, n, f);
      ik.run(k);
      const std::size_t count = ik.perm.size();
      for (int lev = 0; lev < ik.levels; ++lev)
        for (std::size_t id = 0; id < count; ++id)
          if (std::memcmp(&ik.B[lev * count + ik.perm.forward[id]], &expected[lev * count + id],
                          sizeof(double)) != 0)
            return false;
    }
  }
  return true;
}

}  // namespace

BenchResult run_verify(const BenchConfig& cfg) {
  cfg.validate();
  Recorder rec{cfg, "verify", {}};
  VerifyContext v{cfg, rec};
  std::optional<testing::ScopedOffsetFault> fault;
  if (cfg.inject_offset_fault) {
    fault.emplace(L::kVertices, L::kEdges, 0, 0, structured_offsets(L::kVertices, L::kEdges, 0).entries[1]);
  }
  const bool sf = cfg.inject_sign_fault;
  v.check("connectivity_vs_oracle", check_connectivity());
  v.check("permutation_bijection", check_permutations());
  v.check("hilbert_bijection_adjacency", check_hilbert());
  v.check("layout_contracts", check_layouts());
  v.check("executor_equivalence", check_executor_equivalence(cfg.seed, sf));
  v.check("oracle_equivalence", check_oracle_equivalence(cfg.seed, sf));
  v.check("conservation", check_conservation(cfg.seed, sf));
  v.check("relabeling_invariance", check_relabeling(cfg.seed));
  return {std::move(rec.records), v.ok};
}

void write_connectivity(std::ostream& os) {
  os << "from,to,color,entry,di,to_color,dj\n";
  for (L from : kAllLocations) {
    for (L to : kAllLocations) {
      for (int c = 0; c < colors(from); ++c) {
        const auto entries = structured_offsets(from, to, c).entries;
        for (std::size_t n = 0; n < entries.size(); ++n) {
          os << name(from) << ',' << name(to) << ',' << c << ',' << n << ',' << entries[n].di
             << ',' << entries[n].color << ',' << entries[n].dj << '\n';
        }
      }
    }
  }
}

void write_csv(std::vector<BenchRecord> records, std::ostream& os) {
  std::stable_sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tie(a.experiment, a.numbering, a.access, a.executor, a.rows, a.cols, a.levels,
                    a.metric) < std::tie(b.experiment, b.numbering, b.access, b.executor, b.rows,
                                         b.cols, b.levels, b.metric);
  });
  os << kCsvHeader << '\n';
  for (const BenchRecord& r : records) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), r.value);
    os << r.experiment << ',' << r.numbering << ',' << r.access << ',' << r.executor << ','
       << r.rows << ',' << r.cols << ',' << r.levels << ',' << r.metric << ','
       << std::string_view(buf, res.ptr - buf) << ',' << r.units << '\n';
  }
}

void emit_csv(const std::vector<BenchRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_csv(records, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace trigrid

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

// trigrid-bench: desk-scale experiments on the triangular patch, CSV output.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "trigrid/bench.hpp"
#include "trigrid/error.hpp"

namespace {

constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;

void emit(const trigrid::BenchResult& result, const std::string& out) {
  if (out.empty() || out == "-") {
    trigrid::write_csv(result.records, std::cout);
  } else {
    trigrid::emit_csv(result.records, out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  trigrid::BenchConfig cfg;
  CLI::App app{"Structured-grid stencil experiments on a triangular patch"};
  app.set_config("--config", "", "flat key=value file; flags given on the command line win");
  app.require_subcommand(1);

  app.add_option("--rows", cfg.rows, "rows of triangles")->capture_default_str();
  app.add_option("--cols", cfg.cols, "columns per row")->capture_default_str();
  app.add_option("--levels", cfg.levels, "vertical levels")->capture_default_str();
  app.add_option("--halo", cfg.halo, "halo width")->capture_default_str();
  app.add_option("--numbering", cfg.numbering, "sn, un or hn (default: all legal)");
  app.add_option("--access", cfg.access, "direct or indirect (default: all legal)");
  app.add_option("--executor", cfg.executor, "naive or fused (default: both)");
  app.add_option("--tile-i", cfg.tile_i, "tile rows, 0 = whole patch")->capture_default_str();
  app.add_option("--tile-j", cfg.tile_j, "tile columns, 0 = whole patch")->capture_default_str();
  app.add_option("--workers", cfg.workers, "worker threads")->capture_default_str();
  app.add_option("--align", cfg.alignment, "alignment in elements")->capture_default_str();
  app.add_option("--layout", cfg.layout, "dimension order, outermost first")->capture_default_str();
  app.add_option("--reps", cfg.reps, "timed repetitions (>= 3)")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--out", cfg.out, "CSV path, stdout if omitted");
  app.add_flag("--ignore-2d", cfg.ignore_2d, "leave 2D fields out of traffic counts");
  app.add_option("--nodes-override", cfg.nodes_override, "node count for traffic arithmetic");
  app.add_option("--edges-override", cfg.edges_override, "edge count for traffic arithmetic");
  app.add_flag("--assert-speedup", cfg.assert_speedup, "fail unless fused is at least as fast");
  app.add_option("--dt", cfg.dt, "MPDATA time step")->capture_default_str();
  app.add_option("--pivbz", cfg.pivbz, "vertical boundary scale")->capture_default_str();
  app.add_option("--init", cfg.init, "uniform, uniform(v), gaussian-bump or random(seed)")
      ->capture_default_str();
  app.add_option("--init-csv", cfg.init_csv, "pD initial values as element_id,level,value rows");
  app.add_flag("--inject-sign-fault", cfg.inject_sign_fault)->group("");
  app.add_flag("--inject-offset-fault", cfg.inject_offset_fault)->group("");

  auto* indexing = app.add_subcommand("indexing", "K1/K2 under the four numbering/access configs");
  auto* fusion = app.add_subcommand("fusion", "naive vs fused traffic and timing for MPDATA");
  auto* mpdata = app.add_subcommand("mpdata", "one MPDATA step checked against the reference");
  auto* verify = app.add_subcommand("verify", "run every invariant suite");
  auto* dump = app.add_subcommand("dump-connectivity", "print the structured offset tables");
  for (auto* sub : {indexing, fusion, mpdata, verify, dump}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*dump) {
      if (cfg.out.empty() || cfg.out == "-") {
        trigrid::write_connectivity(std::cout);
      } else {
        std::ofstream os(cfg.out);
        if (!os) throw trigrid::IoError("cannot write '" + cfg.out + "'");
        trigrid::write_connectivity(os);
      }
      return 0;
    }
    trigrid::BenchResult result;
    if (*indexing) result = trigrid::run_indexing(cfg);
    if (*fusion) result = trigrid::run_fusion(cfg);
    if (*mpdata) result = trigrid::run_mpdata(cfg);
    if (*verify) result = trigrid::run_verify(cfg);
    emit(result, cfg.out);
    if (!result.ok) {
      std::cerr << "trigrid-bench: invariant check failed\n";
      return kExitInvariant;
    }
    return 0;
  } catch (const trigrid::ConfigError& e) {
    std::cerr << "trigrid-bench: " << e.what() << '\n';
    return kExitConfig;
  } catch (const trigrid::UnsupportedError& e) {
    std::cerr << "trigrid-bench: " << e.what() << '\n';
    return kExitConfig;
  } catch (const trigrid::IoError& e) {
    std::cerr << "trigrid-bench: " << e.what() << '\n';
    return kExitConfig;
  } catch (const trigrid::Error& e) {
    std::cerr << "trigrid-bench: " << e.what() << '\n';
    return kExitInvariant;
  }
}

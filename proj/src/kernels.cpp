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

#include "trigrid/kernels.hpp"

#include <random>

#include "trigrid/mpdata.hpp"

namespace trigrid {

namespace {

using L = LocationType;

template <int Color>
struct NeighborSum {
  static constexpr Accessor result = out(0, L::kCells);
  static constexpr Accessor a = in(1, L::kCells, relation_extent(L::kCells, L::kCells));
  static constexpr std::array args{result, a};

  static void Do(Evaluation& eval) { eval.write(result, eval.reduce(L::kCells, a, sum)); }
};

struct Scale {
  static constexpr Accessor b = out(0, L::kCells);
  static constexpr Accessor tmp = in(1, L::kCells);
  static constexpr Accessor fac1 = in(2, L::kCells);
  static constexpr std::array args{b, tmp, fac1};

  static void Do(Evaluation& eval) { eval.write(b, eval(tmp) * eval(fac1)); }
};

}  // namespace

std::string_view name(Kernel k) { return k == Kernel::kK1 ? "K1" : "K2"; }

KernelFields make_kernel_fields(const PatchSpec& patch, const FieldOptions& options) {
  return KernelFields{
      make_storage(patch, L::kCells, kSelector3D, "A", 0, options),
      make_storage(patch, L::kCells, kSelector3D, "B", 0, options),
      make_storage(patch, L::kCells, kSelector3D, "tmp", 0, options),
      make_storage(patch, L::kCells, kSelector2D, "fac1", 0, options),
  };
}

void init_kernel_fields(KernelFields& f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ua(0.0, 1.0), uf(0.5, 1.5);
  const PatchSpec& g = f.A.patch();
  for (int k = 0; k < f.A.levels(); ++k)
    for (int i = 0; i < g.rows; ++i)
      for (int c = 0; c < 2; ++c)
        for (int j = 0; j < g.cols; ++j) f.A.poke(i, c, j, k, 0, ua(rng));
  for (int i = 0; i < g.rows; ++i)
    for (int c = 0; c < 2; ++c)
      for (int j = 0; j < g.cols; ++j) f.fac1.poke(i, c, j, 0, 0, uf(rng));
  f.B.fill(0.0);
  f.tmp.fill(0.0);
}

Computation build_kernel(Kernel kernel, KernelFields& f) {
  Bindings b;
  b.bind("A", f.A).bind("B", f.B);
  MultiStageSpec ms;
  if (kernel == Kernel::kK1) {
    ms = make_multistage(ExecutionPolicy::kParallel, cache({}),
                         make_stage<NeighborSum>("k1_sum", L::kCells, {"B", "A"}));
  } else {
    b.bind("tmp", f.tmp).bind("fac1", f.fac1);
    ms = make_multistage(ExecutionPolicy::kParallel, cache({"tmp"}),
                         make_stage<NeighborSum>("k2_sum", L::kCells, {"tmp", "A"}),
                         make_stage<Scale>("k2_scale", L::kCells, {"B", "tmp", "fac1"}));
  }
  ms.name = std::string(name(kernel));
  return compose(f.A.patch(), std::move(b), {std::move(ms)});
}

IndirectKernel make_indirect_kernel(const MeshOracle& mesh, Numbering numbering,
                                    const KernelFields& f) {
  IndirectKernel k;
  k.perm = make_permutation(numbering, mesh, L::kCells);
  k.cells = build_neighbor_table(mesh, L::kCells, L::kCells, k.perm, k.perm);
  k.levels = f.A.levels();
  k.A = to_flat(f.A, k.perm);
  k.fac1 = to_flat(f.fac1, k.perm);
  k.tmp.assign(k.A.size(), 0.0);
  k.B.assign(k.A.size(), 0.0);
  return k;
}

void IndirectKernel::run(Kernel kernel) {
  const std::size_t n = cells.size();
  std::vector<double>& sum_out = kernel == Kernel::kK1 ? B : tmp;
  for (int k = 0; k < levels; ++k) {
    const double* a = A.data() + k * n;
    double* s = sum_out.data() + k * n;
    for (std::size_t r = 0; r < n; ++r) {
      double acc = 0.0;
      for (int nb : cells.neighbors(static_cast<int>(r))) acc = a[nb] + acc;
      s[r] = acc;
    }
  }
  if (kernel == Kernel::kK2) {
    for (int k = 0; k < levels; ++k) {
      for (std::size_t r = 0; r < n; ++r) B[k * n + r] = tmp[k * n + r] * fac1[r];
    }
  }
}

}  // namespace trigrid

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
#include <string_view>
#include <vector>

#include "trigrid/connectivity.hpp"
#include "trigrid/field.hpp"
#include "trigrid/layout.hpp"
#include "trigrid/mesh_oracle.hpp"
#include "trigrid/stencil.hpp"

namespace trigrid {

// K1: B = sum of A over the neighbor cells.
// K2: tmp = sum of A over the neighbor cells; B = tmp * fac1.
enum class Kernel : std::uint8_t { kK1, kK2 };

std::string_view name(Kernel k);

struct KernelFields {
  Field A, B, tmp, fac1;
};

KernelFields make_kernel_fields(const PatchSpec& patch, const FieldOptions& options = {});
// A in [0, 1), fac1 in [0.5, 1.5); B and tmp zeroed.
void init_kernel_fields(KernelFields& f, std::uint64_t seed);

// Direct access: structured offsets on the storages. K2 caches tmp.
Computation build_kernel(Kernel kernel, KernelFields& f);

// Indirect access: flat arrays [level * N + rank] and an explicit
// cell->cell table in the permuted numbering.
struct IndirectKernel {
  Permutation perm;
  NeighborTable cells;
  int levels = 0;
  std::vector<double> A, fac1, tmp, B;

  void run(Kernel kernel);
};

IndirectKernel make_indirect_kernel(const MeshOracle& mesh, Numbering numbering,
                                    const KernelFields& f);

}  // namespace trigrid

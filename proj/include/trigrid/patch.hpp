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

#include <cstddef>
#include <utility>

#include "trigrid/location.hpp"

namespace trigrid {

// A doubly periodic parallelogram of I x J diamonds with K vertical layers.
//
// Diamond (i, j) owns vertex (i, j), two triangles and three edges; see
// mesh_oracle.hpp for the concrete geometric assignment of colors.
struct PatchSpec {
  int rows = 2;    // I
  int cols = 2;    // J
  int levels = 1;  // K
  int halo = 1;    // H

  // Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const PatchSpec&) const = default;
};

// I*J, 2*I*J or 3*I*J. Validates `spec` first.
std::size_t element_count(const PatchSpec& spec, LocationType loc);

// Periodic wrap of a diamond coordinate into [0, I) x [0, J).
std::pair<int, int> wrap(const PatchSpec& spec, int i, int j);

inline int wrap_index(int v, int n) {
  const int r = v % n;
  return r < 0 ? r + n : r;
}

}  // namespace trigrid

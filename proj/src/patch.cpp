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

#include "trigrid/patch.hpp"

#include <string>

#include "trigrid/error.hpp"

namespace trigrid {

void PatchSpec::validate() const {
  auto fail = [](const char* field, int value, const char* rule) {
    throw ConfigError(std::string("invalid PatchSpec: ") + field + "=" +
                      std::to_string(value) + " (" + rule + ")");
  };
  if (rows < 2) fail("rows", rows, "must be >= 2");
  if (cols < 2) fail("cols", cols, "must be >= 2");
  if (levels < 1) fail("levels", levels, "must be >= 1");
  if (halo < 0) fail("halo", halo, "must be >= 0");
}

std::size_t element_count(const PatchSpec& spec, LocationType loc) {
  spec.validate();
  return static_cast<std::size_t>(colors(loc)) *
         static_cast<std::size_t>(spec.rows) *
         static_cast<std::size_t>(spec.cols);
}

std::pair<int, int> wrap(const PatchSpec& spec, int i, int j) {
  return {wrap_index(i, spec.rows), wrap_index(j, spec.cols)};
}

}  // namespace trigrid

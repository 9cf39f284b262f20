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

#include <array>
#include <cstdint>
#include <string_view>

namespace trigrid {

enum class LocationType : std::uint8_t { kVertices = 0, kCells = 1, kEdges = 2 };

inline constexpr std::array<LocationType, 3> kAllLocations = {
    LocationType::kVertices, LocationType::kCells, LocationType::kEdges};

// Congruent element families per diamond: 1 vertex, 2 triangles, 3 edges.
constexpr int colors(LocationType loc) {
  switch (loc) {
    case LocationType::kVertices: return 1;
    case LocationType::kCells: return 2;
    case LocationType::kEdges: return 3;
  }
  return 0;
}

constexpr int index_of(LocationType loc) { return static_cast<int>(loc); }

constexpr std::string_view name(LocationType loc) {
  switch (loc) {
    case LocationType::kVertices: return "vertices";
    case LocationType::kCells: return "cells";
    case LocationType::kEdges: return "edges";
  }
  return "?";
}

}  // namespace trigrid

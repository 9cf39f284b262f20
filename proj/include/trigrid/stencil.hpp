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
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trigrid/connectivity.hpp"
#include "trigrid/error.hpp"
#include "trigrid/field.hpp"
#include "trigrid/location.hpp"
#include "trigrid/patch.hpp"

namespace trigrid {

class CompositionError : public Error {
 public:
  enum class Kind {
    kUnboundParameter,
    kLocationMismatch,
    kSelectorMismatch,
    kExtentExceedsHalo,
    kExtentUndeclared,
    kOutAccessor,
    kMissingBody,
    kMultipleWriters,
    kPolicyViolation,
    kCacheEscapes,
    kFusionHazard,
  };
  CompositionError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class Intent : std::uint8_t { kIn, kOut, kInOut, kGlobal };

// Horizontal reach in diamond rows/columns and vertical reach in levels.
struct Extent {
  int imin = 0, imax = 0, jmin = 0, jmax = 0, kmin = 0, kmax = 0;

  constexpr bool contains(const Extent& o) const {
    return imin <= o.imin && imax >= o.imax && jmin <= o.jmin && jmax >= o.jmax &&
           kmin <= o.kmin && kmax >= o.kmax;
  }
  constexpr int horizontal() const {
    int m = -imin;
    if (imax > m) m = imax;
    if (-jmin > m) m = -jmin;
    if (jmax > m) m = jmax;
    return m;
  }
  constexpr Extent merged(const Extent& o) const {
    return {imin < o.imin ? imin : o.imin, imax > o.imax ? imax : o.imax,
            jmin < o.jmin ? jmin : o.jmin, jmax > o.jmax ? jmax : o.jmax,
            kmin < o.kmin ? kmin : o.kmin, kmax > o.kmax ? kmax : o.kmax};
  }
  bool operator==(const Extent&) const = default;
};

// Extent covering one relation's offsets, for accessor declarations.
constexpr Extent relation_extent(LocationType from, LocationType to, int kmin = 0,
                                 int kmax = 0);

struct Accessor;

// An accessor applied at a neighbor, vertical offset and/or extra index.
struct AccessorRef {
  int slot = 0;
  LocationType location = LocationType::kVertices;
  NeighborOffset neighbor{};
  bool has_neighbor = false;
  int dk = 0;
  int x = 0;

  constexpr AccessorRef k(int d) const {
    AccessorRef r = *this;
    r.dk += d;
    return r;
  }
  constexpr AccessorRef at(const NeighborOffset& n) const {
    AccessorRef r = *this;
    r.neighbor = n;
    r.has_neighbor = true;
    return r;
  }
  constexpr AccessorRef extra(int e) const {
    AccessorRef r = *this;
    r.x = e;
    return r;
  }
};

// Parameter slot of an operator, e.g. accessor<1, in, vertices>.
struct Accessor {
  int slot = 0;
  Intent intent = Intent::kIn;
  LocationType location = LocationType::kVertices;
  Extent extent{};
  bool extra = false;

  constexpr AccessorRef ref() const { return {slot, location}; }
  constexpr AccessorRef k(int d) const { return ref().k(d); }
  constexpr AccessorRef at(const NeighborOffset& n) const { return ref().at(n); }
  constexpr AccessorRef extra_index(int e) const { return ref().extra(e); }
  constexpr operator AccessorRef() const { return ref(); }
};

constexpr Accessor in(int slot, LocationType loc, Extent extent = {}, bool extra = false) {
  return {slot, Intent::kIn, loc, extent, extra};
}
constexpr Accessor out(int slot, LocationType loc) { return {slot, Intent::kOut, loc}; }
constexpr Accessor inout(int slot, LocationType loc, Extent extent = {}) {
  return {slot, Intent::kInOut, loc, extent};
}
constexpr Accessor global(int slot) { return {slot, Intent::kGlobal}; }

enum class Interval : std::uint8_t { kMinimum, kBody, kMaximum };
struct kminimum_t {};
struct kmaximum_t {};
inline constexpr kminimum_t kminimum{};
inline constexpr kmaximum_t kmaximum{};

inline constexpr auto sum = [](double neighbour_value, double accumulated_value) {
  return neighbour_value + accumulated_value;
};
inline constexpr auto prod = [](double a, double b, double accumulated_value) {
  return a * b + accumulated_value;
};

namespace detail {

// Resolved storage of one accessor slot during execution.
struct SlotView {
  bool global = false;
  double value = 0.0;

  double* data = nullptr;         // reads (current point, not-yet-swept levels)
  double* swept_data = nullptr;   // reads in the already-swept vertical direction
  double* write_data = nullptr;   // writes of the output slot
  int swept_sign = 0;             // +1: lower levels are swept, -1: upper
  std::ptrdiff_t origin = 0;
  std::ptrdiff_t si = 0, sc = 0, sj = 0, sk = 0, sx = 0;
  int i0 = 0, j0 = 0;             // region origin subtracted before striding
  int ilo = 0, ihi = 0, jlo = 0, jhi = 0;
  int levels = 1;                 // valid level range [0, levels)
  int ring = 0;                   // > 0: level index taken modulo ring
  int* ring_tags = nullptr;
  int extra = 1;

  Field* field = nullptr;         // instrumentation target, null for scratch
  bool counting = false;
  bool logging = false;
  std::uint64_t raw_reads = 0;
  std::uint64_t raw_writes = 0;

  std::ptrdiff_t offset(int i, int c, int j, int k, int x) const {
    const int kk = ring > 0 ? wrap_index(k, ring) : k;
    return origin + (i - i0) * si + c * sc + (j - j0) * sj + kk * sk + x * sx;
  }
};

struct ProbeRecord {
  bool used = false;
  Extent reach{};
  int xmax = 0;
};

struct Frame {
  LocationType location = LocationType::kVertices;
  int color = 0;
  int i = 0, j = 0, k = 0;
  int levels = 1;
  int out_slot = 0;
  std::span<SlotView> slots;
  std::span<const Accessor> accessors;
  bool check = false;
  std::vector<ProbeRecord>* probe = nullptr;
  double probe_value = 1.0;
  const std::string* stage_name = nullptr;
};

}  // namespace detail

// Evaluation context handed to operator bodies: the current element and the
// bound storages of the stage.
class Evaluation {
 public:
  explicit Evaluation(detail::Frame* frame) : f_(frame) {}

  int color() const { return f_->color; }
  int k() const { return f_->k; }
  int levels() const { return f_->levels; }
  LocationType location() const { return f_->location; }
  int i() const { return f_->i; }
  int j() const { return f_->j; }

  double operator()(const AccessorRef& r) const;
  double operator()(const Accessor& a) const { return (*this)(a.ref()); }
  void write(const Accessor& a, double value);

  // Neighbor offsets from the stage location to `to` for the current color.
  std::span<const NeighborOffset> offsets(LocationType to) const {
    return structured_offsets(f_->location, to, f_->color).entries;
  }

  // Folds fold(neighbor_value, accumulator) over the neighbors on `on`, in
  // connectivity order.
  template <class Fold>
  double reduce(LocationType on, const AccessorRef& source, Fold fold,
                double init = 0.0) const {
    check_reduction(on, source.location);
    double acc = init;
    for (const NeighborOffset& n : offsets(on)) acc = fold((*this)(source.at(n)), acc);
    return acc;
  }
  // Two-source form: fold(a_value, b_value, accumulator).
  template <class Fold>
  double reduce(LocationType on, const AccessorRef& a, const AccessorRef& b, Fold fold,
                double init = 0.0) const {
    check_reduction(on, a.location);
    check_reduction(on, b.location);
    double acc = init;
    for (const NeighborOffset& n : offsets(on)) acc = fold((*this)(a.at(n)), (*this)(b.at(n)), acc);
    return acc;
  }

 private:
  void check_reduction(LocationType on, LocationType source) const;
  [[noreturn]] void fail(CompositionError::Kind kind, const std::string& msg) const;

  detail::Frame* f_;
};

using StageBody = std::function<void(Evaluation&)>;

struct StageSpec {
  std::string name;
  LocationType location = LocationType::kVertices;
  std::vector<Accessor> accessors;  // indexed by slot
  std::vector<std::string> params;  // slot -> parameter name
  // [color][interval]; an empty boundary body falls back to kBody.
  std::array<std::array<StageBody, 3>, 3> bodies;

  // Slot of the out or inout accessor, -1 if there is none (or several).
  int out_slot() const;
  const StageBody& body(int color, Interval interval) const;
};

// kminimum at k == 0, kmaximum at k == levels-1, kbody otherwise; boundary
// bodies fall back to kbody when absent. With a single level kminimum wins.
Interval vertical_dispatch(const StageSpec& stage, int color, int k, int levels);

namespace detail {

template <class Op>
concept HasKMinimum = requires(Evaluation& e) { Op::Do(e, kminimum); };
template <class Op>
concept HasKMaximum = requires(Evaluation& e) { Op::Do(e, kmaximum); };

template <class Op>
void fill_bodies(StageSpec& s, int color) {
  s.bodies[color][static_cast<int>(Interval::kBody)] = [](Evaluation& e) { Op::Do(e); };
  if constexpr (HasKMinimum<Op>)
    s.bodies[color][static_cast<int>(Interval::kMinimum)] = [](Evaluation& e) { Op::Do(e, kminimum); };
  if constexpr (HasKMaximum<Op>)
    s.bodies[color][static_cast<int>(Interval::kMaximum)] = [](Evaluation& e) { Op::Do(e, kmaximum); };
}

}  // namespace detail

// Operator specialized per color: template <int Color> struct Op { static
// constexpr std::array args{...}; static void Do(Evaluation&); ... }.
template <template <int> class Op>
StageSpec make_stage(std::string name, LocationType loc, std::vector<std::string> params) {
  StageSpec s;
  s.name = std::move(name);
  s.location = loc;
  s.accessors.assign(Op<0>::args.begin(), Op<0>::args.end());
  s.params = std::move(params);
  detail::fill_bodies<Op<0>>(s, 0);
  if (colors(loc) > 1) detail::fill_bodies<Op<1>>(s, 1);
  if (colors(loc) > 2) detail::fill_bodies<Op<2>>(s, 2);
  return s;
}

// Color-independent operator: the same Do for every color.
template <class Op>
StageSpec make_stage(std::string name, LocationType loc, std::vector<std::string> params) {
  StageSpec s;
  s.name = std::move(name);
  s.location = loc;
  s.accessors.assign(Op::args.begin(), Op::args.end());
  s.params = std::move(params);
  for (int c = 0; c < colors(loc); ++c) detail::fill_bodies<Op>(s, c);
  return s;
}

// Stage from a callable body shared by all colors and levels.
StageSpec make_stage(std::string name, LocationType loc, std::vector<Accessor> accessors,
                     std::vector<std::string> params, StageBody body);

enum class ExecutionPolicy : std::uint8_t { kParallel, kForward, kBackward };

struct CacheList {
  std::vector<std::string> params;
};
inline CacheList cache(std::initializer_list<std::string> params) { return {params}; }

struct MultiStageSpec {
  std::string name;
  ExecutionPolicy policy = ExecutionPolicy::kParallel;
  std::vector<std::string> caches;
  std::vector<StageSpec> stages;

  bool cached(const std::string& param) const;
};

template <class... Stages>
MultiStageSpec make_multistage(ExecutionPolicy policy, CacheList caches, Stages&&... stages) {
  MultiStageSpec m;
  m.policy = policy;
  m.caches = std::move(caches.params);
  (m.stages.push_back(std::forward<Stages>(stages)), ...);
  return m;
}

// Parameter -> Field (or scalar) bindings; fields are not owned.
class Bindings {
 public:
  Bindings& bind(const std::string& param, Field& field) {
    fields_[param] = &field;
    return *this;
  }
  Bindings& bind(const std::string& param, double value) {
    scalars_[param] = value;
    return *this;
  }
  Field* field(const std::string& param) const;
  std::optional<double> scalar(const std::string& param) const;
  const std::map<std::string, Field*>& fields() const { return fields_; }

 private:
  std::map<std::string, Field*> fields_;
  std::map<std::string, double> scalars_;
};

// What composition learned about one stage.
struct StageInfo {
  std::string out_param;
  int out_slot = 0;
  int levels = 1;                         // vertical domain of the stage
  std::vector<detail::ProbeRecord> reads;  // per slot, probed reach
  std::vector<bool> self_read;             // slot bound to out_param
};

// A validated, immutable computation. Holds non-owning Field pointers.
class Computation {
 public:
  const PatchSpec& patch() const { return patch_; }
  const std::vector<MultiStageSpec>& multistages() const { return multistages_; }
  const StageInfo& info(std::size_t ms, std::size_t stage) const { return info_[ms][stage]; }
  Field* field(const std::string& param) const { return bindings_.field(param); }
  std::optional<double> scalar(const std::string& param) const { return bindings_.scalar(param); }
  // Distinct bound fields, in parameter-name order.
  std::vector<Field*> fields() const;
  std::size_t stage_count() const;

 private:
  friend Computation compose(const PatchSpec&, Bindings, std::vector<MultiStageSpec>);
  PatchSpec patch_;
  Bindings bindings_;
  std::vector<MultiStageSpec> multistages_;
  std::vector<std::vector<StageInfo>> info_;
};

// Validates only; nothing is executed on the bound fields.
Computation compose(const PatchSpec& grid, Bindings bindings,
                    std::vector<MultiStageSpec> multistages);

constexpr Extent relation_extent(LocationType from, LocationType to, int kmin, int kmax) {
  using L = LocationType;
  if (from == to) return {-1, 1, -1, 1, kmin, kmax};
  if (from == L::kVertices) return {-1, 0, -1, 0, kmin, kmax};
  if (from == L::kEdges && to == L::kCells) return {-1, 0, -1, 0, kmin, kmax};
  return {0, 1, 0, 1, kmin, kmax};
}

}  // namespace trigrid

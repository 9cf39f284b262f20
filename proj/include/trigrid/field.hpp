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

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trigrid/layout.hpp"
#include "trigrid/location.hpp"
#include "trigrid/patch.hpp"

namespace trigrid {

// Presence flags for (row, color, column, level, extra), as in
// selector<1,1,1,0,1>.
struct Selector {
  bool row = true;
  bool color = true;
  bool column = true;
  bool level = true;
  bool extra = false;

  // Five 0/1 digits, e.g. "11101".
  static Selector parse(std::string_view digits);
  bool operator==(const Selector&) const = default;
};

inline constexpr Selector kSelector3D{};
inline constexpr Selector kSelector2D{true, true, true, false, false};

enum class Space : std::uint8_t { kPrimary, kMirror };

struct FieldOptions {
  LayoutSpec layout{};
  // One extra vertical level (interfaces between layers), e.g. vertical fluxes.
  bool staggered = false;
};

struct FieldMeta {
  std::string name;
  LocationType location = LocationType::kVertices;
  Selector selector;
  int extra_len = 0;
  int levels = 1;
  LayoutSpec layout;
};

// Traffic of one field during one stage (or fused multistage).
struct StageTraffic {
  std::string stage;
  std::uint64_t distinct_reads = 0;
  std::uint64_t distinct_writes = 0;
  std::uint64_t raw_reads = 0;
  std::uint64_t raw_writes = 0;
};

struct AccessLogEntry {
  std::ptrdiff_t offset;
  bool write;
};

// Location-typed storage with a primary and a mirror memory space.
//
// Element access goes through views and is instrumented: raw counters see
// every access, and while a stage is open each element touched is marked so
// that the stage's distinct (compulsory) reads and writes can be tallied.
// Halo images are attributed to the element they mirror.
class Field {
 public:
  Field(const PatchSpec& patch, LocationType loc, Selector selector,
        std::string name, int extra_len = 0, FieldOptions options = {});
  Field(Field&&) noexcept;
  Field& operator=(Field&&) noexcept;
  ~Field();

  const FieldMeta& meta() const { return meta_; }
  const std::string& name() const { return meta_.name; }
  LocationType location() const { return meta_.location; }
  const PatchSpec& patch() const { return patch_; }
  const Layout& layout() const { return layout_; }
  int levels() const { return meta_.levels; }
  int extra() const { return layout_.extra(); }
  bool is_2d() const { return !meta_.selector.level; }
  std::size_t element_count() const { return trigrid::element_count(patch_, meta_.location); }

  class Ref;
  class View;
  View view(Space space = Space::kPrimary);

  // Copies the other space into `to`; both spaces clean afterwards.
  // Throws DivergenceError when both spaces are dirty.
  void sync(Space to);
  bool dirty(Space space) const { return dirty_[static_cast<int>(space)]; }
  std::uint64_t sync_count() const { return sync_count_; }

  // Uncounted buffer access for executors and halo exchange.
  std::span<double> buffer(Space space = Space::kPrimary) {
    return buffers_[static_cast<int>(space)];
  }
  std::span<const double> buffer(Space space = Space::kPrimary) const {
    return buffers_[static_cast<int>(space)];
  }
  void swap_buffer(std::vector<double>& other) { buffers_[0].swap(other); }
  // Marks `space` written by an uncounted writer; throws like a view write.
  void note_write(Space space);
  void check_readable(Space space) const;

  // Instrumentation.
  void set_counting(bool on) { counting_ = on; }
  bool counting() const { return counting_; }
  void set_logging(bool on) { logging_ = on; }
  bool logging() const { return logging_; }
  void begin_stage(std::string label);
  void end_stage();
  bool stage_open() const { return stage_open_; }
  inline void mark(int i, int c, int j, int k, int x, bool write);
  void add_raw(std::uint64_t reads, std::uint64_t writes);
  void log(std::ptrdiff_t offset, bool write);
  std::uint64_t raw_reads() const;
  std::uint64_t raw_writes() const;
  const std::vector<StageTraffic>& stage_traffic() const { return history_; }
  const std::vector<AccessLogEntry>& access_log() const { return log_; }
  void reset_counters();

  // Uncounted element read/write of the primary space, for setup and tests.
  double peek(int i, int c, int j, int k = 0, int x = 0) const;
  void poke(int i, int c, int j, int k, int x, double v);
  void fill(double v);

 private:
  friend class View;
  struct Counters;

  PatchSpec patch_;
  FieldMeta meta_;
  Layout layout_;
  std::vector<double> buffers_[2];
  bool dirty_[2] = {false, false};
  std::uint64_t sync_count_ = 0;

  bool counting_ = true;
  bool logging_ = false;
  bool stage_open_ = false;
  std::string stage_label_;
  std::unique_ptr<Counters> counters_;
  std::vector<StageTraffic> history_;
  std::vector<AccessLogEntry> log_;
  std::unique_ptr<std::mutex> log_mutex_;
};

struct Field::Counters {
  std::atomic<std::uint64_t> raw_reads{0};
  std::atomic<std::uint64_t> raw_writes{0};
  std::uint64_t stage_raw_reads_base = 0;
  std::uint64_t stage_raw_writes_base = 0;
  std::unique_ptr<std::atomic<std::uint8_t>[]> marks;
  std::size_t mark_count = 0;
};

inline void Field::mark(int i, int c, int j, int k, int x, bool write) {
  if (!stage_open_) return;
  const int wi = wrap_index(i, patch_.rows);
  const int wj = wrap_index(j, patch_.cols);
  const int kk = meta_.selector.level ? k : 0;
  const std::size_t id =
      static_cast<std::size_t>((wi * colors(meta_.location) + c) * patch_.cols + wj);
  const std::size_t key =
      (static_cast<std::size_t>(x) * meta_.levels + kk) * element_count() + id;
  counters_->marks[key].fetch_or(write ? 2 : 1, std::memory_order_relaxed);
}

class Field::Ref {
 public:
  operator double() const;
  Ref& operator=(double v);
  Ref& operator=(const Ref& other) { return *this = static_cast<double>(other); }

 private:
  friend class View;
  Ref(View* view, int i, int c, int j, int k, int x)
      : view_(view), i_(i), c_(c), j_(j), k_(k), x_(x) {}
  View* view_;
  int i_, c_, j_, k_, x_;
};

// Checked, counted access to one memory space.
class Field::View {
 public:
  double get(int i, int c, int j, int k = 0, int x = 0) const;
  void set(int i, int c, int j, int k, int x, double v);
  Ref operator()(int i, int c, int j, int k = 0, int x = 0) {
    return Ref(this, i, c, j, k, x);
  }
  Space space() const { return space_; }
  Field& field() const { return *field_; }

 private:
  friend class Field;
  View(Field* field, Space space) : field_(field), space_(space) {}
  Field* field_;
  Space space_;
};

inline Field::Ref::operator double() const { return view_->get(i_, c_, j_, k_, x_); }
inline Field::Ref& Field::Ref::operator=(double v) {
  view_->set(i_, c_, j_, k_, x_, v);
  return *this;
}

// Factory mirroring make_storage<location, double, selector>(name, extra).
Field make_storage(const PatchSpec& spec, LocationType loc,
                   Selector selector = kSelector3D, std::string name = "",
                   int extra_len = 0, FieldOptions options = {});

struct TrafficEntry {
  std::string field;
  std::string stage;
  LocationType location = LocationType::kVertices;
  bool two_d = false;
  std::uint64_t distinct_reads = 0;
  std::uint64_t distinct_writes = 0;
  std::uint64_t raw_reads = 0;
  std::uint64_t raw_writes = 0;
};

struct TrafficReport {
  std::vector<TrafficEntry> entries;
  bool ignore_2d = false;

  bool empty() const { return entries.empty(); }
  std::uint64_t distinct_reads(LocationType loc) const;
  std::uint64_t distinct_writes(LocationType loc) const;
  // Distinct reads + writes over all locations (2D fields skipped when
  // ignore_2d is set).
  std::uint64_t distinct_total() const;
  std::uint64_t raw_total() const;
  // field,stage,distinct_reads,distinct_writes,raw_reads,raw_writes
  std::string to_csv() const;
};

TrafficReport traffic_report(std::span<const Field* const> fields,
                             bool by_stage = true, bool ignore_2d = false);

}  // namespace trigrid

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

#include "trigrid/field.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "trigrid/error.hpp"

namespace trigrid {

Selector Selector::parse(std::string_view digits) {
  if (digits.size() != 5 || digits.find_first_not_of("01") != std::string_view::npos)
    throw ConfigError("selector must be five 0/1 digits, got '" + std::string(digits) + "'");
  return {digits[0] == '1', digits[1] == '1', digits[2] == '1', digits[3] == '1',
          digits[4] == '1'};
}

Field::Field(const PatchSpec& patch, LocationType loc, Selector selector,
             std::string name, int extra_len, FieldOptions options)
    : patch_(patch), counters_(std::make_unique<Counters>()),
      log_mutex_(std::make_unique<std::mutex>()) {
  patch.validate();
  if (!selector.row) throw ConfigError("selector flag 'row' must be set for field '" + name + "'");
  if (!selector.column)
    throw ConfigError("selector flag 'column' must be set for field '" + name + "'");
  if (!selector.color && colors(loc) > 1)
    throw ConfigError("selector flag 'color' is required for " + std::string(trigrid::name(loc)) +
                      " field '" + name + "'");
  if (selector.extra && extra_len < 1)
    throw ConfigError("selector flag 'extra' needs extra_len >= 1 for field '" + name + "'");
  if (!selector.extra && extra_len != 0)
    throw ConfigError("selector flag 'extra' is unset but extra_len=" +
                      std::to_string(extra_len) + " for field '" + name + "'");
  if (options.staggered && !selector.level)
    throw ConfigError("selector flag 'level' must be set for staggered field '" + name + "'");
  meta_.name = std::move(name);
  meta_.location = loc;
  meta_.selector = selector;
  meta_.extra_len = extra_len;
  meta_.levels = selector.level ? patch.levels + (options.staggered ? 1 : 0) : 1;
  meta_.layout = options.layout;
  meta_.layout.halo = patch.halo;
  layout_ = Layout(meta_.layout, patch_, loc, meta_.levels, std::max(extra_len, 1));
  buffers_[0].assign(layout_.size(), 0.0);
  buffers_[1].assign(layout_.size(), 0.0);
  counters_->mark_count = element_count() * meta_.levels * std::max(extra_len, 1);
  counters_->marks = std::make_unique<std::atomic<std::uint8_t>[]>(counters_->mark_count);
}

Field::Field(Field&&) noexcept = default;
Field& Field::operator=(Field&&) noexcept = default;
Field::~Field() = default;

Field::View Field::view(Space space) { return View(this, space); }

void Field::check_readable(Space space) const {
  const Space other = space == Space::kPrimary ? Space::kMirror : Space::kPrimary;
  if (dirty(other))
    throw StalenessError("field '" + meta_.name + "': " +
                         (space == Space::kPrimary ? "primary" : "mirror") +
                         " space is stale; sync before access");
}

void Field::note_write(Space space) {
  const Space other = space == Space::kPrimary ? Space::kMirror : Space::kPrimary;
  dirty_[static_cast<int>(space)] = true;
  if (dirty(other))
    throw DivergenceError("field '" + meta_.name + "': both memory spaces written without sync");
}

void Field::sync(Space to) {
  const Space from = to == Space::kPrimary ? Space::kMirror : Space::kPrimary;
  if (dirty(from) && dirty(to))
    throw DivergenceError("field '" + meta_.name + "': both memory spaces are dirty");
  if (!dirty(from) && !dirty(to)) return;
  buffers_[static_cast<int>(to)] = buffers_[static_cast<int>(from)];
  dirty_[0] = dirty_[1] = false;
  ++sync_count_;
}

double Field::View::get(int i, int c, int j, int k, int x) const {
  field_->check_readable(space_);
  const std::ptrdiff_t off = field_->layout_.offset(i, c, j, k, x);
  if (field_->counting_) {
    field_->counters_->raw_reads.fetch_add(1, std::memory_order_relaxed);
    field_->mark(i, c, j, k, x, false);
    if (field_->logging_) field_->log(off, false);
  }
  return field_->buffers_[static_cast<int>(space_)][off];
}

void Field::View::set(int i, int c, int j, int k, int x, double v) {
  const std::ptrdiff_t off = field_->layout_.offset(i, c, j, k, x);
  field_->note_write(space_);
  if (field_->counting_) {
    field_->counters_->raw_writes.fetch_add(1, std::memory_order_relaxed);
    field_->mark(i, c, j, k, x, true);
    if (field_->logging_) field_->log(off, true);
  }
  field_->buffers_[static_cast<int>(space_)][off] = v;
}

void Field::begin_stage(std::string label) {
  if (stage_open_) end_stage();
  stage_open_ = true;
  stage_label_ = std::move(label);
  counters_->stage_raw_reads_base = raw_reads();
  counters_->stage_raw_writes_base = raw_writes();
}

void Field::end_stage() {
  if (!stage_open_) return;
  StageTraffic t;
  t.stage = stage_label_;
  for (std::size_t n = 0; n < counters_->mark_count; ++n) {
    const std::uint8_t m = counters_->marks[n].exchange(0, std::memory_order_relaxed);
    t.distinct_reads += (m & 1) ? 1 : 0;
    t.distinct_writes += (m & 2) ? 1 : 0;
  }
  t.raw_reads = raw_reads() - counters_->stage_raw_reads_base;
  t.raw_writes = raw_writes() - counters_->stage_raw_writes_base;
  stage_open_ = false;
  if (t.raw_reads + t.raw_writes > 0) history_.push_back(std::move(t));
}

void Field::add_raw(std::uint64_t reads, std::uint64_t writes) {
  counters_->raw_reads.fetch_add(reads, std::memory_order_relaxed);
  counters_->raw_writes.fetch_add(writes, std::memory_order_relaxed);
}

void Field::log(std::ptrdiff_t offset, bool write) {
  std::lock_guard<std::mutex> lock(*log_mutex_);
  log_.push_back({offset, write});
}

std::uint64_t Field::raw_reads() const { return counters_->raw_reads.load(); }
std::uint64_t Field::raw_writes() const { return counters_->raw_writes.load(); }

void Field::reset_counters() {
  stage_open_ = false;
  counters_->raw_reads = 0;
  counters_->raw_writes = 0;
  for (std::size_t n = 0; n < counters_->mark_count; ++n) counters_->marks[n] = 0;
  history_.clear();
  log_.clear();
}

double Field::peek(int i, int c, int j, int k, int x) const {
  return buffers_[0][layout_.offset(i, c, j, k, x)];
}

void Field::poke(int i, int c, int j, int k, int x, double v) {
  buffers_[0][layout_.offset(i, c, j, k, x)] = v;
  note_write(Space::kPrimary);
}

void Field::fill(double v) {
  std::fill(buffers_[0].begin(), buffers_[0].end(), v);
  note_write(Space::kPrimary);
}

Field make_storage(const PatchSpec& spec, LocationType loc, Selector selector,
                   std::string name, int extra_len, FieldOptions options) {
  return Field(spec, loc, selector, std::move(name), extra_len, options);
}

std::uint64_t TrafficReport::distinct_reads(LocationType loc) const {
  std::uint64_t s = 0;
  for (const auto& e : entries)
    if (e.location == loc && !(ignore_2d && e.two_d)) s += e.distinct_reads;
  return s;
}

std::uint64_t TrafficReport::distinct_writes(LocationType loc) const {
  std::uint64_t s = 0;
  for (const auto& e : entries)
    if (e.location == loc && !(ignore_2d && e.two_d)) s += e.distinct_writes;
  return s;
}

std::uint64_t TrafficReport::distinct_total() const {
  std::uint64_t s = 0;
  for (LocationType loc : kAllLocations) s += distinct_reads(loc) + distinct_writes(loc);
  return s;
}

std::uint64_t TrafficReport::raw_total() const {
  std::uint64_t s = 0;
  for (const auto& e : entries)
    if (!(ignore_2d && e.two_d)) s += e.raw_reads + e.raw_writes;
  return s;
}

std::string TrafficReport::to_csv() const {
  std::ostringstream os;
  os << "field,stage,distinct_reads,distinct_writes,raw_reads,raw_writes\n";
  for (const auto& e : entries)
    os << e.field << ',' << e.stage << ',' << e.distinct_reads << ',' << e.distinct_writes
       << ',' << e.raw_reads << ',' << e.raw_writes << '\n';
  return os.str();
}

TrafficReport traffic_report(std::span<const Field* const> fields, bool by_stage,
                             bool ignore_2d) {
  TrafficReport r;
  r.ignore_2d = ignore_2d;
  for (const Field* f : fields) {
    if (f->stage_traffic().empty()) continue;
    if (by_stage) {
      for (const StageTraffic& t : f->stage_traffic())
        r.entries.push_back({f->name(), t.stage, f->location(), f->is_2d(), t.distinct_reads,
                             t.distinct_writes, t.raw_reads, t.raw_writes});
    } else {
      TrafficEntry e{f->name(), "total", f->location(), f->is_2d()};
      for (const StageTraffic& t : f->stage_traffic()) {
        e.distinct_reads += t.distinct_reads;
        e.distinct_writes += t.distinct_writes;
        e.raw_reads += t.raw_reads;
        e.raw_writes += t.raw_writes;
      }
      r.entries.push_back(std::move(e));
    }
  }
  return r;
}

}  // namespace trigrid

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

#include "trigrid/stencil.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace trigrid {

namespace {

using Kind = CompositionError::Kind;

std::string loc_name(LocationType loc) { return std::string(name(loc)); }

[[noreturn]] void raise(Kind kind, const std::string& where, const std::string& msg) {
  throw CompositionError(kind, where + ": " + msg);
}

}  // namespace

void Evaluation::fail(CompositionError::Kind kind, const std::string& msg) const {
  raise(kind, "stage '" + (f_->stage_name ? *f_->stage_name : std::string("?")) + "'", msg);
}

void Evaluation::check_reduction(LocationType on, LocationType source) const {
  if (on != source) {
    fail(Kind::kLocationMismatch, std::string("reduction on ") + loc_name(on) +
                                      " over an accessor on " + loc_name(source));
  }
}

double Evaluation::operator()(const AccessorRef& r) const {
  detail::Frame& f = *f_;
  if (r.slot < 0 || r.slot >= static_cast<int>(f.accessors.size())) {
    fail(Kind::kUnboundParameter, "accessor slot " + std::to_string(r.slot) + " not declared");
  }
  const Accessor& a = f.accessors[r.slot];
  if (a.intent == Intent::kGlobal) {
    if (f.probe) {
      (*f.probe)[r.slot].used = true;
      return f.probe_value;
    }
    return f.slots[r.slot].value;
  }
  if (a.intent == Intent::kOut) fail(Kind::kOutAccessor, "read through an out accessor");
  int di = 0, dj = 0, c = f.color;
  if (r.has_neighbor) {
    if (r.neighbor.from != f.location || r.neighbor.to != a.location) {
      fail(Kind::kLocationMismatch,
           std::string("offset ") + loc_name(r.neighbor.from) + "->" + loc_name(r.neighbor.to) +
               " applied to an accessor on " + loc_name(a.location) + " from a stage on " +
               loc_name(f.location));
    }
    di = r.neighbor.di;
    dj = r.neighbor.dj;
    c = r.neighbor.color;
  } else if (a.location != f.location) {
    fail(Kind::kLocationMismatch, std::string("accessor on ") + loc_name(a.location) +
                                      " read without a neighbor offset from a stage on " +
                                      loc_name(f.location));
  }
  if (r.x != 0 && !a.extra) fail(Kind::kSelectorMismatch, "extra index on an accessor without one");

  if (f.probe) {
    detail::ProbeRecord& p = (*f.probe)[r.slot];
    const Extent e{di, di, dj, dj, r.dk, r.dk};
    p.reach = p.used ? p.reach.merged(e) : e;
    p.used = true;
    p.xmax = std::max(p.xmax, r.x);
    return f.probe_value;
  }

  detail::SlotView& s = f.slots[r.slot];
  const int i = f.i + di, j = f.j + dj, k = f.k + r.dk;
  if (f.check) {
    if (i < s.ilo || i >= s.ihi) throw BoundsError("row", i, s.ilo, s.ihi);
    if (j < s.jlo || j >= s.jhi) throw BoundsError("column", j, s.jlo, s.jhi);
    if (s.sk != 0 && (k < 0 || k >= s.levels)) throw BoundsError("level", k, 0, s.levels);
    if (r.x < 0 || r.x >= s.extra) throw BoundsError("extra", r.x, 0, s.extra);
    if (s.ring > 0 && s.ring_tags[wrap_index(k, s.ring)] != k) {
      throw StalenessError("stage '" + *f.stage_name + "' read level " + std::to_string(k) +
                           " of a cached field that is not resident");
    }
  }
  const double* d = (s.swept_sign != 0 && r.dk * s.swept_sign < 0) ? s.swept_data : s.data;
  const std::ptrdiff_t off = s.offset(i, c, j, k, r.x);
  if (s.field) {
    if (s.counting) {
      ++s.raw_reads;
      s.field->mark(i, c, j, k, r.x, false);
    }
    if (s.logging) s.field->log(off, false);
  }
  return d[off];
}

void Evaluation::write(const Accessor& a, double value) {
  detail::Frame& f = *f_;
  if (a.slot != f.out_slot) fail(Kind::kOutAccessor, "write through a non-output accessor");
  if (f.probe) return;
  detail::SlotView& s = f.slots[a.slot];
  if (f.check) {
    if (f.i < s.ilo || f.i >= s.ihi) throw BoundsError("row", f.i, s.ilo, s.ihi);
    if (f.j < s.jlo || f.j >= s.jhi) throw BoundsError("column", f.j, s.jlo, s.jhi);
    if (s.sk != 0 && (f.k < 0 || f.k >= s.levels)) throw BoundsError("level", f.k, 0, s.levels);
  }
  const std::ptrdiff_t off = s.offset(f.i, f.color, f.j, f.k, 0);
  s.write_data[off] = value;
  if (s.ring > 0) s.ring_tags[wrap_index(f.k, s.ring)] = f.k;
  if (s.field) {
    if (s.counting) {
      ++s.raw_writes;
      s.field->mark(f.i, f.color, f.j, f.k, 0, true);
    }
    if (s.logging) s.field->log(off, true);
  }
}

int StageSpec::out_slot() const {
  int found = -1;
  for (std::size_t p = 0; p < accessors.size(); ++p) {
    const Intent in = accessors[p].intent;
    if (in == Intent::kOut || in == Intent::kInOut) {
      if (found >= 0) return -1;
      found = static_cast<int>(p);
    }
  }
  return found;
}

const StageBody& StageSpec::body(int color, Interval interval) const {
  const StageBody& b = bodies[color][static_cast<int>(interval)];
  return b ? b : bodies[color][static_cast<int>(Interval::kBody)];
}

Interval vertical_dispatch(const StageSpec& stage, int color, int k, int levels) {
  const auto& b = stage.bodies[color];
  if (k == 0 && b[static_cast<int>(Interval::kMinimum)]) return Interval::kMinimum;
  if (k == levels - 1 && b[static_cast<int>(Interval::kMaximum)]) return Interval::kMaximum;
  return Interval::kBody;
}

StageSpec make_stage(std::string name, LocationType loc, std::vector<Accessor> accessors,
                     std::vector<std::string> params, StageBody body) {
  StageSpec s;
  s.name = std::move(name);
  s.location = loc;
  s.accessors = std::move(accessors);
  s.params = std::move(params);
  for (int c = 0; c < colors(loc); ++c) s.bodies[c][static_cast<int>(Interval::kBody)] = body;
  return s;
}

bool MultiStageSpec::cached(const std::string& param) const {
  return std::find(caches.begin(), caches.end(), param) != caches.end();
}

Field* Bindings::field(const std::string& param) const {
  auto it = fields_.find(param);
  return it == fields_.end() ? nullptr : it->second;
}

std::optional<double> Bindings::scalar(const std::string& param) const {
  auto it = scalars_.find(param);
  if (it == scalars_.end()) return std::nullopt;
  return it->second;
}

std::vector<Field*> Computation::fields() const {
  std::vector<Field*> out;
  for (const auto& [param, f] : bindings_.fields()) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  return out;
}

std::size_t Computation::stage_count() const {
  std::size_t n = 0;
  for (const auto& m : multistages_) n += m.stages.size();
  return n;
}

namespace {

std::string extent_str(const Extent& e) {
  std::ostringstream os;
  os << "i[" << e.imin << "," << e.imax << "] j[" << e.jmin << "," << e.jmax << "] k["
     << e.kmin << "," << e.kmax << "]";
  return os.str();
}

StageInfo analyse_stage(const PatchSpec& grid, const Bindings& b, const StageSpec& s,
                        const std::string& where) {
  if (s.params.size() != s.accessors.size()) {
    raise(Kind::kUnboundParameter, where,
          std::to_string(s.accessors.size()) + " accessors but " +
              std::to_string(s.params.size()) + " parameters");
  }
  for (std::size_t p = 0; p < s.accessors.size(); ++p) {
    if (s.accessors[p].slot != static_cast<int>(p)) {
      raise(Kind::kUnboundParameter, where, "accessor slots must be numbered 0..n-1 in order");
    }
  }
  StageInfo info;
  info.out_slot = s.out_slot();
  if (info.out_slot < 0) raise(Kind::kOutAccessor, where, "needs exactly one out or inout accessor");
  const Accessor& out = s.accessors[info.out_slot];
  if (out.location != s.location) {
    raise(Kind::kLocationMismatch, where, std::string("output on ") + loc_name(out.location) +
                                              " in a stage on " + loc_name(s.location));
  }
  info.out_param = s.params[info.out_slot];

  for (std::size_t p = 0; p < s.accessors.size(); ++p) {
    const Accessor& a = s.accessors[p];
    const std::string& param = s.params[p];
    if (a.intent == Intent::kGlobal) {
      if (!b.scalar(param)) raise(Kind::kUnboundParameter, where, "scalar '" + param + "' not bound");
      continue;
    }
    Field* f = b.field(param);
    if (!f) raise(Kind::kUnboundParameter, where, "parameter '" + param + "' not bound to a field");
    if (!(f->patch() == grid)) {
      raise(Kind::kUnboundParameter, where, "field '" + f->name() + "' lives on another patch");
    }
    if (f->location() != a.location) {
      raise(Kind::kLocationMismatch, where,
            "parameter '" + param + "' expects " + loc_name(a.location) + " but field '" +
                f->name() + "' is on " + loc_name(f->location()));
    }
    if (f->meta().selector.extra != a.extra) {
      raise(Kind::kSelectorMismatch, where,
            "parameter '" + param + "' and field '" + f->name() + "' disagree on the extra dimension");
    }
    if (a.extent.horizontal() > grid.halo) {
      raise(Kind::kExtentExceedsHalo, where,
            "parameter '" + param + "' extent " + extent_str(a.extent) + " exceeds halo " +
                std::to_string(grid.halo));
    }
  }
  Field* out_field = b.field(info.out_param);
  info.levels = out_field->levels();

  for (int c = 0; c < colors(s.location); ++c) {
    if (!s.bodies[c][static_cast<int>(Interval::kBody)]) {
      raise(Kind::kMissingBody, where, "no body for color " + std::to_string(c));
    }
  }

  info.reads.assign(s.accessors.size(), {});
  std::vector<detail::SlotView> dummy(s.accessors.size());
  detail::Frame frame;
  frame.location = s.location;
  frame.levels = info.levels;
  frame.k = info.levels / 2;
  frame.out_slot = info.out_slot;
  frame.slots = dummy;
  frame.accessors = s.accessors;
  frame.probe = &info.reads;
  frame.stage_name = &s.name;
  for (int c = 0; c < colors(s.location); ++c) {
    frame.color = c;
    for (int iv = 0; iv < 3; ++iv) {
      const StageBody& body = s.bodies[c][iv];
      if (!body) continue;
      for (double v : {1.0, -1.0, 0.5}) {
        frame.probe_value = v;
        Evaluation e(&frame);
        body(e);
      }
    }
  }

  info.self_read.assign(s.accessors.size(), false);
  for (std::size_t p = 0; p < s.accessors.size(); ++p) {
    const Accessor& a = s.accessors[p];
    const detail::ProbeRecord& r = info.reads[p];
    if (!r.used || a.intent == Intent::kGlobal) continue;
    if (!a.extent.contains(r.reach)) {
      raise(Kind::kExtentUndeclared, where,
            "parameter '" + s.params[p] + "' reads " + extent_str(r.reach) +
                " beyond its declared extent " + extent_str(a.extent));
    }
    Field* f = b.field(s.params[p]);
    if (r.xmax >= f->extra()) {
      raise(Kind::kSelectorMismatch, where,
            "parameter '" + s.params[p] + "' reads extra index " + std::to_string(r.xmax) +
                " of " + std::to_string(f->extra()));
    }
    info.self_read[p] = s.params[p] == info.out_param;
  }
  return info;
}

int sweep_sign(ExecutionPolicy p) {
  return p == ExecutionPolicy::kForward ? 1 : p == ExecutionPolicy::kBackward ? -1 : 0;
}

}  // namespace

Computation compose(const PatchSpec& grid, Bindings bindings,
                    std::vector<MultiStageSpec> multistages) {
  grid.validate();
  Computation comp;
  comp.patch_ = grid;
  for (std::size_t m = 0; m < multistages.size(); ++m) {
    if (multistages[m].name.empty()) multistages[m].name = "ms" + std::to_string(m);
  }

  for (std::size_t m = 0; m < multistages.size(); ++m) {
    const MultiStageSpec& ms = multistages[m];
    const int sigma = sweep_sign(ms.policy);
    std::vector<StageInfo> infos;
    std::map<std::string, std::size_t> writer;
    for (std::size_t s = 0; s < ms.stages.size(); ++s) {
      const StageSpec& st = ms.stages[s];
      const std::string where = "multistage '" + ms.name + "' stage '" + st.name + "'";
      StageInfo info = analyse_stage(grid, bindings, st, where);
      if (writer.count(info.out_param)) {
        raise(Kind::kMultipleWriters, where,
              "'" + info.out_param + "' is already written by stage '" +
                  ms.stages[writer[info.out_param]].name + "'");
      }
      writer[info.out_param] = s;

      const bool out_cached = ms.cached(info.out_param);
      for (std::size_t p = 0; p < st.accessors.size(); ++p) {
        if (!info.self_read[p]) continue;
        const Extent& r = info.reads[p].reach;
        if (r.imin != 0 || r.imax != 0 || r.jmin != 0 || r.jmax != 0) {
          raise(Kind::kPolicyViolation, where, "reads its own output at a horizontal offset");
        }
        if (sigma == 0 && (r.kmin != 0 || r.kmax != 0)) {
          raise(Kind::kPolicyViolation, where,
                "reads its own output at a vertical offset under a parallel policy");
        }
        if (out_cached && (r.kmin * sigma >= 0 || r.kmax * sigma >= 0)) {
          raise(Kind::kCacheEscapes, where,
                "cached output '" + info.out_param + "' read at a level not yet produced");
        }
      }
      infos.push_back(std::move(info));
    }

    // Reads of fields produced inside the multistage.
    for (std::size_t t = 0; t < ms.stages.size(); ++t) {
      const StageSpec& st = ms.stages[t];
      const std::string where = "multistage '" + ms.name + "' stage '" + st.name + "'";
      for (std::size_t p = 0; p < st.accessors.size(); ++p) {
        const detail::ProbeRecord& r = infos[t].reads[p];
        if (!r.used || st.accessors[p].intent == Intent::kGlobal) continue;
        const std::string& param = st.params[p];
        auto w = writer.find(param);
        if (w == writer.end() || w->second == t) continue;
        if (w->second > t && ms.cached(param)) {
          raise(Kind::kCacheEscapes, where,
                "reads cached '" + param + "' before stage '" + ms.stages[w->second].name +
                    "' produces it");
        }
        if (w->second < t && sigma == 0 && (r.reach.kmin != 0 || r.reach.kmax != 0)) {
          raise(Kind::kPolicyViolation, where,
                "vertical offset on '" + param + "', produced in the same parallel multistage");
        }
      }
    }

    for (const std::string& c : ms.caches) {
      const std::string where = "multistage '" + ms.name + "'";
      if (!writer.count(c)) raise(Kind::kCacheEscapes, where, "cached '" + c + "' is never produced");
      if (!bindings.field(c)) raise(Kind::kUnboundParameter, where, "cached '" + c + "' not bound");
    }
    comp.info_.push_back(std::move(infos));
  }

  // A cached field never reaches memory, so nothing outside may observe it.
  for (std::size_t m = 0; m < multistages.size(); ++m) {
    for (const std::string& c : multistages[m].caches) {
      for (std::size_t o = 0; o < multistages.size(); ++o) {
        if (o == m) continue;
        for (std::size_t s = 0; s < multistages[o].stages.size(); ++s) {
          const StageSpec& st = multistages[o].stages[s];
          for (std::size_t p = 0; p < st.params.size(); ++p) {
            if (st.params[p] == c && comp.info_[o][s].reads[p].used) {
              raise(Kind::kCacheEscapes, "multistage '" + multistages[o].name + "' stage '" + st.name + "'",
                    "reads '" + c + "', cached in multistage '" + multistages[m].name + "'");
            }
          }
        }
      }
    }
  }

  comp.bindings_ = std::move(bindings);
  comp.multistages_ = std::move(multistages);
  return comp;
}

}  // namespace trigrid

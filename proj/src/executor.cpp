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

#include "trigrid/executor.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <exception>
#include <thread>

namespace trigrid {

namespace {

using Clock = std::chrono::steady_clock;
using detail::Frame;
using detail::SlotView;
using Kind = CompositionError::Kind;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int sweep_sign(ExecutionPolicy p) {
  return p == ExecutionPolicy::kForward ? 1 : p == ExecutionPolicy::kBackward ? -1 : 0;
}

struct TileRange {
  int i0, i1, j0, j1;
};

std::vector<TileRange> make_tiles(const PatchSpec& g, TileSpec t) {
  if (t.i < 0 || t.j < 0) throw ConfigError("tile sizes must be >= 0");
  const int ti = t.i > 0 ? std::min(t.i, g.rows) : g.rows;
  const int tj = t.j > 0 ? std::min(t.j, g.cols) : g.cols;
  std::vector<TileRange> tiles;
  for (int i = 0; i < g.rows; i += ti) {
    for (int j = 0; j < g.cols; j += tj) {
      tiles.push_back({i, std::min(i + ti, g.rows), j, std::min(j + tj, g.cols)});
    }
  }
  return tiles;
}

template <class Fn>
void for_workers(int workers, Fn fn) {
  if (workers <= 1) {
    fn(0);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        fn(w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void fill_halo(Field& f) {
  const PatchSpec& g = f.patch();
  const Layout& L = f.layout();
  double* buf = f.buffer(Space::kPrimary).data();
  const int H = g.halo, C = colors(f.location());
  for (int x = 0; x < f.extra(); ++x) {
    for (int k = 0; k < f.levels(); ++k) {
      for (int i = -H; i < g.rows + H; ++i) {
        const bool row_inside = i >= 0 && i < g.rows;
        const int wi = wrap_index(i, g.rows);
        for (int c = 0; c < C; ++c) {
          for (int j = -H; j < g.cols + H; ++j) {
            if (row_inside && j >= 0 && j < g.cols) continue;
            buf[L.offset_unchecked(i, c, j, k, x)] =
                buf[L.offset_unchecked(wi, c, wrap_index(j, g.cols), k, x)];
          }
        }
      }
    }
  }
}

SlotView main_view(Field& f, double* data) {
  SlotView v;
  const Layout& L = f.layout();
  const auto& st = L.strides();
  v.data = v.swept_data = v.write_data = data;
  v.origin = L.origin();
  v.si = st[0];
  v.sc = st[1];
  v.sj = st[2];
  v.sk = f.is_2d() ? 0 : st[3];
  v.sx = st[4];
  const PatchSpec& g = f.patch();
  v.ilo = -g.halo;
  v.ihi = g.rows + g.halo;
  v.jlo = -g.halo;
  v.jhi = g.cols + g.halo;
  v.levels = f.levels();
  v.extra = f.extra();
  v.field = &f;
  v.counting = f.counting();
  v.logging = f.logging();
  return v;
}

SlotView global_view(double value) {
  SlotView v;
  v.global = true;
  v.value = value;
  return v;
}

std::vector<SlotView> main_slots(const Computation& comp, const StageSpec& st) {
  std::vector<SlotView> slots(st.accessors.size());
  for (std::size_t p = 0; p < slots.size(); ++p) {
    if (st.accessors[p].intent == Intent::kGlobal) {
      slots[p] = global_view(*comp.scalar(st.params[p]));
    } else {
      Field* f = comp.field(st.params[p]);
      slots[p] = main_view(*f, f->buffer(Space::kPrimary).data());
    }
  }
  return slots;
}

Frame make_frame(const StageSpec& st, const StageInfo& info, std::vector<SlotView>& slots,
                 bool check) {
  Frame f;
  f.location = st.location;
  f.levels = info.levels;
  f.out_slot = info.out_slot;
  f.slots = slots;
  f.accessors = st.accessors;
  f.check = check;
  f.stage_name = &st.name;
  return f;
}

void flush(std::vector<SlotView>& slots) {
  for (SlotView& s : slots) {
    if (s.field && (s.raw_reads || s.raw_writes)) {
      s.field->add_raw(s.raw_reads, s.raw_writes);
      s.raw_reads = s.raw_writes = 0;
    }
  }
}

std::uint64_t sweep_level(const StageSpec& st, Frame& f, int k, int i0, int i1, int j0,
                          int j1) {
  const int C = colors(st.location);
  std::array<const StageBody*, 3> body{};
  for (int c = 0; c < C; ++c) body[c] = &st.body(c, vertical_dispatch(st, c, k, f.levels));
  f.k = k;
  Evaluation e(&f);
  for (int i = i0; i < i1; ++i) {
    f.i = i;
    for (int c = 0; c < C; ++c) {
      f.color = c;
      const StageBody& b = *body[c];
      for (int j = j0; j < j1; ++j) {
        f.j = j;
        b(e);
      }
    }
  }
  return static_cast<std::uint64_t>(i1 - i0) * (j1 - j0) * C;
}

void open_stage(const std::vector<Field*>& fields, const std::string& label) {
  for (Field* f : fields) {
    if (f->counting()) f->begin_stage(label);
  }
}

void close_stage(const std::vector<Field*>& fields) {
  for (Field* f : fields) {
    if (f->stage_open()) f->end_stage();
  }
}

void prepare(const Computation& comp) {
  for (Field* f : comp.fields()) {
    f->check_readable(Space::kPrimary);
    fill_halo(*f);
  }
}

std::map<std::string, std::size_t> writers(const Computation& comp, std::size_t m) {
  std::map<std::string, std::size_t> w;
  for (std::size_t s = 0; s < comp.multistages()[m].stages.size(); ++s) {
    w[comp.info(m, s).out_param] = s;
  }
  return w;
}

bool horizontal_zero(const Extent& e) {
  return e.imin == 0 && e.imax == 0 && e.jmin == 0 && e.jmax == 0;
}

}  // namespace

std::string_view name(ExecutorKind kind) {
  return kind == ExecutorKind::kNaive ? "naive" : "fused";
}

ExecutorKind parse_executor(std::string_view text) {
  if (text == "naive") return ExecutorKind::kNaive;
  if (text == "fused") return ExecutorKind::kFused;
  throw ConfigError("unknown executor '" + std::string(text) + "' (expected naive or fused)");
}

void halo_update(Field& field) {
  field.note_write(Space::kPrimary);
  fill_halo(field);
}

RunStats run_naive(const Computation& comp, const RunOptions& options) {
  const auto t_all = Clock::now();
  const std::vector<Field*> fields = comp.fields();
  prepare(comp);
  const std::vector<TileRange> tiles = make_tiles(comp.patch(), options.tile);
  const int workers = std::max(1, options.workers);
  RunStats stats;
  for (std::size_t m = 0; m < comp.multistages().size(); ++m) {
    const MultiStageSpec& ms = comp.multistages()[m];
    const int sigma = sweep_sign(ms.policy);
    const auto t0 = Clock::now();
    for (std::size_t s = 0; s < ms.stages.size(); ++s) {
      const StageSpec& st = ms.stages[s];
      const StageInfo& info = comp.info(m, s);
      Field* out = comp.field(info.out_param);
      out->note_write(Space::kPrimary);
      open_stage(fields, st.name);
      std::vector<std::uint64_t> updates(workers, 0);
      for_workers(workers, [&](int w) {
        std::vector<SlotView> slots = main_slots(comp, st);
        Frame frame = make_frame(st, info, slots, options.check);
        for (std::size_t t = w; t < tiles.size(); t += workers) {
          const TileRange& r = tiles[t];
          for (int n = 0; n < info.levels; ++n) {
            const int k = sigma < 0 ? info.levels - 1 - n : n;
            updates[w] += sweep_level(st, frame, k, r.i0, r.i1, r.j0, r.j1);
          }
        }
        flush(slots);
      });
      close_stage(fields);
      for (auto u : updates) stats.updates[st.name] += u;
      fill_halo(*out);
    }
    stats.multistage_seconds.emplace_back(ms.name, seconds_since(t0));
  }
  stats.seconds = seconds_since(t_all);
  return stats;
}

FusedPlan plan_fused(const Computation& comp, std::size_t m) {
  const MultiStageSpec& ms = comp.multistages()[m];
  const std::size_t n = ms.stages.size();
  const int sigma = sweep_sign(ms.policy);
  const int sig = sigma == 0 ? 1 : sigma;
  const int H = comp.patch().halo;
  const auto writer = writers(comp, m);
  auto hazard = [&](std::size_t t, const std::string& msg) {
    throw CompositionError(Kind::kFusionHazard, "multistage '" + ms.name + "' stage '" +
                                                    ms.stages[t].name + "': " + msg);
  };

  FusedPlan plan;
  plan.apron.assign(n, Extent{});
  plan.lag.assign(n, 0);
  plan.window.assign(n, 0);
  plan.shadowed.assign(n, false);

  for (std::size_t t = n; t-- > 0;) {
    const StageSpec& st = ms.stages[t];
    const StageInfo& info = comp.info(m, t);
    for (std::size_t p = 0; p < st.accessors.size(); ++p) {
      const detail::ProbeRecord& rec = info.reads[p];
      if (!rec.used || st.accessors[p].intent == Intent::kGlobal) continue;
      const std::string& param = st.params[p];
      const Extent& r = rec.reach;
      auto w = writer.find(param);
      const bool produced_before = w != writer.end() && w->second < t;
      if (produced_before && ms.cached(param)) {
        Extent& a = plan.apron[w->second];
        const Extent& at = plan.apron[t];
        a = a.merged({at.imin + r.imin, at.imax + r.imax, at.jmin + r.jmin, at.jmax + r.jmax, 0, 0});
        continue;
      }
      if (produced_before) {
        if (!horizontal_zero(r)) {
          hazard(t, "reads non-cached intermediate '" + param + "' at a horizontal offset");
        }
        if (!horizontal_zero(plan.apron[t])) {
          hazard(t, "recomputes an apron but reads non-cached intermediate '" + param + "'");
        }
        continue;
      }
      if (w != writer.end() && w->second == t) continue;  // own output
      if (w != writer.end()) plan.shadowed[w->second] = true;
      const Extent& at = plan.apron[t];
      if (at.imin + r.imin < -H || at.imax + r.imax > H || at.jmin + r.jmin < -H ||
          at.jmax + r.jmax > H) {
        throw CompositionError(Kind::kExtentExceedsHalo,
                               "multistage '" + ms.name + "' stage '" + st.name +
                                   "': apron plus reach of '" + param + "' exceeds the halo");
      }
    }
  }

  for (std::size_t t = 0; t < n; ++t) {
    const StageSpec& st = ms.stages[t];
    const StageInfo& info = comp.info(m, t);
    for (std::size_t p = 0; p < st.accessors.size(); ++p) {
      const detail::ProbeRecord& rec = info.reads[p];
      if (!rec.used || st.accessors[p].intent == Intent::kGlobal) continue;
      auto w = writer.find(st.params[p]);
      if (w == writer.end() || w->second >= t) continue;
      const StageInfo& producer = comp.info(m, w->second);
      if (producer.levels == 1 && info.levels > 1 && comp.field(producer.out_param)->is_2d()) {
        hazard(t, "consumes 2D intermediate '" + producer.out_param + "' across levels");
      }
      const int ahead = sig > 0 ? rec.reach.kmax : -rec.reach.kmin;
      plan.lag[t] = std::max(plan.lag[t], plan.lag[w->second] + ahead);
    }
  }

  for (std::size_t t = 0; t < n; ++t) {
    const StageSpec& st = ms.stages[t];
    const StageInfo& info = comp.info(m, t);
    for (std::size_t p = 0; p < st.accessors.size(); ++p) {
      const detail::ProbeRecord& rec = info.reads[p];
      if (!rec.used || st.accessors[p].intent == Intent::kGlobal) continue;
      auto w = writer.find(st.params[p]);
      if (w == writer.end() || w->second > t || !ms.cached(st.params[p])) continue;
      const std::size_t s = w->second;
      const int behind = sig > 0 ? rec.reach.kmin : -rec.reach.kmax;
      plan.window[s] = std::max(plan.window[s], plan.lag[t] - plan.lag[s] - behind + 1);
    }
  }
  int kmax = 0, lagmax = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (ms.cached(comp.info(m, s).out_param)) plan.window[s] = std::max(plan.window[s], 1);
    kmax = std::max(kmax, comp.info(m, s).levels);
    lagmax = std::max(lagmax, plan.lag[s]);
  }
  plan.steps = kmax + lagmax;
  return plan;
}

RunStats run_fused(const Computation& comp, const RunOptions& options) {
  const auto t_all = Clock::now();
  const std::vector<Field*> fields = comp.fields();
  std::vector<FusedPlan> plans;
  for (std::size_t m = 0; m < comp.multistages().size(); ++m) plans.push_back(plan_fused(comp, m));
  prepare(comp);
  const std::vector<TileRange> tiles = make_tiles(comp.patch(), options.tile);
  const int workers = std::max(1, options.workers);
  int tile_rows = 0, tile_cols = 0;
  for (const TileRange& r : tiles) {
    tile_rows = std::max(tile_rows, r.i1 - r.i0);
    tile_cols = std::max(tile_cols, r.j1 - r.j0);
  }

  RunStats stats;
  for (std::size_t m = 0; m < comp.multistages().size(); ++m) {
    const MultiStageSpec& ms = comp.multistages()[m];
    const FusedPlan& plan = plans[m];
    const std::size_t n = ms.stages.size();
    const int sigma = sweep_sign(ms.policy);
    const auto writer = writers(comp, m);
    const auto t0 = Clock::now();
    int kmax = 0;
    for (std::size_t s = 0; s < n; ++s) kmax = std::max(kmax, comp.info(m, s).levels);

    std::vector<std::vector<double>> shadow(n);
    for (std::size_t s = 0; s < n; ++s) {
      const std::string& out = comp.info(m, s).out_param;
      if (ms.cached(out)) continue;
      Field* f = comp.field(out);
      f->note_write(Space::kPrimary);
      if (plan.shadowed[s]) {
        auto buf = f->buffer(Space::kPrimary);
        shadow[s].assign(buf.begin(), buf.end());
      }
    }

    open_stage(fields, ms.name);
    std::vector<std::uint64_t> updates(n * workers, 0);
    for_workers(workers, [&](int w) {
      struct Scratch {
        std::vector<double> buf;
        std::vector<int> tags;
        int ni = 0, nj = 0;
      };
      std::vector<Scratch> scratch(n);
      for (std::size_t s = 0; s < n; ++s) {
        if (plan.window[s] == 0) continue;
        const Extent& a = plan.apron[s];
        Field* f = comp.field(comp.info(m, s).out_param);
        Scratch& sc = scratch[s];
        sc.ni = tile_rows + a.imax - a.imin;
        sc.nj = tile_cols + a.jmax - a.jmin;
        const int ring = f->is_2d() ? 1 : plan.window[s];
        sc.buf.assign(static_cast<std::size_t>(ring) * sc.ni * colors(f->location()) * sc.nj *
                          f->extra(), 0.0);
        sc.tags.assign(ring, INT_MIN);
      }

      std::vector<std::vector<SlotView>> slots(n);
      std::vector<std::vector<int>> scratch_of(n);
      std::vector<Frame> frames;
      for (std::size_t t = 0; t < n; ++t) {
        const StageSpec& st = ms.stages[t];
        slots[t].resize(st.accessors.size());
        scratch_of[t].assign(st.accessors.size(), -1);
        for (std::size_t p = 0; p < st.accessors.size(); ++p) {
          const std::string& param = st.params[p];
          if (st.accessors[p].intent == Intent::kGlobal) {
            slots[t][p] = global_view(*comp.scalar(param));
            continue;
          }
          Field* f = comp.field(param);
          double* main = f->buffer(Space::kPrimary).data();
          auto wr = writer.find(param);
          SlotView v = main_view(*f, main);
          if (wr != writer.end() && ms.cached(param)) {
            const std::size_t s = wr->second;
            Scratch& sc = scratch[s];
            const int X = f->extra(), C = colors(f->location());
            v.data = v.swept_data = v.write_data = sc.buf.data();
            v.origin = 0;
            v.sx = 1;
            v.sj = X;
            v.sc = static_cast<std::ptrdiff_t>(sc.nj) * X;
            v.si = v.sc * C;
            v.sk = f->is_2d() ? 0 : v.si * sc.ni;
            v.ring = f->is_2d() ? 0 : plan.window[s];
            v.ring_tags = f->is_2d() ? nullptr : sc.tags.data();
            v.field = nullptr;
            v.counting = v.logging = false;
            scratch_of[t][p] = static_cast<int>(s);
          } else if (wr != writer.end() && plan.shadowed[wr->second]) {
            const std::size_t s = wr->second;
            double* sh = shadow[s].data();
            if (t == s) {
              v.swept_data = v.write_data = sh;
              v.swept_sign = sigma;
            } else if (t > s) {
              v.data = v.swept_data = v.write_data = sh;
            }
          }
          slots[t][p] = v;
        }
        frames.push_back(make_frame(st, comp.info(m, t), slots[t], options.check));
      }

      for (std::size_t idx = w; idx < tiles.size(); idx += workers) {
        const TileRange& r = tiles[idx];
        for (std::size_t s = 0; s < n; ++s) {
          std::fill(scratch[s].tags.begin(), scratch[s].tags.end(), INT_MIN);
        }
        for (std::size_t t = 0; t < n; ++t) {
          for (std::size_t p = 0; p < slots[t].size(); ++p) {
            const int s = scratch_of[t][p];
            if (s < 0) continue;
            const Extent& a = plan.apron[s];
            SlotView& v = slots[t][p];
            v.i0 = v.ilo = r.i0 + a.imin;
            v.ihi = r.i1 + a.imax;
            v.j0 = v.jlo = r.j0 + a.jmin;
            v.jhi = r.j1 + a.jmax;
          }
        }
        for (int step = 0; step < plan.steps; ++step) {
          for (std::size_t t = 0; t < n; ++t) {
            const int levels = comp.info(m, t).levels;
            const int k = sigma < 0 ? (kmax - 1) - step + plan.lag[t] : step - plan.lag[t];
            if (k < 0 || k >= levels) continue;
            const Extent& a = plan.apron[t];
            updates[t * workers + w] += sweep_level(ms.stages[t], frames[t], k, r.i0 + a.imin,
                                                    r.i1 + a.imax, r.j0 + a.jmin, r.j1 + a.jmax);
          }
        }
      }
      for (auto& sl : slots) flush(sl);
    });
    close_stage(fields);

    for (std::size_t s = 0; s < n; ++s) {
      for (int w = 0; w < workers; ++w) stats.updates[ms.stages[s].name] += updates[s * workers + w];
      const std::string& out = comp.info(m, s).out_param;
      if (ms.cached(out)) continue;
      Field* f = comp.field(out);
      if (plan.shadowed[s]) f->swap_buffer(shadow[s]);
      fill_halo(*f);
    }
    stats.multistage_seconds.emplace_back(ms.name, seconds_since(t0));
  }
  stats.seconds = seconds_since(t_all);
  return stats;
}

RunStats run(const Computation& comp, const RunOptions& options) {
  return options.executor == ExecutorKind::kFused ? run_fused(comp, options)
                                                  : run_naive(comp, options);
}

TimingResult time_computation(const Computation& comp, const RunOptions& options, int reps) {
  if (reps < 3) throw ConfigError("reps must be >= 3, got " + std::to_string(reps));
  std::vector<std::pair<Field*, bool>> saved;
  for (Field* f : comp.fields()) {
    saved.emplace_back(f, f->counting());
    f->set_counting(false);
  }
  TimingResult result;
  try {
    run(comp, options);
    for (int r = 0; r < reps; ++r) result.samples.push_back(run(comp, options).seconds);
  } catch (...) {
    for (auto& [f, on] : saved) f->set_counting(on);
    throw;
  }
  for (auto& [f, on] : saved) f->set_counting(on);
  std::vector<double> sorted = result.samples;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t h = sorted.size() / 2;
  result.median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  return result;
}

}  // namespace trigrid

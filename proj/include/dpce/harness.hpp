//
// Copyright 2026 The dpce Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "dpce/channel.hpp"
#include "dpce/config.hpp"
#include "dpce/dp.hpp"
#include "dpce/estimation.hpp"
#include "dpce/fw.hpp"
#include "dpce/protocol.hpp"
#include "dpce/svd.hpp"

namespace dpce {

enum class Method { fw, svd, npfw, npsvd, po };
enum class SweepAxis { epsilon, tau_d };
// normalized: beta and sigma2 divided by sigma2 (SNR unchanged, sigma2 = 1).
enum class Units { normalized, physical };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::fw: return "fw";
    case Method::svd: return "svd";
    case Method::npfw: return "npfw";
    case Method::npsvd: return "npsvd";
    case Method::po: return "po";
  }
  return "?";
}

inline const char* to_string(SweepAxis a) {
  return a == SweepAxis::epsilon ? "epsilon" : "tau_d";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::fw, Method::svd, Method::npfw, Method::npsvd, Method::po}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("method", "expected fw|svd|npfw|npsvd|po, got '" + s + "'");
}

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "epsilon") return SweepAxis::epsilon;
  if (s == "tau_d") return SweepAxis::tau_d;
  throw ConfigError("sweep", "expected epsilon|tau_d, got '" + s + "'");
}

inline Units parse_units(const std::string& s) {
  if (s == "normalized") return Units::normalized;
  if (s == "physical") return Units::physical;
  throw ConfigError("units", "expected normalized|physical, got '" + s + "'");
}

inline constexpr int kNonPrivateFwIterations = 200;

// Method parameters not part of the physical scenario. T = 0 or
// nuc_bound = 0 means "choose by cross-validation" (or use the default when
// cross-validation is off: T = 2K, nuc_bound = r from beta).
struct MethodParams {
  double eps = 1.0;
  double delta = 0.1;
  int T = 0;
  double nuc_bound = 0.0;  // working units
  bool plain_K_bound = false;
  std::optional<double> L_override;  // working units
  bool crossval = true;
  int crossval_trials = 5;
  std::vector<double> r_grid;  // physical units, converted on use
  Units units = Units::normalized;

  static MethodParams from_config(const KeyValueConfig& cfg) {
    MethodParams p;
    p.eps = cfg.get_double("eps", p.eps);
    p.delta = cfg.get_double("delta", p.delta);
    p.T = static_cast<int>(cfg.get_int("T", p.T));
    p.nuc_bound = cfg.get_double("nuc_bound", p.nuc_bound);
    p.plain_K_bound = cfg.get_bool("plain_K_bound", p.plain_K_bound);
    if (cfg.has("L_override")) p.L_override = cfg.get_double("L_override", 0.0);
    p.crossval = cfg.get_bool("crossval", p.crossval);
    p.crossval_trials = static_cast<int>(cfg.get_int("crossval_trials", p.crossval_trials));
    p.r_grid = cfg.get_doubles("r_grid");
    if (cfg.has("units")) p.units = parse_units(cfg.raw("units"));
    p.validate();
    return p;
  }

  void validate() const {
    if (!(eps > 0.0)) throw ConfigError("eps", "must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must be in (0, 1)");
    if (T < 0) throw ConfigError("T", "must be >= 0");
    if (nuc_bound < 0.0) throw ConfigError("nuc_bound", "must be >= 0");
    if (L_override && !(*L_override > 0.0)) throw ConfigError("L_override", "must be > 0");
    if (crossval_trials < 1) throw ConfigError("crossval_trials", "must be >= 1");
  }
};

struct SweepSpec {
  Method method = Method::fw;
  SweepAxis axis = SweepAxis::epsilon;
  std::vector<double> values;
  int trials = 50;
  bool fixed_large_scale = true;
  std::uint64_t seed = 1;
  int workers = 1;
  bool timing = true;  // false writes seconds = 0 for byte-identical reruns

  void validate() const {
    if (trials < 1) throw ConfigError("trials", "must be >= 1");
    if (values.empty()) throw ConfigError("values", "need at least one axis value");
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (!(values[i] > values[i - 1])) {
        throw ConfigError("values", "must be strictly increasing");
      }
    }
    if (axis == SweepAxis::tau_d) {
      for (double v : values) {
        if (v < 0.0 || v != std::floor(v)) {
          throw ConfigError("values", "tau_d values must be non-negative integers");
        }
      }
    } else {
      for (double v : values) {
        if (!(v > 0.0)) throw ConfigError("values", "epsilon values must be > 0");
      }
    }
    if (workers < 1) throw ConfigError("workers", "must be >= 1");
  }

  static SweepSpec from_config(const KeyValueConfig& cfg) {
    SweepSpec s;
    if (cfg.has("method")) s.method = parse_method(cfg.raw("method"));
    if (cfg.has("sweep")) s.axis = parse_axis(cfg.raw("sweep"));
    s.values = cfg.get_doubles("values");
    s.trials = static_cast<int>(cfg.get_int("trials", s.trials));
    s.fixed_large_scale = cfg.get_bool("fixed_large_scale", s.fixed_large_scale);
    s.seed = cfg.get_u64("master_seed", cfg.get_u64("seed", s.seed));
    s.workers = static_cast<int>(cfg.get_int("workers", s.workers));
    s.timing = cfg.get_bool("timing", s.timing);
    return s;
  }
};

struct MetricsRecord {
  std::string method;
  std::string axis;
  double axis_value = 0.0;
  double nmse = 0.0;
  double ser = 0.0;
  int trials = 0;
  int failures = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;

  bool operator==(const MetricsRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Large-scale setup and unit handling

inline RMatrix draw_large_scale(const Scenario& sc, std::uint64_t master,
                                std::optional<std::uint64_t> trial = std::nullopt) {
  const std::uint64_t topo_seed = trial ? seeds::split(master, "topology", {*trial})
                                        : seeds::split(master, "topology");
  const std::uint64_t shadow_seed = trial ? seeds::split(master, "shadowing", {*trial})
                                          : seeds::split(master, "shadowing");
  return large_scale_fading(gen_topology(sc, topo_seed), sc, shadow_seed);
}

// Physical -> working units. In normalized mode every power is divided by
// sigma2, which leaves every SNR (and every estimator's output up to the
// same scale) unchanged.
struct WorkingUnits {
  Scenario scenario;
  RMatrix beta;
  double power_scale = 1.0;  // working power = physical power * power_scale
};

inline WorkingUnits to_working_units(const Scenario& sc, const RMatrix& beta,
                                     Units units) {
  WorkingUnits w{sc, beta, 1.0};
  if (units == Units::normalized && sc.sigma2 > 0.0) {
    w.power_scale = 1.0 / sc.sigma2;
    w.beta = beta * w.power_scale;
    w.scenario.sigma2 = 1.0;
  }
  return w;
}

// ---------------------------------------------------------------------------
// One Monte-Carlo trial

struct ResolvedParams {
  int T = 1;
  double nuc_bound = 1.0;
  double eps = 1.0;
  double delta = 0.1;
  std::optional<double> L_override;
};

struct TrialOutcome {
  double nmse = 0.0;
  double ser = 0.0;
  double L = 0.0;
  double noise_scale = 0.0;
  double max_clip_excess = -std::numeric_limits<double>::infinity();
  bool audit_pass = true;
  std::size_t gram_releases = 0;
  int trimmed_aps = 0;
  Transcript transcript;
};

inline std::uint64_t dp_seed(std::uint64_t master, std::uint64_t trial) {
  return seeds::split(master, "dp", {trial});
}

// Sends each AP's detection statistic over the backhaul and combines at the CPU.
inline Detection cpu_detect(std::vector<CMatrix> D_local, Transcript& transcript) {
  Backhaul bh(static_cast<int>(D_local.size()));
  for (std::size_t m = 0; m < D_local.size(); ++m) {
    Message msg;
    msg.kind = MessageKind::LocalDetection;
    msg.sender = static_cast<int>(m);
    msg.round = 1;
    msg.payload = std::move(D_local[m]);
    bh.send_to_cpu(std::move(msg));
  }
  auto msgs = bh.collect_at_cpu(1, MessageKind::LocalDetection);
  std::vector<CMatrix> stats;
  stats.reserve(msgs.size());
  for (auto& m : msgs) stats.push_back(std::move(m.payload));
  const std::size_t offset = transcript.size();
  for (auto r : bh.transcript()) {
    r.id += offset;
    transcript.push_back(r);
  }
  return combine_and_slice(stats);
}

// `sc` and `beta` are in working units.
inline TrialOutcome run_trial(Method method, const Scenario& sc, const RMatrix& beta,
                              const ResolvedParams& p, std::uint64_t master,
                              std::uint64_t trial) {
  const TrialSeeds s = TrialSeeds::derive(master, trial);
  const ChannelSet ch = gen_channels(beta, sc, s.channel);
  const SignalBlock blk = gen_signal_block(sc, ch.H, s);
  const auto& Y = blk.obs.Y;
  const auto& masks = blk.obs.mask;

  TrialOutcome out;
  out.L = p.L_override.value_or(frob_bound_L(beta, sc));
  std::vector<CMatrix> H_hat;
  std::vector<CMatrix> D_local;
  H_hat.reserve(Y.size());
  D_local.reserve(Y.size());

  auto finish_from_completion = [&](const std::vector<CMatrix>& X_hat) {
    for (const auto& Xm : X_hat) {
      H_hat.push_back(estimate_channel(Xm, blk.P));
      D_local.push_back(detect_local(H_hat.back(), Xm.rightCols(sc.tau_d)));
    }
  };

  switch (method) {
    case Method::fw:
    case Method::npfw: {
      FwConfig cfg;
      cfg.T = p.T;
      cfg.nuc_bound = p.nuc_bound;
      cfg.L = out.L;
      cfg.mu = method == Method::fw ? calibrate_mu(out.L, p.T, sc.M, p.eps, p.delta) : 0.0;
      out.noise_scale = cfg.mu;
      CompletionResult res = run_fw(Y, masks, cfg, dp_seed(master, trial));
      for (const auto& round : res.fw.masked_norm) {
        for (double n : round) out.max_clip_excess = std::max(out.max_clip_excess, n - out.L);
      }
      out.transcript = std::move(res.transcript);
      finish_from_completion(res.X_hat);
      break;
    }
    case Method::svd:
    case Method::npsvd: {
      const double nu =
          method == Method::svd ? calibrate_nu(out.L, sc.M, p.eps, p.delta) : 0.0;
      out.noise_scale = nu;
      SvdResult res = run_svd(Y, SvdConfig::make(sc.K, nu, sc.N_r, sc.tau_c(), sc.N_a),
                              sc.N_a, sc.N_r, dp_seed(master, trial));
      out.trimmed_aps = res.trimmed_aps;
      out.transcript = std::move(res.transcript);
      finish_from_completion(res.X_hat);
      break;
    }
    case Method::po: {
      for (std::size_t m = 0; m < Y.size(); ++m) {
        H_hat.push_back(pilot_only_ls(Y[m], blk.P));
        D_local.push_back(pilot_only_detect(H_hat.back(), Y[m], masks[m], sc.sigma2, sc.tau_p));
      }
      break;
    }
  }

  out.nmse = nmse(vstack(H_hat), ch.H);
  if (sc.tau_d > 0) {
    const Detection det = cpu_detect(std::move(D_local), out.transcript);
    out.ser = ser(det.symbols, blk.D);
  }
  const AuditReport audit = audit_privacy_surface(out.transcript, sc.tau_c(), sc.K, sc.tau_d);
  out.audit_pass = audit.pass;
  out.gram_releases = audit.gram_releases;
  return out;
}

// Runs trials [0, n) on `workers` threads; results come back in index order.
template <typename Fn>
auto parallel_trials(int n, int workers, Fn&& fn)
    -> std::vector<std::optional<decltype(fn(0))>> {
  using R = decltype(fn(0));
  std::vector<std::optional<R>> results(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] = fn(i);
      } catch (const std::exception&) {
        results[static_cast<std::size_t>(i)].reset();
      }
    }
  };
  const int w = std::max(1, std::min(workers, n));
  if (w == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int i = 0; i < w; ++i) pool.emplace_back(worker);
  }
  return results;
}

// ---------------------------------------------------------------------------
// Cross-validation

// Evaluates every candidate (ascending order) and returns the one with the
// lowest score; ties go to the earlier, i.e. smaller, candidate.
template <typename T, typename Eval>
T cross_validate(const std::vector<T>& grid, Eval&& evaluate) {
  if (grid.empty()) throw ArgumentError("cross_validate: empty grid");
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double score = evaluate(grid[i]);
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  return grid[best];
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return out;
}

// Published search ranges for the nuclear-norm bound, physical units.
inline std::optional<std::vector<double>> published_r_grid(int K) {
  if (K == 5) return linspace(0.001, 0.01, 10);
  if (K == 25) return linspace(0.01, 0.1, 10);
  return std::nullopt;
}

// Grid in working units. Explicit and published grids are given in physical
// units; otherwise 10 points on [0.1 r, r] with r from beta.
inline std::vector<double> nuc_bound_grid(const MethodParams& mp, const WorkingUnits& w) {
  const double amp = std::sqrt(w.power_scale);
  std::vector<double> grid;
  if (!mp.r_grid.empty()) {
    grid = mp.r_grid;
  } else if (auto pub = published_r_grid(w.scenario.K)) {
    grid = *pub;
  } else {
    const double r = nuclear_bound_r(w.beta, w.scenario.tau_c(), w.scenario.N_a);
    grid = linspace(0.1 * r, r, 10);
    return grid;
  }
  for (double& g : grid) g *= amp;
  std::sort(grid.begin(), grid.end());
  return grid;
}

inline std::vector<int> iteration_grid(int K) {
  std::vector<int> out;
  for (int i = 1; i <= 5; ++i) out.push_back(i * K);
  return out;
}

inline double mean_nmse(Method method, const WorkingUnits& w, const ResolvedParams& p,
                        std::uint64_t master, int trials, int workers) {
  const std::uint64_t val_master = seeds::split(master, "crossval");
  auto res = parallel_trials(trials, workers, [&](int i) {
    return run_trial(method, w.scenario, w.beta, p, val_master,
                     static_cast<std::uint64_t>(i)).nmse;
  });
  double sum = 0.0;
  int n = 0;
  for (const auto& r : res) {
    if (r && std::isfinite(*r)) {
      sum += *r;
      ++n;
    }
  }
  return n == 0 ? std::numeric_limits<double>::infinity() : sum / n;
}

// Resolves T and the nuclear-norm bound for this method at this operating
// point, cross-validating on a validation seed set when asked to.
inline ResolvedParams resolve_params(Method method, const WorkingUnits& w,
                                     const MethodParams& mp, std::uint64_t master,
                                     int workers = 1) {
  ResolvedParams p;
  p.eps = mp.eps;
  p.delta = mp.delta;
  p.L_override = mp.L_override;
  const Scenario& sc = w.scenario;
  if (method == Method::svd || method == Method::npsvd || method == Method::po) {
    return p;
  }
  const bool fixed_T = method == Method::npfw || mp.T > 0;
  p.T = method == Method::npfw ? (mp.T > 0 ? mp.T : kNonPrivateFwIterations)
                               : (mp.T > 0 ? mp.T : 2 * sc.K);
  if (mp.plain_K_bound) {
    p.nuc_bound = sc.K;
  } else if (mp.nuc_bound > 0.0) {
    p.nuc_bound = mp.nuc_bound;
  } else {
    p.nuc_bound = nuclear_bound_r(w.beta, sc.tau_c(), sc.N_a);
  }
  if (!mp.crossval) return p;

  const bool free_r = !mp.plain_K_bound && !(mp.nuc_bound > 0.0);
  std::vector<int> t_grid = fixed_T ? std::vector<int>{p.T} : iteration_grid(sc.K);
  std::vector<double> r_grid = free_r ? nuc_bound_grid(mp, w) : std::vector<double>{p.nuc_bound};
  std::vector<std::pair<int, double>> grid;
  for (int t : t_grid) {
    for (double r : r_grid) grid.emplace_back(t, r);
  }
  if (grid.size() == 1) return p;
  const auto best = cross_validate(grid, [&](const std::pair<int, double>& c) {
    ResolvedParams q = p;
    q.T = c.first;
    q.nuc_bound = c.second;
    return mean_nmse(method, w, q, master, mp.crossval_trials, workers);
  });
  p.T = best.first;
  p.nuc_bound = best.second;
  return p;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepPoint {
  MetricsRecord record;
  ResolvedParams params;
  std::vector<double> trial_nmse;  // completed trials, index order
  std::vector<double> trial_ser;
  double max_clip_excess = -std::numeric_limits<double>::infinity();
  int audit_failures = 0;
};

struct SweepResult {
  std::vector<SweepPoint> points;

  std::vector<MetricsRecord> records() const {
    std::vector<MetricsRecord> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.record);
    return out;
  }
};

// `base` is in physical units.
inline SweepResult run_sweep(const SweepSpec& spec, const Scenario& base,
                             const MethodParams& mp) {
  spec.validate();
  mp.validate();
  base.validate();
  SweepResult result;
  const RMatrix fixed_beta = draw_large_scale(base, spec.seed);
  for (double value : spec.values) {
    Scenario sc = base;
    MethodParams point_mp = mp;
    if (spec.axis == SweepAxis::epsilon) {
      point_mp.eps = value;
    } else {
      sc.tau_d = static_cast<int>(value);
    }
    sc.validate();
    const auto start = std::chrono::steady_clock::now();
    const WorkingUnits w = to_working_units(sc, fixed_beta, mp.units);
    SweepPoint pt;
    pt.params = resolve_params(spec.method, w, point_mp, spec.seed, spec.workers);
    auto outcomes = parallel_trials(spec.trials, spec.workers, [&](int i) {
      const auto trial = static_cast<std::uint64_t>(i);
      if (spec.fixed_large_scale) {
        return run_trial(spec.method, w.scenario, w.beta, pt.params, spec.seed, trial);
      }
      const WorkingUnits wt =
          to_working_units(sc, draw_large_scale(sc, spec.seed, trial), mp.units);
      return run_trial(spec.method, wt.scenario, wt.beta, pt.params, spec.seed, trial);
    });
    double nmse_sum = 0.0;
    double ser_sum = 0.0;
    int failures = 0;
    for (auto& o : outcomes) {
      if (!o || !std::isfinite(o->nmse) || !std::isfinite(o->ser)) {
        ++failures;
        continue;
      }
      pt.trial_nmse.push_back(o->nmse);
      pt.trial_ser.push_back(o->ser);
      nmse_sum += o->nmse;
      ser_sum += o->ser;
      pt.max_clip_excess = std::max(pt.max_clip_excess, o->max_clip_excess);
      if (!o->audit_pass) ++pt.audit_failures;
    }
    const int done = static_cast<int>(pt.trial_nmse.size());
    if (done == 0) {
      throw std::runtime_error(std::string("all trials failed for ") +
                               to_string(spec.method) + " at " +
                               to_string(spec.axis) + "=" + std::to_string(value));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    pt.record = {to_string(spec.method), to_string(spec.axis), value,
                 nmse_sum / done, ser_sum / done, done, failures, spec.seed,
                 spec.timing ? secs : 0.0};
    result.points.push_back(std::move(pt));
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCsvHeader =
    "method,axis,axis_value,nmse,ser,trials,failures,seed,seconds";

namespace detail {
template <typename T>
std::string format_number(T v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw IoError("number formatting failed");
  return std::string(buf, ptr);
}
}  // namespace detail

inline std::string to_csv(const std::vector<MetricsRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) {
    out += r.method + "," + r.axis + "," + detail::format_number(r.axis_value) + "," +
           detail::format_number(r.nmse) + "," + detail::format_number(r.ser) + "," +
           detail::format_number(r.trials) + "," + detail::format_number(r.failures) +
           "," + detail::format_number(r.seed) + "," +
           detail::format_number(r.seconds) + "\n";
  }
  return out;
}

inline void emit_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
  if (records.empty()) throw ArgumentError("emit_csv: no records");
  for (const auto& r : records) {
    if (!std::isfinite(r.nmse) || !std::isfinite(r.ser)) {
      throw ArgumentError("emit_csv: non-finite metric in record for " + r.method);
    }
  }
  const std::string text = to_csv(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline std::vector<MetricsRecord> parse_csv(std::string_view text) {
  std::vector<MetricsRecord> out;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = detail::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    if (header) {
      if (line != kCsvHeader) throw IoError("unexpected CSV header");
      header = false;
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t p = 0;
    while (true) {
      auto c = line.find(',', p);
      f.push_back(line.substr(p, c == std::string_view::npos ? line.size() - p : c - p));
      if (c == std::string_view::npos) break;
      p = c + 1;
    }
    if (f.size() != 9) throw IoError("CSV row has " + std::to_string(f.size()) + " fields");
    MetricsRecord r;
    r.method = std::string(f[0]);
    r.axis = std::string(f[1]);
    r.axis_value = detail::parse_number<double>("axis_value", f[2]);
    r.nmse = detail::parse_number<double>("nmse", f[3]);
    r.ser = detail::parse_number<double>("ser", f[4]);
    r.trials = detail::parse_number<int>("trials", f[5]);
    r.failures = detail::parse_number<int>("failures", f[6]);
    r.seed = detail::parse_number<std::uint64_t>("seed", f[7]);
    r.seconds = detail::parse_number<double>("seconds", f[8]);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

inline double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

// Two-sided p-value of Welch's unequal-variance t-test.
inline double welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw ArgumentError("welch_t_test: need >= 2 samples each");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a) / na;
  const double vb = sample_variance(b) / nb;
  const double diff = mean(a) - mean(b);
  if (va + vb == 0.0) return diff == 0.0 ? 1.0 : 0.0;
  const double t = diff / std::sqrt(va + vb);
  const double dof = (va + vb) * (va + vb) /
                     (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace dpce

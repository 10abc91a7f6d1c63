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

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. Usage: acceptance_test [trials]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dpce/harness.hpp"
#include "test_util.hpp"

namespace dpce {
namespace {

using Clock = std::chrono::steady_clock;
using Big = boost::multiprecision::cpp_bin_float_50;

int g_failed = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failed;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt("%.6g", v[i]);
  }
  return s + "]";
}

// Non-increasing with at most one adjacent pair rising by at most 10%.
bool trend_ok(const std::vector<double>& y, std::string& why) {
  int rises = 0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i] > y[i - 1]) {
      ++rises;
      const double rel = (y[i] - y[i - 1]) / y[i - 1];
      if (rel > 0.10) {
        why = "rise of " + fmt("%.3g", 100 * rel) + "% at index " + std::to_string(i);
        return false;
      }
    }
  }
  if (rises > 1) {
    why = std::to_string(rises) + " rising pairs";
    return false;
  }
  return true;
}

// Signal block from the channel model, used by the exact-recovery criteria.
struct Instance {
  Scenario sc;
  ChannelSet ch;
  SignalBlock blk;
};

Instance make_instance(Scenario sc, std::uint64_t seed) {
  Instance in;
  in.sc = sc;
  const RMatrix beta = draw_large_scale(sc, seed);
  const WorkingUnits w = to_working_units(sc, beta, Units::normalized);
  in.sc = w.scenario;
  in.ch = gen_channels(w.beta, in.sc, seed);
  in.blk = gen_signal_block(in.sc, in.ch.H, TrialSeeds::derive(seed, 0));
  return in;
}

void criterion1() {
  const auto t0 = Clock::now();
  Scenario sc = Scenario::desk();
  const Instance in = make_instance(sc, 101);
  const RMatrix beta = in.ch.beta;
  FwConfig cfg;
  cfg.T = 20;
  cfg.nuc_bound = nuclear_bound_r(beta, in.sc.tau_c(), in.sc.N_a);
  std::vector<CMatrix> rounds;
  run_fw(in.blk.obs.Y, in.blk.obs.mask, cfg, 1,
         [&](int, const std::vector<CMatrix>& X) { rounds.push_back(vstack(X)); });
  const auto oracle = testing::centralized_fw(vstack(in.blk.obs.Y),
                                              testing::stack_masks(in.blk.obs.mask), cfg.T,
                                              cfg.nuc_bound, in.sc.N_a);
  double fw_worst = 0.0;
  for (int n = 0; n < cfg.T; ++n) {
    fw_worst = std::max(fw_worst, testing::rel_err(rounds[n], oracle[n]));
  }
  const SvdConfig scfg =
      SvdConfig::make(in.sc.K, 0.0, in.sc.N_r, in.sc.tau_c(), in.sc.N_a);
  const SvdResult svd = run_svd(in.blk.obs.Y, scfg, in.sc.N_a, in.sc.N_r, 1);
  std::vector<CMatrix> trimmed;
  for (const auto& y : in.blk.obs.Y) trimmed.push_back(trim(y, scfg.trim_threshold));
  const CMatrix want = testing::centralized_svd(
      vstack(trimmed), in.sc.K, static_cast<double>(in.sc.N_a) / in.sc.N_r);
  const double svd_err = testing::rel_err(vstack(svd.X_hat), want);
  const double secs = seconds_since(t0);
  report(1, "oracle equivalence", fw_worst <= 1e-9 && svd_err <= 1e-9 && secs < 60,
         "fw max rel diff " + fmt("%.3g", fw_worst) + " over " + std::to_string(cfg.T) +
             " rounds, svd rel diff " + fmt("%.3g", svd_err) + ", " + fmt("%.1f", secs) +
             " s");
}

void criterion2() {
  Rng rng(seeds::split(7, "calibration-grid"));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double L = std::pow(10.0, rng.uniform(-6.0, 3.0));
    const int T = 1 + static_cast<int>(rng.below(200));
    const int M = 1 + static_cast<int>(rng.below(200));
    const double eps = std::pow(10.0, rng.uniform(-2.0, 1.5));
    const double delta = std::pow(10.0, rng.uniform(-8.0, -0.05));
    const Big bL(L), bT(T), bM(M), be(eps), bd(delta);
    const Big mu = 16 * bL * bL *
                   sqrt(bT / bM * log(Big(2.5) * bT / bd) * log(Big(2) / bd)) / be;
    const Big nu = bL * bL * sqrt(Big(2) / bM * log(Big(1.25) / bd)) / be;
    const double got_mu = calibrate_mu(L, T, M, eps, delta);
    const double got_nu = calibrate_nu(L, M, eps, delta);
    worst = std::max(worst, std::abs(static_cast<double>((Big(got_mu) - mu) / mu)));
    worst = std::max(worst, std::abs(static_cast<double>((Big(got_nu) - nu) / nu)));
  }
  report(2, "calibration formulas", worst <= 1e-12,
         "max rel err " + fmt("%.3g", worst) + " on 100 points (50-digit reference)");
}

void criterion3() {
  const double scale = 2.5;
  const int dim = 200, M = 20;
  const CMatrix G = sample_hermitian_noise(dim, scale, 31);
  const bool herm = exactly_hermitian(G);
  const double var = G.squaredNorm() / (dim * dim);
  CMatrix W = CMatrix::Zero(dim, dim);
  bool all_herm = herm;
  for (int m = 0; m < M; ++m) {
    const CMatrix Gm = sample_hermitian_noise(dim, scale, seeds::split(32, "ap", {std::uint64_t(m)}));
    all_herm = all_herm && exactly_hermitian(Gm);
    W += Gm;
  }
  const double agg = W.squaredNorm() / (dim * dim);
  const double r1 = var / (scale * scale), r2 = agg / (M * scale * scale);
  report(3, "noise mechanism",
         all_herm && std::abs(r1 - 1) <= 0.05 && std::abs(r2 - 1) <= 0.05,
         std::string("exact Hermitian ") + (all_herm ? "yes" : "no") +
             ", variance/scale^2 " + fmt("%.4f", r1) + ", aggregate/(M scale^2) " +
             fmt("%.4f", r2));
}

void criterion4() {
  const auto t0 = Clock::now();
  Scenario sc = Scenario::desk();
  sc.K = 2;
  sc.tau_p = 2;
  sc.tau_d = 58;
  sc.sigma2 = 0.0;
  sc.N_r = sc.N_a;
  const RMatrix beta = RMatrix::Ones(sc.K, sc.M);
  const ChannelSet ch = gen_channels(beta, sc, 41);
  const SignalBlock blk = gen_signal_block(sc, ch.H, TrialSeeds::derive(41, 0));
  const CMatrix X = blk.X;
  FwConfig cfg;
  cfg.T = kNonPrivateFwIterations;
  cfg.nuc_bound = nuclear_norm(X);
  const CompletionResult fw = run_fw(blk.obs.Y, blk.obs.mask, cfg, 1);
  const double fw_err = testing::rel_err(vstack(fw.X_hat), X);
  const SvdResult svd = run_svd(
      blk.obs.Y, SvdConfig::make(sc.K, 0.0, sc.N_r, sc.tau_c(), sc.N_a), sc.N_a, sc.N_r, 1);
  const double svd_err = testing::rel_err(vstack(svd.X_hat), X);
  const double secs = seconds_since(t0);
  report(4, "non-private completion", fw_err <= 1e-2 && svd_err <= 1e-8 && secs < 120,
         "npfw rel err " + fmt("%.3g", fw_err) + " (T=200), npsvd rel err " +
             fmt("%.3g", svd_err) + ", " + fmt("%.1f", secs) + " s");
}

void criterion5() {
  Scenario sc = Scenario::desk();
  sc.sigma2 = 0.0;
  sc.N_r = sc.N_a;
  const RMatrix beta = draw_large_scale(sc, 51);
  ResolvedParams p;
  double worst = 0.0, worst_ser = 0.0;
  std::string detail;
  for (Method m : {Method::npsvd, Method::po}) {
    for (std::uint64_t t = 0; t < 5; ++t) {
      const TrialOutcome o = run_trial(m, sc, beta, p, 51, t);
      worst = std::max(worst, o.nmse);
      worst_ser = std::max(worst_ser, o.ser);
    }
  }
  report(5, "end-to-end exactness", worst <= 1e-10 && worst_ser == 0.0,
         "max NMSE " + fmt("%.3g", worst) + ", max SER " + fmt("%.3g", worst_ser) +
             " (npsvd and pilot-only, 5 trials each)");
}

struct Sweeps {
  SweepResult fw_eps, svd_eps, npfw, npsvd;
  SweepResult fw_td, svd_td, po_td;
  double eps_secs = 0.0, td_secs = 0.0;
};

SweepResult sweep(Method m, SweepAxis axis, std::vector<double> values, int trials, double eps) {
  SweepSpec s;
  s.method = m;
  s.axis = axis;
  s.values = std::move(values);
  s.trials = trials;
  s.seed = 2026;
  s.workers = std::max(1u, std::thread::hardware_concurrency());
  MethodParams mp;
  mp.eps = eps;
  mp.delta = 0.1;
  const auto t0 = Clock::now();
  SweepResult r = run_sweep(s, Scenario::desk(), mp);
  std::printf("  sweep %s over %s: %.1f s\n", to_string(m), to_string(axis), seconds_since(t0));
  std::fflush(stdout);
  return r;
}

std::vector<double> nmse_of(const SweepResult& r) {
  std::vector<double> out;
  for (const auto& p : r.points) out.push_back(p.record.nmse);
  return out;
}

void criterion6(Sweeps& s, int trials) {
  const auto t0 = Clock::now();
  const std::vector<double> eps = {0.1, 0.5, 1, 5, 10};
  s.fw_eps = sweep(Method::fw, SweepAxis::epsilon, eps, trials, 1.0);
  s.svd_eps = sweep(Method::svd, SweepAxis::epsilon, eps, trials, 1.0);
  s.npfw = sweep(Method::npfw, SweepAxis::epsilon, {1.0}, trials, 1.0);
  s.npsvd = sweep(Method::npsvd, SweepAxis::epsilon, {1.0}, trials, 1.0);
  s.eps_secs = seconds_since(t0);
  const auto fw = nmse_of(s.fw_eps), svd = nmse_of(s.svd_eps);
  const double npfw = s.npfw.points[0].record.nmse, npsvd = s.npsvd.points[0].record.nmse;
  std::string why_fw, why_svd;
  const bool fw_ok = trend_ok(fw, why_fw), svd_ok = trend_ok(svd, why_svd);
  const bool above = std::all_of(fw.begin(), fw.end(), [&](double v) { return v > npfw; }) &&
                     std::all_of(svd.begin(), svd.end(), [&](double v) { return v > npsvd; });
  std::string detail = "fw " + join(fw) + (fw_ok ? "" : " (" + why_fw + ")") + ", svd " +
                       join(svd) + (svd_ok ? "" : " (" + why_svd + ")") + ", npfw " +
                       fmt("%.6g", npfw) + ", npsvd " + fmt("%.6g", npsvd) + ", above " +
                       (above ? "yes" : "no") + ", " + fmt("%.0f", s.eps_secs) + " s";
  report(6, "privacy-utility trend", fw_ok && svd_ok && above && s.eps_secs < 1200, detail);
}

void criterion7(Sweeps& s, int trials) {
  const auto t0 = Clock::now();
  const std::vector<double> td = {20, 40, 80, 160};
  s.fw_td = sweep(Method::fw, SweepAxis::tau_d, td, trials, 1.0);
  s.svd_td = sweep(Method::svd, SweepAxis::tau_d, td, trials, 1.0);
  s.po_td = sweep(Method::po, SweepAxis::tau_d, td, trials, 1.0);
  s.td_secs = seconds_since(t0);
  const auto fw = nmse_of(s.fw_td), svd = nmse_of(s.svd_td), po = nmse_of(s.po_td);
  std::string why_fw, why_svd;
  const bool fw_ok = trend_ok(fw, why_fw), svd_ok = trend_ok(svd, why_svd);
  double min_p = 1.0;
  for (std::size_t i = 1; i < s.po_td.points.size(); ++i) {
    min_p = std::min(min_p, welch_t_test(s.po_td.points[0].trial_nmse,
                                         s.po_td.points[i].trial_nmse));
  }
  std::string detail = "fw " + join(fw) + (fw_ok ? "" : " (" + why_fw + ")") + ", svd " +
                       join(svd) + (svd_ok ? "" : " (" + why_svd + ")") + ", po " +
                       join(po) + " min p " + fmt("%.3g", min_p) + ", " +
                       fmt("%.0f", s.td_secs) + " s";
  report(7, "payload trend", fw_ok && svd_ok && min_p > 0.01 && s.td_secs < 1800, detail);
}

void criterion8(const Sweeps& s) {
  int worse = 0, total = 0;
  std::string where;
  auto cmp = [&](const SweepResult& fw, const SweepResult& svd, const char* axis) {
    for (std::size_t i = 0; i < fw.points.size(); ++i) {
      ++total;
      if (!(fw.points[i].record.nmse < svd.points[i].record.nmse)) {
        ++worse;
        where += std::string(" ") + axis + "=" + fmt("%g", fw.points[i].record.axis_value);
      }
    }
  };
  cmp(s.fw_eps, s.svd_eps, "eps");
  cmp(s.fw_td, s.svd_td, "tau_d");
  report(8, "fw below svd", worse == 0,
         std::to_string(total - worse) + "/" + std::to_string(total) + " points" +
             (where.empty() ? "" : ", violated at" + where));
}

void criterion9(const Sweeps& s) {
  Scenario sc = Scenario::desk();
  const RMatrix beta = draw_large_scale(sc, 2026);
  const WorkingUnits w = to_working_units(sc, beta, Units::normalized);
  ResolvedParams p = s.fw_eps.points[2].params;
  const TrialOutcome fw = run_trial(Method::fw, w.scenario, w.beta, p, 2026, 0);
  const TrialOutcome svd = run_trial(Method::svd, w.scenario, w.beta, p, 2026, 0);
  const OverheadLedger lf = build_ledger(fw.transcript, sc.M);
  const OverheadLedger ls = build_ledger(svd.transcript, sc.M);
  bool counts = true;
  for (int m = 0; m < sc.M; ++m) {
    counts = counts &&
             lf.unicast_count(m, MessageKind::GramRelease, fw.transcript) ==
                 static_cast<std::size_t>(p.T) &&
             ls.unicast_count(m, MessageKind::GramRelease, svd.transcript) == 1;
  }
  counts = counts && lf.count(MessageKind::EigBroadcast) == static_cast<std::size_t>(p.T) &&
           ls.count(MessageKind::BasisBroadcast) == 1;
  const double tc = sc.tau_c();
  const double ratio = static_cast<double>(lf.broadcast_bytes) / ls.broadcast_bytes;
  const double ideal = static_cast<double>(p.T) / sc.K;
  const bool ratio_ok = std::abs(ratio - ideal) <= ideal * 8.0 / (16.0 * tc) + 1e-12;

  int audit_fail = 0;
  for (const SweepResult* r : {&s.fw_eps, &s.svd_eps, &s.npfw, &s.npsvd, &s.fw_td, &s.svd_td,
                               &s.po_td}) {
    for (const auto& pt : r->points) audit_fail += pt.audit_failures;
  }
  audit_fail += !fw.audit_pass + !svd.audit_pass;
  Transcript tampered = fw.transcript;
  TranscriptRecord raw;
  raw.id = tampered.size();
  raw.round = 1;
  raw.sender = 3;
  raw.receiver = kCpu;
  raw.kind = MessageKind::GramRelease;
  raw.rows = sc.N_a;
  raw.cols = sc.tau_c();
  raw.bytes = static_cast<std::size_t>(raw.rows * raw.cols) * kComplexBytes;
  tampered.push_back(raw);
  const AuditReport rep = audit_privacy_surface(tampered, sc.tau_c(), sc.K, sc.tau_d);
  const bool caught = !rep.pass && rep.offending_ids == std::vector<std::size_t>{raw.id};
  report(9, "protocol accounting", counts && ratio_ok && audit_fail == 0 && caught,
         "T=" + std::to_string(p.T) + " unicasts/broadcasts " + (counts ? "ok" : "wrong") +
             ", broadcast byte ratio " + fmt("%.6g", ratio) + " vs T:K " +
             fmt("%.6g", ideal) + ", audit failures " + std::to_string(audit_fail) +
             ", injected raw message " + (caught ? "caught" : "missed"));
}

void criterion10(const Sweeps& s) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const SweepResult* r : {&s.fw_eps, &s.fw_td}) {
    for (const auto& pt : r->points) worst = std::max(worst, pt.max_clip_excess);
  }
  report(10, "clipping invariant", worst <= 1e-9,
         "max ||(X_m)_Omega||_F - L over all fw iterates " + fmt("%.3g", worst));
}

}  // namespace
}  // namespace dpce

int main(int argc, char** argv) {
  using namespace dpce;
  const int trials = argc > 1 ? std::atoi(argv[1]) : 50;
  std::printf("acceptance suite, desk profile, %d trials per point\n", trials);
  const std::vector<std::function<void()>> quick = {criterion1, criterion2, criterion3,
                                                    criterion4, criterion5};
  for (const auto& c : quick) {
    try {
      c();
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion raised: %s\n", e.what());
      ++g_failed;
    }
  }
  try {
    Sweeps s;
    criterion6(s, trials);
    criterion7(s, trials);
    criterion8(s);
    criterion9(s);
    criterion10(s);
  } catch (const std::exception& e) {
    std::printf("[FAIL] sweep criteria raised: %s\n", e.what());
    ++g_failed;
  }
  std::printf("%d criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}

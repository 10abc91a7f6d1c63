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

// Command-line driver: Monte-Carlo sweeps, cross-validation and protocol
// audits over a flat key = value scenario file.
//
// Exit codes: 0 ok, 2 configuration error, 3 runtime failure, 4 I/O error,
// 5 audit failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpce/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitIo = 4;
constexpr int kExitAudit = 5;

struct CommonArgs {
  std::string config;
  std::optional<std::string> method;
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> units;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "scenario file")->required();
  cmd->add_option("--method", a.method, "fw|svd|npfw|npsvd|po");
  cmd->add_option("--eps", a.eps, "privacy parameter epsilon");
  cmd->add_option("--seed", a.seed, "master seed");
  cmd->add_option("--workers", a.workers, "worker threads");
  cmd->add_option("--units", a.units, "normalized|physical");
}

// Command-line values override the file.
dpce::KeyValueConfig load(const CommonArgs& a) {
  auto cfg = dpce::KeyValueConfig::load(a.config);
  if (a.method) cfg.set("method", *a.method);
  if (a.eps) cfg.set("eps", std::to_string(*a.eps));
  if (a.seed) cfg.set("master_seed", std::to_string(*a.seed));
  if (a.workers) cfg.set("workers", std::to_string(*a.workers));
  if (a.units) cfg.set("units", *a.units);
  return cfg;
}

void warn_unused(const dpce::KeyValueConfig& cfg) {
  for (const auto& k : cfg.unused_keys()) {
    std::fprintf(stderr, "warning: unused config key '%s'\n", k.c_str());
  }
}

int run_simulate(const CommonArgs& a, const std::optional<std::string>& sweep,
                 const std::optional<std::string>& values, std::optional<int> trials,
                 bool no_timing, const std::string& out) {
  auto cfg = load(a);
  if (sweep) cfg.set("sweep", *sweep);
  if (values) cfg.set("values", *values);
  if (trials) cfg.set("trials", std::to_string(*trials));
  if (no_timing) cfg.set("timing", "false");
  const dpce::Scenario sc = dpce::Scenario::from_config(cfg);
  dpce::SweepSpec spec = dpce::SweepSpec::from_config(cfg);
  const dpce::MethodParams mp = dpce::MethodParams::from_config(cfg);
  warn_unused(cfg);
  spec.validate();
  const auto dir = std::filesystem::path(out).parent_path();
  if (!dir.empty() && !std::filesystem::is_directory(dir)) {
    throw dpce::IoError("output directory '" + dir.string() + "' does not exist");
  }
  const dpce::SweepResult res = dpce::run_sweep(spec, sc, mp);
  for (const auto& p : res.points) {
    std::fprintf(stderr, "%s %s=%g nmse=%.6g ser=%.6g trials=%d failures=%d T=%d\n",
                 p.record.method.c_str(), p.record.axis.c_str(), p.record.axis_value,
                 p.record.nmse, p.record.ser, p.record.trials, p.record.failures,
                 p.params.T);
  }
  dpce::emit_csv(res.records(), out);
  return 0;
}

int run_crossval(const CommonArgs& a) {
  const auto cfg = load(a);
  const dpce::Scenario sc = dpce::Scenario::from_config(cfg);
  const dpce::SweepSpec spec = dpce::SweepSpec::from_config(cfg);
  dpce::MethodParams mp = dpce::MethodParams::from_config(cfg);
  mp.crossval = true;
  warn_unused(cfg);
  const dpce::RMatrix beta = dpce::draw_large_scale(sc, spec.seed);
  const dpce::WorkingUnits w = dpce::to_working_units(sc, beta, mp.units);
  const dpce::ResolvedParams p =
      dpce::resolve_params(spec.method, w, mp, spec.seed, spec.workers);
  std::printf("method=%s T=%d nuc_bound=%.9g nuc_bound_physical=%.9g\n",
              dpce::to_string(spec.method), p.T, p.nuc_bound,
              p.nuc_bound / std::sqrt(w.power_scale));
  return 0;
}

int run_audit(const CommonArgs& a, std::uint64_t trial,
              const std::optional<std::string>& transcript_path) {
  const auto cfg = load(a);
  const dpce::Scenario sc = dpce::Scenario::from_config(cfg);
  const dpce::SweepSpec spec = dpce::SweepSpec::from_config(cfg);
  dpce::MethodParams mp = dpce::MethodParams::from_config(cfg);
  warn_unused(cfg);
  const dpce::RMatrix beta = dpce::draw_large_scale(sc, spec.seed);
  const dpce::WorkingUnits w = dpce::to_working_units(sc, beta, mp.units);
  const dpce::ResolvedParams p =
      dpce::resolve_params(spec.method, w, mp, spec.seed, spec.workers);
  const dpce::TrialOutcome o =
      dpce::run_trial(spec.method, w.scenario, w.beta, p, spec.seed, trial);
  const dpce::AuditReport rep =
      dpce::audit_privacy_surface(o.transcript, sc.tau_c(), sc.K, sc.tau_d);
  const dpce::OverheadLedger led = dpce::build_ledger(o.transcript, sc.M);
  std::size_t unicast = 0;
  for (auto b : led.unicast_bytes) unicast += b;
  std::printf("method=%s messages=%zu gram_releases=%zu unicast_bytes=%zu "
              "broadcast_bytes=%zu nmse=%.6g ser=%.6g audit=%s\n",
              dpce::to_string(spec.method), o.transcript.size(), rep.gram_releases,
              unicast, led.broadcast_bytes, o.nmse, o.ser, rep.pass ? "pass" : "fail");
  for (const auto& r : rep.reasons) std::printf("  %s\n", r.c_str());
  if (transcript_path) {
    std::ofstream f(*transcript_path, std::ios::trunc);
    if (!f) throw dpce::IoError("cannot open '" + *transcript_path + "' for writing");
    dpce::write_transcript(o.transcript, f);
    if (!f) throw dpce::IoError("write to '" + *transcript_path + "' failed");
  }
  return rep.pass ? 0 : kExitAudit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private cell-free channel estimation simulator"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  std::optional<std::string> sweep, values;
  std::optional<int> trials;
  bool no_timing = false;
  std::string out;
  auto* sim = app.add_subcommand("simulate", "run a Monte-Carlo sweep and write CSV");
  add_common(sim, sim_args);
  sim->add_option("--sweep", sweep, "epsilon|tau_d");
  sim->add_option("--values", values, "comma separated axis values");
  sim->add_option("--trials", trials, "trials per axis value");
  sim->add_flag("--no-timing", no_timing, "write seconds = 0 for reproducible files");
  sim->add_option("--out", out, "output CSV")->required();

  CommonArgs cv_args;
  auto* cv = app.add_subcommand("crossval", "print the cross-validated T and r");
  add_common(cv, cv_args);

  CommonArgs audit_args;
  std::uint64_t trial = 0;
  std::optional<std::string> transcript;
  auto* audit = app.add_subcommand("audit", "run one trial and audit the CPU's inputs");
  add_common(audit, audit_args);
  audit->add_option("--trial", trial, "trial index");
  audit->add_option("--transcript", transcript, "write the message transcript (JSONL)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sim) return run_simulate(sim_args, sweep, values, trials, no_timing, out);
    if (*cv) return run_crossval(cv_args);
    return run_audit(audit_args, trial, transcript);
  } catch (const dpce::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const dpce::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}

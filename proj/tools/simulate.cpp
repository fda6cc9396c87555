// SPDX-License-Identifier: Apache-2.0
// simulate --config <file.json> --out <dir> [--seed S] [--jobs J] [subcommand]
//   sweep-snr | sweep-T | sweep | convergence | delay-profile

#include "xlmimo/xlmimo.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

namespace {

using namespace xlmimo;
using namespace xlmimo::harness;

struct Args {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
};

void print_summary(const Scenario& scn, const std::vector<Aggregate>& agg) {
  for (const auto& a : agg)
    std::cout << axis_name(scn.axis) << '=' << scn.point_label(a.point) << "  " << a.method << "  NMSE "
              << fmt_num(to_db(a.nmse)) << " dB  (" << a.n_ok << " ok, " << a.n_failed << " failed)\n";
}

int do_sweep(const std::string& cmd, const Scenario& scn, const Args& a, std::uint64_t seed, int jobs) {
  auto res = run_sweep(scn, seed, jobs);
  const std::filesystem::path dir = a.out.empty() ? scn.out_dir : a.out;
  const std::string summary = std::string("nmse_vs_") + axis_name(scn.axis) + ".csv";
  std::ostringstream runs, sum;
  write_runs_csv(runs, scn, res.runs);
  write_summary_csv(sum, scn, res.summary);
  write_text(dir, "runs.csv", runs.str());
  write_text(dir, summary, sum.str());
  auto meta = meta_json(cmd, scn, seed, jobs, {summary, "runs.csv"});
  meta["timing"] = timing_json(res.runs, res.wall_s);
  write_text(dir, "meta.json", meta.dump(2) + "\n");
  print_summary(scn, res.summary);
  std::cout << "wrote " << (dir / summary).string() << '\n';
  return 0;
}

int do_convergence(const Scenario& scn, const Args& a, std::uint64_t seed, int jobs) {
  auto res = convergence_trace(scn, seed, jobs);
  const std::filesystem::path dir = a.out.empty() ? scn.out_dir : a.out;
  std::ostringstream conv, runs;
  write_convergence_csv(conv, scn, res.rows);
  write_runs_csv(runs, scn, res.runs);
  write_text(dir, "convergence.csv", conv.str());
  write_text(dir, "runs.csv", runs.str());
  auto meta = meta_json("convergence", scn, seed, jobs, {"convergence.csv", "runs.csv"});
  meta["timing"] = timing_json(res.runs, res.wall_s);
  write_text(dir, "meta.json", meta.dump(2) + "\n");
  std::cout << "wrote " << (dir / "convergence.csv").string() << '\n';
  return 0;
}

int do_profile(const Scenario& scn, const Args& a, std::uint64_t seed) {
  auto rep = delay_profile_report(scn, seed);
  const std::filesystem::path dir = a.out.empty() ? scn.out_dir : a.out;
  std::ostringstream prof, ap, paths;
  write_profile_csv(prof, rep.profile);
  write_aperture_csv(ap, rep.aperture);
  write_paths_csv(paths, rep.ch);
  write_text(dir, "delay_profile.csv", prof.str());
  write_text(dir, "aperture_delay.csv", ap.str());
  write_text(dir, "paths.csv", paths.str());
  auto meta = meta_json("delay-profile", scn, seed, 1, {"delay_profile.csv", "aperture_delay.csv", "paths.csv"});
  meta["warnings"] = rep.ch.warnings;
  write_text(dir, "meta.json", meta.dump(2) + "\n");
  std::cout << "wrote " << (dir / "delay_profile.csv").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo channel-estimation experiments"};
  app.require_subcommand(0, 1);
  Args a;
  auto add_common = [&a](CLI::App* c) {
    c->add_option("--config", a.config, "scenario JSON")->check(CLI::ExistingFile);
    c->add_option("--out", a.out, "output directory (default: scenario out_dir)");
    c->add_option("--seed", a.seed, "master seed (default: base.seed)");
    c->add_option("--jobs,-j", a.jobs, "worker threads (default: hardware concurrency)")->check(CLI::NonNegativeNumber);
  };
  add_common(&app);
  auto* snr = app.add_subcommand("sweep-snr", "NMSE versus SNR");
  auto* tlen = app.add_subcommand("sweep-T", "NMSE versus training length");
  auto* gen = app.add_subcommand("sweep", "NMSE over the scenario's sweep axis");
  auto* conv = app.add_subcommand("convergence", "per-iteration NMSE of the ADMM estimator");
  auto* prof = app.add_subcommand("delay-profile", "delay selector profile and aperture delay table");
  for (auto* c : {snr, tlen, gen, conv, prof}) {
    c->fallthrough();
    add_common(c);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    if (a.config.empty()) throw ConfigError("--config is required");
    Scenario scn = load_scenario(a.config);
    a.seed_set = (app.count("--seed") + snr->count("--seed") + tlen->count("--seed") + gen->count("--seed") +
                  conv->count("--seed") + prof->count("--seed")) > 0;
    const std::uint64_t seed = a.seed_set ? a.seed : scn.base.seed;
    const int jobs = a.jobs > 0 ? a.jobs : int(std::max(1u, std::thread::hardware_concurrency()));

    if (*snr) {
      if (scn.axis != SweepAxis::kSnr) throw ConfigError("sweep-snr needs a scenario sweeping snr_db");
      return do_sweep("sweep-snr", scn, a, seed, jobs);
    }
    if (*tlen) {
      if (scn.axis != SweepAxis::kT) throw ConfigError("sweep-T needs a scenario sweeping T");
      return do_sweep("sweep-T", scn, a, seed, jobs);
    }
    if (*conv) return do_convergence(scn, a, seed, jobs);
    if (*prof) return do_profile(scn, a, seed);
    return do_sweep("sweep", scn, a, seed, jobs);
  } catch (const std::exception& e) {
    std::cerr << "simulate: " << e.what() << '\n';
    return 1;
  }
}

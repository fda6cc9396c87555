// SPDX-License-Identifier: Apache-2.0
#pragma once

// Monte-Carlo driver: realizations run in a worker pool, each on its own
// generator seeded from (seed, point, realization). Results land in fixed
// slots, so the output does not depend on the number of workers.

#include "xlmimo/channel.hpp"
#include "xlmimo/config.hpp"
#include "xlmimo/estimation/admm.hpp"
#include "xlmimo/estimation/baselines.hpp"
#include "xlmimo/estimation/decomposed.hpp"
#include "xlmimo/estimation/nmse.hpp"
#include "xlmimo/estimation/position_init.hpp"
#include "xlmimo/harness/scenario.hpp"
#include "xlmimo/pilot.hpp"
#include "xlmimo/synthesis.hpp"
#include "xlmimo/training.hpp"
#include "xlmimo/types.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace xlmimo::harness {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Independent stream for one (seed, point, realization) triple.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t point, std::uint64_t realization) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(point),
                    std::uint32_t(realization), 0x786c6d6du};
  return std::mt19937_64(seq);
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions escaping fn
/// are rethrown after all workers stop.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::size_t(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

/// Channel, training and received block of one realization.
struct Trial {
  SystemConfig cfg;
  ChannelRealization ch;
  TrainingSet ts;
  RxBlock rx;
};

inline Trial make_trial(const SystemConfig& cfg, std::mt19937_64& rng) {
  Trial t;
  t.cfg = cfg;
  t.ch = realize_channel(cfg, rng);
  t.ts = gen_training(cfg, rng);
  PilotOperator phi(t.ts, cfg);
  const CMat Y0 = synthesize_rx(t.ch.H, phi, t.ch.e);
  t.rx = add_awgn(Y0, cfg.snr_db, mean_power(Y0), rng);
  return t;
}

/// Position-aided start: LoS geometry recovered from the true LoS angles,
/// optional CN(0, 10^(sigma_p2/10)) perturbation.
inline CMat initial_channel(const Trial& t, std::mt19937_64& rng) {
  auto [bs, ue] = estimation::positions_for_path(t.ch.paths.front(), t.cfg.d_tx_rx);
  const double var = t.cfg.sigma_p2 ? std::pow(10.0, *t.cfg.sigma_p2 / 10.0) : 0.0;
  return estimation::init_from_position(t.cfg, bs, ue, var, rng);
}

struct RunRecord {
  std::size_t point = 0;
  int realization = 0;
  std::string method;
  double nmse = kNaN;        // mean mode
  double nmse_sum = kNaN;  // sum mode
  int iters = 0;
  bool converged = false;
  bool diverged = false;
  double wall_s = 0.0;  // not written to the CSVs
  std::string status = "ok";
};

/// Runs one estimator on a trial. Failures become NaN records with a reason.
inline RunRecord run_method(const std::string& method, const Trial& t, int omp_atoms, std::mt19937_64& rng,
                            estimation::EstimationResult* keep = nullptr) {
  RunRecord rec;
  rec.method = method;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    PilotOperator phi(t.ts, t.cfg);
    estimation::EstimationResult r;
    if (method == "proposed") {
      const CMat H0 = initial_channel(t, rng);
      r = estimation::admm_estimate(t.rx.Y, phi, H0, t.cfg, {&t.ch});
    } else if (method == "idealized") {
      r = estimation::idealized_decomposed(t.rx.Y, phi, t.ch, t.cfg);
    } else if (method == "ls") {
      r = estimation::ls_baseline(phi, t.rx.Y);
    } else if (method == "omp") {
      r = estimation::omp_baseline(phi, t.rx.Y, omp_atoms);
    } else {
      throw ConfigError("unknown method " + method);
    }
    if (std::isnan(r.nmse)) {
      auto v = estimation::nmse_terms(t.ch.H, r.H_hat, &r.warnings);
      r.nmse = v.mean();
      r.nmse_sum = v.sum;
    }
    rec.nmse = r.nmse;
    rec.nmse_sum = r.nmse_sum;
    rec.iters = r.iters;
    rec.converged = r.converged;
    rec.diverged = r.diverged;
    if (r.diverged) rec.status = "diverged";
    if (!std::isfinite(rec.nmse)) {
      rec.status = "non-finite NMSE";
      rec.nmse = rec.nmse_sum = kNaN;
    }
    if (keep != nullptr) *keep = std::move(r);
  } catch (const std::exception& e) {
    rec.nmse = rec.nmse_sum = kNaN;
    rec.status = std::string("error: ") + e.what();
  }
  rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

/// All methods of a scenario on realization r of point p.
inline std::vector<RunRecord> run_realization(const Scenario& scn, std::size_t p, int r, std::uint64_t seed) {
  std::vector<RunRecord> out;
  auto rng = stream_rng(seed, p, std::uint64_t(r));
  const SystemConfig cfg = scn.point_config(p);
  Trial t;
  try {
    t = make_trial(cfg, rng);
  } catch (const std::exception& e) {
    for (const auto& m : scn.methods) {
      RunRecord rec;
      rec.point = p;
      rec.realization = r;
      rec.method = m;
      rec.status = std::string("error: ") + e.what();
      out.push_back(rec);
    }
    return out;
  }
  // Each method draws from its own child stream so that adding or removing a
  // method does not change the others.
  for (std::size_t i = 0; i < scn.methods.size(); ++i) {
    const auto& m = scn.methods[i];
    const auto mi = std::size_t(std::find(known_methods().begin(), known_methods().end(), m) - known_methods().begin());
    auto mrng = stream_rng(seed ^ (0x9e3779b97f4a7c15ull * (mi + 1)), p, std::uint64_t(r));
    auto rec = run_method(m, t, scn.atoms_for(cfg), mrng);
    rec.point = p;
    rec.realization = r;
    out.push_back(std::move(rec));
  }
  return out;
}

struct Aggregate {
  std::size_t point = 0;
  std::string method;
  int n_ok = 0;
  int n_failed = 0;
  double nmse = kNaN;     // mean of linear NMSE
  double nmse_se = kNaN;  // standard error; NaN for fewer than two runs
  double nmse_sum = kNaN;
  double iters = kNaN;
  int converged = 0;
};

inline double to_db(double x) { return std::isfinite(x) && x > 0.0 ? 10.0 * std::log10(x) : kNaN; }

/// One aggregate per (point, method), always |points| x |methods| rows.
inline std::vector<Aggregate> aggregate(const Scenario& scn, const std::vector<RunRecord>& runs) {
  std::vector<Aggregate> out;
  for (std::size_t p = 0; p < scn.points(); ++p)
    for (const auto& m : scn.methods) {
      Aggregate a;
      a.point = p;
      a.method = m;
      std::vector<double> v, vp, it;
      for (const auto& r : runs) {
        if (r.point != p || r.method != m) continue;
        if (std::isfinite(r.nmse)) {
          v.push_back(r.nmse);
          vp.push_back(r.nmse_sum);
          it.push_back(double(r.iters));
          a.converged += r.converged ? 1 : 0;
        } else {
          ++a.n_failed;
        }
      }
      a.n_ok = int(v.size());
      auto mean = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double y : x) s += y;
        return x.empty() ? kNaN : s / double(x.size());
      };
      a.nmse = mean(v);
      a.nmse_sum = mean(vp);
      a.iters = mean(it);
      if (v.size() >= 2) {
        double ss = 0.0;
        for (double y : v) ss += (y - a.nmse) * (y - a.nmse);
        a.nmse_se = std::sqrt(ss / double(v.size() - 1) / double(v.size()));
      }
      out.push_back(a);
    }
  return out;
}

struct SweepResult {
  std::vector<RunRecord> runs;  // ordered by point, realization, method
  std::vector<Aggregate> summary;
  double wall_s = 0.0;
};

inline SweepResult run_sweep(const Scenario& scn, std::uint64_t seed, int jobs) {
  scn.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t P = scn.points(), R = std::size_t(scn.R);
  std::vector<std::vector<RunRecord>> slots(P * R);
  parallel_for(P * R, jobs, [&](std::size_t i) { slots[i] = run_realization(scn, i / R, int(i % R), seed); });
  SweepResult res;
  for (auto& s : slots)
    for (auto& r : s) res.runs.push_back(std::move(r));
  res.summary = aggregate(scn, res.runs);
  res.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

/// Per-iteration averages of the proposed method at every sweep point.
struct ConvergenceRow {
  std::size_t point = 0;
  int iter = 0;
  double nmse = kNaN;
  double residual = kNaN;
  double objective = kNaN;
  double idealized = kNaN;
  int active = 0;  // realizations still iterating
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<RunRecord> runs;
  double wall_s = 0.0;
};

/// Traces shorter than I_max (early stop) hold their last value.
inline ConvergenceResult convergence_trace(const Scenario& scn, std::uint64_t seed, int jobs) {
  scn.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t P = scn.points(), R = std::size_t(scn.R);
  struct Slot {
    std::vector<estimation::TraceRow> trace;
    RunRecord prop, ideal;
  };
  std::vector<Slot> slots(P * R);
  parallel_for(P * R, jobs, [&](std::size_t i) {
    const std::size_t p = i / R;
    const int r = int(i % R);
    auto rng = stream_rng(seed, p, std::uint64_t(r));
    Slot& s = slots[i];
    try {
      const Trial t = make_trial(scn.point_config(p), rng);
      auto mrng = stream_rng(seed ^ 0x9e3779b97f4a7c15ull, p, std::uint64_t(r));
      estimation::EstimationResult er;
      s.prop = run_method("proposed", t, scn.atoms_for(t.cfg), mrng, &er);
      s.trace = std::move(er.trace);
      s.ideal = run_method("idealized", t, scn.atoms_for(t.cfg), mrng);
    } catch (const std::exception& e) {
      s.prop.method = "proposed";
      s.ideal.method = "idealized";
      s.prop.status = s.ideal.status = std::string("error: ") + e.what();
    }
    s.prop.point = s.ideal.point = p;
    s.prop.realization = s.ideal.realization = r;
  });

  ConvergenceResult out;
  for (std::size_t p = 0; p < P; ++p) {
    const int I = scn.point_config(p).I_max;
    double ideal_sum = 0.0;
    int ideal_n = 0;
    for (std::size_t r = 0; r < R; ++r) {
      const auto& s = slots[p * R + r];
      if (std::isfinite(s.ideal.nmse)) {
        ideal_sum += s.ideal.nmse;
        ++ideal_n;
      }
    }
    const double ideal = ideal_n > 0 ? ideal_sum / ideal_n : kNaN;
    for (int it = 0; it <= I; ++it) {
      ConvergenceRow row;
      row.point = p;
      row.iter = it;
      row.idealized = ideal;
      double sn = 0.0, sr = 0.0, so = 0.0;
      int n = 0, nr = 0;
      for (std::size_t r = 0; r < R; ++r) {
        const auto& tr = slots[p * R + r].trace;
        if (tr.empty() || !std::isfinite(slots[p * R + r].prop.nmse)) continue;
        const auto& e = tr[std::min<std::size_t>(std::size_t(it), tr.size() - 1)];
        if (std::size_t(it) < tr.size()) ++row.active;
        sn += e.nmse;
        ++n;
        if (std::isfinite(e.residual)) {
          sr += e.residual;
          so += e.objective;
          ++nr;
        }
      }
      if (n > 0) row.nmse = sn / n;
      if (nr > 0) {
        row.residual = sr / nr;
        row.objective = so / nr;
      }
      out.rows.push_back(row);
    }
  }
  for (auto& s : slots) {
    out.runs.push_back(std::move(s.prop));
    out.runs.push_back(std::move(s.ideal));
  }
  out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Combined binary delay profile of chosen (m, n) pairs plus the aperture
/// delay of the realized geometry over a carrier grid.
struct ProfileRow {
  int m = 0, n = 0, k = 0;
  int e = 0;      // 1 if any path lands on k
  int paths = 0;  // how many do
};

struct ApertureRow {
  double f_c = 0.0;
  double max_delay_s = 0.0;      // realized geometry, worst (m, n, path)
  double max_delay_samples = 0.0;
  double bound_s = 0.0;          // end-fire bound (M - 1 + N - 1) / (2 f_c)
};

struct DelayProfile {
  ChannelRealization ch;
  std::vector<ProfileRow> profile;
  std::vector<ApertureRow> aperture;
};

inline DelayProfile delay_profile_report(const Scenario& scn, std::uint64_t seed) {
  scn.validate();
  const SystemConfig cfg = scn.point_config(0);
  auto rng = stream_rng(seed, 0, 0);
  DelayProfile out;
  out.ch = realize_channel(cfg, rng);
  auto pairs = scn.profile_pairs;
  if (pairs.empty()) pairs = {{0, 0}, {cfg.M - 1, cfg.N - 1}};
  for (auto [m, n] : pairs) {
    if (m < 0 || m >= cfg.M || n < 0 || n >= cfg.N) throw ConfigError("profile pair outside the array");
    for (int k = 0; k < cfg.K; ++k) {
      ProfileRow row{m, n, k, 0, 0};
      for (int l = 0; l < cfg.L_p; ++l) row.paths += out.ch.kappa(m, n, l) == k ? 1 : 0;
      row.e = row.paths > 0 ? 1 : 0;
      out.profile.push_back(row);
    }
  }
  auto grid = scn.fc_grid;
  if (grid.empty())
    for (int i = 0; i <= 18; ++i) grid.push_back(100e9 + 50e9 * i);
  for (double fc : grid) {
    if (!(fc > 0.0)) throw ConfigError("fc_grid entries must be positive");
    ApertureRow row;
    row.f_c = fc;
    for (const auto& p : out.ch.paths)
      for (Index m = 0; m < cfg.M; ++m)
        for (Index n = 0; n < cfg.N; ++n) row.max_delay_s = std::max(row.max_delay_s, std::abs(aperture_delay(m, n, p, fc)));
    row.max_delay_samples = row.max_delay_s / cfg.T_s();
    row.bound_s = double(cfg.M - 1 + cfg.N - 1) / (2.0 * fc);
    out.aperture.push_back(row);
  }
  return out;
}

}  // namespace xlmimo::harness

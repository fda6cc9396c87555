// SPDX-License-Identifier: Apache-2.0
#pragma once

// CSV and meta.json writers. CSVs carry no timing so reruns compare equal.

#include "xlmimo/config.hpp"
#include "xlmimo/harness/runner.hpp"
#include "xlmimo/harness/scenario.hpp"
#include "xlmimo/version.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace xlmimo::harness {

inline std::string fmt_num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

/// Quotes a field when it holds a separator, quote or newline.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline void write_runs_csv(std::ostream& os, const Scenario& scn, const std::vector<RunRecord>& runs) {
  os << axis_name(scn.axis) << ",realization,method,nmse,nmse_db,nmse_sum,iterations,converged,status\n";
  for (const auto& r : runs)
    os << scn.point_label(r.point) << ',' << r.realization << ',' << r.method << ',' << fmt_num(r.nmse) << ','
       << fmt_num(to_db(r.nmse)) << ',' << fmt_num(r.nmse_sum) << ',' << r.iters << ',' << (r.converged ? 1 : 0)
       << ',' << csv_field(r.status) << '\n';
}

inline void write_summary_csv(std::ostream& os, const Scenario& scn, const std::vector<Aggregate>& agg) {
  os << axis_name(scn.axis)
     << ",method,runs,failed,nmse_mean,nmse_se,nmse_db,nmse_sum_mean,nmse_sum_db,iterations_mean,converged\n";
  for (const auto& a : agg)
    os << scn.point_label(a.point) << ',' << a.method << ',' << a.n_ok << ',' << a.n_failed << ','
       << fmt_num(a.nmse) << ',' << fmt_num(a.nmse_se) << ',' << fmt_num(to_db(a.nmse)) << ','
       << fmt_num(a.nmse_sum) << ',' << fmt_num(to_db(a.nmse_sum)) << ',' << fmt_num(a.iters) << ','
       << a.converged << '\n';
}

inline void write_convergence_csv(std::ostream& os, const Scenario& scn, const std::vector<ConvergenceRow>& rows) {
  os << axis_name(scn.axis)
     << ",iteration,nmse,nmse_db,primal_residual,objective,idealized_nmse,idealized_nmse_db,active\n";
  for (const auto& r : rows)
    os << scn.point_label(r.point) << ',' << r.iter << ',' << fmt_num(r.nmse) << ',' << fmt_num(to_db(r.nmse))
       << ',' << fmt_num(r.residual) << ',' << fmt_num(r.objective) << ',' << fmt_num(r.idealized) << ','
       << fmt_num(to_db(r.idealized)) << ',' << r.active << '\n';
}

inline void write_profile_csv(std::ostream& os, const std::vector<ProfileRow>& rows) {
  os << "m,n,k,e,paths\n";
  for (const auto& r : rows) os << r.m << ',' << r.n << ',' << r.k << ',' << r.e << ',' << r.paths << '\n';
}

inline void write_aperture_csv(std::ostream& os, const std::vector<ApertureRow>& rows) {
  os << "f_c_hz,max_aperture_delay_s,max_aperture_delay_samples,endfire_bound_s\n";
  for (const auto& r : rows)
    os << fmt_num(r.f_c) << ',' << fmt_num(r.max_delay_s) << ',' << fmt_num(r.max_delay_samples) << ','
       << fmt_num(r.bound_s) << '\n';
}

inline void write_paths_csv(std::ostream& os, const ChannelRealization& ch) {
  os << "path,alpha_re,alpha_im,aoa_rad,aod_rad,tau_s\n";
  for (std::size_t l = 0; l < ch.paths.size(); ++l) {
    const auto& p = ch.paths[l];
    os << l << ',' << fmt_num(p.alpha_bar.real()) << ',' << fmt_num(p.alpha_bar.imag()) << ','
       << fmt_num(p.theta_rx_phys) << ',' << fmt_num(p.theta_tx_phys) << ',' << fmt_num(p.tau_path) << '\n';
  }
}

/// Per-method wall-clock totals, for meta.json only.
inline nlohmann::json timing_json(const std::vector<RunRecord>& runs, double total_s) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& r : runs) {
    acc[r.method].first += r.wall_s;
    acc[r.method].second += 1;
  }
  nlohmann::json j;
  j["total_s"] = total_s;
  for (const auto& [m, v] : acc) j["mean_s"][m] = v.second > 0 ? v.first / v.second : 0.0;
  return j;
}

inline nlohmann::json meta_json(const std::string& command, const Scenario& scn, std::uint64_t seed, int jobs,
                                const std::vector<std::string>& files) {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["scenario"] = scenario_to_json(scn);
  j["resolved_points"] = nlohmann::json::array();
  for (std::size_t p = 0; p < scn.points(); ++p) {
    nlohmann::json pt;
    pt["label"] = scn.point_label(p);
    pt["config"] = config_to_json(scn.point_config(p));
    j["resolved_points"].push_back(pt);
  }
  j["files"] = files;
  return j;
}

/// Writes text to dir/name, creating dir.
inline void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& body) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << body;
}

}  // namespace xlmimo::harness

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "xlmimo/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace xlmimo {

/// Which sparse solver the delay (e) step uses.
enum class DelaySolver { kLasso, kOmp };

/// All scenario constants. Field names mirror the JSON config keys.
struct SystemConfig {
  int N = 8;              // TX antennas
  int M = 8;              // RX antennas
  double f_c = 150e9;     // carrier (Hz)
  double W = 10e9;        // bandwidth (Hz)
  int T = 24;             // training slots
  int L_p = 3;            // resolvable paths
  int K = 8;              // delay budget (samples)
  int L_t = 8;            // channel filter taps
  double d_tx_rx = 1.0;   // m
  std::vector<double> xi = {2.0, 3.0, 3.0};
  double kappa_abs = 0.5;
  double P_t = 10.0;      // dBm
  double snr_db = 30.0;   // +inf disables noise
  double rho = 6.0;
  std::optional<double> lambda_e;  // unset: 0.1 * ||A^H b||_inf
  std::optional<double> lambda_z;  // unset: same heuristic on the Z-step
  int I_max = 50;
  double thr = 0.5;
  std::optional<double> sigma_p2;  // dB; unset means exact position init
  std::uint64_t seed = 1;

  // Solver and plumbing knobs.
  DelaySolver e_solver = DelaySolver::kLasso;
  int e_polish_sweeps = 10;  // coordinate sweeps on the unrelaxed delay fit; 0 disables
  int lasso_max_iter = 2000;
  double lasso_tol = 1e-9;
  double admm_tol = 1e-6;
  double phi_cap = 16777216.0;  // 2^24 entries
  std::string absorption_table;  // optional CSV (frequency_hz, kappa)

  double T_s() const { return 1.0 / (2.0 * W); }
  double wavelength() const { return kSpeedOfLight / f_c; }
  Index blocks() const { return Index(M) * N * L_p; }
  Index e_length() const { return blocks() * K; }

  static std::vector<double> default_xi(int L_p) {
    std::vector<double> xi(std::size_t(std::max(L_p, 0)), 3.0);
    if (!xi.empty()) xi[0] = 2.0;
    return xi;
  }

  void validate() const {
    auto need = [](bool ok, const char* msg) {
      if (!ok) throw ConfigError(msg);
    };
    need(N >= 1 && M >= 1, "N and M must be >= 1");
    need(L_p >= 1, "L_p must be >= 1");
    need(T >= 1, "T must be >= 1");
    need(K >= 1, "K must be >= 1");
    need(L_t >= 1, "L_t must be >= 1");
    need(W > 0.0 && std::isfinite(W), "W must be positive");
    need(f_c > 0.0 && std::isfinite(f_c), "f_c must be positive");
    need(d_tx_rx > 0.0, "d_tx_rx must be positive");
    need(kappa_abs >= 0.0, "kappa_abs must be non-negative");
    need(xi.size() == std::size_t(L_p), "xi must have L_p entries");
    need(rho > 0.0, "rho must be positive");
    need(thr > 0.0 && thr < 1.0, "thr must lie in (0, 1)");
    need(I_max >= 0, "I_max must be >= 0");
    need(e_polish_sweeps >= 0, "e_polish_sweeps must be >= 0");
    need(!std::isnan(snr_db), "snr_db must not be NaN");
    need(!lambda_e || *lambda_e >= 0.0, "lambda_e must be >= 0");
    need(!lambda_z || *lambda_z >= 0.0, "lambda_z must be >= 0");
  }
};

/// Piecewise-linear frequency -> absorption coefficient table. Outside the
/// tabulated range the end values are held.
class AbsorptionTable {
 public:
  AbsorptionTable() = default;
  explicit AbsorptionTable(std::vector<std::pair<double, double>> pts)
      : pts_(std::move(pts)) {
    std::sort(pts_.begin(), pts_.end());
    for (const auto& [f, k] : pts_)
      if (k < 0.0) throw ConfigError("absorption table has negative kappa at f=" + std::to_string(f));
  }

  static AbsorptionTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open absorption table: " + path);
    std::vector<std::pair<double, double>> pts;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ss(line);
      double f = 0.0, k = 0.0;
      if (!(ss >> f >> k)) continue;  // header row
      pts.emplace_back(f, k);
    }
    if (pts.empty()) throw ConfigError("absorption table is empty: " + path);
    return AbsorptionTable(std::move(pts));
  }

  bool empty() const { return pts_.empty(); }

  double at(double f) const {
    if (pts_.empty()) throw ConfigError("absorption table is empty");
    if (f <= pts_.front().first) return pts_.front().second;
    if (f >= pts_.back().first) return pts_.back().second;
    auto hi = std::lower_bound(pts_.begin(), pts_.end(), std::make_pair(f, -1.0));
    auto lo = hi - 1;
    double w = (f - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
  }

 private:
  std::vector<std::pair<double, double>> pts_;
};

namespace detail {

inline double json_number_or_inf(const nlohmann::json& v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    throw ConfigError("unrecognised numeric string: " + s);
  }
  return v.get<double>();
}

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

inline void read_opt(const nlohmann::json& j, const char* key, std::optional<double>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) out.reset();
  else out = j.at(key).get<double>();
}

}  // namespace detail

inline SystemConfig config_from_json(const nlohmann::json& j) {
  SystemConfig c;
  using detail::read_if;
  read_if(j, "N", c.N);
  read_if(j, "M", c.M);
  read_if(j, "f_c", c.f_c);
  read_if(j, "W", c.W);
  if (j.contains("T_s") && !j.at("T_s").is_null()) {
    double ts = j.at("T_s").get<double>();
    if (std::abs(ts * 2.0 * c.W - 1.0) > 1e-9)
      throw ConfigError("T_s must equal 1/(2W)");
  }
  read_if(j, "T", c.T);
  read_if(j, "L_p", c.L_p);
  read_if(j, "K", c.K);
  c.L_t = c.K;
  read_if(j, "L_t", c.L_t);
  read_if(j, "d_tx_rx", c.d_tx_rx);
  c.xi = SystemConfig::default_xi(c.L_p);
  read_if(j, "xi", c.xi);
  read_if(j, "kappa_abs", c.kappa_abs);
  read_if(j, "P_t", c.P_t);
  if (j.contains("snr_db")) c.snr_db = detail::json_number_or_inf(j.at("snr_db"));
  read_if(j, "rho", c.rho);
  detail::read_opt(j, "lambda_e", c.lambda_e);
  detail::read_opt(j, "lambda_z", c.lambda_z);
  read_if(j, "I_max", c.I_max);
  read_if(j, "thr", c.thr);
  detail::read_opt(j, "sigma_p2", c.sigma_p2);
  read_if(j, "seed", c.seed);
  if (j.contains("e_solver")) {
    auto s = j.at("e_solver").get<std::string>();
    if (s == "lasso") c.e_solver = DelaySolver::kLasso;
    else if (s == "omp") c.e_solver = DelaySolver::kOmp;
    else throw ConfigError("e_solver must be \"lasso\" or \"omp\"");
  }
  read_if(j, "e_polish_sweeps", c.e_polish_sweeps);
  read_if(j, "lasso_max_iter", c.lasso_max_iter);
  read_if(j, "lasso_tol", c.lasso_tol);
  read_if(j, "admm_tol", c.admm_tol);
  read_if(j, "phi_cap", c.phi_cap);
  read_if(j, "absorption_table", c.absorption_table);
  if (!c.absorption_table.empty())
    c.kappa_abs = AbsorptionTable::load_csv(c.absorption_table).at(c.f_c);
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const SystemConfig& c) {
  nlohmann::json j;
  j["N"] = c.N;
  j["M"] = c.M;
  j["f_c"] = c.f_c;
  j["W"] = c.W;
  j["T_s"] = c.T_s();
  j["T"] = c.T;
  j["L_p"] = c.L_p;
  j["K"] = c.K;
  j["L_t"] = c.L_t;
  j["d_tx_rx"] = c.d_tx_rx;
  j["xi"] = c.xi;
  j["kappa_abs"] = c.kappa_abs;
  j["P_t"] = c.P_t;
  j["snr_db"] = std::isinf(c.snr_db) ? nlohmann::json("inf") : nlohmann::json(c.snr_db);
  j["rho"] = c.rho;
  j["lambda_e"] = c.lambda_e ? nlohmann::json(*c.lambda_e) : nlohmann::json(nullptr);
  j["lambda_z"] = c.lambda_z ? nlohmann::json(*c.lambda_z) : nlohmann::json(nullptr);
  j["I_max"] = c.I_max;
  j["thr"] = c.thr;
  j["sigma_p2"] = c.sigma_p2 ? nlohmann::json(*c.sigma_p2) : nlohmann::json(nullptr);
  j["seed"] = c.seed;
  j["e_solver"] = c.e_solver == DelaySolver::kOmp ? "omp" : "lasso";
  j["e_polish_sweeps"] = c.e_polish_sweeps;
  j["lasso_max_iter"] = c.lasso_max_iter;
  j["lasso_tol"] = c.lasso_tol;
  j["admm_tol"] = c.admm_tol;
  j["phi_cap"] = c.phi_cap;
  if (!c.absorption_table.empty()) j["absorption_table"] = c.absorption_table;
  return j;
}

inline SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j.contains("base") ? j.at("base") : j);
}

}  // namespace xlmimo

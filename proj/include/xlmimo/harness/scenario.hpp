// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scenario files: a base system config plus one sweep axis.
//
// {
//   "base":    { ...SystemConfig keys... },
//   "sweep":   { "snr_db": [0, 10, 20, 30] }   or { "T": [...] } or { "MN": [[4,4],[8,8]] },
//   "methods": ["proposed", "idealized", "ls", "omp"],
//   "R": 20,
//   "out_dir": "out/snr",
//   "omp_atoms": 12,                 optional, default 4 L_p
//   "profile_pairs": [[0,0],[7,7]],  optional, delay-profile report only
//   "fc_grid": [1e11, ...]           optional, delay-profile report only
// }

#include "xlmimo/config.hpp"
#include "xlmimo/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace xlmimo::harness {

enum class SweepAxis { kSnr, kT, kArray };

inline const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::kSnr: return "snr_db";
    case SweepAxis::kT: return "T";
    case SweepAxis::kArray: return "MN";
  }
  return "?";
}

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"proposed", "idealized", "ls", "omp"};
  return m;
}

struct Scenario {
  SystemConfig base;
  SweepAxis axis = SweepAxis::kSnr;
  std::vector<double> snr_db;
  std::vector<int> T;
  std::vector<std::pair<int, int>> MN;
  std::vector<std::string> methods{"proposed", "idealized", "ls", "omp"};
  int R = 1;
  std::string out_dir = "out";
  int omp_atoms = 0;  // 0: 4 L_p
  std::vector<std::pair<int, int>> profile_pairs;
  std::vector<double> fc_grid;

  std::size_t points() const {
    switch (axis) {
      case SweepAxis::kSnr: return snr_db.size();
      case SweepAxis::kT: return T.size();
      case SweepAxis::kArray: return MN.size();
    }
    return 0;
  }

  /// Config of sweep point i; validated.
  SystemConfig point_config(std::size_t i) const {
    SystemConfig c = base;
    switch (axis) {
      case SweepAxis::kSnr: c.snr_db = snr_db.at(i); break;
      case SweepAxis::kT: c.T = T.at(i); break;
      case SweepAxis::kArray:
        c.M = MN.at(i).first;
        c.N = MN.at(i).second;
        break;
    }
    c.validate();
    return c;
  }

  /// Sweep value of point i as written in the CSV first column.
  std::string point_label(std::size_t i) const {
    switch (axis) {
      case SweepAxis::kSnr: {
        const double v = snr_db.at(i);
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        nlohmann::json j = v;
        return j.dump();
      }
      case SweepAxis::kT: return std::to_string(T.at(i));
      case SweepAxis::kArray: return std::to_string(MN.at(i).first) + "x" + std::to_string(MN.at(i).second);
    }
    return "";
  }

  int atoms_for(const SystemConfig& c) const { return omp_atoms > 0 ? omp_atoms : 4 * c.L_p; }

  bool has_method(const std::string& m) const {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  }

  void validate() const {
    if (R < 1) throw ConfigError("scenario: R must be >= 1");
    if (points() == 0) throw ConfigError("scenario: sweep list must be non-empty");
    if (methods.empty()) throw ConfigError("scenario: methods must be non-empty");
    for (const auto& m : methods)
      if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
        throw ConfigError("scenario: unknown method \"" + m + "\"");
    if (omp_atoms < 0) throw ConfigError("scenario: omp_atoms must be >= 0");
    for (std::size_t i = 0; i < points(); ++i) point_config(i);
  }
};

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.base = config_from_json(j.contains("base") ? j.at("base") : nlohmann::json::object());
  if (j.contains("sweep")) {
    const auto& sw = j.at("sweep");
    if (!sw.is_object() || sw.size() != 1) throw ConfigError("scenario: sweep must name exactly one axis");
    if (sw.contains("snr_db")) {
      s.axis = SweepAxis::kSnr;
      for (const auto& v : sw.at("snr_db")) s.snr_db.push_back(detail::json_number_or_inf(v));
    } else if (sw.contains("T")) {
      s.axis = SweepAxis::kT;
      s.T = sw.at("T").get<std::vector<int>>();
    } else if (sw.contains("MN")) {
      s.axis = SweepAxis::kArray;
      for (const auto& p : sw.at("MN")) {
        if (!p.is_array() || p.size() != 2) throw ConfigError("scenario: MN entries must be [M, N]");
        s.MN.emplace_back(p[0].get<int>(), p[1].get<int>());
      }
    } else {
      throw ConfigError("scenario: sweep axis must be snr_db, T or MN");
    }
  } else {
    s.snr_db = {s.base.snr_db};
  }
  if (j.contains("methods")) s.methods = j.at("methods").get<std::vector<std::string>>();
  if (j.contains("R")) s.R = j.at("R").get<int>();
  if (j.contains("out_dir")) s.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("omp_atoms")) s.omp_atoms = j.at("omp_atoms").get<int>();
  if (j.contains("profile_pairs"))
    for (const auto& p : j.at("profile_pairs")) {
      if (!p.is_array() || p.size() != 2) throw ConfigError("scenario: profile_pairs entries must be [m, n]");
      s.profile_pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
  if (j.contains("fc_grid")) s.fc_grid = j.at("fc_grid").get<std::vector<double>>();
  s.validate();
  return s;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["base"] = config_to_json(s.base);
  nlohmann::json sw;
  switch (s.axis) {
    case SweepAxis::kSnr: {
      nlohmann::json a = nlohmann::json::array();
      for (double v : s.snr_db) a.push_back(std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v));
      sw["snr_db"] = a;
      break;
    }
    case SweepAxis::kT: sw["T"] = s.T; break;
    case SweepAxis::kArray: {
      nlohmann::json a = nlohmann::json::array();
      for (auto [m, n] : s.MN) a.push_back({m, n});
      sw["MN"] = a;
      break;
    }
  }
  j["sweep"] = sw;
  j["methods"] = s.methods;
  j["R"] = s.R;
  j["out_dir"] = s.out_dir;
  j["omp_atoms"] = s.omp_atoms;
  if (!s.profile_pairs.empty()) {
    nlohmann::json a = nlohmann::json::array();
    for (auto [m, n] : s.profile_pairs) a.push_back({m, n});
    j["profile_pairs"] = a;
  }
  if (!s.fc_grid.empty()) j["fc_grid"] = s.fc_grid;
  return j;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace xlmimo::harness

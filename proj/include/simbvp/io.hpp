// Stable serialization of solver outputs: CSV for curves, JSON for records
// and reports.  Numbers go through one fixed %.17g formatter so repeated runs
// with identical inputs produce byte-identical files.

#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "simbvp/atlas.hpp"
#include "simbvp/phaseplane.hpp"

namespace simbvp {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSpecVersion = "1";

/// Shortest exact decimal round-trip on this platform.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string profile_csv(const Profile& prof) {
  std::string out = "t,f,fp,fpp\n";
  for (const auto& s : prof.samples) {
    out += format_double(s.t);
    out += ',';
    out += format_double(s.y.f);
    out += ',';
    out += format_double(s.y.fp);
    out += ',';
    out += format_double(s.y.fpp);
    out += '\n';
  }
  return out;
}

inline std::string phase_csv(const std::vector<PhaseState>& traj) {
  std::string out = "s,u,v\n";
  for (const auto& p : traj) {
    out += format_double(p.s);
    out += ',';
    out += format_double(p.u);
    out += ',';
    out += format_double(p.v);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON records
// ---------------------------------------------------------------------------

inline Json shape_json(const ShapeClass& sh) {
  return Json{{"kind", shape_kind_name(sh.kind)},
              {"sign_changes", sh.sign_changes},
              {"degenerate", sh.degenerate}};
}

/// Solution summary without the (bulky) profile; curves travel as CSV.
inline Json record_json(const SolutionRecord& rec) {
  Json j;
  j["spec_version"] = kSpecVersion;
  j["family"] = family_name(rec.params.family);
  j["m"] = rec.params.m;
  j["gamma"] = rec.params.gamma;
  j["free_value"] = rec.free_value;
  j["bounded"] = rec.bounded;
  j["lambda"] = rec.limit_lambda ? Json(*rec.limit_lambda) : Json(nullptr);
  j["shape"] = shape_json(rec.shape);
  j["growth_exponent"] = rec.growth_exponent ? Json(*rec.growth_exponent) : Json(nullptr);
  j["termination"] = termination_name(rec.profile.termination);
  j["from_band"] = rec.from_band;
  j["residual"] = rec.residual;
  return j;
}

inline Json fixed_point_json(const FixedPointInfo& fp) {
  Json j;
  j["spec_version"] = kSpecVersion;
  j["u"] = fp.u;
  j["v"] = fp.v;
  j["jacobian"] = Json::array({Json::array({fp.jacobian[0][0], fp.jacobian[0][1]}),
                               Json::array({fp.jacobian[1][0], fp.jacobian[1][1]})});
  j["eigenvalues"] = Json::array();
  for (const auto& ev : fp.eigenvalues)
    j["eigenvalues"].push_back(Json{{"re", ev.real()}, {"im", ev.imag()}});
  j["type"] = fixed_point_type_name(fp.type);
  return j;
}

inline Json asymptotic_fit_json(const AsymptoticFit& fit) {
  Json j;
  j["spec_version"] = kSpecVersion;
  j["exponent"] = fit.exponent;
  j["c_constant"] = fit.c_constant;
  j["t_lo"] = fit.t_lo;
  j["t_hi"] = fit.t_hi;
  j["r_squared"] = fit.r_squared;
  j["n_points"] = fit.n_points;
  return j;
}

inline Json critical_gamma_json(const CriticalGamma& cg) {
  Json j;
  j["spec_version"] = kSpecVersion;
  j["family"] = family_name(cg.family);
  j["m"] = cg.m;
  j["gamma_star"] = cg.gamma_star;
  j["bracket_width"] = cg.bracket_width;
  j["side_with_solutions"] = cg.side_with_solutions == GammaSide::Above ? "above" : "below";
  return j;
}

// ---------------------------------------------------------------------------
// atlas
// ---------------------------------------------------------------------------

inline Json atlas_entry_json(const AtlasEntry& e) {
  Json j;
  j["spec_version"] = kSpecVersion;
  j["family"] = family_name(e.family);
  j["m"] = e.m;
  j["gamma"] = e.gamma;
  j["outcome"] = atlas_outcome_name(e.outcome);
  j["n_bounded"] = e.n_bounded;
  j["n_unbounded"] = e.n_unbounded;
  j["error"] = e.error;
  j["records"] = Json::array();
  for (const auto& rec : e.records) j["records"].push_back(record_json(rec));
  return j;
}

/// One entry per line, ready for streaming consumers.
inline std::string atlas_jsonl(const std::vector<AtlasEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += atlas_entry_json(e).dump();
    out += '\n';
  }
  return out;
}

inline std::string atlas_csv(const std::vector<AtlasEntry>& entries) {
  std::string out = "family,m,gamma,outcome,n_bounded,n_unbounded\n";
  for (const auto& e : entries) {
    out += family_name(e.family);
    out += ',';
    out += format_double(e.m);
    out += ',';
    out += format_double(e.gamma);
    out += ',';
    out += atlas_outcome_name(e.outcome);
    out += ',';
    out += std::to_string(e.n_bounded);
    out += ',';
    out += std::to_string(e.n_unbounded);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::string out((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return out;
}

}  // namespace simbvp

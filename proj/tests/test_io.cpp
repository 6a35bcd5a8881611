#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "simbvp/io.hpp"
#include "simbvp/shooting.hpp"

using namespace simbvp;

namespace {

ShootSettings quick() {
  ShootSettings st;
  st.t_max = 25.0;
  st.max_steps = 60000;
  return st;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> keys_of(const Json& j) {
  std::vector<std::string> out;
  for (const auto& item : j.items()) out.push_back(item.key());
  return out;
}

}  // namespace

TEST_CASE("doubles round-trip through the fixed formatter", "[io]") {
  for (double x : {0.0, 1.0, -1.6180339887498949, 2.0 / 3.0, 1e-300, -4.9406564584124654e-324,
                   123456789.12345679}) {
    const std::string s = format_double(x);
    REQUIRE(std::strtod(s.c_str(), nullptr) == x);
  }
  REQUIRE(format_double(1.0) == "1");
}

TEST_CASE("profile csv has a fixed header and one row per sample", "[io]") {
  std::vector<double> ts{0.0, 0.5, 1.0, 2.0};
  const auto prof = Profile::from_function([](double t) { return t * t; },
                                           [](double t) { return 2.0 * t; },
                                           [](double) { return 2.0; },
                                           [](double) { return 0.0; }, ts);
  const auto text = profile_csv(prof);
  const auto rows = lines_of(text);
  REQUIRE(rows.at(0) == "t,f,fp,fpp");
  REQUIRE(rows.size() == 1 + prof.samples.size());

  // the t = 0.5 row must reproduce the sample exactly
  bool found = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].rfind("0.5,", 0) == 0) {
      REQUIRE(rows[i] == "0.5,0.25,1,2");
      found = true;
    }
  }
  REQUIRE(found);
}

TEST_CASE("phase csv mirrors the trajectory", "[io]") {
  std::vector<PhaseState> traj{{0.0, 0.04, 0.00154}, {-0.5, 0.045, 0.0017}};
  const auto rows = lines_of(phase_csv(traj));
  REQUIRE(rows.size() == 3);
  REQUIRE(rows[0] == "s,u,v");
  REQUIRE(rows[1] == "0,0.040000000000000001,0.0015399999999999999");
}

TEST_CASE("solution records serialize with a stable schema", "[io]") {
  const auto p = make_params(Family::PrescribedTemperature, 1.0, 0.0);
  const auto rec = solve_bvp(p, -1.5, -0.5, quick());
  const auto j = record_json(rec);

  const std::vector<std::string> want{"spec_version", "family",   "m",
                                      "gamma",        "free_value", "bounded",
                                      "lambda",       "shape",    "growth_exponent",
                                      "termination",  "from_band", "residual"};
  REQUIRE(keys_of(j) == want);

  REQUIRE(j["spec_version"] == "1");
  REQUIRE(j["family"] == "temperature");
  REQUIRE(j["m"] == 1.0);
  REQUIRE(j["bounded"] == true);
  REQUIRE(j["lambda"].is_number());
  REQUIRE(j["lambda"].get<double>() == Catch::Approx(1.0).margin(1e-4));
  REQUIRE(j["growth_exponent"].is_null());
  REQUIRE(j["shape"]["kind"] == "concave");
  REQUIRE(j["termination"] == "reached_tmax");
  REQUIRE(j["from_band"] == false);
}

TEST_CASE("band representatives serialize with null lambda", "[io]") {
  SolutionRecord rec;
  rec.params = make_params(Family::PrescribedTemperature, -2.0, 5.0);
  rec.free_value = 2.25;
  rec.bounded = false;
  rec.shape = ShapeClass{ShapeKind::Convex, 0, false};
  rec.growth_exponent = -1.0 / 3.0;
  rec.from_band = true;
  const auto j = record_json(rec);
  REQUIRE(j["lambda"].is_null());
  REQUIRE(j["growth_exponent"].get<double>() == Catch::Approx(-1.0 / 3.0));
  REQUIRE(j["from_band"] == true);
}

TEST_CASE("fixed point and fit reports serialize", "[io]") {
  const auto fps = fixed_points(1.0, 1.0);
  REQUIRE_FALSE(fps.empty());
  const auto j = fixed_point_json(fps.front());
  REQUIRE(j["spec_version"] == "1");
  REQUIRE(j["jacobian"].size() == 2);
  REQUIRE(j["jacobian"][0].size() == 2);
  REQUIRE(j["eigenvalues"].size() == 2);
  REQUIRE(j["eigenvalues"][0].contains("re"));
  REQUIRE(j["type"].is_string());

  AsymptoticFit fit;
  fit.exponent = 0.2;
  fit.c_constant = 1.5;
  fit.t_lo = 40.0;
  fit.t_hi = 400.0;
  fit.r_squared = 0.9999;
  fit.n_points = 200;
  const auto jf = asymptotic_fit_json(fit);
  REQUIRE(jf["exponent"] == 0.2);
  REQUIRE(jf["n_points"] == 200);
}

TEST_CASE("critical gamma reports name the surviving side", "[io]") {
  CriticalGamma cg;
  cg.family = Family::PrescribedFlux;
  cg.m = -3.0;
  cg.gamma_star = 2.6136;
  cg.bracket_width = 6.1e-4;
  cg.side_with_solutions = GammaSide::Above;
  const auto j = critical_gamma_json(cg);
  REQUIRE(j["family"] == "flux");
  REQUIRE(j["side_with_solutions"] == "above");
  cg.side_with_solutions = GammaSide::Below;
  REQUIRE(critical_gamma_json(cg)["side_with_solutions"] == "below");
}

TEST_CASE("atlas entries stream as json lines and csv", "[io]") {
  AtlasEntry a;
  a.family = Family::PrescribedTemperature;
  a.m = 0.5;
  a.gamma = 0.0;
  a.outcome = AtlasOutcome::Unique;
  a.n_bounded = 1;

  AtlasEntry b;
  b.family = Family::PrescribedTemperature;
  b.m = -1.0;
  b.gamma = 0.0;
  b.outcome = AtlasOutcome::NoSolution;

  const auto jl = atlas_jsonl({a, b});
  const auto rows = lines_of(jl);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    const auto j = Json::parse(row);
    REQUIRE(j["spec_version"] == "1");
    REQUIRE(j.contains("outcome"));
    REQUIRE(j["records"].is_array());
  }
  REQUIRE(Json::parse(rows[0])["outcome"] == "unique");
  REQUIRE(Json::parse(rows[1])["outcome"] == "no_solution");

  const auto csv = atlas_csv({a, b});
  REQUIRE(csv ==
          "family,m,gamma,outcome,n_bounded,n_unbounded\n"
          "temperature,0.5,0,unique,1,0\n"
          "temperature,-1,0,no_solution,0,0\n");
}

TEST_CASE("identical inputs produce byte-identical output", "[io]") {
  const auto p = make_params(Family::PrescribedFlux, 0.0, -1.0);
  const auto r1 = solve_bvp(p, 0.1, 1.5, quick());
  const auto r2 = solve_bvp(p, 0.1, 1.5, quick());
  REQUIRE(record_json(r1).dump(2) == record_json(r2).dump(2));
  REQUIRE(profile_csv(r1.profile) == profile_csv(r2.profile));
}

TEST_CASE("text files round-trip and failures throw", "[io]") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "simbvp_io_test";
  fs::create_directories(dir);
  const auto path = (dir / "roundtrip.csv").string();
  const std::string payload = "t,f,fp,fpp\n0,0,1,-1\n";
  write_text_file(path, payload);
  REQUIRE(read_text_file(path) == payload);
  REQUIRE_THROWS_AS(read_text_file((dir / "missing.csv").string()), std::runtime_error);
  REQUIRE_THROWS_AS(write_text_file((dir / "no_such_dir" / "x.csv").string(), payload),
                    std::runtime_error);
  fs::remove_all(dir);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "simbvp/integrate.hpp"
#include "simbvp/model.hpp"
#include "simbvp/phaseplane.hpp"

using namespace simbvp;

namespace {

std::vector<double> grid(double t0, double t1, double h) {
  std::vector<double> ts;
  const long n = std::lround((t1 - t0) / h);
  for (long i = 0; i <= n; ++i) ts.push_back(t0 + static_cast<double>(i) * h);
  return ts;
}

Profile synthetic_from(const ClosedFormSolution& cf, double t0, double t1, double h) {
  return Profile::from_function([&](double t) { return cf.eval(t).f; },
                                [&](double t) { return cf.eval(t).fp; },
                                [&](double t) { return cf.eval(t).fpp; },
                                [&](double t) { return cf.third_derivative(t); }, grid(t0, t1, h));
}

}  // namespace

TEST_CASE("planar field values", "[phase]") {
  // every field vanishes at the origin
  for (double a : {-1.0, 0.0, 0.5, 2.0})
    for (double b : {-2.0, 0.0, 1.0}) {
      auto [p, q] = phase_rhs(a, b, 0.0, 0.0);
      CHECK(p == 0.0);
      CHECK(q == 0.0);
    }
  {
    auto [p, q] = phase_rhs(1.0, 1.0, -1.0 / 6.0, 1.0 / 18.0);
    CHECK(std::abs(p) < 1e-16);
    CHECK(std::abs(q) < 1e-16);
  }
  {
    auto [p, q] = phase_rhs(0.5, 0.0, 1.0, 2.0);
    CHECK(p == 0.0);
    CHECK(q == -7.0);
  }
}

TEST_CASE("pointwise transform and its scale invariance", "[phase]") {
  auto [u, v] = to_phase_point({1.0, 2.0, 3.0});
  CHECK(u == 2.0);
  CHECK(v == 3.0);

  std::mt19937 rng(7101);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    State y{dist(rng), dist(rng), dist(rng)};
    if (std::abs(y.f) < 0.1) continue;
    const double k = std::exp(dist(rng) * 0.5);
    State ys{k * y.f, k * k * y.fp, k * k * k * y.fpp};
    auto [u0, v0] = to_phase_point(y);
    auto [u1, v1] = to_phase_point(ys);
    CHECK(std::abs(u1 - u0) < 1e-12 * (1.0 + std::abs(u0)));
    CHECK(std::abs(v1 - v0) < 1e-12 * (1.0 + std::abs(v0)));
  }
}

TEST_CASE("fixed points: location, residual, count", "[phase]") {
  {  // alpha = beta = 0: the field u' = v - 2u^2, v' = -3uv only rests at 0
    auto fps = fixed_points(0.0, 0.0);
    REQUIRE(fps.size() == 1);
    CHECK(fps[0].u == 0.0);
    CHECK(fps[0].v == 0.0);
    CHECK(fps[0].type == FixedPointType::Degenerate);
  }
  {  // temperature family at m = 1
    auto fps = fixed_points(1.0, 1.0);
    REQUIRE(fps.size() == 2);
    CHECK(std::abs(fps[1].u - (-1.0 / 6.0)) < 1e-15);
    CHECK(std::abs(fps[1].v - 1.0 / 18.0) < 1e-15);
    CHECK(fps[1].type == FixedPointType::UnstableFocus);
  }
  {  // flux family at m = -1/2: alpha = 3/2, beta = 0
    auto fps = fixed_points(1.5, 0.0);
    REQUIRE(fps.size() == 2);
    CHECK(std::abs(fps[1].u - (-0.5)) < 1e-15);
    CHECK(std::abs(fps[1].v - 0.5) < 1e-15);
  }

  std::mt19937 rng(8231);
  std::uniform_real_distribution<double> dist(-4.0, 4.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double a = dist(rng), b = dist(rng);
    auto fps = fixed_points(a, b);  // throws if any residual >= 1e-12
    const double ustar = (b - 2.0 * a) / 6.0;
    REQUIRE(fps.size() == (std::abs(ustar) > 1e-14 ? 2u : 1u));

    // origin: eigenvalues {0, -alpha}, hence degenerate
    CHECK(std::min(std::abs(fps[0].eigenvalues[0]), std::abs(fps[0].eigenvalues[1])) < 1e-13);
    const double lo = std::min(fps[0].eigenvalues[0].real(), fps[0].eigenvalues[1].real());
    const double hi = std::max(fps[0].eigenvalues[0].real(), fps[0].eigenvalues[1].real());
    CHECK(std::abs(std::min(lo, hi) - std::min(0.0, -a)) < 1e-13);
    CHECK(std::abs(std::max(lo, hi) - std::max(0.0, -a)) < 1e-13);
    CHECK(fps[0].type == FixedPointType::Degenerate);

    for (const auto& fp : fps) {
      const double tr = fp.jacobian[0][0] + fp.jacobian[1][1];
      const double det =
          fp.jacobian[0][0] * fp.jacobian[1][1] - fp.jacobian[0][1] * fp.jacobian[1][0];
      for (const auto& lam : fp.eigenvalues) {
        const auto res = lam * lam - tr * lam + det;
        CHECK(std::abs(res) < 1e-10 * (1.0 + std::abs(lam) * std::abs(lam)));
      }
    }
  }
}

TEST_CASE("Jacobian classification covers every type", "[phase]") {
  using detail::classify_fixed_point;
  // probe points chosen for their Jacobian, not as equilibria
  CHECK(classify_fixed_point(-3.0, 5.0, 1.0, 2.0).type == FixedPointType::Saddle);
  CHECK(classify_fixed_point(0.0, 1.0, 1.0, 0.0).type == FixedPointType::StableNode);
  CHECK(classify_fixed_point(0.0, -1.0, -1.0, 0.0).type == FixedPointType::UnstableNode);
  CHECK(classify_fixed_point(0.0, 0.0, 0.0, 1.0).type == FixedPointType::Center);
  CHECK(classify_fixed_point(1.0, 0.0, 0.0, 1.0).type == FixedPointType::StableFocus);
  CHECK(classify_fixed_point(1.0, 1.0, -1.0 / 6.0, 1.0 / 18.0).type ==
        FixedPointType::UnstableFocus);
  CHECK(classify_fixed_point(2.0, 0.0, 0.0, 0.0).type == FixedPointType::Degenerate);
}

TEST_CASE("constant profile maps to the origin with s = t - tau", "[phase]") {
  auto one = [](double) { return 1.0; };
  auto zero = [](double) { return 0.0; };
  auto prof = Profile::from_function(one, zero, zero, zero, grid(0.0, 5.0, 0.1));
  for (double tau : {0.0, 2.5}) {
    auto pts = to_phase(prof, tau);
    REQUIRE(pts.size() == prof.samples.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(pts[i].u == 0.0);
      CHECK(pts[i].v == 0.0);
      CHECK(std::abs(pts[i].s - (prof.samples[i].t - tau)) < 1e-13);
    }
  }
}

TEST_CASE("transform of the exponential closed form matches its analytic image", "[phase]") {
  // m = 1, gamma = 5: f < 0 on [0, 10], zero far to the right
  auto cf = closed_form_m1(5.0);
  auto prof = synthetic_from(cf, 0.0, 10.0, 0.002);
  REQUIRE(prof.events.empty());

  auto pts = to_phase(prof, 0.0);
  REQUIRE(pts.size() == prof.samples.size());
  const double c = cf.c, g = 5.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double t = prof.samples[i].t;
    const double e = std::exp(-c * t);
    const double f = c - (c + g) * e;
    const double s = c * t + (c + g) * (e - 1.0) / c;
    worst = std::max(worst, std::abs(pts[i].s - s));
    worst = std::max(worst, std::abs(pts[i].u - e / (f * f)));
    worst = std::max(worst, std::abs(pts[i].v - (-c * e) / (f * f * f)));
  }
  CHECK(worst < 1e-8);

  // s decreases while f < 0
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].s < pts[i - 1].s);
}

TEST_CASE("zeros of f split the transform", "[phase]") {
  auto cf = closed_form_m1(5.0);
  const double t_zero = std::log((cf.c + 5.0) / cf.c) / cf.c;  // about 17.1
  auto prof = synthetic_from(cf, 0.0, 25.0, 0.005);

  CHECK_THROWS_AS(to_phase(prof, 0.0), FVanishesError);
  try {
    to_phase(prof, 0.0);
  } catch (const FVanishesError& e) {
    CHECK(std::abs(e.where() - t_zero) < 1e-6);
  }

  auto windows = sign_constant_intervals(prof);
  REQUIRE(windows.size() == 2);
  CHECK(windows[0].first == 0.0);
  CHECK(windows[0].second < t_zero);
  CHECK(windows[1].first > t_zero);
  CHECK(windows[1].second == 25.0);

  auto neg = to_phase(prof, 0.0, windows[0].first, windows[0].second);
  CHECK(neg.front().s == 0.0);
  for (std::size_t i = 1; i < neg.size(); ++i) CHECK(neg[i].s < neg[i - 1].s);

  const double tau2 = prof.samples[4000].t;  // inside the positive window
  REQUIRE(tau2 > windows[1].first);
  auto pos = to_phase(prof, tau2, windows[1].first, windows[1].second);
  for (std::size_t i = 1; i < pos.size(); ++i) CHECK(pos[i].s > pos[i - 1].s);
  bool has_zero_s = false;
  for (const auto& p : pos) has_zero_s = has_zero_s || p.s == 0.0;
  CHECK(has_zero_s);
}

TEST_CASE("base point on a zero of f is refused; boundary zeros are trimmed", "[phase]") {
  auto cf = closed_form_m1(0.0);  // f = 1 - exp(-t), f(0) = 0
  auto prof = synthetic_from(cf, 0.0, 10.0, 0.002);
  CHECK_THROWS_AS(to_phase(prof, 0.0), FVanishesError);

  const double tau = prof.samples[500].t;  // about t = 1
  auto pts = to_phase(prof, tau);
  REQUIRE(pts.size() == prof.samples.size() - 1);  // t = 0 sample dropped
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double t = prof.samples[i + 1].t;
    const double e = std::exp(-t), f = 1.0 - e;
    worst = std::max(worst, std::abs(pts[i].u - e / (f * f)));
    worst = std::max(worst, std::abs(pts[i].v + e / (f * f * f)));
  }
  CHECK(worst < 1e-8);
  CHECK(pts[499].s == 0.0);

  CHECK_THROWS_AS(to_phase(prof, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(to_phase(prof, 11.0), std::invalid_argument);
}

TEST_CASE("a touching zero inside the window is refused", "[phase]") {
  // f = (t - 1)^2 grazes zero at t = 1 without changing sign
  auto prof = Profile::from_function([](double t) { return (t - 1.0) * (t - 1.0); },
                                     [](double t) { return 2.0 * (t - 1.0); },
                                     [](double) { return 2.0; }, [](double) { return 0.0; },
                                     grid(0.0, 2.0, 0.05));
  // f' flips sign at t = 1 but f itself never crosses
  for (const auto& e : prof.events) CHECK(e.kind == EventKind::FpSignChange);
  try {
    to_phase(prof, 0.0);
    FAIL("expected FVanishesError");
  } catch (const FVanishesError& e) {
    CHECK(std::abs(e.where() - 1.0) < 1e-12);
  }
}

TEST_CASE("transform is invariant under profile rescaling", "[phase][prop]") {
  IvpSpec spec;
  spec.params = make_params(Family::PrescribedTemperature, 1.0, 5.0);
  spec.initial = {-5.0, 1.0, -closed_form_m1(5.0).c};
  spec.t_max = 10.0;
  auto prof = integrate(spec);
  REQUIRE(prof.termination == Termination::ReachedTmax);

  auto scaled = scale_solution(prof, 2.0);
  auto a = to_phase(prof, 0.0);
  auto b = to_phase(scaled, 0.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i].s - b[i].s) < 1e-13 * (1.0 + std::abs(a[i].s)));
    CHECK(std::abs(a[i].u - b[i].u) < 1e-13 * (1.0 + std::abs(a[i].u)));
    CHECK(std::abs(a[i].v - b[i].v) < 1e-13 * (1.0 + std::abs(a[i].v)));
  }
}

TEST_CASE("phase integration rests at the nontrivial fixed point", "[phase]") {
  auto fps = fixed_points(1.0, 1.0);
  REQUIRE(fps.size() == 2);
  auto ph = integrate_phase(1.0, 1.0, {0.0, fps[1].u, fps[1].v}, 20.0);
  REQUIRE(ph.termination == Termination::ReachedTmax);
  for (const auto& p : ph.samples) {
    CHECK(std::abs(p.u - fps[1].u) < 1e-6);
    CHECK(std::abs(p.v - fps[1].v) < 1e-6);
  }
}

TEST_CASE("near the origin v decays at rate alpha", "[phase]") {
  const double alpha = 0.8;
  auto ph = integrate_phase(alpha, 0.3, {0.0, 0.0, 1e-6}, 0.5);
  REQUIRE(ph.termination == Termination::ReachedTmax);
  auto [u1, v1] = ph.at(0.5);
  const double rate = std::log(v1 / 1e-6) / 0.5;
  CHECK(std::abs(rate + alpha) < 1e-3);
  CHECK(std::abs(u1) < 2e-6);
}

TEST_CASE("runaway phase trajectories stop at the threshold", "[phase]") {
  auto ph = integrate_phase(1.0, 1.0, {0.0, -5.0, 0.0}, 10.0);
  REQUIRE(ph.termination == Termination::BlowUp);
  const auto& last = ph.samples.back();
  CHECK(last.s == ph.blowup_s);
  CHECK(std::max(std::abs(last.u), std::abs(last.v)) > 0.98e6);
  CHECK(std::max(std::abs(last.u), std::abs(last.v)) < 1.05e6);
  CHECK(ph.blowup_s < 10.0);
}

TEST_CASE("phase integration runs in either s direction", "[phase]") {
  PhaseIvpSpec tight;
  tight.rel_tol = 1e-10;
  tight.abs_tol = 1e-12;
  auto fwd = integrate_phase(1.0, 1.0, {0.0, 0.01, 0.02}, 1.0, tight);
  REQUIRE(fwd.termination == Termination::ReachedTmax);
  const auto& end = fwd.samples.back();
  CHECK(end.s == 1.0);

  auto back = integrate_phase(1.0, 1.0, {1.0, end.u, end.v}, 0.0, tight);
  REQUIRE(back.termination == Termination::ReachedTmax);
  CHECK(back.samples.back().s == 0.0);
  CHECK(std::abs(back.samples.back().u - 0.01) < 1e-9);
  CHECK(std::abs(back.samples.back().v - 0.02) < 1e-9);

  // dense output agrees between the two runs, including off the grid
  for (double s : {0.25, 0.5, 0.75}) {
    auto [uf, vf] = fwd.at(s);
    auto [ub, vb] = back.at(s);
    CHECK(std::abs(uf - ub) < 1e-7);
    CHECK(std::abs(vf - vb) < 1e-7);
  }
}

TEST_CASE("transformed trajectories solve the planar system", "[phase]") {
  // seed the physical side from the closed form so its own error is zero,
  // then re-integrate in the phase plane and compare pointwise
  auto cf = closed_form_m1(5.0);
  auto prof = synthetic_from(cf, 0.0, 4.0, 0.002);
  auto pts = to_phase(prof, 0.0);

  PhaseIvpSpec tight;
  tight.rel_tol = 1e-11;
  tight.abs_tol = 1e-13;
  auto ph = integrate_phase(1.0, 1.0, pts.front(), pts.back().s, tight);
  REQUIRE(ph.termination == Termination::ReachedTmax);

  double worst = 0.0;
  for (const auto& p : pts) {
    auto [u, v] = ph.at(p.s);
    worst = std::max({worst, std::abs(u - p.u), std::abs(v - p.v)});
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("conjugacy holds for generic short trajectories", "[phase][prop]") {
  std::mt19937 rng(5150);
  std::uniform_real_distribution<double> par(-1.5, 1.5);
  std::uniform_real_distribution<double> f0d(0.7, 1.5);
  std::uniform_real_distribution<double> d01(-0.5, 0.5);

  int used = 0;
  for (int trial = 0; trial < 40 && used < 12; ++trial) {
    IvpSpec spec;
    spec.params = make_generic_params(par(rng), par(rng));
    spec.initial = {f0d(rng), d01(rng), d01(rng)};
    spec.t_max = 1.2;
    spec.rel_tol = 1e-10;
    spec.abs_tol = 1e-12;
    auto prof = integrate(spec);
    if (prof.termination != Termination::ReachedTmax) continue;
    bool f_safe = true;
    for (const auto& s : prof.samples) f_safe = f_safe && s.y.f > 1e-3;
    if (!f_safe) continue;

    auto pts = to_phase(prof, 0.0);
    while (pts.size() > 2 && std::abs(pts.back().s) > 1.5) pts.pop_back();

    PhaseIvpSpec tight;
    tight.rel_tol = 1e-10;
    tight.abs_tol = 1e-12;
    auto ph = integrate_phase(spec.params.alpha, spec.params.beta, pts.front(), pts.back().s,
                              tight);
    if (ph.termination != Termination::ReachedTmax) continue;

    double worst = 0.0;
    for (const auto& p : pts) {
      auto [u, v] = ph.at(p.s);
      worst = std::max({worst, std::abs(u - p.u), std::abs(v - p.v)});
    }
    INFO("alpha = " << spec.params.alpha << " beta = " << spec.params.beta
                    << " worst = " << worst);
    CHECK(worst < 1e-5);
    ++used;
  }
  REQUIRE(used >= 10);
}

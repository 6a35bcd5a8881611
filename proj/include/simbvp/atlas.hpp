// (m, gamma) classification sweeps: run the solution enumerator over a
// parameter grid and summarize each point as an existence/multiplicity
// outcome, mirroring the way the regime tables are stated in prose.

#pragma once

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "simbvp/shooting.hpp"

namespace simbvp {

enum class AtlasOutcome { NoSolution, Unique, FiniteMultiple, BandOfSolutions };

inline const char* atlas_outcome_name(AtlasOutcome o) {
  switch (o) {
    case AtlasOutcome::NoSolution: return "no_solution";
    case AtlasOutcome::Unique: return "unique";
    case AtlasOutcome::FiniteMultiple: return "finite_multiple";
    default: return "band_of_solutions";
  }
}

struct AtlasEntry {
  Family family = Family::Generic;
  double m = 0.0;
  double gamma = 0.0;
  AtlasOutcome outcome = AtlasOutcome::NoSolution;
  std::vector<SolutionRecord> records;
  int n_bounded = 0;
  int n_unbounded = 0;
  std::string error;  // nonempty when this grid point failed to evaluate

  bool failed() const { return !error.empty(); }
};

struct AtlasSettings {
  ScanRange range{0.0, 0.0};  // lo == hi: auto-size per point
  double scan_step = 0.01;
  ShootSettings shoot;
  bool unbounded_ok = true;
};

namespace detail {

inline void require_grid(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw std::invalid_argument(std::string("build_atlas: empty ") + name);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i]))
      throw std::invalid_argument(std::string("build_atlas: non-finite ") + name);
    if (i > 0 && !(g[i] > g[i - 1]))
      throw std::invalid_argument(std::string("build_atlas: ") + name +
                                  " must be strictly increasing");
  }
}

}  // namespace detail

/// One grid point: enumerate and summarize.  Never throws for numerical
/// trouble; the error string carries whatever went wrong.
inline AtlasEntry atlas_point(Family family, double m, double gamma, const AtlasSettings& as) {
  AtlasEntry e;
  e.family = family;
  e.m = m;
  e.gamma = gamma;
  try {
    const ModelParams p = make_params(family, m, gamma);
    const ScanRange r = as.range.lo < as.range.hi ? as.range : default_scan_range(p);
    e.records = enumerate_solutions(p, r, as.scan_step, as.shoot, as.unbounded_ok);
    bool band = false;
    for (const auto& rec : e.records) {
      band = band || rec.from_band;
      (rec.bounded ? e.n_bounded : e.n_unbounded)++;
    }
    if (band)
      e.outcome = AtlasOutcome::BandOfSolutions;
    else if (e.records.size() == 1)
      e.outcome = AtlasOutcome::Unique;
    else if (!e.records.empty())
      e.outcome = AtlasOutcome::FiniteMultiple;
  } catch (const std::exception& ex) {
    e.error = ex.what();
  }
  return e;
}

/// Sweep the grid in (m, gamma) row-major order.  Points are independent;
/// they fan out over SIMBVP_THREADS workers and merge back in grid order, so
/// the output is deterministic regardless of the pool size.
inline std::vector<AtlasEntry> build_atlas(Family family, const std::vector<double>& m_grid,
                                           const std::vector<double>& gamma_grid,
                                           const AtlasSettings& as = {}) {
  detail::require_grid(m_grid, "m grid");
  detail::require_grid(gamma_grid, "gamma grid");
  if (!(as.scan_step > 0.0)) throw std::invalid_argument("build_atlas: scan_step must be positive");

  const std::size_t n = m_grid.size() * gamma_grid.size();
  std::vector<AtlasEntry> out(n);
  auto eval = [&](std::size_t k) {
    out[k] = atlas_point(family, m_grid[k / gamma_grid.size()],
                         gamma_grid[k % gamma_grid.size()], as);
  };

  const int want = detail::env_thread_count();
  if (want <= 1 || n < 2) {
    for (std::size_t k = 0; k < n; ++k) eval(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      eval(k);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(want), n);
  pool.reserve(nt);
  for (std::size_t k = 0; k < nt; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

// ---------------------------------------------------------------------------
// limit-sign bookkeeping
// ---------------------------------------------------------------------------

/// Counts of bounded records by the sign of their limit, plus any violated
/// regime expectations.  Violations are findings, never exceptions: the
/// caller decides whether a mismatch is fatal.
struct LambdaLimitReport {
  int n_neg = 0;
  int n_zero = 0;
  int n_pos = 0;
  int n_concave_convex_pos = 0;
  std::vector<std::string> findings;

  bool ok() const { return findings.empty(); }
};

/// Tally limit signs for one (m, gamma) point and check the sign-count rules
/// that hold family-wide: two negative-limit solutions whenever the m < -1
/// temperature problem is solvable at all, and exactly one concave-convex
/// solution with a positive limit above m = 1.  The dead band scales with
/// gamma because the limits do.
inline LambdaLimitReport check_lambda_limits(const std::vector<SolutionRecord>& recs,
                                             Family family, double m) {
  LambdaLimitReport rep;
  double scale = 1.0;
  for (const auto& rec : recs) scale = std::max(scale, std::abs(rec.params.gamma));
  const double eps = 1e-4 * scale;

  for (const auto& rec : recs) {
    if (!rec.bounded || !rec.limit_lambda) continue;
    const double lam = *rec.limit_lambda;
    if (lam < -eps)
      rep.n_neg++;
    else if (lam > eps)
      rep.n_pos++;
    else
      rep.n_zero++;
    if (lam > eps && rec.shape.kind == ShapeKind::ConcaveConvex) rep.n_concave_convex_pos++;
  }

  auto note = [&](const std::string& s) { rep.findings.push_back(s); };
  if (!recs.empty()) {
    if (family == Family::PrescribedTemperature && m < -1.0 && rep.n_neg != 2)
      note("expected exactly 2 solutions with negative limit, found " +
           std::to_string(rep.n_neg));
    if (m > 1.0 && rep.n_concave_convex_pos != 1)
      note("expected exactly 1 concave-convex solution with positive limit, found " +
           std::to_string(rep.n_concave_convex_pos));
  }
  return rep;
}

}  // namespace simbvp

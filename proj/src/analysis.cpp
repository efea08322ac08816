#include "ness/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ness/errors.hpp"
#include "ness/generators.hpp"
#include "ness/observables.hpp"
#include "ness/optimize.hpp"
#include "ness/parallel.hpp"

namespace ness {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// Log10 coupling coordinates: (g1, g2) at p = 0, (g1, g2, u1, u2) otherwise.
struct CouplingSpace {
  double z1, z2, p;
  int dim;

  CouplingSpace(double z1_, double z2_, double p_) : z1(z1_), z2(z2_), p(p_), dim(p_ > 0.0 ? 4 : 2) {}

  ModelParams params(const std::vector<double>& x) const {
    ModelParams m;
    m.z1 = z1;
    m.z2 = z2;
    m.p = p;
    m.gamma1 = std::pow(10.0, x[0]);
    m.gamma2 = std::pow(10.0, x[1]);
    m.upsilon1 = dim == 4 ? std::pow(10.0, x[2]) : 0.0;
    m.upsilon2 = dim == 4 ? std::pow(10.0, x[3]) : 0.0;
    return m;
  }

  std::vector<double> coords(const ModelParams& m) const {
    std::vector<double> x{std::log10(m.gamma1), std::log10(m.gamma2)};
    if (dim == 4) {
      x.push_back(std::log10(std::max(m.upsilon1, 1e-300)));
      x.push_back(std::log10(std::max(m.upsilon2, 1e-300)));
    }
    return x;
  }

  std::vector<double> lift(double g1, double g2) const {
    std::vector<double> x{std::log10(g1), std::log10(g2)};
    if (dim == 4) {
      x.push_back(std::log10(0.5 * g1));
      x.push_back(std::log10(0.5 * g2));
    }
    return x;
  }
};

void validate_temperatures(double z1, double z2, double p) {
  ModelParams m;
  m.z1 = z1;
  m.z2 = z2;
  m.p = p;
  m.validate();
}

using Score = std::function<double(const CouplingEvaluation&)>;

OptimizationResult run_search(const CouplingSpace& space, const Score& score,
                              const std::vector<std::vector<double>>& warm, const SearchOptions& opt) {
  if (opt.random_starts < 0 || opt.budget_per_start < 1 || !(opt.log_lower < opt.log_upper))
    throw ParameterError("invalid search options");
  const std::vector<double> lo(static_cast<std::size_t>(space.dim), opt.log_lower);
  const std::vector<double> hi(static_cast<std::size_t>(space.dim), opt.log_upper);
  const Objective f = [&](const std::vector<double>& x) {
    const auto ev = evaluate_couplings(space.params(x));
    return ev.ok ? score(ev) : nan_value;
  };

  std::vector<std::vector<double>> starts = warm;
  Rng rng(opt.seed);
  for (int s = 0; s < opt.random_starts; ++s) {
    std::vector<double> x(static_cast<std::size_t>(space.dim));
    for (auto& v : x) v = rng.uniform(opt.log_lower, opt.log_upper);
    starts.push_back(std::move(x));
  }

  NelderMeadOptions nm;
  nm.max_evaluations = opt.budget_per_start;
  NelderMeadResult best;
  best.value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  for (const auto& x0 : starts) {
    auto r = nelder_mead(f, x0, lo, hi, nm);
    evaluations += r.evaluations;
    if (r.value < best.value) best = std::move(r);
  }
  if (best.x.empty()) throw ConvergenceError("coupling search found no valid steady state");

  // Restart from the best vertex; a collapsed simplex can stall short of the optimum.
  nm.initial_step = 0.05;
  auto polish = nelder_mead(f, best.x, lo, hi, nm);
  evaluations += polish.evaluations;
  if (polish.value <= best.value) best = std::move(polish);

  OptimizationResult out;
  out.best_params = space.params(best.x);
  const auto ev = evaluate_couplings(out.best_params);
  out.margin = ev.margin;
  out.c_max = ev.concurrence;
  out.q_dot_at_best = ev.q_dot;
  out.n_evaluations = evaluations;
  out.n_starts = static_cast<int>(starts.size());
  out.converged = best.converged;
  return out;
}

double distance_to_bin(double q, double lo, double hi) {
  if (q < lo) return lo - q;
  if (q > hi) return q - hi;
  return 0.0;
}

}  // namespace

CouplingEvaluation evaluate_couplings(const ModelParams& params) {
  CouplingEvaluation out;
  const auto sol = SectorSteadyStateSolver::solve(params);
  if (!sol.ok) return out;
  const CMatrix sys = SectorSteadyStateSolver::system_state(sol);
  out.margin = concurrence_margin(sys);
  out.concurrence = concurrence_from_margin(out.margin);
  out.q_dot = heat_current_dissipator(sol.rho, params).bath1;
  out.ok = std::isfinite(out.margin) && std::isfinite(out.q_dot);
  return out;
}

OptimizationResult maximize_concurrence(double z1, double z2, double p, const SearchOptions& opt) {
  validate_temperatures(z1, z2, p);
  const CouplingSpace space(z1, z2, p);
  std::vector<std::vector<double>> warm{space.lift(2.0, 2.0)};
  for (const auto& [g1, g2] : boundary_couplings(z1)) {
    if (g1 < std::pow(10.0, opt.log_lower) || g2 < std::pow(10.0, opt.log_lower)) continue;
    warm.push_back(space.lift(g1, g2));
  }
  return run_search(space, [](const CouplingEvaluation& e) { return -e.margin; }, warm, opt);
}

OptimizationResult maximize_heat_current(double z1, double z2, double p, const SearchOptions& opt) {
  validate_temperatures(z1, z2, p);
  const CouplingSpace space(z1, z2, p);
  return run_search(space, [](const CouplingEvaluation& e) { return -std::abs(e.q_dot); }, {space.lift(2.0, 2.0)},
                    opt);
}

BoundaryPair memoryless_boundary(double z1) {
  const double r = 3.0 * std::sqrt(2.0);
  const double den_high = 4.0 * z1 + r, den_low = 4.0 * z1 - r;
  if (std::abs(den_high) < 1e-12 || std::abs(den_low) < 1e-12)
    throw NumericalRangeError("memoryless boundary is singular at this z1");
  return {(4.0 + r * z1) / den_high, (4.0 - r * z1) / den_low};
}

bool memoryless_entanglement_possible(double z1, double z2) {
  return z1 * z2 + std::sqrt(9.0 / 8.0) * std::abs(z1 - z2) > 1.0;
}

std::vector<std::pair<double, double>> boundary_couplings(double z1) {
  std::vector<std::pair<double, double>> out;
  const double s2 = std::sqrt(2.0);
  for (double sign : {1.0, -1.0}) {
    const double den = s2 + sign * z1;
    if (!(den > 0.0)) continue;
    const double g1 = 2.0 / den, g2 = 4.0 * s2 - g1;
    if (g1 > 0.0 && g2 > 0.0) out.emplace_back(g1, g2);
  }
  return out;
}

int RegionSample::bin_of(double q) const {
  const int n = bins();
  if (n == 0) return -1;
  if (!(q_hi > 0.0)) return 0;
  const int k = static_cast<int>(std::floor(q / bin_width()));
  return std::clamp(k, 0, n - 1);
}

void RegionSample::rebuild_hulls() {
  std::fill(hull_upper.begin(), hull_upper.end(), nan_value);
  std::fill(hull_lower.begin(), hull_lower.end(), nan_value);
  for (const auto& pt : points) {
    const auto k = static_cast<std::size_t>(bin_of(pt.q_abs));
    if (std::isnan(hull_upper[k]) || pt.concurrence > hull_upper[k]) hull_upper[k] = pt.concurrence;
    if (std::isnan(hull_lower[k]) || pt.concurrence < hull_lower[k]) hull_lower[k] = pt.concurrence;
  }
}

RegionSample sample_cq_region(double z1, double z2, double p, const RegionOptions& opt) {
  validate_temperatures(z1, z2, p);
  if (opt.n_samples < 1000) throw ParameterError("region sampling needs at least 1000 samples");
  if (opt.bins < 1) throw ParameterError("region needs at least one bin");
  const CouplingSpace space(z1, z2, p);
  const unsigned threads = resolve_threads(opt.threads);
  constexpr double log_lo = -3.0, log_hi = 3.0;

  RegionSample region;
  region.z1 = z1;
  region.z2 = z2;
  region.p = p;
  region.epsilon = opt.epsilon;

  // Draw every coordinate up front so the stream is independent of threading.
  Rng rng(derive_seed(opt.seed, 0));
  std::vector<std::vector<double>> xs(static_cast<std::size_t>(opt.n_samples));
  for (auto& x : xs) {
    x.resize(static_cast<std::size_t>(space.dim));
    for (auto& v : x) v = rng.uniform(log_lo, log_hi);
  }
  std::vector<RegionPoint> sampled(xs.size());
  std::vector<char> valid(xs.size(), 0);
  parallel_for(xs.size(), threads, [&](std::size_t i) {
    const ModelParams m = space.params(xs[i]);
    const auto ev = evaluate_couplings(m);
    if (!ev.ok) return;
    sampled[i] = RegionPoint{std::abs(ev.q_dot), ev.concurrence, ev.margin, m, false};
    valid[i] = 1;
  });
  for (std::size_t i = 0; i < sampled.size(); ++i)
    if (valid[i]) region.points.push_back(sampled[i]);

  SearchOptions qopt;
  qopt.seed = derive_seed(opt.seed, 1);
  qopt.budget_per_start = 1000;
  const auto qbest = maximize_heat_current(z1, z2, p, qopt);
  region.points.push_back(RegionPoint{std::abs(qbest.q_dot_at_best), qbest.c_max, qbest.margin, qbest.best_params, true});

  for (const auto& pt : region.points) region.q_hi = std::max(region.q_hi, pt.q_abs);
  if (region.q_hi < 1e-14) region.q_hi = 0.0;
  region.hull_upper.assign(static_cast<std::size_t>(opt.bins), nan_value);
  region.hull_lower.assign(static_cast<std::size_t>(opt.bins), nan_value);
  region.rebuild_hulls();
  if (!opt.refine || region.q_hi == 0.0) return region;

  const double bw = region.bin_width();
  const int nb = opt.bins;
  const std::vector<double> lo(static_cast<std::size_t>(space.dim), log_lo);
  const std::vector<double> hi(static_cast<std::size_t>(space.dim), log_hi);
  NelderMeadOptions nm;
  nm.max_evaluations = opt.refine_budget;
  nm.initial_step = 0.1;
  nm.x_tolerance = 1e-5;
  nm.f_tolerance = 1e-10;

  struct Candidate {
    RegionPoint point;
    double value = std::numeric_limits<double>::infinity();
    bool found = false;
  };
  auto run_in_bin = [&](int k, const std::vector<double>& x0, bool upper, const NelderMeadOptions& o) {
    const double blo = k * bw, bhi = (k + 1) * bw;
    const Objective f = [&](const std::vector<double>& x) {
      const auto ev = evaluate_couplings(space.params(x));
      if (!ev.ok) return nan_value;
      if (upper) return -ev.margin + distance_to_bin(std::abs(ev.q_dot), blo, bhi) / bw;
      // Smooth pull to the bin centre; the margin only has to reach zero.
      const double off = (std::abs(ev.q_dot) - 0.5 * (blo + bhi)) / bw;
      return ev.margin + 4.0 * off * off;
    };
    const auto r = nelder_mead(f, x0, lo, hi, o);
    Candidate c;
    c.value = r.value;
    const ModelParams m = space.params(r.x);
    const auto ev = evaluate_couplings(m);
    if (ev.ok && region.bin_of(std::abs(ev.q_dot)) == k && distance_to_bin(std::abs(ev.q_dot), blo, bhi) == 0.0) {
      c.point = RegionPoint{std::abs(ev.q_dot), ev.concurrence, ev.margin, m, true};
      c.found = true;
    }
    return c;
  };

  // Upper hull: continuation sweep across bins, then a backward pass.
  std::vector<int> best_sample(static_cast<std::size_t>(nb), -1);
  for (std::size_t i = 0; i < region.points.size(); ++i) {
    const auto k = static_cast<std::size_t>(region.bin_of(region.points[i].q_abs));
    if (best_sample[k] < 0 || region.points[i].margin > region.points[static_cast<std::size_t>(best_sample[k])].margin)
      best_sample[k] = static_cast<int>(i);
  }
  auto nearest_point = [&](double q) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < region.points.size(); ++i)
      if (std::abs(region.points[i].q_abs - q) < std::abs(region.points[best].q_abs - q)) best = i;
    return best;
  };
  std::vector<Candidate> upper(static_cast<std::size_t>(nb));
  auto consider = [&](int k, const Candidate& c) {
    auto& slot = upper[static_cast<std::size_t>(k)];
    if (c.found && (!slot.found || c.value < slot.value)) slot = c;
  };
  for (int k = 0; k < nb; ++k) {
    std::vector<std::vector<double>> starts;
    if (best_sample[static_cast<std::size_t>(k)] >= 0)
      starts.push_back(space.coords(region.points[static_cast<std::size_t>(best_sample[static_cast<std::size_t>(k)])].params));
    if (k > 0 && upper[static_cast<std::size_t>(k - 1)].found)
      starts.push_back(space.coords(upper[static_cast<std::size_t>(k - 1)].point.params));
    if (starts.empty()) starts.push_back(space.coords(region.points[nearest_point((k + 0.5) * bw)].params));
    for (const auto& x0 : starts) consider(k, run_in_bin(k, x0, true, nm));
  }
  for (int k = nb - 2; k >= 0; --k) {
    if (!upper[static_cast<std::size_t>(k + 1)].found) continue;
    consider(k, run_in_bin(k, space.coords(upper[static_cast<std::size_t>(k + 1)].point.params), true, nm));
  }
  for (const auto& c : upper)
    if (c.found) region.points.push_back(c.point);
  region.rebuild_hulls();

  // Lower hull. Push the separable frontier outward first: the largest |Q|
  // reachable with margin <= 0, searched from the highest separable samples.
  std::vector<std::size_t> separable;
  for (std::size_t i = 0; i < region.points.size(); ++i)
    if (region.points[i].margin <= margin_noise_floor) separable.push_back(i);
  std::sort(separable.begin(), separable.end(),
            [&](std::size_t a, std::size_t b) { return region.points[a].q_abs > region.points[b].q_abs; });
  separable.resize(std::min<std::size_t>(separable.size(), 5));
  NelderMeadOptions nm_front = nm;
  nm_front.max_evaluations = 2 * opt.refine_budget;
  std::vector<RegionPoint> front;
  for (std::size_t i : separable) {
    const Objective f = [&](const std::vector<double>& x) {
      const auto ev = evaluate_couplings(space.params(x));
      if (!ev.ok) return nan_value;
      return ev.margin <= margin_noise_floor ? -std::abs(ev.q_dot) : 2.0 + ev.margin;
    };
    const auto r = nelder_mead(f, space.coords(region.points[i].params), lo, hi, nm_front);
    const ModelParams m = space.params(r.x);
    const auto ev = evaluate_couplings(m);
    if (ev.ok && ev.margin <= margin_noise_floor) front.push_back(RegionPoint{std::abs(ev.q_dot), ev.concurrence, ev.margin, m, true});
  }
  region.points.insert(region.points.end(), front.begin(), front.end());
  region.rebuild_hulls();

  // Then look for a separable state in every bin that still has none, sweeping
  // upward so each bin can start from the one just found below it.
  NelderMeadOptions nm_low = nm;
  nm_low.initial_step = 0.05;
  auto lower_search = [&](int k) {
    const double v = region.hull_lower[static_cast<std::size_t>(k)];
    if (std::isnan(v) || v <= opt.epsilon) return;
    const double blo = k * bw, bhi = (k + 1) * bw;
    int min_c = -1, left = -1, right = -1;
    for (std::size_t i = 0; i < region.points.size(); ++i) {
      const auto& pt = region.points[i];
      if (region.bin_of(pt.q_abs) == k &&
          (min_c < 0 || pt.margin < region.points[static_cast<std::size_t>(min_c)].margin))
        min_c = static_cast<int>(i);
      if (pt.margin > margin_noise_floor) continue;
      if (pt.q_abs < blo && (left < 0 || pt.q_abs > region.points[static_cast<std::size_t>(left)].q_abs))
        left = static_cast<int>(i);
      if (pt.q_abs > bhi && (right < 0 || pt.q_abs < region.points[static_cast<std::size_t>(right)].q_abs))
        right = static_cast<int>(i);
    }
    Candidate best;
    for (int i : {left, min_c, right}) {
      if (i < 0) continue;
      auto c = run_in_bin(k, space.coords(region.points[static_cast<std::size_t>(i)].params), false, nm_low);
      if (c.found && (!best.found || c.point.margin < best.point.margin)) best = c;
      if (best.found && best.point.margin <= margin_noise_floor) break;
    }
    if (best.found) {
      region.points.push_back(best.point);
      region.rebuild_hulls();
    }
  };
  for (int k = 0; k < nb; ++k) lower_search(k);
  for (int k = nb - 1; k >= 0; --k) lower_search(k);
  region.rebuild_hulls();
  return region;
}

std::optional<Interval> detect_overhang(const RegionSample& region) {
  int best_start = -1, best_len = 0;
  int start = -1;
  const int n = region.bins();
  for (int k = 0; k <= n; ++k) {
    const bool inside = k < n && !std::isnan(region.hull_lower[static_cast<std::size_t>(k)]) &&
                        region.hull_lower[static_cast<std::size_t>(k)] > region.epsilon;
    if (inside && start < 0) start = k;
    if (!inside && start >= 0) {
      if (k - start > best_len) {
        best_len = k - start;
        best_start = start;
      }
      start = -1;
    }
  }
  if (best_len == 0) return std::nullopt;
  const double bw = region.bin_width();
  return Interval{best_start * bw, std::min(region.q_hi, (best_start + best_len) * bw)};
}

std::optional<Interval> critical_heat_currents(double z1, double z2, double p, const RegionOptions& opt) {
  RegionOptions ropt = opt;
  ropt.refine = false;
  RegionSample region = sample_cq_region(z1, z2, p, ropt);
  const CouplingSpace space(z1, z2, p);

  std::vector<RegionPoint> entangled;
  for (const auto& pt : region.points)
    if (pt.margin > margin_noise_floor) entangled.push_back(pt);
  if (entangled.empty()) {
    SearchOptions sopt;
    sopt.seed = derive_seed(opt.seed, 2);
    const auto best = maximize_concurrence(z1, z2, p, sopt);
    if (!(best.margin > margin_noise_floor)) return std::nullopt;
    entangled.push_back(RegionPoint{std::abs(best.q_dot_at_best), best.c_max, best.margin, best.best_params, true});
  }
  std::sort(entangled.begin(), entangled.end(),
            [](const RegionPoint& a, const RegionPoint& b) { return a.q_abs < b.q_abs; });

  const std::vector<double> lo(static_cast<std::size_t>(space.dim), -3.0);
  const std::vector<double> hi(static_cast<std::size_t>(space.dim), 3.0);
  NelderMeadOptions nm;
  nm.max_evaluations = 2 * opt.refine_budget;
  nm.initial_step = 0.1;
  // Feasible values lie in [-1, 1]; infeasible ones are pushed above 1.
  auto search = [&](double sign, const RegionPoint& from) {
    const Objective f = [&](const std::vector<double>& x) {
      const auto ev = evaluate_couplings(space.params(x));
      if (!ev.ok) return nan_value;
      return ev.margin > margin_noise_floor ? sign * std::abs(ev.q_dot) : 2.0 - ev.margin;
    };
    const auto r = nelder_mead(f, space.coords(from.params), lo, hi, nm);
    const auto ev = evaluate_couplings(space.params(r.x));
    return (ev.ok && ev.margin > margin_noise_floor) ? std::optional<double>(std::abs(ev.q_dot)) : std::nullopt;
  };

  Interval out{entangled.front().q_abs, entangled.back().q_abs};
  const std::size_t n_starts = std::min<std::size_t>(3, entangled.size());
  for (std::size_t i = 0; i < n_starts; ++i) {
    if (auto q = search(1.0, entangled[i])) out.lo = std::min(out.lo, *q);
    if (auto q = search(-1.0, entangled[entangled.size() - 1 - i])) out.hi = std::max(out.hi, *q);
  }
  return out;
}

std::vector<double> z_axis(int n) {
  if (n < 2) throw ParameterError("grid needs at least two points per axis");
  std::vector<double> z(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) z[static_cast<std::size_t>(k)] = (2.0 * k - (n - 1)) / (n - 1);
  return z;
}

std::vector<CmaxRow> cmax_map(double p, const std::vector<double>& z1_values, const std::vector<double>& z2_values,
                              const SearchOptions& opt, int threads) {
  const std::size_t n2 = z2_values.size();
  std::vector<CmaxRow> rows(z1_values.size() * n2);
  parallel_for(rows.size(), resolve_threads(threads), [&](std::size_t i) {
    SearchOptions o = opt;
    o.seed = derive_seed(opt.seed, i);
    auto& row = rows[i];
    row.z1 = z1_values[i / n2];
    row.z2 = z2_values[i % n2];
    row.result = maximize_concurrence(row.z1, row.z2, p, o);
  });
  return rows;
}

}  // namespace ness

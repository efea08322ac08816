#include "ness/divisibility.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "ness/collision.hpp"
#include "ness/errors.hpp"
#include "ness/generators.hpp"
#include "ness/parallel.hpp"

namespace ness {

namespace {

CMatrix basis_columns() {
  const auto g = su4_basis();
  CMatrix out(16, 16);
  for (int j = 0; j < 16; ++j) out.col(j) = vec(g[static_cast<std::size_t>(j)]);
  return out;
}

// Memory generator split into its five coherence sectors, with the lifted
// inputs E_ab (x) xi1 (x) xi2 restricted to the sector they live in.
struct SectorDynamics {
  struct Sector {
    CMatrix block;
    CMatrix inputs;                  // one column per system unit E_ab in this sector
    std::vector<int> units;          // a + 4 b of each column
    std::vector<Eigen::Index> rows;  // sector positions where memory indices agree
    std::vector<int> targets;        // system vec index a' + 4 b' for each such row
  };
  std::array<Sector, 5> sectors;

  explicit SectorDynamics(const ModelParams& params) {
    const auto gen = build_memory_generator(params);
    const CMatrix xi = kron(thermal_qubit(params.z1).matrix(), thermal_qubit(params.z2).matrix());
    for (int d = -2; d <= 2; ++d) {
      auto& s = sectors[static_cast<std::size_t>(d + 2)];
      const auto idx = coherence_sector(4, d);
      s.block = sector_block(gen, d);
      std::vector<Eigen::Index> pos(256, -1);
      for (std::size_t k = 0; k < idx.size(); ++k) pos[static_cast<std::size_t>(idx[k])] = static_cast<Eigen::Index>(k);

      for (int b = 0; b < 4; ++b)
        for (int a = 0; a < 4; ++a)
          if (excitations(a, 2) - excitations(b, 2) == d) s.units.push_back(a + 4 * b);
      s.inputs = CMatrix::Zero(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(s.units.size()));
      for (std::size_t u = 0; u < s.units.size(); ++u) {
        const int a = s.units[u] % 4, b = s.units[u] / 4;
        for (int m = 0; m < 4; ++m)
          for (int n = 0; n < 4; ++n) {
            if (xi(m, n) == cplx(0.0)) continue;
            const auto v = static_cast<std::size_t>((4 * a + m) + 16 * (4 * b + n));
            s.inputs(pos[v], static_cast<Eigen::Index>(u)) = xi(m, n);
          }
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const Eigen::Index r = idx[k] % 16, c = idx[k] / 16;
        if (r % 4 != c % 4) continue;
        s.rows.push_back(static_cast<Eigen::Index>(k));
        s.targets.push_back(static_cast<int>(r / 4 + 4 * (c / 4)));
      }
    }
  }

  // Assemble the 16 x 16 system superoperator from evolved sector states.
  CMatrix system_map(const std::array<CMatrix, 5>& states) const {
    CMatrix lambda = CMatrix::Zero(16, 16);
    for (std::size_t d = 0; d < 5; ++d) {
      const auto& s = sectors[d];
      for (std::size_t u = 0; u < s.units.size(); ++u)
        for (std::size_t k = 0; k < s.rows.size(); ++k)
          lambda(s.targets[k], s.units[u]) += states[d](s.rows[k], static_cast<Eigen::Index>(u));
    }
    return lambda;
  }

  std::array<CMatrix, 5> initial_states() const {
    std::array<CMatrix, 5> out;
    for (std::size_t d = 0; d < 5; ++d) out[d] = sectors[d].inputs;
    return out;
  }

  std::array<CMatrix, 5> propagators(double t) const {
    std::array<CMatrix, 5> out;
    for (std::size_t d = 0; d < 5; ++d) out[d] = matrix_exp(sectors[d].block, t);
    return out;
  }
};

RMatrix to_bloch(const CMatrix& lambda, const CMatrix& g) { return (g.adjoint() * lambda * g).real(); }

// Product of the norms of the columns 1..15: an upper bound on |det F|.
double hadamard_bound(const RMatrix& f) {
  double h = 1.0;
  for (Eigen::Index j = 1; j < f.cols(); ++j) h *= f.col(j).norm();
  return h;
}

struct GridResult {
  std::vector<double> det_abs;
  double n_measure = 0.0;
  double n_significant = 0.0;
  double max_step_change = 0.0;
};

GridResult run_grid(const SectorDynamics& dyn, const CMatrix& g, double t_end, int n, double noise_factor,
                    double rel_tol) {
  const double h = t_end / n;
  const auto step = dyn.propagators(h);
  auto states = dyn.initial_states();
  GridResult out;
  out.det_abs.reserve(static_cast<std::size_t>(n) + 1);
  std::vector<double> floor;
  floor.reserve(static_cast<std::size_t>(n) + 1);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int k = 0; k <= n; ++k) {
    if (k > 0)
      for (std::size_t d = 0; d < 5; ++d) states[d] = (step[d] * states[d]).eval();
    const RMatrix f = to_bloch(dyn.system_map(states), g);
    out.det_abs.push_back(k == 0 ? 1.0 : std::abs(f.partialPivLu().determinant()));
    floor.push_back(noise_factor * 16.0 * eps * hadamard_bound(f));
  }
  const auto& d = out.det_abs;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const double inc = d[k + 1] - d[k];
    if (inc <= 0.0) continue;
    out.n_measure += inc;
    if (inc > std::max(floor[k], floor[k + 1])) out.n_significant += inc;
  }
  // Continuity is checked where |det F| is resolved and large enough to matter for N;
  // close to a zero of det F the relative change per cell is unbounded at any step size.
  const double scale = rel_tol * out.n_measure;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    if (d[k] <= floor[k] || d[k + 1] <= floor[k + 1] || std::max(d[k], d[k + 1]) < scale) continue;
    out.max_step_change = std::max(out.max_step_change, std::abs(d[k + 1] - d[k]) / d[k]);
  }
  return out;
}

}  // namespace

std::vector<Operator> su4_basis() {
  const std::array<Operator, 4> paulis{identity(2), sigma_x(), sigma_y(), sigma_z()};
  std::vector<Operator> out;
  out.reserve(16);
  for (const auto& a : paulis)
    for (const auto& b : paulis) out.push_back(0.5 * kron(a, b));
  return out;
}

BlochMap reduced_map(const ModelParams& params, double t) {
  params.validate();
  if (!(t >= 0.0)) throw ParameterError("reduced_map needs t >= 0");
  const SectorDynamics dyn(params);
  const auto prop = dyn.propagators(t);
  auto states = dyn.initial_states();
  for (std::size_t d = 0; d < 5; ++d) states[d] = (prop[d] * states[d]).eval();
  return BlochMap{t, to_bloch(dyn.system_map(states), basis_columns())};
}

RMatrix memoryless_bloch_generator(const ModelParams& params) {
  const auto gen = build_memoryless_generator(params);
  const CMatrix g = basis_columns();
  return to_bloch(gen.superop.matrix(), g);
}

double default_t_max(const ModelParams& params) {
  params.validate();
  double rate = std::numeric_limits<double>::infinity();
  const std::array<double, 2> gammas{params.gamma1, params.gamma2};
  const std::array<double, 2> zs{params.z1, params.z2};
  for (std::size_t k = 0; k < 2; ++k)
    for (double weight : {1.0 - params.p, params.p})
      for (double z : {ModelParams::z_plus(zs[k]), ModelParams::z_minus(zs[k])}) {
        const double r = weight * gammas[k] * z;
        if (r > 0.0) rate = std::min(rate, r);
      }
  return std::min(50.0 / rate, 1e4);
}

DivisibilityReport non_divisibility(const ModelParams& params, const DivisibilityOptions& opt) {
  params.validate();
  if (opt.n_grid < 1000) throw ParameterError("divisibility grid needs at least 1000 cells");
  if (opt.max_grid < opt.n_grid) throw ParameterError("max_grid must be >= n_grid");
  const SectorDynamics dyn(params);
  const CMatrix g = basis_columns();

  DivisibilityReport rep;
  rep.t_max = opt.t_max > 0.0 ? opt.t_max : default_t_max(params);

  // Past the point where even the Hadamard bound is negligible nothing can add to N.
  auto bound_at = [&](double t) {
    const auto prop = dyn.propagators(t);
    auto states = dyn.initial_states();
    for (std::size_t d = 0; d < 5; ++d) states[d] = (prop[d] * states[d]).eval();
    return hadamard_bound(to_bloch(dyn.system_map(states), g));
  };
  rep.t_end = rep.t_max;
  if (bound_at(rep.t_max) < opt.det_floor) {
    double lo = 0.0, hi = rep.t_max;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (bound_at(mid) < opt.det_floor ? hi : lo) = mid;
    }
    rep.t_end = hi;
  }

  GridResult prev;
  int n = opt.n_grid;
  bool have_prev = false;
  while (true) {
    GridResult cur = run_grid(dyn, g, rep.t_end, n, opt.noise_factor, opt.rel_tol);
    if (have_prev) {
      const double diff = std::abs(cur.n_measure - prev.n_measure);
      rep.converged = diff <= opt.rel_tol * std::abs(cur.n_measure);
    }
    const bool smooth = cur.max_step_change < opt.max_step_change;
    prev = std::move(cur);
    have_prev = true;
    if ((rep.converged && smooth) || 2 * n > opt.max_grid) break;
    n *= 2;
  }
  rep.n_grid = n;
  rep.det_abs = std::move(prev.det_abs);
  rep.n_measure = prev.n_measure;
  rep.n_significant = prev.n_significant;
  rep.max_step_change = prev.max_step_change;
  rep.t_grid.resize(rep.det_abs.size());
  for (std::size_t k = 0; k < rep.t_grid.size(); ++k) rep.t_grid[k] = rep.t_end * static_cast<double>(k) / n;
  return rep;
}

std::vector<DivisibilityRow> divisibility_map(double p, const std::vector<double>& z1_values,
                                              const std::vector<double>& z2_values, const SearchOptions& search,
                                              const DivisibilityOptions& opt, int threads) {
  const auto cmax = cmax_map(p, z1_values, z2_values, search, threads);
  std::vector<DivisibilityRow> rows(cmax.size());
  parallel_for(rows.size(), resolve_threads(threads), [&](std::size_t i) {
    auto& row = rows[i];
    row.z1 = cmax[i].z1;
    row.z2 = cmax[i].z2;
    row.cmax = cmax[i].result;
    if (!(row.cmax.c_max > 0.0)) return;
    const auto rep = non_divisibility(row.cmax.best_params, opt);
    row.evaluated = true;
    row.n_measure = rep.n_measure;
    row.n_significant = rep.n_significant;
    row.t_end = rep.t_end;
    row.n_grid = rep.n_grid;
    row.converged = rep.converged;
  });
  return rows;
}

}  // namespace ness

#include "ness/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ness/errors.hpp"

namespace ness {

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const std::vector<double>& lower,
                             const std::vector<double>& upper, const NelderMeadOptions& opt) {
  const std::size_t n = x0.size();
  if (n == 0 || lower.size() != n || upper.size() != n) throw DimensionError("nelder_mead: bound sizes differ");

  NelderMeadResult res;
  auto clamp = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  };
  auto eval = [&](std::vector<double> x) {
    clamp(x);
    double v = f(x);
    if (!std::isfinite(v)) v = std::numeric_limits<double>::max();
    ++res.evaluations;
    return Vertex{std::move(x), v};
  };

  clamp(x0);
  std::vector<Vertex> s;
  s.push_back(eval(x0));
  for (std::size_t i = 0; i < n; ++i) {
    auto x = x0;
    // Step away from the nearer bound so the vertex stays distinct after clamping.
    const double step = (x[i] + opt.initial_step <= upper[i]) ? opt.initial_step : -opt.initial_step;
    x[i] += step;
    s.push_back(eval(x));
  }

  constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };

  while (true) {
    std::sort(s.begin(), s.end(), by_value);
    if (s.front().f <= opt.target) break;

    double size = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
      for (std::size_t i = 0; i < n; ++i) size = std::max(size, std::abs(s[k].x[i] - s[0].x[i]));
    const double spread = s.back().f - s.front().f;
    if (size <= opt.x_tolerance && spread <= opt.f_tolerance) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opt.max_evaluations) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += s[k].x[i] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = centroid[i] + t * (s.back().x[i] - centroid[i]);
      return x;
    };

    Vertex r = eval(along(-alpha));
    if (r.f < s.front().f) {
      Vertex e = eval(along(-alpha * gamma));
      s.back() = (e.f < r.f) ? std::move(e) : std::move(r);
      continue;
    }
    if (r.f < s[n - 1].f) {
      s.back() = std::move(r);
      continue;
    }
    Vertex c = (r.f < s.back().f) ? eval(along(-alpha * rho)) : eval(along(rho));
    if (c.f < std::min(r.f, s.back().f)) {
      s.back() = std::move(c);
      continue;
    }
    for (std::size_t k = 1; k <= n; ++k) {
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = s[0].x[i] + sigma * (s[k].x[i] - s[0].x[i]);
      s[k] = eval(std::move(x));
    }
  }

  std::sort(s.begin(), s.end(), by_value);
  res.x = s.front().x;
  res.value = s.front().f;
  return res;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace ness

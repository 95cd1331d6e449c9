#include "neklab/core/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "neklab/errors.hpp"

namespace neklab::core {

ActionProbes action_probes(const DomainSpec& dom, std::size_t nodes_per_axis) {
  dom.validate();
  if (nodes_per_axis == 0) throw DomainError("action_probes: empty action sample");
  const std::size_t n = dom.center.size();
  ActionProbes p;
  p.real_nodes_per_axis = nodes_per_axis;

  std::vector<std::vector<double>> offsets;
  if (dom.action_width > 0.0) {
    const double r = dom.action_width;
    if (n <= 3) {
      std::size_t combos = 1;
      for (std::size_t j = 0; j < n; ++j) combos *= 3;
      for (std::size_t c = 0; c < combos; ++c) {
        std::vector<double> y(n);
        std::size_t t = c;
        for (std::size_t j = 0; j < n; ++j, t /= 3) y[j] = (static_cast<double>(t % 3) - 1.0) * r;
        offsets.push_back(std::move(y));
      }
    } else {
      offsets.emplace_back(n, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        for (double sgn : {-1.0, 1.0}) {
          std::vector<double> y(n, 0.0);
          y[j] = sgn * r;
          offsets.push_back(std::move(y));
        }
    }
  } else {
    offsets.emplace_back(n, 0.0);
  }

  std::size_t total = 1;
  for (std::size_t j = 0; j < n; ++j) total *= nodes_per_axis;
  std::vector<double> x(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t t = flat;
    for (std::size_t j = n; j-- > 0; t /= nodes_per_axis) {
      const std::size_t i = t % nodes_per_axis;
      x[j] = nodes_per_axis == 1
                 ? dom.center[j]
                 : dom.center[j] - dom.radius +
                       2.0 * dom.radius * static_cast<double>(i) / static_cast<double>(nodes_per_axis - 1);
    }
    for (const auto& y : offsets) {
      std::vector<cplx> z(n);
      for (std::size_t j = 0; j < n; ++j) z[j] = cplx(x[j], y[j]);
      p.points.push_back(std::move(z));
    }
  }
  return p;
}

double weighted_fourier_norm(const TrigPoly& g, const DomainSpec& dom, double s,
                             std::size_t nodes_per_axis) {
  if (dom.center.size() != g.dim()) throw DomainError("weighted_fourier_norm: dimension mismatch");
  return weighted_fourier_norm(g, action_probes(dom, nodes_per_axis), s);
}

double weighted_fourier_norm(const TrigPoly& g, const ActionProbes& probes, double s) {
  if (s < 0.0) throw DomainError("weighted_fourier_norm: s must be non-negative");
  if (probes.points.empty()) throw DomainError("weighted_fourier_norm: empty action sample");
  double best = 0.0;
  for (const auto& I : probes.points) {
    double sum = 0.0;
    for (const auto& [k, p] : g.terms())
      sum += std::abs(p.evaluate(std::span<const cplx>(I))) * std::exp(static_cast<double>(k.l1()) * s);
    best = std::max(best, sum);
  }
  return best;
}

double strip_sup_norm(const TrigPoly& g, const ActionProbes& probes, double s,
                      std::size_t angle_nodes) {
  if (s < 0.0) throw DomainError("strip_sup_norm: s must be non-negative");
  if (probes.points.empty()) throw DomainError("strip_sup_norm: empty action sample");
  if (angle_nodes == 0) throw DomainError("strip_sup_norm: empty angle sample");
  const std::size_t n = g.dim();
  std::vector<MultiIndex> ks;
  for (const auto& [k, p] : g.terms()) ks.push_back(k);

  std::size_t grid = 1;
  for (std::size_t j = 0; j < n; ++j) grid *= angle_nodes;
  const std::size_t corners = s > 0.0 ? (std::size_t{1} << n) : 1;
  // e^{ik·(x+iy)} factored into a phase table and a corner weight table.
  std::vector<cplx> phase(grid * ks.size());
  std::vector<double> x(n);
  for (std::size_t f = 0; f < grid; ++f) {
    std::size_t t = f;
    for (std::size_t j = n; j-- > 0; t /= angle_nodes)
      x[j] = 2.0 * std::numbers::pi * static_cast<double>(t % angle_nodes) / static_cast<double>(angle_nodes);
    for (std::size_t i = 0; i < ks.size(); ++i) phase[f * ks.size() + i] = std::polar(1.0, ks[i].dot(x));
  }
  std::vector<double> weight(corners * ks.size());
  for (std::size_t c = 0; c < corners; ++c)
    for (std::size_t i = 0; i < ks.size(); ++i) {
      double ky = 0.0;
      for (std::size_t j = 0; j < n; ++j) ky += ks[i][j] * (((c >> j) & 1U) ? s : -s);
      weight[c * ks.size() + i] = corners == 1 ? 1.0 : std::exp(-ky);
    }

  double best = 0.0;
  std::vector<cplx> coef(ks.size());
  for (const auto& I : probes.points) {
    std::size_t i = 0;
    for (const auto& [k, p] : g.terms()) coef[i++] = p.evaluate(std::span<const cplx>(I));
    for (std::size_t c = 0; c < corners; ++c)
      for (std::size_t f = 0; f < grid; ++f) {
        cplx z{};
        for (std::size_t t = 0; t < ks.size(); ++t)
          z += coef[t] * weight[c * ks.size() + t] * phase[f * ks.size() + t];
        best = std::max(best, std::abs(z));
      }
  }
  return best;
}

GridFunction finite_difference(const GridFunction& f, std::size_t axis) {
  if (axis >= f.dims()) throw DomainError("finite_difference: axis out of range");
  const Axis& a = f.axis(axis);
  const std::size_t N = a.nodes;
  const std::size_t st = f.stride(axis);
  const double h = a.step();
  if (!a.periodic && N < 3) throw ResolutionError("finite_difference: need 3 nodes on an interval");
  GridFunction d(f.axes());
  const auto& v = f.values();
  auto& out = d.values();
  const std::size_t outer = f.size() / (N * st);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t inner = 0; inner < st; ++inner) {
      const std::size_t base = o * N * st + inner;
      auto at = [&](std::size_t i) { return v[base + i * st]; };
      for (std::size_t i = 0; i < N; ++i) {
        double r;
        if (a.periodic) {
          r = (at((i + 1) % N) - at((i + N - 1) % N)) / (2.0 * h);
        } else if (i == 0) {
          r = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
        } else if (i == N - 1) {
          r = (3.0 * at(N - 1) - 4.0 * at(N - 2) + at(N - 3)) / (2.0 * h);
        } else {
          r = (at(i + 1) - at(i - 1)) / (2.0 * h);
        }
        out[base + i * st] = r;
      }
    }
  return d;
}

namespace {

void collect_derivatives(const GridFunction& g, std::size_t min_axis, int remaining,
                         std::vector<GridFunction>& out) {
  if (remaining == 0) {
    out.push_back(g);
    return;
  }
  for (std::size_t ax = min_axis; ax < g.dims(); ++ax)
    collect_derivatives(finite_difference(g, ax), ax, remaining - 1, out);
}

}  // namespace

std::vector<GridFunction> partial_derivatives(const GridFunction& f, int order) {
  if (order < 0) throw DomainError("partial_derivatives: negative order");
  std::vector<GridFunction> out;
  collect_derivatives(f, 0, order, out);
  return out;
}

double cq_norm(const GridFunction& f, int q) {
  if (q < 0) throw DomainError("cq_norm: negative order");
  double m = f.sup_abs();
  for (int o = 1; o <= q; ++o)
    for (const auto& g : partial_derivatives(f, o)) m = std::max(m, g.sup_abs());
  return m;
}

double holder_quotient(const GridFunction& g, double mu, std::size_t pair_budget) {
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("holder_quotient: exponent must lie in (0,1)");
  const std::size_t D = g.dims();
  std::vector<long> omax(D);
  std::vector<double> h(D);
  for (std::size_t d = 0; d < D; ++d) {
    const Axis& a = g.axis(d);
    h[d] = a.step();
    long m = static_cast<long>(std::ceil(1.0 / h[d])) - 1;
    while (m > 0 && static_cast<double>(m) * h[d] >= 1.0) --m;
    const long cap = a.periodic ? static_cast<long>(a.nodes / 2) : static_cast<long>(a.nodes) - 1;
    omax[d] = std::min(m, cap);
  }

  // Offsets per axis: a dense local window plus a strided tail.
  // The extreme offsets ±omax are always kept since smooth functions attain
  // the quotient near distance one.
  std::vector<std::vector<long>> lists(D);
  auto build = [&](long window, long stride) {
    std::size_t count = 1;
    for (std::size_t d = 0; d < D; ++d) {
      lists[d].clear();
      for (long o = -omax[d]; o <= omax[d]; ++o)
        if (std::abs(o) <= window || o % stride == 0 || std::abs(o) == omax[d]) lists[d].push_back(o);
      count *= lists[d].size();
    }
    return count / 2 * g.size() <= pair_budget;
  };
  long longest = 1;
  for (long m : omax) longest = std::max(longest, m);
  bool fits = false;
  for (long window = 8; window >= 0 && !fits; window = window == 0 ? -1 : window / 2)
    for (long stride = 1; stride <= 2 * longest && !fits; stride *= 2) fits = build(window, stride);
  if (!fits) build(0, 2 * longest + 1);

  const auto& v = g.values();
  double best = 0.0;
  std::vector<long> off(D);
  std::vector<std::size_t> idx(D, 0);
  std::vector<std::size_t> pos(D, 0);
  for (;;) {
    for (std::size_t d = 0; d < D; ++d) off[d] = lists[d][pos[d]];
    // Keep one of each ±offset pair.
    bool positive = false, zero = true;
    for (std::size_t d = 0; d < D && zero; ++d)
      if (off[d] != 0) {
        zero = false;
        positive = off[d] > 0;
      }
    if (!zero && positive) {
      double dist = 0.0;
      for (std::size_t d = 0; d < D; ++d) dist = std::max(dist, static_cast<double>(std::abs(off[d])) * h[d]);
      if (dist > 0.0 && dist < 1.0) {
        const double denom = std::pow(dist, mu);
        std::fill(idx.begin(), idx.end(), 0);
        for (std::size_t flat = 0; flat < g.size(); ++flat) {
          std::size_t other = 0;
          bool inside = true;
          for (std::size_t d = 0; d < D; ++d) {
            const Axis& a = g.axis(d);
            long j = static_cast<long>(idx[d]) + off[d];
            const long N = static_cast<long>(a.nodes);
            if (a.periodic) {
              j = ((j % N) + N) % N;
            } else if (j < 0 || j >= N) {
              inside = false;
              break;
            }
            other += static_cast<std::size_t>(j) * g.stride(d);
          }
          if (inside) best = std::max(best, std::abs(v[flat] - v[other]) / denom);
          for (std::size_t d = D; d-- > 0;) {
            if (++idx[d] < g.axis(d).nodes) break;
            idx[d] = 0;
          }
        }
      }
    }
    std::size_t d = D;
    while (d-- > 0) {
      if (++pos[d] < lists[d].size()) break;
      pos[d] = 0;
      if (d == 0) return best;
    }
  }
}

namespace {

double holder_value(const GridFunction& f, int q, double mu) {
  double v = cq_norm(f, q);
  if (mu > 0.0) {
    double quot = 0.0;
    for (const auto& d : partial_derivatives(f, q)) quot = std::max(quot, holder_quotient(d, mu));
    v += quot;
  }
  return v;
}

}  // namespace

NormReport holder_norm_estimate(const GridFunction& f, double ell) {
  if (!(ell > 0.0) || !std::isfinite(ell)) throw DomainError("holder_norm_estimate: ell must be positive");
  const int q = static_cast<int>(std::floor(ell + 1e-12));
  const double mu = std::max(0.0, ell - q) < 1e-12 ? 0.0 : ell - q;
  for (const auto& a : f.axes())
    if (a.nodes < static_cast<std::size_t>(q) + 2)
      throw ResolutionError("holder_norm_estimate: grid too coarse for the derivative order");
  NormReport r;
  r.kind = mu > 0.0 ? "holder" : "cq";
  r.resolution = f.size();
  r.value = holder_value(f, q, mu);
  r.error_estimate = r.value;
  try {
    const GridFunction c = f.coarsened();
    bool ok = true;
    for (const auto& a : c.axes()) ok = ok && a.nodes >= static_cast<std::size_t>(q) + 2;
    if (ok) r.error_estimate = std::abs(r.value - holder_value(c, q, mu));
  } catch (const ResolutionError&) {
  }
  return r;
}

}  // namespace neklab::core

#include "neklab/normalform/normalform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "neklab/core/norms.hpp"
#include "neklab/errors.hpp"

namespace neklab::normalform {

using core::cplx;
using core::json;

namespace {

geography::IntVec to_int(const MultiIndex& k) {
  return geography::IntVec(k.entries().begin(), k.entries().end());
}

bool within_cutoff(const MultiIndex& k, double K) { return static_cast<double>(k.l1()) <= K + 1e-12; }

DomainSpec with_widths(const DomainSpec& dom, double action_width, double angle_width) {
  DomainSpec d = dom;
  d.action_width = action_width;
  d.angle_width = angle_width;
  return d;
}

double norm_at(const TrigPoly& g, const DomainSpec& dom, double action_width, double angle_width,
               std::size_t nodes) {
  if (g.is_zero()) return 0.0;
  return core::weighted_fourier_norm(g, with_widths(dom, action_width, angle_width), angle_width, nodes);
}

// Tensor grid of `m` points per axis in B_∞(center, half), Chebyshev or uniform.
std::vector<std::vector<double>> box_grid(const std::vector<double>& center, double half, std::size_t m,
                                          bool chebyshev) {
  const std::size_t n = center.size();
  std::size_t total = 1;
  for (std::size_t j = 0; j < n; ++j) total *= m;
  std::vector<double> t1(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (chebyshev)
      t1[i] = std::cos(std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(m)));
    else
      t1[i] = m == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(m - 1);
  }
  std::vector<std::vector<double>> pts(total, std::vector<double>(n));
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t t = f;
    for (std::size_t j = n; j-- > 0; t /= m) pts[f][j] = center[j] + half * t1[t % m];
  }
  return pts;
}

std::vector<Polynomial::Exponents> total_degree_exponents(std::size_t n, int deg) {
  std::vector<Polynomial::Exponents> out;
  Polynomial::Exponents e(n, 0);
  // Odometer over the box [0, deg]ⁿ keeping total degree ≤ deg.
  while (true) {
    int sum = 0;
    for (int v : e) sum += v;
    if (sum <= deg) out.push_back(e);
    std::size_t j = 0;
    while (j < n && e[j] == deg) e[j++] = 0;
    if (j == n) break;
    ++e[j];
  }
  return out;
}

std::vector<double> random_point(std::mt19937_64& rng, const std::vector<double>& center, double half) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(center.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = center[j] + half * u(rng);
  return x;
}

std::vector<double> random_angles(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  std::vector<double> t(n);
  for (auto& v : t) v = u(rng);
  return t;
}

json support_json(const std::vector<MultiIndex>& ks) {
  json a = json::array();
  for (const auto& k : ks) a.push_back(k.entries());
  return a;
}

double finite_or_max(double x) { return std::isfinite(x) ? x : std::numeric_limits<double>::max(); }

}  // namespace

void Thresholds::validate() const {
  if (!(eps >= 0.0)) throw DomainError("Thresholds: eps must be non-negative");
  if (!(alpha > 0.0)) throw DomainError("Thresholds: alpha must be positive");
  if (!(rho > 0.0) || !(rho_p > 0.0)) throw DomainError("Thresholds: action widths must be positive");
  if (!(sigma > 0.0)) throw DomainError("Thresholds: sigma must be positive");
  if (!(K >= 1.0)) throw DomainError("Thresholds: K must be at least 1");
  if (!(xi >= 1.0)) throw DomainError("Thresholds: xi must be at least 1");
  if (!(M > 0.0)) throw DomainError("Thresholds: M must be positive");
}

json Thresholds::to_json() const {
  return json{{"eps", eps},     {"alpha", alpha}, {"rho", rho}, {"rho_p", rho_p},
              {"sigma", sigma}, {"K", K},         {"xi", xi},   {"M", M}};
}

json ThresholdReport::to_json() const {
  return json{{"pass", pass},
              {"eps_margin", finite_or_max(eps_margin)},
              {"rho_margin", rho_margin},
              {"ksigma_margin", ksigma_margin}};
}

ThresholdReport check_thresholds(const Thresholds& t) {
  t.validate();
  ThresholdReport r;
  const double eps_max = t.alpha * t.rho_p / (256.0 * t.xi * t.K);
  r.eps_margin = t.eps > 0.0 ? eps_max / t.eps : std::numeric_limits<double>::infinity();
  r.rho_margin = std::min(t.rho, t.alpha / (2.0 * t.xi * t.M * t.K)) / t.rho_p;
  r.ksigma_margin = t.K * t.sigma / 6.0;
  r.pass = r.eps_margin >= 1.0 && r.rho_margin >= 1.0 && r.ksigma_margin >= 1.0;
  return r;
}

Thresholds thresholds_from_schedule(const geography::Schedule& sched, double alpha, double xi) {
  Thresholds t;
  t.eps = sched.eps;
  t.alpha = alpha;
  t.rho = sched.s;
  t.rho_p = sched.r;
  t.sigma = sched.s;
  t.K = sched.K;
  t.xi = xi;
  t.M = sched.M;
  return t;
}

bool in_lattice(const MultiIndex& k, const Lattice& L) {
  if (k.size() != L.dim()) throw DomainError("in_lattice: dimension mismatch");
  return L.contains(to_int(k));
}

TrigPoly project_resonant(const TrigPoly& f, const Lattice& L, double K) {
  return f.filtered([&](const MultiIndex& k) { return within_cutoff(k, K) && in_lattice(k, L); });
}

TrigPoly project_cutoff(const TrigPoly& f, double K) {
  return f.filtered([&](const MultiIndex& k) { return within_cutoff(k, K); });
}

double perturbation_size(const TrigPoly& f, const DomainSpec& dom, std::size_t nodes_per_axis) {
  dom.validate();
  return norm_at(f, dom, dom.action_width, dom.angle_width, nodes_per_axis);
}

HomologicalResult solve_homological(const Polynomial& h, const TrigPoly& f_nr, const Lattice& L, double K,
                                    const DomainSpec& dom, double alpha, const HomologicalOptions& opt) {
  dom.validate();
  const std::size_t n = f_nr.dim();
  if (h.nvars() != n || L.dim() != n || dom.center.size() != n)
    throw DomainError("solve_homological: dimension mismatch");
  if (!(alpha > 0.0)) throw DomainError("solve_homological: alpha must be positive");
  if (opt.fit_degree < 0) throw DomainError("solve_homological: negative fit degree");

  std::vector<Polynomial> omega;
  for (std::size_t j = 0; j < n; ++j) omega.push_back(h.derivative(j));
  const auto check_pts = box_grid(dom.center, dom.radius, std::max<std::size_t>(opt.check_nodes, 2), false);

  HomologicalResult out;
  out.chi = TrigPoly(n);
  out.degree = opt.fit_degree;

  struct Pending {
    MultiIndex k;
    Polynomial num;
    Polynomial den;
  };
  std::vector<Pending> pending;
  for (const auto& [k, fk] : f_nr.terms()) {
    if (in_lattice(k, L)) throw DomainError("solve_homological: harmonic " + k.str() + " is resonant");
    if (!within_cutoff(k, K)) throw DomainError("solve_homological: harmonic " + k.str() + " exceeds K");
    Polynomial d(n);
    for (std::size_t j = 0; j < n; ++j)
      if (k[j] != 0) d += omega[j] * cplx(static_cast<double>(k[j]));
    for (const auto& I : check_pts) {
      const double v = std::abs(d.evaluate(std::span<const double>(I)));
      if (v < alpha) {
        std::ostringstream os;
        os << "solve_homological: |k·ω(I)| = " << v << " < alpha = " << alpha << " at k = " << k.str()
           << ", I = (";
        for (std::size_t j = 0; j < n; ++j) os << (j ? ", " : "") << I[j];
        os << ")";
        throw SmallDivisorError(os.str());
      }
    }
    const Polynomial den = d * cplx(0.0, 1.0);
    Polynomial q(n);
    if (divide_exact(fk, den, q)) {
      out.chi.add(k, q);
    } else {
      pending.push_back({k, fk, den});
    }
  }
  if (pending.empty()) {
    out.chi = out.chi.realified();
    return out;
  }

  out.exact = false;
  const int deg = out.degree;
  const double half = dom.radius + dom.action_width;
  const std::size_t m = n == 1 ? static_cast<std::size_t>(2 * deg + 1) : static_cast<std::size_t>(deg + 4);
  const auto expo = total_degree_exponents(n, deg);
  // Real Chebyshev nodes shifted by imaginary offsets of size ϱ so that the
  // fit also holds on the complex neighbourhood where the norms are taken.
  std::vector<std::vector<double>> shifts;
  const double w = dom.action_width;
  if (w > 0.0 && n <= 2) {
    for (const auto& y : box_grid(std::vector<double>(n, 0.0), w, 3, false)) shifts.push_back(y);
  } else {
    shifts.emplace_back(n, 0.0);
    if (w > 0.0)
      for (std::size_t j = 0; j < n; ++j)
        for (double sgn : {-1.0, 1.0}) {
          std::vector<double> y(n, 0.0);
          y[j] = sgn * w;
          shifts.push_back(std::move(y));
        }
  }
  std::vector<std::vector<cplx>> nodes;
  for (const auto& x : box_grid(dom.center, half, m, true))
    for (const auto& y : shifts) {
      std::vector<cplx> z(n);
      for (std::size_t j = 0; j < n; ++j) z[j] = cplx(x[j], y[j]);
      nodes.push_back(std::move(z));
    }

  Eigen::MatrixXcd V(nodes.size(), expo.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t e = 0; e < expo.size(); ++e) {
      cplx v = 1.0;
      for (std::size_t j = 0; j < n; ++j) v *= std::pow((nodes[i][j] - dom.center[j]) / half, expo[e][j]);
      V(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e)) = v;
    }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(V);

  Eigen::MatrixXcd B(nodes.size(), pending.size());
  for (std::size_t t = 0; t < pending.size(); ++t)
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::span<const cplx> I(nodes[i]);
      B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
          pending[t].num.evaluate(I) / pending[t].den.evaluate(I);
    }
  const Eigen::MatrixXcd X = qr.solve(B);
  const Eigen::MatrixXcd res = V * X - B;

  std::vector<Polynomial> basis;
  for (const auto& e : expo) {
    Polynomial p = Polynomial::constant(n, 1.0);
    for (std::size_t j = 0; j < n; ++j)
      if (e[j] > 0) p = p * Polynomial::affine(n, j, dom.center[j], half).pow(e[j]);
    basis.push_back(std::move(p));
  }
  for (std::size_t t = 0; t < pending.size(); ++t) {
    const auto ct = static_cast<Eigen::Index>(t);
    const double scale = B.col(ct).cwiseAbs().maxCoeff();
    const double err = res.col(ct).cwiseAbs().maxCoeff();
    if (scale > 0.0) out.fit_residual = std::max(out.fit_residual, err / scale);
    Polynomial c(n);
    for (std::size_t e = 0; e < expo.size(); ++e) {
      const cplx x = X(static_cast<Eigen::Index>(e), ct);
      if (x != cplx{}) c += basis[e] * x;
    }
    out.chi.add(pending[t].k, c);
  }
  out.chi = out.chi.realified();
  return out;
}

json Diagnostics::to_json() const {
  return json{{"eps_measured", eps_measured},
              {"remainder_norm", remainder_norm},
              {"remainder_bound", remainder_bound},
              {"remainder_factor", remainder_factor},
              {"g_distance", g_distance},
              {"g_bound", g_bound},
              {"g_factor", g_factor},
              {"step_norms", step_norms},
              {"fit_residuals", fit_residuals},
              {"tail_norms", tail_norms},
              {"stalled", stalled},
              {"remainder_support", support_json(remainder_support)},
              {"thresholds", thresholds.to_json()}};
}

json NormalFormResult::to_json() const {
  json gens = json::array();
  for (const auto& c : generators) gens.push_back(core::to_json(c));
  return json{{"g", core::to_json(g)},
              {"f_star", core::to_json(f_star)},
              {"generators", gens},
              {"diagnostics", diagnostics.to_json()}};
}

NormalFormResult normalize(const Polynomial& h, const TrigPoly& f, const Lattice& L, const Thresholds& t,
                           const DomainSpec& dom, const NormalizeOptions& opt) {
  dom.validate();
  const std::size_t n = f.dim();
  if (h.nvars() != n || L.dim() != n || dom.center.size() != n)
    throw DomainError("normalize: dimension mismatch");
  if (opt.lie_order < 1) throw DomainError("normalize: lie_order must be at least 1");
  if (!(opt.prune_relative >= 0.0)) throw DomainError("normalize: prune_relative must be non-negative");

  NormalFormResult out;
  auto& diag = out.diagnostics;
  diag.thresholds = check_thresholds(t);
  diag.eps_measured = norm_at(f, dom, t.rho, t.sigma, opt.norm_nodes);
  if (opt.enforce_thresholds) {
    if (!diag.thresholds.pass) throw DomainError("normalize: smallness thresholds fail");
    if (diag.eps_measured > t.eps * (1.0 + 1e-12))
      throw DomainError("normalize: measured perturbation exceeds eps");
  }

  const std::size_t steps =
      opt.steps > 0 ? opt.steps : static_cast<std::size_t>(std::max(1.0, std::ceil(t.K * t.sigma / 6.0 - 1e-12)));
  const double tol = opt.prune_relative * diag.eps_measured;
  const TrigPoly H0 = TrigPoly::from_polynomial(h);
  const auto nonresonant = [&](const TrigPoly& F) {
    return F.filtered([&](const MultiIndex& k) { return within_cutoff(k, t.K) && !in_lattice(k, L); });
  };

  // rest = H∘Ψ − h, kept apart from h so that O(ε²) terms are not swamped.
  TrigPoly rest = f;
  double current = norm_at(nonresonant(rest), dom, t.rho_p, t.sigma, opt.norm_nodes);
  diag.step_norms.push_back(current);
  // Once the non-resonant part is at the level of the previous fit residual,
  // another fit in the same basis cannot reduce it further.
  double floor = 0.0;
  for (std::size_t step = 0; step < steps && current > 0.0; ++step) {
    if (step > 0 && current <= floor) {
      diag.stalled = true;
      break;
    }
    const auto hom = solve_homological(h, nonresonant(rest), L, t.K, with_widths(dom, t.rho, t.sigma), t.alpha,
                                       opt.homological);
    diag.fit_residuals.push_back(hom.fit_residual);
    floor = 10.0 * hom.fit_residual * current;
    const TrigPoly& chi = hom.chi;

    TrigPoly Lh = H0;
    TrigPoly LF = rest;
    TrigPoly next = rest;
    for (int m = 1; m <= opt.lie_order + 1; ++m) {
      const cplx inv(1.0 / m);
      Lh = (poisson_bracket(chi, Lh) * inv).pruned(tol);
      LF = (poisson_bracket(chi, LF) * inv).pruned(tol);
      const TrigPoly term = Lh + LF;
      if (m <= opt.lie_order)
        next += term;
      else
        diag.tail_norms.push_back(norm_at(term, dom, t.rho_p / 2.0, t.sigma / 6.0, opt.norm_nodes));
    }
    rest = next.realified().pruned(tol);
    out.generators.push_back(chi);
    const double after = norm_at(nonresonant(rest), dom, t.rho_p, t.sigma, opt.norm_nodes);
    if (after >= current)
      throw DivergenceError("normalize: non-resonant part did not decrease (" + core::format_double(after) +
                            " >= " + core::format_double(current) + ")");
    diag.step_norms.push_back(after);
    current = after;
  }

  out.g = project_resonant(rest, L, t.K);
  out.f_star = rest - out.g;
  for (const auto& [k, p] : out.f_star.terms()) diag.remainder_support.push_back(k);

  const double eps = diag.eps_measured;
  const TrigPoly g0 = project_resonant(f, L, t.K);
  diag.remainder_norm = norm_at(out.f_star, dom, t.rho_p / 2.0, t.sigma / 6.0, opt.norm_nodes);
  diag.remainder_bound = std::exp(-t.K * t.sigma / 6.0) * eps;
  diag.remainder_factor = diag.remainder_bound > 0.0 ? diag.remainder_norm / diag.remainder_bound : 0.0;
  diag.g_distance = norm_at(out.g - g0, dom, t.rho_p / 2.0, t.sigma / 6.0, opt.norm_nodes);
  diag.g_bound = 64.0 * t.K * eps * eps / (t.alpha * t.rho_p);
  diag.g_factor = diag.g_bound > 0.0 ? diag.g_distance / diag.g_bound : 0.0;
  return out;
}

Transform::Transform(const std::vector<TrigPoly>& generators, std::size_t rk_steps) : rk_steps_(rk_steps) {
  if (rk_steps == 0) throw DomainError("Transform: rk_steps must be positive");
  if (!generators.empty()) n_ = generators.front().dim();
  for (const auto& chi : generators) {
    if (chi.dim() != n_) throw DomainError("Transform: generators of different dimension");
    Field fld;
    for (std::size_t j = 0; j < n_; ++j) {
      fld.dI.push_back(-chi.d_angle(j));
      fld.dtheta.push_back(chi.d_action(j));
    }
    fields_.push_back(std::move(fld));
  }
}

void Transform::flow(const Field& fld, std::vector<double>& I, std::vector<double>& theta) const {
  const std::size_t n = n_;
  const double dt = 1.0 / static_cast<double>(rk_steps_);
  std::vector<double> x(2 * n), y(2 * n);
  std::array<std::vector<double>, 4> k;
  for (auto& v : k) v.resize(2 * n);
  const auto rhs = [&](const std::vector<double>& z, std::vector<double>& dz) {
    const std::span<const double> a(z.data(), n), b(z.data() + n, n);
    for (std::size_t j = 0; j < n; ++j) {
      dz[j] = fld.dI[j].evaluate(a, b);
      dz[n + j] = fld.dtheta[j].evaluate(a, b);
    }
  };
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = I[j];
    x[n + j] = theta[j];
  }
  for (std::size_t s = 0; s < rk_steps_; ++s) {
    rhs(x, k[0]);
    for (std::size_t i = 0; i < 2 * n; ++i) y[i] = x[i] + 0.5 * dt * k[0][i];
    rhs(y, k[1]);
    for (std::size_t i = 0; i < 2 * n; ++i) y[i] = x[i] + 0.5 * dt * k[1][i];
    rhs(y, k[2]);
    for (std::size_t i = 0; i < 2 * n; ++i) y[i] = x[i] + dt * k[2][i];
    rhs(y, k[3]);
    for (std::size_t i = 0; i < 2 * n; ++i) x[i] += dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    I[j] = x[j];
    theta[j] = x[n + j];
  }
}

void Transform::apply(std::vector<double>& I, std::vector<double>& theta) const {
  if (fields_.empty()) return;
  if (I.size() != n_ || theta.size() != n_) throw DomainError("Transform::apply: dimension mismatch");
  for (std::size_t i = fields_.size(); i-- > 0;) flow(fields_[i], I, theta);
}

json VerifyReport::to_json() const {
  return json{{"energy_defect", energy_defect},
              {"action_ratio", action_ratio},
              {"action_bound", action_bound},
              {"angle_ratio", angle_ratio},
              {"angle_bound", angle_bound},
              {"symplectic_defect", symplectic_defect},
              {"support_exact", support_exact},
              {"commutation_defect", commutation_defect},
              {"probes", probes},
              {"seed", seed}};
}

namespace {

// Moves I onto {b·ω(I) = 0 for every basis row b of Λ} by Gauss-Newton.
std::vector<double> project_to_slice(const Polynomial& h, const Lattice& L, std::vector<double> I) {
  const std::size_t n = I.size();
  const std::size_t j = L.rank();
  if (j == 0) return I;
  std::vector<Polynomial> omega, hess;
  for (std::size_t a = 0; a < n; ++a) omega.push_back(h.derivative(a));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) hess.push_back(omega[a].derivative(b));
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd c(j);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(j, n);
    const std::span<const double> x(I);
    for (std::size_t r = 0; r < j; ++r) {
      double v = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        const double br = static_cast<double>(L.basis()[r][a]);
        if (br == 0.0) continue;
        v += br * omega[a].evaluate(x).real();
        for (std::size_t b = 0; b < n; ++b) J(r, b) += br * hess[a * n + b].evaluate(x).real();
      }
      c(r) = v;
    }
    if (c.norm() < 1e-15) break;
    const Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(c);
    for (std::size_t a = 0; a < n; ++a) I[a] -= step(static_cast<Eigen::Index>(a));
  }
  return I;
}

}  // namespace

VerifyReport verify_normalform(const NormalFormResult& result, const Polynomial& h, const TrigPoly& f,
                               const Lattice& L, const Thresholds& t, const DomainSpec& dom, std::size_t probes,
                               std::uint64_t seed, double fd_step) {
  dom.validate();
  if (probes == 0) throw DomainError("verify_normalform: no probes");
  if (!(fd_step > 0.0)) throw DomainError("verify_normalform: fd_step must be positive");
  const std::size_t n = f.dim();
  VerifyReport rep;
  rep.probes = probes;
  rep.seed = seed;
  rep.action_bound = 1.0 / (32.0 * t.xi);
  rep.angle_bound = 1.0 / (24.0 * t.xi);

  const Transform psi(result.generators);
  const TrigPoly H = TrigPoly::from_polynomial(h) + f;
  const TrigPoly N = TrigPoly::from_polynomial(h) + result.g + result.f_star;
  const TrigPoly hg = poisson_bracket(TrigPoly::from_polynomial(h), result.g);

  std::mt19937_64 rng(seed);
  for (std::size_t p = 0; p < probes; ++p) {
    const auto I0 = random_point(rng, dom.center, dom.radius);
    const auto th0 = random_angles(rng, n);

    std::vector<double> I = I0, th = th0;
    psi.apply(I, th);
    rep.energy_defect = std::max(rep.energy_defect, std::abs(H.evaluate(I, th) - N.evaluate(I0, th0)));
    double dI = 0.0, dth = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      dI += (I[j] - I0[j]) * (I[j] - I0[j]);
      dth = std::max(dth, std::abs(th[j] - th0[j]));
    }
    rep.action_ratio = std::max(rep.action_ratio, std::sqrt(dI) / t.rho_p);
    rep.angle_ratio = std::max(rep.angle_ratio, dth / t.sigma);

    // DΨ by central differences in the variables (I, θ).
    Eigen::MatrixXd D(2 * n, 2 * n);
    for (std::size_t c = 0; c < 2 * n; ++c) {
      std::array<std::vector<double>, 2> img;
      for (int sgn = 0; sgn < 2; ++sgn) {
        std::vector<double> a = I0, b = th0;
        const double d = sgn == 0 ? fd_step : -fd_step;
        (c < n ? a[c] : b[c - n]) += d;
        psi.apply(a, b);
        a.insert(a.end(), b.begin(), b.end());
        img[static_cast<std::size_t>(sgn)] = std::move(a);
      }
      for (std::size_t r = 0; r < 2 * n; ++r)
        D(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (img[0][r] - img[1][r]) / (2.0 * fd_step);
    }
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      J(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(n + j)) = 1.0;
      J(static_cast<Eigen::Index>(n + j), static_cast<Eigen::Index>(j)) = -1.0;
    }
    rep.symplectic_defect = std::max(rep.symplectic_defect, (D.transpose() * J * D - J).cwiseAbs().maxCoeff());

    const auto Is = project_to_slice(h, L, I0);
    rep.commutation_defect = std::max(rep.commutation_defect, std::abs(hg.evaluate(Is, th0)));
  }

  bool exact = true;
  for (const auto& [k, p] : result.g.terms())
    if (!within_cutoff(k, t.K) || !in_lattice(k, L)) exact = false;
  for (const auto& [k, p] : result.f_star.terms())
    if (within_cutoff(k, t.K) && in_lattice(k, L)) exact = false;
  rep.support_exact = exact;
  return rep;
}

double composition_identity_defect(const PhaseFunction& H, const PhaseFunction& Hs, const Transform& psi,
                                   const DomainSpec& dom, std::size_t probes, std::uint64_t seed) {
  dom.validate();
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  const std::size_t n = dom.center.size();
  for (std::size_t p = 0; p < probes; ++p) {
    auto I = random_point(rng, dom.center, dom.radius);
    auto th = random_angles(rng, n);
    psi.apply(I, th);
    const double a = H(I, th);
    const double b = Hs(I, th);
    const double diff = a - b;
    worst = std::max(worst, std::abs(a - b - diff));
  }
  return worst;
}

Benchmark benchmark(const std::string& name, double eps_fraction) {
  if (!(eps_fraction > 0.0) || eps_fraction > 1.0)
    throw DomainError("benchmark: eps_fraction must lie in (0, 1]");
  Benchmark b;
  Thresholds& t = b.thresholds;
  t.xi = 1.01;
  t.M = 1.0;
  double weight = 0.0;  // ‖f‖ per unit amplitude
  if (name == "pendulum1") {
    b.h = Polynomial::variable(1, 0).pow(2) * cplx(0.5);
    b.lattice = Lattice::trivial(1);
    t.K = 1.0;
    t.sigma = 6.0;
    t.alpha = 1.0;
    t.rho = 0.25;
    b.domain = DomainSpec{0.25, t.rho, t.sigma, {1.5}};
    b.f = TrigPoly::cosine(MultiIndex{1});
    weight = std::exp(t.sigma);
  } else if (name == "resonant2") {
    b.h = (Polynomial::variable(2, 0).pow(2) + Polynomial::variable(2, 1).pow(2)) * cplx(0.5);
    b.lattice = Lattice::saturate(2, {{1, -1}}, 2.0);
    t.K = 2.0;
    t.sigma = 3.0;
    t.alpha = 0.8;
    t.rho = 0.2;
    b.domain = DomainSpec{0.2, t.rho, t.sigma, {1.0, 1.0}};
    b.f = TrigPoly::cosine(MultiIndex{1, -1}) + TrigPoly::cosine(MultiIndex{1, 0});
    weight = std::exp(2.0 * t.sigma) + std::exp(t.sigma);
  } else {
    throw DomainError("benchmark: unknown name '" + name + "'");
  }
  t.rho_p = 0.99 * std::min(t.rho, t.alpha / (2.0 * t.xi * t.M * t.K));
  t.eps = eps_fraction * t.alpha * t.rho_p / (256.0 * t.xi * t.K);
  b.f = b.f * cplx(t.eps / weight);
  return b;
}

}  // namespace neklab::normalform

#include "neklab/smoothing/smoothing.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "neklab/core/fft.hpp"
#include "neklab/core/norms.hpp"
#include "neklab/errors.hpp"

namespace neklab::smoothing {

using core::Axis;
using core::CoefficientGrid;
using core::GridFunction;
using core::MultiIndex;
using core::Polynomial;
using core::TrigPoly;

namespace {

constexpr double kPi = std::numbers::pi;
// Zero padding beyond the data, in units of s. K decays slowly (|K(y)| is
// still ~1e-7 at |y| = 100), so the periodic images must sit far away.
constexpr double kKernelReach = 200.0;

double exp_neg_inv(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// 0 for t ≤ 0, 1 for t ≥ 1, C^∞ in between.
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = exp_neg_inv(t);
  const double b = exp_neg_inv(1.0 - t);
  return a / (a + b);
}

void check_width(double s, const char* who) {
  if (!(s > 0.0 && s <= 1.0)) throw DomainError(std::string(who) + ": s must lie in (0,1]");
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

BumpSpec with_dim(BumpSpec spec, std::size_t dim) {
  spec.dim = dim;
  return spec;
}

// Total-degree monomial exponents in `nvars` variables up to `degree`.
std::vector<std::vector<int>> monomials(std::size_t nvars, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(nvars, 0);
  auto rec = [&](auto&& self, std::size_t j, int left) -> void {
    if (j == nvars) {
      out.push_back(e);
      return;
    }
    for (int d = 0; d <= left; ++d) {
      e[j] = d;
      self(self, j + 1, left - d);
    }
    e[j] = 0;
  };
  rec(rec, 0, degree);
  return out;
}

struct AnnulusGeometry {
  std::size_t n = 0;
  std::vector<double> center;
  double R = 0.0;
};

AnnulusGeometry annulus_geometry(const GridFunction& f) {
  if (f.dims() == 0 || f.dims() % 2 != 0)
    throw DomainError("annulus grid must have n action axes followed by n angle axes");
  AnnulusGeometry g;
  g.n = f.dims() / 2;
  for (std::size_t j = 0; j < g.n; ++j) {
    const Axis& a = f.axis(j);
    if (a.periodic) throw DomainError("annulus grid: action axes must be intervals");
    if (!f.axis(g.n + j).periodic) throw DomainError("annulus grid: angle axes must be periodic");
    const double R = a.length() / 4.0;
    if (j == 0) g.R = R;
    else if (std::abs(R - g.R) > 1e-12 * g.R)
      throw DomainError("annulus grid: all action axes must have the same radius");
    g.center.push_back(0.5 * (a.lo + a.hi));
  }
  if (!(g.R > 0.0)) throw DomainError("annulus grid: empty action box");
  return g;
}

}  // namespace

void BumpSpec::validate() const {
  if (dim == 0) throw DomainError("BumpSpec: dimension must be positive");
  if (!(plateau > 0.0 && plateau < support)) throw DomainError("BumpSpec: need 0 < plateau < support");
  if (profile != "exp-step") throw DomainError("BumpSpec: unknown profile '" + profile + "'");
}

BumpSpec BumpSpec::action(std::size_t dim) { return BumpSpec{dim, 0.5, 1.0, "exp-step"}; }

BumpSpec BumpSpec::angle(std::size_t dim) {
  const double r = 1.0 / std::sqrt(static_cast<double>(dim));
  return BumpSpec{dim, 0.5 * r, r, "exp-step"};
}

double bump_radial(double r, const BumpSpec& spec) {
  return smooth_step((spec.support - std::abs(r)) / (spec.support - spec.plateau));
}

double bump(std::span<const double> x, const BumpSpec& spec) {
  if (x.size() != spec.dim) throw DomainError("bump: dimension mismatch");
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return bump_radial(std::sqrt(r2), spec);
}

namespace {

// Trapezoid value of (2π)^{-n}∫Φ(η)e^{−iη·y}dη with `m` nodes per axis.
cplx kernel_rule(std::span<const cplx> y, const BumpSpec& spec, std::size_t m) {
  const double a = spec.support;
  const std::size_t n = spec.dim;
  if (n == 1) {
    // Φ even: K(y) = (1/π)∫₀^a Φ(η) cos(ηy) dη; the endpoint terms vanish
    // at η = a and carry weight 1/2 at η = 0.
    const double h = a / static_cast<double>(m);
    cplx sum = 0.5 * bump_radial(0.0, spec);
    for (std::size_t i = 1; i < m; ++i) {
      const double eta = h * static_cast<double>(i);
      sum += bump_radial(eta, spec) * std::cos(eta * y[0]);
    }
    return sum * h / kPi;
  }
  // Periodic trapezoid on [−a,a]ⁿ; Φ and all its derivatives vanish on the faces.
  const double h = 2.0 * a / static_cast<double>(m);
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> eta(n);
  cplx sum{};
  while (true) {
    double r2 = 0.0;
    cplx phase{};
    for (std::size_t j = 0; j < n; ++j) {
      eta[j] = -a + h * static_cast<double>(idx[j]);
      r2 += eta[j] * eta[j];
      phase += eta[j] * y[j];
    }
    const double w = bump_radial(std::sqrt(r2), spec);
    if (w != 0.0) sum += w * std::exp(cplx(0.0, -1.0) * phase);
    std::size_t j = n;
    while (j-- > 0) {
      if (++idx[j] < m) break;
      idx[j] = 0;
      if (j == 0) return sum * std::pow(h / (2.0 * kPi), static_cast<double>(n));
    }
  }
}

}  // namespace

cplx kernel(std::span<const cplx> y, const BumpSpec& spec, std::size_t quadrature_nodes, double tolerance) {
  spec.validate();
  if (y.size() != spec.dim) throw DomainError("kernel: dimension mismatch");
  if (quadrature_nodes < 32) throw DomainError("kernel: at least 32 quadrature nodes per axis required");
  const cplx coarse = kernel_rule(y, spec, quadrature_nodes);
  const cplx fine = kernel_rule(y, spec, 2 * quadrature_nodes);
  const std::vector<cplx> zero(spec.dim);
  const double k0 = std::abs(kernel_rule(zero, spec, quadrature_nodes));
  if (std::abs(fine - coarse) > tolerance * std::max(k0, std::abs(fine)))
    throw ResolutionError("kernel: quadrature not resolved; increase quadrature_nodes");
  return coarse;
}

KernelTable tabulate_kernel(const BumpSpec& spec, const std::vector<double>& radii,
                            std::size_t quadrature_nodes) {
  spec.validate();
  if (quadrature_nodes < 32) throw DomainError("tabulate_kernel: at least 32 quadrature nodes required");
  KernelTable t;
  t.spec = spec;
  t.radii = radii;
  t.quadrature_nodes = quadrature_nodes;
  std::vector<cplx> y(spec.dim);
  for (double r : radii) {
    y[0] = r;
    t.values.push_back(kernel_rule(y, spec, quadrature_nodes));
  }
  return t;
}

SpectralSmoother::SpectralSmoother(const std::vector<Axis>& axes, double s, const BumpSpec& phi)
    : axes_(axes) {
  check_width(s, "SpectralSmoother");
  if (axes.empty()) throw DomainError("SpectralSmoother: no axes");
  const BumpSpec spec = with_dim(phi, axes.size());
  spec.validate();
  total_ = 1;
  for (const Axis& a : axes) {
    if (a.periodic) throw DomainError("SpectralSmoother: axes must be non-periodic");
    if (a.nodes < 2) throw DomainError("SpectralSmoother: each axis needs two nodes");
    const std::size_t n = a.nodes;
    const auto tail = static_cast<std::size_t>(std::ceil(kKernelReach * s / a.step()));
    padded_.push_back(next_pow2(n + std::max(n, tail)));
    total_ *= padded_.back();
    std::vector<double> eta(padded_.back());
    const auto P = static_cast<long>(padded_.back());
    for (long m = 0; m < P; ++m) {
      const long w = m < P / 2 ? m : m - P;
      eta[static_cast<std::size_t>(m)] = 2.0 * kPi * static_cast<double>(w) / (static_cast<double>(P) * a.step());
    }
    eta_.push_back(std::move(eta));
  }
  multiplier_.assign(total_, 0.0);
  const std::size_t d = axes.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  for (std::size_t flat = 0; flat < total_; ++flat) {
    std::size_t rest = flat;
    for (std::size_t j = d; j-- > 0;) {
      idx[j] = rest % padded_[j];
      rest /= padded_[j];
      x[j] = s * eta_[j][idx[j]];
    }
    multiplier_[flat] = bump(x, spec);
  }
}

std::vector<cplx> SpectralSmoother::apply(const std::vector<cplx>& data, std::span<const double> imag_offset) const {
  const std::size_t d = axes_.size();
  std::size_t n = 1;
  for (const Axis& a : axes_) n *= a.nodes;
  if (data.size() != n) throw DomainError("SpectralSmoother::apply: data size mismatch");
  if (!imag_offset.empty() && imag_offset.size() != d)
    throw DomainError("SpectralSmoother::apply: offset dimension mismatch");

  std::vector<int> dims(padded_.begin(), padded_.end());
  const core::FftPlan fwd(dims, core::FftPlan::Direction::forward);
  const core::FftPlan bwd(dims, core::FftPlan::Direction::backward);
  std::vector<cplx> buf(total_, cplx{});
  std::vector<std::size_t> idx(d);
  auto padded_flat = [&](std::size_t flat) {
    std::size_t rest = flat, off = 0, mul = 1;
    for (std::size_t j = d; j-- > 0;) {
      const std::size_t i = rest % axes_[j].nodes;
      rest /= axes_[j].nodes;
      off += i * mul;
      mul *= padded_[j];
    }
    return off;
  };
  for (std::size_t i = 0; i < n; ++i) buf[padded_flat(i)] = data[i];
  fwd.execute(buf);

  for (std::size_t flat = 0; flat < total_; ++flat) {
    double w = multiplier_[flat];
    if (w == 0.0) {
      buf[flat] = 0.0;
      continue;
    }
    if (!imag_offset.empty()) {
      std::size_t rest = flat;
      double ey = 0.0;
      bool nyquist = false;
      for (std::size_t j = d; j-- > 0;) {
        const std::size_t m = rest % padded_[j];
        rest /= padded_[j];
        ey += eta_[j][m] * imag_offset[j];
        nyquist = nyquist || 2 * m == padded_[j];
      }
      // f(x + iy) = Σ f̂(η) e^{iη·x} e^{−η·y}; the unpaired Nyquist bin is
      // symmetrised so that real data stay real at y = 0.
      w *= nyquist ? std::cosh(ey) : std::exp(-ey);
    }
    buf[flat] *= w / static_cast<double>(total_);
  }
  bwd.execute(buf);

  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[padded_flat(i)];
  return out;
}

NonperiodicResult smooth_nonperiodic(const GridFunction& f, double s, const BumpSpec& phi) {
  check_width(s, "smooth_nonperiodic");
  if (f.dims() == 0) throw DomainError("smooth_nonperiodic: empty grid");
  for (const Axis& a : f.axes())
    if (a.periodic) throw DomainError("smooth_nonperiodic: grid axes must be non-periodic");
  const double tiny = 1e-12 * std::max(f.sup_abs(), std::numeric_limits<double>::min());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto idx = f.multi_index(i);
    bool edge = false;
    for (std::size_t j = 0; j < f.dims(); ++j) edge = edge || idx[j] == 0 || idx[j] + 1 == f.axis(j).nodes;
    if (edge && std::abs(f[i]) > tiny)
      throw DomainError("smooth_nonperiodic: support of f touches the grid boundary");
  }

  const SpectralSmoother sm(f.axes(), s, phi);
  std::vector<cplx> data(f.values().begin(), f.values().end());
  NonperiodicResult r;
  r.values = GridFunction(f.axes());
  const auto real_nodes = sm.apply(data);
  for (std::size_t i = 0; i < f.size(); ++i) r.values[i] = real_nodes[i].real();

  std::vector<double> y(f.dims(), 0.0);
  for (std::size_t j = 0; j < f.dims(); ++j) {
    for (double frac : {0.0, 0.5, 1.0}) {
      std::fill(y.begin(), y.end(), 0.0);
      y[j] = frac * s;
      double m = 0.0;
      for (const cplx& z : sm.apply(data, y)) m = std::max(m, std::abs(z));
      r.probes.push_back(StripProbe{j, y[j], m});
      r.strip_sup = std::max(r.strip_sup, m);
    }
  }
  return r;
}

JacksonResult jackson_smooth(const CoefficientGrid& f_hat, double s, const JacksonOptions& opt) {
  check_width(s, "jackson_smooth");
  const std::size_t n = f_hat.angle_dim;
  if (n == 0) throw DomainError("jackson_smooth: empty coefficient table");
  const std::size_t na = f_hat.action_axes.size();
  if (na != 0 && na != n) throw DomainError("jackson_smooth: expected 0 or n action axes");
  const BumpSpec psi = opt.psi.dim == 0 ? BumpSpec::angle(n) : opt.psi;
  psi.validate();
  if (psi.dim != n) throw DomainError("jackson_smooth: Ψ dimension must equal the number of angles");

  // Harmonics that survive both the hard |k|₁ ≤ 1/s truncation and Ψ(sk) > 0.
  std::vector<std::pair<MultiIndex, double>> keep;
  std::vector<double> sk(n);
  for (const auto& [k, v] : f_hat.values) {
    if (static_cast<double>(k.l1()) * s > 1.0) continue;
    for (std::size_t j = 0; j < n; ++j) sk[j] = s * k[j];
    const double w = bump(sk, psi);
    if (w > 0.0) keep.emplace_back(k, w);
  }

  JacksonResult out{TrigPoly(n), 0.0, keep.size()};
  if (na == 0) {
    for (const auto& [k, w] : keep) out.fs.add(k, Polynomial::constant(n, w * f_hat.values.at(k)[0]));
    out.fs = out.fs.realified();
    return out;
  }

  const BumpSpec phi = opt.phi.dim == 0 ? BumpSpec::action(n) : with_dim(opt.phi, n);
  const SpectralSmoother smoother(f_hat.action_axes, s, phi);

  std::vector<double> center = opt.fit_center;
  if (center.empty())
    for (const Axis& a : f_hat.action_axes) center.push_back(0.5 * (a.lo + a.hi));
  if (center.size() != n) throw DomainError("jackson_smooth: fit center dimension mismatch");
  double rho = opt.fit_radius;
  if (rho <= 0.0)
    for (std::size_t j = 0; j < n; ++j)
      rho = std::max(rho, std::max(std::abs(f_hat.action_axes[j].lo - center[j]),
                                   std::abs(f_hat.action_axes[j].hi - center[j])));

  std::vector<std::size_t> nodes;
  std::vector<std::vector<double>> scaled;
  for (std::size_t a = 0; a < f_hat.action_nodes(); ++a) {
    const auto x = f_hat.action_coords(a);
    std::vector<double> u(n);
    bool inside = true;
    for (std::size_t j = 0; j < n; ++j) {
      u[j] = (x[j] - center[j]) / rho;
      inside = inside && std::abs(u[j]) <= 1.0 + 1e-12;
    }
    if (inside) {
      nodes.push_back(a);
      scaled.push_back(std::move(u));
    }
  }
  if (opt.fit_degree < 0) throw DomainError("jackson_smooth: negative fit degree");
  const auto expo = monomials(n, opt.fit_degree);
  if (nodes.size() < expo.size())
    throw ResolutionError("jackson_smooth: too few action nodes in the fit ball for the fit degree");

  Eigen::MatrixXd V(nodes.size(), expo.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t e = 0; e < expo.size(); ++e) {
      double m = 1.0;
      for (std::size_t j = 0; j < n; ++j) m *= std::pow(scaled[i][j], expo[e][j]);
      V(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e)) = m;
    }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);

  Eigen::MatrixXd B(nodes.size(), 2 * keep.size());
  for (std::size_t t = 0; t < keep.size(); ++t) {
    const auto& v = f_hat.values.at(keep[t].first);
    const auto smoothed = smoother.apply(v);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const cplx z = keep[t].second * smoothed[nodes[i]];
      B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * t)) = z.real();
      B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * t + 1)) = z.imag();
    }
  }
  const Eigen::MatrixXd X = qr.solve(B);
  if (B.size() > 0) out.fit_residual = (V * X - B).cwiseAbs().maxCoeff();

  std::vector<Polynomial> basis;
  for (const auto& e : expo) {
    Polynomial p = Polynomial::constant(n, 1.0);
    for (std::size_t j = 0; j < n; ++j)
      if (e[j] > 0) p = p * Polynomial::affine(n, j, center[j], rho).pow(e[j]);
    basis.push_back(std::move(p));
  }
  for (std::size_t t = 0; t < keep.size(); ++t) {
    Polynomial c(n);
    for (std::size_t e = 0; e < expo.size(); ++e) {
      const cplx x(X(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(2 * t)),
                   X(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(2 * t + 1)));
      if (x != cplx{}) c += basis[e] * x;
    }
    out.fs.add(keep[t].first, c);
  }
  out.fs = out.fs.realified();
  return out;
}

TrigPoly jackson_smooth(const CoefficientGrid& f_hat, double s, const BumpSpec& psi) {
  if (!f_hat.action_axes.empty())
    throw DomainError("jackson_smooth: action-dependent tables need JacksonOptions");
  JacksonOptions opt;
  opt.psi = psi;
  return jackson_smooth(f_hat, s, opt).fs;
}

core::json SmoothingReport::to_json() const {
  return core::json{{"s", s},
                    {"errors", errors},
                    {"fourier_norm", fourier_norm},
                    {"slopes", {{"p0", slope_p0}, {"p1", slope_p1}}},
                    {"constants", {{"C_A_hat", C_A_hat}, {"C_B_hat", C_B_hat}}}};
}

double annulus_cutoff(std::span<const double> I, std::span<const double> center, double R) {
  if (I.size() != center.size()) throw DomainError("annulus_cutoff: dimension mismatch");
  if (!(R > 0.0)) throw DomainError("annulus_cutoff: R must be positive");
  double c = 1.0;
  for (std::size_t j = 0; j < I.size(); ++j) c *= smooth_step((2.0 * R - std::abs(I[j] - center[j])) / R);
  return c;
}

GridFunction evaluate_on_grid(const TrigPoly& g, const std::vector<Axis>& action_axes,
                              const std::vector<Axis>& angle_axes) {
  const std::size_t n = g.dim();
  if (action_axes.size() != n || angle_axes.size() != n)
    throw DomainError("evaluate_on_grid: dimension mismatch");
  CoefficientGrid c;
  c.action_axes = action_axes;
  c.angle_dim = n;
  const std::size_t na = c.action_nodes();
  std::vector<std::vector<double>> coords(na);
  for (std::size_t a = 0; a < na; ++a) coords[a] = c.action_coords(a);
  for (const auto& [k, p] : g.terms()) {
    std::vector<cplx> v(na);
    for (std::size_t a = 0; a < na; ++a) v[a] = p.evaluate(coords[a]);
    c.values.emplace(k, std::move(v));
  }
  return core::synthesize(c, angle_axes);
}

double smoothing_error(const GridFunction& f, const TrigPoly& fs, int p, double declared_ell) {
  if (p < 0 || p > static_cast<int>(std::floor(declared_ell)))
    throw DomainError("smoothing_error: order p exceeds the declared regularity");
  const AnnulusGeometry geo = annulus_geometry(f);
  const std::size_t n = geo.n;
  if (fs.dim() != n) throw DomainError("smoothing_error: dimension mismatch");

  std::vector<Axis> sub;
  std::vector<std::size_t> first;
  for (std::size_t j = 0; j < n; ++j) {
    const Axis& a = f.axis(j);
    std::size_t lo = a.nodes, hi = 0;
    for (std::size_t i = 0; i < a.nodes; ++i)
      if (std::abs(a.coord(i) - geo.center[j]) <= 0.5 * geo.R * (1.0 + 1e-12)) {
        lo = std::min(lo, i);
        hi = std::max(hi, i);
      }
    if (lo > hi) throw ResolutionError("smoothing_error: no action nodes in B_∞(c, R/2)");
    sub.push_back(lo == hi ? Axis{a.coord(lo), a.coord(lo), 1, false} : Axis::interval(a.coord(lo), a.coord(hi), hi - lo + 1));
    first.push_back(lo);
  }
  const std::vector<Axis> angles(f.axes().begin() + static_cast<long>(n), f.axes().end());
  GridFunction diff = evaluate_on_grid(fs, sub, angles);
  std::size_t block = 1;
  for (const Axis& a : angles) block *= a.nodes;

  std::vector<std::size_t> idx(2 * n, 0);
  const std::size_t nsub = diff.size() / block;
  for (std::size_t a = 0; a < nsub; ++a) {
    std::size_t rest = a;
    for (std::size_t j = n; j-- > 0;) {
      idx[j] = first[j] + rest % sub[j].nodes;
      rest /= sub[j].nodes;
    }
    const std::size_t src = f.flat_index(idx);
    for (std::size_t i = 0; i < block; ++i) diff[a * block + i] = f[src + i] - diff[a * block + i];
  }
  return core::cq_norm(diff, p);
}

AnnulusResult smooth_annulus(const GridFunction& f, double s, double ell, const AnnulusOptions& opt) {
  check_width(s, "smooth_annulus");
  if (!(ell >= 1.0)) throw DomainError("smooth_annulus: ell must be at least 1");
  const AnnulusGeometry geo = annulus_geometry(f);
  const std::size_t n = geo.n;

  GridFunction cut(f.axes());
  std::size_t block = 1;
  for (std::size_t j = n; j < f.dims(); ++j) block *= f.axis(j).nodes;
  std::vector<double> I(n);
  for (std::size_t a = 0; a < f.size() / block; ++a) {
    const auto x = f.coords(a * block);
    std::copy(x.begin(), x.begin() + static_cast<long>(n), I.begin());
    const double chi = annulus_cutoff(I, geo.center, geo.R);
    for (std::size_t i = 0; i < block; ++i) cut[a * block + i] = chi * f[a * block + i];
  }

  std::vector<int> orders = opt.max_orders;
  if (orders.empty()) {
    for (std::size_t j = 0; j < n; ++j)
      orders.push_back(opt.max_order >= 0 ? opt.max_order
                                          : static_cast<int>((f.axis(n + j).nodes - 2) / 2));
  }
  const CoefficientGrid f_hat = core::fourier_coefficients(cut, n, orders);

  JacksonOptions jo;
  jo.psi = opt.psi;
  jo.phi = opt.phi;
  jo.fit_degree = opt.fit_degree;
  jo.fit_radius = geo.R;
  jo.fit_center = geo.center;
  JacksonResult jr = jackson_smooth(f_hat, s, jo);

  AnnulusResult out;
  out.report.s = s;
  out.report.fit_residual = jr.fit_residual;
  for (int p = 0; p <= static_cast<int>(std::floor(ell)); ++p)
    out.report.errors.push_back(smoothing_error(f, jr.fs, p, ell));
  const core::DomainSpec dom{geo.R, s, 0.0, geo.center};
  out.report.fourier_norm = core::weighted_fourier_norm(jr.fs, dom, s, opt.norm_probe_nodes);
  out.fs = std::move(jr.fs);
  return out;
}

SweepResult smoothing_sweep(const GridFunction& f, const std::vector<double>& widths, double ell,
                            const AnnulusOptions& opt) {
  if (widths.empty()) throw DomainError("smoothing_sweep: sweep must be non-empty");
  SweepResult r;
  r.holder_norm = core::holder_norm_estimate(f, ell).value;
  if (!(r.holder_norm > 0.0)) throw DomainError("smoothing_sweep: f has zero Hölder norm");
  std::vector<double> e0, e1;
  double fmin = std::numeric_limits<double>::infinity(), fmax = 0.0;
  for (double s : widths) {
    SmoothingReport rep = smooth_annulus(f, s, ell, opt).report;
    for (std::size_t p = 0; p < rep.errors.size(); ++p)
      r.C_A_hat = std::max(r.C_A_hat, rep.errors[p] / (std::pow(s, ell - static_cast<double>(p)) * r.holder_norm));
    r.C_B_hat = std::max(r.C_B_hat, rep.fourier_norm / r.holder_norm);
    fmin = std::min(fmin, rep.fourier_norm);
    fmax = std::max(fmax, rep.fourier_norm);
    e0.push_back(rep.errors[0]);
    if (rep.errors.size() > 1) e1.push_back(rep.errors[1]);
    r.reports.push_back(std::move(rep));
  }
  r.fourier_norm_spread = fmin > 0.0 ? fmax / fmin : std::numeric_limits<double>::infinity();
  if (widths.size() >= 2) {
    r.slope_p0 = core::fit_loglog(widths, e0).slope;
    if (e1.size() == widths.size()) r.slope_p1 = core::fit_loglog(widths, e1).slope;
  }
  for (auto& rep : r.reports) {
    rep.slope_p0 = r.slope_p0;
    rep.slope_p1 = r.slope_p1;
    rep.C_A_hat = r.C_A_hat;
    rep.C_B_hat = r.C_B_hat;
  }
  return r;
}

GridFunction holder_test_family(std::size_t n, double ell, int k_max, double R, std::size_t action_nodes,
                                const std::vector<std::size_t>& angle_nodes) {
  if (n == 0 || angle_nodes.size() != n) throw DomainError("holder_test_family: one angle size per dimension");
  if (k_max < 1 || !(R > 0.0)) throw DomainError("holder_test_family: need k_max ≥ 1 and R > 0");
  std::vector<Axis> axes;
  for (std::size_t j = 0; j < n; ++j) axes.push_back(Axis::interval(-2.0 * R, 2.0 * R, action_nodes));
  for (std::size_t j = 0; j < n; ++j) axes.push_back(Axis::angle(angle_nodes[j]));
  GridFunction g(axes);

  std::vector<double> amp(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (int k = 1; k <= k_max; ++k) amp[static_cast<std::size_t>(k)] = std::pow(k, -(ell + 1.0));
  std::vector<double> series(angle_nodes[0], 0.0);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double th = axes[n].coord(i);
    for (int k = k_max; k >= 1; --k) series[i] += amp[static_cast<std::size_t>(k)] * std::cos(k * th);
  }
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    const auto idx = g.multi_index(flat);
    double a = 1.0;
    for (std::size_t j = 0; j < n; ++j) a += 0.25 * std::pow(axes[j].coord(idx[j]), 2);
    double v = a * series[idx[n]];
    for (std::size_t j = 1; j < n; ++j) v += std::cos(axes[n + j].coord(idx[n + j]));
    g[flat] = v;
  }
  return g;
}

}  // namespace neklab::smoothing

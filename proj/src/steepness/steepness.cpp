#include "neklab/steepness/steepness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "neklab/core/fit.hpp"
#include "neklab/errors.hpp"

namespace neklab::steepness {

using core::json;
using core::Polynomial;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec from_std(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  // splitmix64 over the combined words.
  std::uint64_t x = seed;
  for (std::uint64_t w : {a, b, c}) {
    x += 0x9e3779b97f4a7c15ULL + w;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    x ^= x >> 31;
  }
  return x;
}

// Unit vectors in ℝᵐ spread over the sphere.
std::vector<Vec> sphere_points(std::size_t m, std::size_t samples) {
  std::vector<Vec> pts;
  const std::size_t K = std::max<std::size_t>(samples, 8);
  if (m == 1) {
    pts.push_back(Vec::Constant(1, 1.0));
    pts.push_back(Vec::Constant(1, -1.0));
  } else if (m == 2) {
    for (std::size_t i = 0; i < K; ++i) {
      const double t = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(K);
      Vec z(2);
      z << std::cos(t), std::sin(t);
      pts.push_back(z);
    }
  } else if (m == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < K; ++i) {
      const double y = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(K);
      const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
      const double t = golden * static_cast<double>(i);
      Vec z(3);
      z << r * std::cos(t), y, r * std::sin(t);
      pts.push_back(z);
    }
    // The poles are not on the Fibonacci lattice; add the coordinate directions.
    for (std::size_t j = 0; j < 3; ++j)
      for (double sgn : {1.0, -1.0}) pts.push_back(sgn * Vec::Unit(3, static_cast<Eigen::Index>(j)));
  } else {
    // Product grid in hyperspherical angles.
    const auto q = static_cast<std::size_t>(
        std::max(2.0, std::round(std::pow(static_cast<double>(K), 1.0 / static_cast<double>(m - 1)))));
    std::vector<std::size_t> idx(m - 1, 0);
    while (true) {
      Vec z(static_cast<Eigen::Index>(m));
      double s = 1.0;
      for (std::size_t a = 0; a + 1 < m; ++a) {
        const bool last = a + 2 == m;
        const double phi = last ? 2.0 * kPi * static_cast<double>(idx[a]) / static_cast<double>(q)
                                : kPi * (static_cast<double>(idx[a]) + 0.5) / static_cast<double>(q);
        z(static_cast<Eigen::Index>(a)) = s * std::cos(phi);
        s *= std::sin(phi);
      }
      z(static_cast<Eigen::Index>(m - 1)) = s;
      pts.push_back(z / z.norm());
      std::size_t a = m - 1;
      bool done = false;
      while (a-- > 0) {
        if (++idx[a] < q) break;
        idx[a] = 0;
        if (a == 0) done = true;
      }
      if (done) break;
    }
    for (std::size_t j = 0; j < m; ++j)
      for (double sgn : {1.0, -1.0}) pts.push_back(sgn * Vec::Unit(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)));
  }
  return pts;
}

// Orthonormal basis of the columns of A; DomainError on rank loss.
Mat orthonormalize(const Mat& A, double tol = 1e-10) {
  const Eigen::HouseholderQR<Mat> qr(A);
  const Mat R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, A.norm());
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    if (std::abs(R(j, j)) < tol * scale) throw DomainError("subspace frame is rank deficient");
  Mat Q = qr.householderQ() * Mat::Identity(A.rows(), A.cols());
  // Fix the sign so the frame does not depend on Householder conventions.
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

// Γ with the ω(I) component removed when it is not already orthogonal.
Mat orthogonal_to(const Mat& B, const Vec& w) {
  const double nw = w.norm();
  if (nw == 0.0) return B;
  const Vec u = w / nw;
  const Vec c = B.transpose() * u;
  if (c.norm() <= 1e-8) return B;
  return orthonormalize(B - u * c.transpose());
}

struct Objective {
  const FrequencyMap& map;
  const Vec& I;
  const Mat& B;
  double eta;

  Vec point(const Vec& z) const {
    Vec x = I + eta * (B * z);
    if (!map.contains(x)) throw DomainError("min_projection: I + u leaves the domain");
    return x;
  }
  double value(const Vec& z) const { return (B.transpose() * map.omega(point(z))).squaredNorm(); }
  Vec gradient(const Vec& z) const {
    const Vec x = point(z);
    const Vec p = B.transpose() * map.omega(x);
    return 2.0 * eta * B.transpose() * map.hessian(x).transpose() * (B * p);
  }
};

double refine(const Objective& obj, Vec z, double fz) {
  for (int it = 0; it < 80; ++it) {
    Vec g = obj.gradient(z);
    g -= g.dot(z) * z;
    const double gn = g.norm();
    if (gn < 1e-15) break;
    double t = 0.5 / gn;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      Vec trial = z - t * g;
      trial /= trial.norm();
      const double ft = obj.value(trial);
      if (ft <= fz - 1e-4 * t * gn * gn) {
        z = trial;
        fz = ft;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return fz;
}

std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t m) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> s(m);
  for (std::size_t i = 0; i < m; ++i) s[i] = i;
  while (true) {
    out.push_back(s);
    std::size_t i = m;
    while (i-- > 0) {
      if (s[i] < n - m + i) {
        ++s[i];
        for (std::size_t j = i + 1; j < m; ++j) s[j] = s[j - 1] + 1;
        break;
      }
      if (i == 0) return out;
    }
    if (m == 0) return out;
  }
}

std::vector<Vec> sample_points(const FrequencyMap& map, const EstimateOptions& opt, double margin) {
  if (!opt.points.empty()) return opt.points;
  const std::size_t n = map.dim();
  const double half = map.radius() - margin;
  if (!(half >= 0.0)) throw DomainError("steepness sampling: xi_max exceeds the domain radius");
  std::vector<Vec> pts;
  const std::size_t g = std::max<std::size_t>(opt.grid_nodes, 1);
  std::vector<std::size_t> idx(n, 0);
  while (g > 0) {
    Vec x = map.center();
    for (std::size_t j = 0; j < n; ++j)
      if (g > 1) x(static_cast<Eigen::Index>(j)) += -half + 2.0 * half * static_cast<double>(idx[j]) / static_cast<double>(g - 1);
    pts.push_back(x);
    std::size_t j = n;
    bool done = false;
    while (j-- > 0) {
      if (++idx[j] < g) break;
      idx[j] = 0;
      if (j == 0) done = true;
    }
    if (done) break;
  }
  std::mt19937_64 rng(mix_seed(opt.seed, 0x5eed));
  std::uniform_real_distribution<double> u(-half, half);
  for (std::size_t i = 0; i < opt.random_points; ++i) {
    Vec x = map.center();
    for (std::size_t j = 0; j < n; ++j) x(static_cast<Eigen::Index>(j)) += u(rng);
    pts.push_back(x);
  }
  return pts;
}

std::vector<SubspaceFrame> frames_at(const Vec& w, std::size_t m, const EstimateOptions& opt, std::size_t point) {
  std::vector<SubspaceFrame> out;
  for (std::size_t f = 0; f < opt.frames_per_multiplicity; ++f)
    out.push_back(random_frame(w, m, mix_seed(opt.seed, point, m, f)));
  if (opt.coordinate_frames) {
    const std::size_t n = static_cast<std::size_t>(w.size());
    const Vec u = w / w.norm();
    for (const auto& s : subsets(n, m)) {
      Mat A(n, m);
      for (std::size_t c = 0; c < m; ++c) {
        const Vec e = Vec::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s[c]));
        A.col(static_cast<Eigen::Index>(c)) = e - u * u.dot(e);
      }
      try {
        out.push_back(SubspaceFrame{orthonormalize(A, 1e-8)});
      } catch (const DomainError&) {
      }
    }
  }
  return out;
}

json frame_json(const SubspaceFrame& g) {
  json cols = json::array();
  for (Eigen::Index c = 0; c < g.basis.cols(); ++c) cols.push_back(to_std(g.basis.col(c)));
  return cols;
}

}  // namespace

FrequencyMap::FrequencyMap(std::size_t n, VecFn omega, MatFn hessian, Vec center, double radius)
    : n_(n), omega_(std::move(omega)), hessian_(std::move(hessian)), center_(std::move(center)), radius_(radius) {
  if (n == 0) throw DomainError("FrequencyMap: dimension must be positive");
  if (static_cast<std::size_t>(center_.size()) != n) throw DomainError("FrequencyMap: centre dimension mismatch");
  if (!(radius > 0.0)) throw DomainError("FrequencyMap: radius must be positive");
}

FrequencyMap FrequencyMap::from_polynomial(const Polynomial& h, Vec center, double radius) {
  const std::size_t n = h.nvars();
  std::vector<Polynomial> d1;
  std::vector<std::vector<Polynomial>> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d1.push_back(h.derivative(i));
    for (std::size_t j = 0; j < n; ++j) d2[i].push_back(d1[i].derivative(j));
  }
  auto omega = [n, d1](const Vec& I) {
    const std::vector<double> x = to_std(I);
    Vec w(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) w(static_cast<Eigen::Index>(i)) = d1[i].evaluate(x).real();
    return w;
  };
  auto hess = [n, d2](const Vec& I) {
    const std::vector<double> x = to_std(I);
    Mat H(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d2[i][j].evaluate(x).real();
    return H;
  };
  return FrequencyMap(n, omega, hess, std::move(center), radius);
}

bool FrequencyMap::contains(const Vec& I, double slack) const {
  return (I - center_).cwiseAbs().maxCoeff() <= radius_ * (1.0 + slack) + slack;
}

double FrequencyMap::hessian_bound() const {
  double M = 0.0;
  auto visit = [&](const Vec& x) {
    const Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (hessian(x) + hessian(x).transpose()));
    M = std::max(M, es.eigenvalues().cwiseAbs().maxCoeff());
  };
  if (n_ <= 4) {
    std::vector<int> idx(n_, 0);
    while (true) {
      Vec x = center_;
      for (std::size_t j = 0; j < n_; ++j) x(static_cast<Eigen::Index>(j)) += radius_ * (idx[j] - 2) / 2.0;
      visit(x);
      std::size_t j = n_;
      bool done = false;
      while (j-- > 0) {
        if (++idx[j] < 5) break;
        idx[j] = 0;
        if (j == 0) done = true;
      }
      if (done) break;
    }
  } else {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-radius_, radius_);
    for (int i = 0; i < 1000; ++i) {
      Vec x = center_;
      for (std::size_t j = 0; j < n_; ++j) x(static_cast<Eigen::Index>(j)) += u(rng);
      visit(x);
    }
  }
  return M;
}

double FrequencyMap::consistency_defect(std::size_t samples, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.9 * radius_, 0.9 * radius_);
  const double h = 1e-5 * std::max(1.0, radius_);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Vec x = center_;
    for (std::size_t j = 0; j < n_; ++j) x(static_cast<Eigen::Index>(j)) += u(rng);
    const Mat H = hessian(x);
    for (std::size_t j = 0; j < n_; ++j) {
      const Vec e = Vec::Unit(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(j));
      const Vec fd = (omega(x + h * e) - omega(x - h * e)) / (2.0 * h);
      worst = std::max(worst, (fd - H.col(static_cast<Eigen::Index>(j))).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

FrequencyMap FrequencyMap::rotated(const Mat& Q) const {
  if (static_cast<std::size_t>(Q.rows()) != n_ || Q.rows() != Q.cols())
    throw DomainError("FrequencyMap::rotated: dimension mismatch");
  if ((Q.transpose() * Q - Mat::Identity(Q.rows(), Q.cols())).norm() > 1e-10)
    throw DomainError("FrequencyMap::rotated: matrix is not orthogonal");
  auto w = omega_;
  auto H = hessian_;
  // The box domain is only rotation invariant for balls; keep the box but
  // rotate its centre.
  return FrequencyMap(
      n_, [w, Q](const Vec& I) { return Vec(Q * w(Q.transpose() * I)); },
      [H, Q](const Vec& I) { return Mat(Q * H(Q.transpose() * I) * Q.transpose()); }, Q * center_,
      radius_ * std::sqrt(static_cast<double>(n_)));
}

FrequencyMap FrequencyMap::scaled(double lambda) const {
  if (!(lambda > 0.0)) throw DomainError("FrequencyMap::scaled: lambda must be positive");
  auto w = omega_;
  auto H = hessian_;
  return FrequencyMap(
      n_, [w, lambda](const Vec& I) { return Vec(lambda * w(I)); },
      [H, lambda](const Vec& I) { return Mat(lambda * H(I)); }, center_, radius_);
}

void SubspaceFrame::validate(double tol) const {
  const auto m = basis.cols();
  if (m < 1 || m >= basis.rows()) throw DomainError("SubspaceFrame: need 1 <= m < n");
  if ((basis.transpose() * basis - Mat::Identity(m, m)).cwiseAbs().maxCoeff() > tol)
    throw DomainError("SubspaceFrame: basis is not orthonormal");
}

SubspaceFrame SubspaceFrame::span(const std::vector<Vec>& vectors) {
  if (vectors.empty()) throw DomainError("SubspaceFrame::span: no vectors");
  Mat A(vectors[0].size(), static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t c = 0; c < vectors.size(); ++c) A.col(static_cast<Eigen::Index>(c)) = vectors[c];
  SubspaceFrame f{orthonormalize(A)};
  f.validate(1e-12);
  return f;
}

SubspaceFrame random_frame(const Vec& w, std::size_t m, std::uint64_t seed) {
  const auto n = w.size();
  if (m < 1 || static_cast<Eigen::Index>(m) >= n) throw DomainError("random_frame: need 1 <= m < n");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const double nw = w.norm();
  while (true) {
    Mat A(n, static_cast<Eigen::Index>(m));
    for (Eigen::Index c = 0; c < A.cols(); ++c)
      for (Eigen::Index r = 0; r < n; ++r) A(r, c) = g(rng);
    if (nw > 0.0) {
      const Vec u = w / nw;
      A -= u * (u.transpose() * A);
    }
    try {
      return SubspaceFrame{orthonormalize(A, 1e-6)};
    } catch (const DomainError&) {
    }
  }
}

double min_projection(const FrequencyMap& map, const Vec& I, const SubspaceFrame& gamma, double eta,
                      std::size_t sphere_samples) {
  if (!(eta > 0.0)) throw DomainError("min_projection: eta must be positive");
  gamma.validate(1e-10);
  if (gamma.ambient() != map.dim()) throw DomainError("min_projection: frame dimension mismatch");
  if (!map.contains(I)) throw DomainError("min_projection: I outside the domain");
  const Mat B = orthogonal_to(gamma.basis, map.omega(I));
  const Objective obj{map, I, B, eta};
  const auto pts = sphere_points(gamma.dim(), sphere_samples);
  std::vector<std::pair<double, std::size_t>> vals;
  for (std::size_t i = 0; i < pts.size(); ++i) vals.emplace_back(obj.value(pts[i]), i);
  std::sort(vals.begin(), vals.end());
  double best = vals.front().first;
  if (gamma.dim() > 1) {
    for (std::size_t r = 0; r < std::min<std::size_t>(3, vals.size()); ++r)
      best = std::min(best, refine(obj, pts[vals[r].second], vals[r].first));
  }
  return std::sqrt(std::max(best, 0.0));
}

double steepness_margin(const FrequencyMap& map, const Vec& I, const SubspaceFrame& gamma, double xi,
                        std::size_t eta_samples, std::size_t sphere_samples) {
  if (!(xi > 0.0)) throw DomainError("steepness_margin: xi must be positive");
  if (eta_samples == 0) throw DomainError("steepness_margin: need at least one eta sample");
  double m = 0.0;
  for (std::size_t i = 1; i <= eta_samples; ++i)
    m = std::max(m, min_projection(map, I, gamma, xi * static_cast<double>(i) / static_cast<double>(eta_samples),
                                   sphere_samples));
  return m;
}

std::vector<double> margin_profile(const FrequencyMap& map, const Vec& I, const SubspaceFrame& gamma,
                                   const std::vector<double>& xis, std::size_t eta_samples,
                                   std::size_t sphere_samples) {
  if (eta_samples == 0) throw DomainError("margin_profile: need at least one eta sample");
  std::vector<double> etas;
  for (double xi : xis) {
    if (!(xi > 0.0)) throw DomainError("margin_profile: xi must be positive");
    for (std::size_t i = 1; i <= eta_samples; ++i)
      etas.push_back(xi * static_cast<double>(i) / static_cast<double>(eta_samples));
  }
  std::sort(etas.begin(), etas.end());
  etas.erase(std::unique(etas.begin(), etas.end()), etas.end());
  std::vector<double> running(etas.size());
  double m = 0.0;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    m = std::max(m, min_projection(map, I, gamma, etas[i], sphere_samples));
    running[i] = m;
  }
  std::vector<double> out;
  for (double xi : xis) {
    const auto it = std::upper_bound(etas.begin(), etas.end(), xi);
    out.push_back(running[static_cast<std::size_t>(it - etas.begin()) - 1]);
  }
  return out;
}

void SteepnessProfile::validate() const {
  if (alpha.empty() || alpha.size() != C.size()) throw DomainError("SteepnessProfile: alpha and C sizes differ");
  for (double a : alpha)
    if (!(a >= 1.0)) throw DomainError("SteepnessProfile: indices must be at least 1");
  for (double c : C)
    if (!(c > 0.0)) throw DomainError("SteepnessProfile: coefficients must be positive");
  if (!(delta > 0.0)) throw DomainError("SteepnessProfile: delta must be positive");
}

json SteepnessProfile::to_json() const {
  return json{{"alpha", alpha}, {"C", C},       {"delta", delta}, {"residuals", residuals},
              {"seed", seed},   {"budget", budget}, {"clamped", clamped}};
}

SteepnessProfile SteepnessProfile::from_json(const json& j) {
  SteepnessProfile p;
  p.alpha = j.at("alpha").get<std::vector<double>>();
  p.C = j.at("C").get<std::vector<double>>();
  p.delta = j.at("delta").get<double>();
  if (j.contains("residuals")) p.residuals = j.at("residuals").get<std::vector<double>>();
  if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("budget")) p.budget = j.at("budget");
  if (j.contains("clamped")) p.clamped = j.at("clamped").get<std::vector<bool>>();
  p.validate();
  return p;
}

json SteepnessViolation::to_json() const {
  return json{{"multiplicity", multiplicity}, {"I", to_std(I)},   {"gamma", frame_json(gamma)},
              {"eta", eta},                   {"margin", margin}};
}

std::vector<double> EstimateOptions::xi_grid() const {
  if (xi_points < 2) throw DomainError("xi grid needs at least two points");
  std::vector<double> xs;
  for (std::size_t i = 0; i < xi_points; ++i)
    xs.push_back(xi_max * std::pow(10.0, -xi_decades * static_cast<double>(xi_points - 1 - i) /
                                             static_cast<double>(xi_points - 1)));
  return xs;
}

json EstimateOptions::budget() const {
  return json{{"grid_nodes", grid_nodes},
              {"random_points", random_points},
              {"explicit_points", points.size()},
              {"frames_per_multiplicity", frames_per_multiplicity},
              {"coordinate_frames", coordinate_frames},
              {"xi_max", xi_max},
              {"xi_points", xi_points},
              {"xi_decades", xi_decades},
              {"eta_samples", eta_samples},
              {"sphere_samples", sphere_samples}};
}

json EstimateResult::to_json() const {
  json j;
  j["profile"] = profile ? profile->to_json() : json(nullptr);
  j["violation"] = violation ? violation->to_json() : json(nullptr);
  json w = json::array();
  for (const auto& c : worst)
    w.push_back(json{{"multiplicity", c.multiplicity},
                     {"I", to_std(c.I)},
                     {"gamma", frame_json(c.gamma)},
                     {"xi", c.xis},
                     {"margin", c.margins}});
  j["worst"] = w;
  json ex = json::array();
  for (const auto& p : excluded_points) ex.push_back(to_std(p));
  j["excluded_points"] = ex;
  j["warnings"] = warnings;
  j["points_used"] = points_used;
  return j;
}

json VerifyReport::to_json() const {
  return json{{"pass", pass},
              {"min_ratio", min_ratio},
              {"min_frequency", min_frequency},
              {"checks", checks},
              {"worst", worst ? worst->to_json() : json(nullptr)}};
}

EstimateResult estimate_indices(const FrequencyMap& map, const EstimateOptions& opt) {
  const std::size_t n = map.dim();
  if (n < 2) throw DomainError("estimate_indices: need n >= 2");
  if (opt.xi_points < 8 || opt.xi_decades < 2.0)
    throw DomainError("estimate_indices: need at least 8 xi values spanning 2 decades");
  if (opt.frames_per_multiplicity < 16) throw DomainError("estimate_indices: need at least 16 frames per multiplicity");
  const std::vector<double> xis = opt.xi_grid();
  const double xi_min = xis.front(), xi_max = xis.back();

  EstimateResult res;
  struct Candidate {
    double margin = std::numeric_limits<double>::infinity();
    Vec I;
    SubspaceFrame gamma;
  };
  std::vector<Candidate> worst(n - 1);
  const auto points = sample_points(map, opt, xi_max);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Vec& I = points[p];
    const Vec w = map.omega(I);
    if (w.norm() < opt.omega_floor) {
      res.excluded_points.push_back(I);
      continue;
    }
    ++res.points_used;
    for (std::size_t m = 1; m < n; ++m) {
      for (const SubspaceFrame& g : frames_at(w, m, opt, p)) {
        const double top = steepness_margin(map, I, g, xi_max, opt.eta_samples, opt.sphere_samples);
        if (top < opt.violation_threshold) {
          res.violation = SteepnessViolation{m, I, g, xi_max, top};
          res.warnings.push_back("steepness violated: margin below threshold at xi_max");
          return res;
        }
        const double low = steepness_margin(map, I, g, xi_min, opt.eta_samples, opt.sphere_samples);
        if (low < worst[m - 1].margin) worst[m - 1] = Candidate{low, I, g};
      }
    }
  }
  if (res.points_used == 0) throw DomainError("estimate_indices: every sampled point has a vanishing frequency");

  SteepnessProfile prof;
  prof.delta = xi_max;
  prof.seed = opt.seed;
  prof.budget = opt.budget();
  for (std::size_t m = 1; m < n; ++m) {
    const Candidate& c = worst[m - 1];
    WorstCase wc{m, c.I, c.gamma, xis, margin_profile(map, c.I, c.gamma, xis, opt.eta_samples, opt.sphere_samples)};
    const core::LogFit fit = core::fit_loglog(xis, wc.margins);
    double a = fit.slope;
    const bool clamp = a < 1.0;
    if (clamp) {
      res.warnings.push_back("index for m = " + std::to_string(m) + " clamped from " + std::to_string(a) + " to 1");
      a = 1.0;
    }
    prof.alpha.push_back(a);
    prof.C.push_back(std::exp(fit.intercept));
    prof.residuals.push_back(fit.rms_residual);
    prof.clamped.push_back(clamp);
    res.worst.push_back(std::move(wc));
  }
  res.profile = std::move(prof);
  return res;
}

VerifyReport verify_steepness(const FrequencyMap& map, const SteepnessProfile& profile, const EstimateOptions& budget) {
  profile.validate();
  const std::size_t n = map.dim();
  if (profile.alpha.size() != n - 1) throw DomainError("verify_steepness: profile needs n - 1 indices");
  std::vector<double> xis;
  for (int j = 7; j >= 0; --j) xis.push_back(profile.delta * std::ldexp(1.0, -j));
  VerifyReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.min_frequency = std::numeric_limits<double>::infinity();
  const auto points = sample_points(map, budget, profile.delta);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Vec& I = points[p];
    const Vec w = map.omega(I);
    rep.min_frequency = std::min(rep.min_frequency, w.norm());
    if (w.norm() == 0.0) continue;
    for (std::size_t m = 1; m < n; ++m) {
      for (const SubspaceFrame& g : frames_at(w, m, budget, p)) {
        const auto margins = margin_profile(map, I, g, xis, budget.eta_samples, budget.sphere_samples);
        for (std::size_t i = 0; i < xis.size(); ++i) {
          ++rep.checks;
          const double ratio = margins[i] / (profile.C[m - 1] * std::pow(xis[i], profile.alpha[m - 1]));
          if (ratio < rep.min_ratio) {
            rep.min_ratio = ratio;
            rep.worst = SteepnessViolation{m, I, g, xis[i], margins[i]};
          }
        }
      }
    }
  }
  rep.pass = rep.min_frequency > budget.omega_floor && rep.min_ratio > 1.0;
  return rep;
}

std::vector<std::string> benchmark_names() { return {"convex3", "superconductivity", "quartic-steep"}; }

Polynomial benchmark_hamiltonian(const std::string& name) {
  auto x = [](std::size_t n, std::size_t j) { return Polynomial::variable(n, j); };
  if (name == "convex3") return (x(3, 0).pow(2) + x(3, 1).pow(2) + x(3, 2).pow(2)) * core::cplx(0.5);
  if (name == "superconductivity") return (x(2, 0).pow(2) - x(2, 1).pow(2)) * core::cplx(0.5);
  if (name == "quartic-steep")
    return x(3, 0).pow(2) * core::cplx(0.5) + x(3, 1).pow(4) * core::cplx(0.25) + x(3, 2).pow(2) * core::cplx(0.5);
  throw DomainError("unknown steepness benchmark '" + name + "'");
}

FrequencyMap benchmark(const std::string& name) {
  const Polynomial h = benchmark_hamiltonian(name);
  if (name == "convex3") return FrequencyMap::from_polynomial(h, from_std({1.0, 1.0, 1.0}), 0.5);
  if (name == "superconductivity") return FrequencyMap::from_polynomial(h, from_std({1.0, -1.0}), 0.5);
  return FrequencyMap::from_polynomial(h, from_std({1.0, 0.0, 0.0}), 0.5);
}

}  // namespace neklab::steepness

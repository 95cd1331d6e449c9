#include "neklab/geography/geography.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <ostream>
#include <random>

#include "neklab/errors.hpp"

namespace neklab::geography {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Mat basis_matrix(const Lattice& L) {
  Mat B(static_cast<Eigen::Index>(L.rank()), static_cast<Eigen::Index>(L.dim()));
  for (std::size_t i = 0; i < L.rank(); ++i)
    for (std::size_t k = 0; k < L.dim(); ++k)
      B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = static_cast<double>(L.basis()[i][k]);
  return B;
}

double dot_k(const IntVec& k, const Vec& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) s += static_cast<double>(k[i]) * w(static_cast<Eigen::Index>(i));
  return s;
}

}  // namespace

// ---------------------------------------------------------------- parameters

GeographyParams geography_params(std::size_t n, const std::vector<double>& alpha, double ell) {
  if (n < 3) throw DomainError("geography_params: needs n ≥ 3");
  if (alpha.size() != n - 1) throw DomainError("geography_params: expects n−1 steepness indices");
  for (double a : alpha)
    if (!(a >= 1.0)) throw DomainError("geography_params: steepness indices must be ≥ 1");
  if (!(ell >= static_cast<double>(n + 1))) throw DomainError("geography_params: needs ℓ ≥ n+1");
  GeographyParams g;
  g.n = n;
  g.alpha = alpha;
  g.ell = ell;
  g.p.assign(n, 1.0);
  for (std::size_t j = 1; j + 2 <= n; ++j) {
    double prod = 1.0;
    for (std::size_t i = j; i + 2 <= n; ++i) prod *= alpha[i - 1];
    g.p[j - 1] = prod;
  }
  g.q.resize(n);
  for (std::size_t j = 1; j <= n; ++j) g.q[j - 1] = static_cast<double>(n) * g.p[j - 1] - static_cast<double>(j);
  g.c.resize(n - 1);
  for (std::size_t j = 1; j < n; ++j) g.c[j - 1] = g.q[j - 1] - g.q[j];
  g.a = 1.0 / (2.0 * static_cast<double>(n) * g.p[0]);
  g.b = g.a / alpha[n - 2];
  g.a_thm = g.a * (ell - 1.0) + 0.5;
  g.b_thm = g.b;
  return g;
}

core::json GeographyParams::to_json() const {
  core::json j;
  j["n"] = n;
  j["alpha"] = alpha;
  j["ell"] = ell;
  j["p"] = p;
  j["q"] = q;
  j["c"] = c;
  j["a"] = a;
  j["b"] = b;
  j["a_thm"] = a_thm;
  j["b_thm"] = b_thm;
  return j;
}

double Prefactors::delta_for_rank(std::size_t j) const {
  if (c_delta.empty()) throw DomainError("Prefactors: c_delta is empty");
  if (j == 0) return std::numeric_limits<double>::infinity();
  return c_delta[std::min(j, c_delta.size()) - 1];
}

core::json Prefactors::to_json() const {
  return core::json{{"c_s", c_s},         {"c_r", c_r},   {"c_R", c_R},   {"c_delta", c_delta},
                    {"c_alpha", c_alpha}, {"c_rj", c_rj}, {"c_T", c_T},   {"c_TL", c_TL}};
}

Prefactors Prefactors::from_json(const core::json& j) {
  Prefactors p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "c_s") p.c_s = it->get<double>();
    else if (k == "c_r") p.c_r = it->get<double>();
    else if (k == "c_R") p.c_R = it->get<double>();
    else if (k == "c_delta") p.c_delta = it->is_array() ? it->get<std::vector<double>>() : std::vector<double>{it->get<double>()};
    else if (k == "c_alpha") p.c_alpha = it->get<double>();
    else if (k == "c_rj") p.c_rj = it->get<double>();
    else if (k == "c_T") p.c_T = it->get<double>();
    else if (k == "c_TL") p.c_TL = it->get<double>();
    else throw DomainError("Prefactors: unknown key '" + k + "'");
  }
  if (p.c_delta.empty()) throw DomainError("Prefactors: c_delta is empty");
  return p;
}

// ------------------------------------------------------------------ schedule

Schedule make_schedule(double eps, double eps0, const GeographyParams& params, double M, const Prefactors& pre) {
  if (!(eps > 0.0) || !(eps0 > 0.0)) throw DomainError("schedule: ε and ε₀ must be positive");
  if (!(eps < eps0)) throw DomainError("schedule: needs ε < ε₀");
  if (!(M > 0.0)) throw DomainError("schedule: M must be positive");
  for (double c : {pre.c_s, pre.c_r, pre.c_R, pre.c_alpha, pre.c_rj, pre.c_T, pre.c_TL})
    if (!(c > 0.0)) throw DomainError("schedule: prefactors must be positive");
  for (double c : pre.c_delta)
    if (!(c > 0.0)) throw DomainError("schedule: prefactors must be positive");
  Schedule s;
  s.params = params;
  s.prefactors = pre;
  s.eps = eps;
  s.eps0 = eps0;
  s.M = M;
  const double x = eps / eps0;
  const double a = params.a;
  s.K = std::pow(1.0 / x, a);
  s.s = std::min(1.0, pre.c_s * std::pow(x, a) * std::abs(6.0 * (1.0 + a * params.ell) * std::log(x)));
  s.r = pre.c_r * std::sqrt(x);
  s.R = pre.c_R * std::pow(x, params.b);
  s.rho = s.R / (2.0 * static_cast<double>(params.n));
  if (s.K < 1.05) s.warnings.push_back("ε is close to ε₀: K ≈ 1 and the angle width degenerates");
  if (s.r > s.s) {
    s.warnings.push_back("action width exceeded the angle width and was clamped to it");
    s.r = s.s;
  }
  return s;
}

double Schedule::delta(std::size_t j, double covolume) const {
  if (j == 0) return std::numeric_limits<double>::infinity();
  return prefactors.delta_for_rank(j) / (covolume * std::pow(K, params.q_at(j)));
}

double Schedule::alpha_lambda(const Lattice& L) const {
  const std::size_t j = L.rank();
  // q_j − c_j = q_{j+1}.
  return prefactors.c_alpha / (L.covolume() * std::pow(K, params.q_at(j + 1)));
}

double Schedule::r_j(std::size_t j) const {
  if (j == 0 || j >= params.n) throw DomainError("r_j: needs 1 ≤ j ≤ n−1");
  return prefactors.c_rj * std::pow(K, -params.q_at(j) / params.alpha_at(j));
}

double Schedule::T0() const {
  const double x = eps / eps0;
  const double a = params.a, l = params.ell;
  return prefactors.c_T /
         (std::pow(std::abs((1.0 + a * l) * std::log(x)), l - 1.0) * std::pow(x, a * (l - 1.0) + 0.5));
}

double Schedule::T_lambda(const Lattice& L) const {
  if (L.rank() == 0) return T0();
  const double x = eps / eps0;
  const double a = params.a, l = params.ell;
  return prefactors.c_TL * r_lambda(L) /
         (std::pow(std::abs(6.0 * (1.0 + a * l) * std::log(x)), l - 1.0) * std::pow(x, 1.0 + a * (l - 1.0)));
}

core::json Schedule::to_json() const {
  core::json j;
  j["eps"] = eps;
  j["eps0"] = eps0;
  j["M"] = M;
  j["K"] = K;
  j["s"] = s;
  j["r"] = r;
  j["R"] = R;
  j["rho"] = rho;
  j["T0"] = T0();
  std::vector<double> deltas, rjs;
  for (std::size_t r = 1; r < params.n; ++r) {
    deltas.push_back(delta(r, 1.0));
    rjs.push_back(r_j(r));
  }
  j["delta_unit_covolume"] = deltas;
  j["r_j"] = rjs;
  j["prefactors"] = prefactors.to_json();
  j["warnings"] = warnings;
  return j;
}

core::json BlockId::to_json() const {
  core::json j;
  j["multiplicity"] = multiplicity;
  j["lattice_id"] = lattice_id;
  j["lattice"] = lattice ? core::json(lattice->basis()) : core::json(nullptr);
  return j;
}

// ------------------------------------------------------- direct membership

bool zone_membership(const Vec& I, const Lattice& L, const Schedule& sched, const FrequencyMap& omega) {
  if (L.rank() == 0) return true;
  const Vec w = omega.omega(I);
  const double d = sched.delta(L);
  for (const IntVec& k : L.short_vectors(sched.K))
    if (!(std::abs(dot_k(k, w)) < d)) return false;
  return true;
}

bool block_membership(const Vec& I, const Lattice& L, const Schedule& sched, const FrequencyMap& omega) {
  if (!zone_membership(I, L, sched, omega)) return false;
  const std::size_t n = L.dim();
  if (L.rank() + 1 >= n) return true;
  for (const Lattice& up : enumerate_lattices(n, sched.K, L.rank() + 1))
    if (zone_membership(I, up, sched, omega)) return false;
  return true;
}

// ------------------------------------------------------------------ reports

core::json CoverageReport::to_json() const {
  core::json j;
  j["samples"] = samples;
  j["covered"] = covered;
  j["coverage"] = coverage;
  j["histogram"] = histogram;
  j["mismatches"] = core::json::array();
  for (const auto& v : mismatches) j["mismatches"].push_back(to_std(v));
  j["failures"] = core::json::array();
  for (const auto& v : failures) j["failures"].push_back(to_std(v));
  return j;
}

core::json DisjointnessReport::to_json() const {
  core::json j;
  j["samples"] = samples;
  j["attempts"] = attempts;
  j["lattices_sampled"] = lattices_sampled;
  j["violation_count"] = violation_count;
  j["small_divisor_count"] = small_divisor_count;
  j["alpha_constant"] = alpha_constant;
  j["rj_constant"] = rj_constant;
  j["calibration_flag"] = calibration_flag;
  j["violations"] = core::json::array();
  for (const auto& v : violations)
    j["violations"].push_back({{"I", to_std(v.I)}, {"lattice", v.lattice}, {"other", v.other}});
  j["small_divisor_violations"] = core::json::array();
  for (const auto& v : small_divisor_violations)
    j["small_divisor_violations"].push_back(
        {{"I", to_std(v.I)}, {"lattice", v.lattice}, {"k", v.k}, {"divisor", v.divisor}, {"bound", v.bound}});
  return j;
}

// --------------------------------------------------------------- Geography

Geography::Geography(Schedule sched, FrequencyMap omega, Vec I0, std::size_t lattice_budget)
    : n_(omega.dim()), sched_(std::move(sched)), omega_(std::move(omega)), I0_(std::move(I0)) {
  if (sched_.params.n != n_) throw DomainError("Geography: schedule and frequency map dimensions differ");
  if (static_cast<std::size_t>(I0_.size()) != n_) throw DomainError("Geography: centre has the wrong dimension");
  for (std::size_t j = 0; j < n_; ++j) {
    auto level = enumerate_lattices(n_, sched_.K, j, lattice_budget);
    lattices_.insert(lattices_.end(), level.begin(), level.end());
  }
  kvecs_ = short_integer_vectors(n_, sched_.K);
  kmat_.resize(static_cast<Eigen::Index>(kvecs_.size()), static_cast<Eigen::Index>(n_));
  for (std::size_t m = 0; m < kvecs_.size(); ++m)
    for (std::size_t i = 0; i < n_; ++i)
      kmat_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) = static_cast<double>(kvecs_[m][i]);
  members_.resize(lattices_.size());
  index_.resize(kvecs_.size());
  delta_.resize(lattices_.size());
  max_delta_of_rank_.assign(n_, 0.0);
  for (std::size_t id = 0; id < lattices_.size(); ++id) {
    const Lattice& L = lattices_[id];
    delta_[id] = sched_.delta(L);
    if (L.rank() == 0) continue;
    max_delta_of_rank_[L.rank()] = std::max(max_delta_of_rank_[L.rank()], delta_[id]);
    for (std::size_t m = 0; m < kvecs_.size(); ++m)
      if (L.contains(kvecs_[m])) {
        members_[id].push_back(m);
        index_[m].push_back(id);
      }
    if (members_[id].empty()) throw ConsistencyError("Geography: lattice without short vectors");
  }
}

std::vector<std::size_t> Geography::lattices_of_rank(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t id = 0; id < lattices_.size(); ++id)
    if (lattices_[id].rank() == j) out.push_back(id);
  return out;
}

std::size_t Geography::find(const Lattice& L) const {
  const auto it = std::lower_bound(lattices_.begin(), lattices_.end(), L);
  if (it == lattices_.end() || !(*it == L)) throw DomainError("Geography: lattice not enumerated at this K");
  return static_cast<std::size_t>(it - lattices_.begin());
}

bool Geography::in_ball(const Vec& I, double shrink) const { return (I - I0_).norm() <= sched_.R - shrink; }

Vec Geography::divisors(const Vec& I) const { return (kmat_ * omega_.omega(I)).cwiseAbs(); }

bool Geography::zone_from(const Vec& div, std::size_t id) const {
  const double d = delta_[id];
  for (std::size_t m : members_[id])
    if (!(div(static_cast<Eigen::Index>(m)) < d)) return false;
  return true;
}

std::vector<std::size_t> Geography::zones_from(const Vec& div, std::size_t j) const {
  std::vector<std::size_t> out;
  if (j == 0) {
    out.push_back(0);
    return out;
  }
  if (j >= n_) return out;
  // A lattice can only contain I if each of its short vectors is a small
  // divisor, so count hits among the candidates first.
  std::map<std::size_t, std::size_t> hits;
  const double dmax = max_delta_of_rank_[j];
  for (std::size_t m = 0; m < kvecs_.size(); ++m) {
    if (!(div(static_cast<Eigen::Index>(m)) < dmax)) continue;
    for (std::size_t id : index_[m])
      if (lattices_[id].rank() == j) ++hits[id];
  }
  for (const auto& [id, h] : hits)
    if (h == members_[id].size() && zone_from(div, id)) out.push_back(id);
  return out;
}

bool Geography::in_zone(const Vec& I, std::size_t id) const {
  if (lattices_.at(id).rank() == 0) return true;
  return zone_from(divisors(I), id);
}

bool Geography::in_block(const Vec& I, std::size_t id) const {
  const Vec div = divisors(I);
  const std::size_t j = lattices_.at(id).rank();
  if (j > 0 && !zone_from(div, id)) return false;
  return zones_from(div, j + 1).empty();
}

std::vector<std::size_t> Geography::zones_containing(const Vec& I, std::size_t j) const {
  return zones_from(divisors(I), j);
}

BlockId Geography::classify(const Vec& I) const {
  if (static_cast<std::size_t>(I.size()) != n_) throw DomainError("classify: wrong dimension");
  if (!in_ball(I)) throw DomainError("classify: point outside the ball");
  const Vec div = divisors(I);
  std::vector<std::size_t> here = zones_from(div, 0);
  for (std::size_t j = 0; j < n_; ++j) {
    if (here.empty()) {
      here = zones_from(div, j + 1);
      continue;
    }
    std::vector<std::size_t> above = zones_from(div, j + 1);
    if (above.empty()) {
      BlockId b;
      b.multiplicity = j;
      b.lattice_id = here.front();
      if (j > 0) b.lattice = lattices_[here.front()];
      return b;
    }
    here = std::move(above);
  }
  throw ConsistencyError("classify: no block contains the point");
}

BlockId Geography::classify_direct(const Vec& I) const {
  const Vec w = omega_.omega(I);
  std::vector<std::vector<std::size_t>> zones(n_ + 1);
  zones[0].push_back(0);
  for (std::size_t id = 1; id < lattices_.size(); ++id) {
    const Lattice& L = lattices_[id];
    bool in = true;
    for (std::size_t m : members_[id])
      if (!(std::abs(dot_k(kvecs_[m], w)) < delta_[id])) {
        in = false;
        break;
      }
    if (in) zones[L.rank()].push_back(id);
  }
  for (std::size_t j = 0; j < n_; ++j)
    if (!zones[j].empty() && zones[j + 1].empty()) {
      BlockId b;
      b.multiplicity = j;
      b.lattice_id = zones[j].front();
      if (j > 0) b.lattice = lattices_[b.lattice_id];
      return b;
    }
  throw ConsistencyError("classify: no block contains the point");
}

ExtendedResult Geography::extended_block(const Vec& I, std::size_t id, double resolution, std::size_t node_budget,
                                         bool exhaust) const {
  const Lattice& L = lattices_.at(id);
  const std::size_t j = L.rank();
  const double rho = sched_.rho;
  ExtendedResult res;
  const double rL = j == 0 ? 0.0 : sched_.r_lambda(L);
  res.resolution = resolution > 0.0 ? resolution : rL / (8.0 * sched_.K);
  if (!(res.resolution > 0.0) && j > 0) throw DomainError("extended_block: resolution must be positive");
  auto admissible = [&](const Vec& P) { return in_ball(P, rho) && in_zone(P, id); };
  if (!admissible(I)) return res;
  if (j == 0) {
    res.member = in_block(I, id);
    res.nodes = 1;
    return res;
  }
  Eigen::HouseholderQR<Mat> qr(basis_matrix(L).transpose());
  const Mat Q = qr.householderQ();
  const Mat E = Q.leftCols(static_cast<Eigen::Index>(j));
  const Mat N = Q.rightCols(static_cast<Eigen::Index>(n_ - j));
  const double h = res.resolution;

  auto reaches_block = [&](const Vec& P) {
    if (in_block(P, id)) return true;
    // The disc is thickened by r_Λ across the plane.
    for (Eigen::Index c = 0; c < N.cols(); ++c)
      for (double t : {0.5 * rL, 0.95 * rL})
        for (double sgn : {-1.0, 1.0}) {
          const Vec Qp = P + sgn * t * N.col(c);
          if (admissible(Qp) && admissible(Vec(P + 0.5 * sgn * t * N.col(c))) && in_block(Qp, id)) return true;
        }
    return false;
  };

  using Key = std::vector<long>;
  std::map<Key, char> seen;
  std::deque<Key> queue;
  const Key origin(j, 0);
  seen[origin] = 1;
  queue.push_back(origin);
  while (!queue.empty()) {
    const Key key = queue.front();
    queue.pop_front();
    Vec P = I;
    for (std::size_t i = 0; i < j; ++i)
      P += h * static_cast<double>(key[i]) * E.col(static_cast<Eigen::Index>(i));
    ++res.nodes;
    if (res.nodes > node_budget)
      throw BudgetError("extended_block: flood-fill node budget exceeded", static_cast<long long>(res.nodes));
    res.reach = std::max(res.reach, (P - I).norm());
    if (!res.member && reaches_block(P)) {
      res.member = true;
      if (!exhaust) return res;
    }
    for (std::size_t i = 0; i < j; ++i)
      for (long step : {-1L, 1L}) {
        Key nk = key;
        nk[i] += step;
        if (seen.count(nk)) continue;
        seen[nk] = 1;
        Vec Pn = P + h * static_cast<double>(step) * E.col(static_cast<Eigen::Index>(i));
        if (admissible(Pn)) queue.push_back(std::move(nk));
      }
  }
  return res;
}

Vec Geography::random_ball_point(std::uint64_t& state, double radius) const {
  std::mt19937_64 rng(state);
  state = mix_seed(state, 0xba11);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec d(static_cast<Eigen::Index>(n_));
  do {
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = g(rng);
  } while (d.norm() == 0.0);
  const double r = radius * std::pow(u(rng), 1.0 / static_cast<double>(n_));
  return I0_ + r * d / d.norm();
}

std::optional<Vec> Geography::sample_zone(std::size_t id, std::uint64_t seed, std::size_t tries) const {
  const Lattice& L = lattices_.at(id);
  const double rho = sched_.rho;
  std::uint64_t state = mix_seed(seed, id, 0x20e);
  if (L.rank() == 0) return random_ball_point(state, sched_.R - rho);
  const Mat B = basis_matrix(L);
  const double d = delta_[id];
  std::mt19937_64 rng(mix_seed(seed, id, 0x0ff5e7));
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t t = 0; t < tries; ++t) {
    Vec X = random_ball_point(state, sched_.R - rho);
    bool converged = false;
    for (int it = 0; it < 30; ++it) {
      const Vec G = B * omega_.omega(X);
      if (G.norm() < 1e-13) {
        converged = true;
        break;
      }
      const Mat J = B * omega_.hessian(X);
      const Mat JJt = J * J.transpose();
      const Eigen::LDLT<Mat> ldlt(JJt);
      if (ldlt.info() != Eigen::Success) break;
      X -= J.transpose() * ldlt.solve(G);
      if (!X.allFinite()) break;
    }
    if (!converged || !in_ball(X, rho)) continue;
    Vec v(static_cast<Eigen::Index>(n_));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng);
    const double amp = u(rng) < 0.25 ? 0.0 : (d / sched_.M) * std::pow(10.0, -3.0 * u(rng));
    const Vec Y = X + amp * v / v.norm();
    if (in_ball(Y, rho) && in_zone(Y, id)) return Y;
    if (in_zone(X, id)) return X;
  }
  return std::nullopt;
}

DisjointnessReport Geography::disjointness_check(std::size_t a, std::size_t b, std::size_t samples,
                                                 std::uint64_t seed) const {
  if (a == b) throw DomainError("disjointness_check: the lattices must differ");
  if (lattices_.at(a).rank() != lattices_.at(b).rank())
    throw DomainError("disjointness_check: the lattices must have the same rank");
  if (lattices_[a].rank() == 0) throw DomainError("disjointness_check: rank must be positive");
  DisjointnessReport rep;
  rep.alpha_constant = std::numeric_limits<double>::infinity();
  sample_extended(a, seed, samples, rep, {b});
  if (!std::isfinite(rep.alpha_constant)) rep.alpha_constant = 0.0;
  rep.lattices_sampled = rep.samples > 0 ? 1 : 0;
  rep.calibration_flag = rep.violation_count > 0;
  return rep;
}

void Geography::sample_extended(std::size_t id, std::uint64_t seed, std::size_t samples, DisjointnessReport& rep,
                                const std::vector<std::size_t>& others) const {
  const Lattice& L = lattices_[id];
  const std::size_t j = L.rank();
  const double bound = sched_.alpha_lambda(L);
  const double scale = L.covolume() * std::pow(sched_.K, sched_.params.q_at(j + 1));
  const double rj_scale = std::pow(sched_.K, sched_.params.q_at(j) / sched_.params.alpha_at(j));
  std::vector<char> in_lattice(kvecs_.size(), 0);
  for (std::size_t m : members_[id]) in_lattice[m] = 1;
  const std::size_t max_attempts = 8 * samples + 8;
  std::size_t taken = 0;
  for (std::size_t t = 0; t < max_attempts && taken < samples; ++t) {
    ++rep.attempts;
    const auto J = sample_zone(id, mix_seed(seed, id, t), 4);
    if (!J) continue;
    const ExtendedResult ext = extended_block(*J, id, 0.0, 200'000, true);
    if (!ext.member) continue;
    ++taken;
    ++rep.samples;
    rep.rj_constant = std::max(rep.rj_constant, ext.reach * rj_scale);
    const Vec div = divisors(*J);
    for (std::size_t o : others) {
      if (!zone_from(div, o)) continue;
      ++rep.violation_count;
      if (rep.violations.size() < kMaxWitnesses) rep.violations.push_back({*J, id, o});
    }
    for (std::size_t m = 0; m < kvecs_.size(); ++m) {
      if (in_lattice[m]) continue;
      const double dv = div(static_cast<Eigen::Index>(m));
      rep.alpha_constant = std::min(rep.alpha_constant, dv * scale);
      if (dv < bound) {
        ++rep.small_divisor_count;
        if (rep.small_divisor_violations.size() < kMaxWitnesses)
          rep.small_divisor_violations.push_back({*J, id, kvecs_[m], dv, bound});
      }
    }
  }
}

DisjointnessReport Geography::disjointness_all(std::size_t samples, std::uint64_t seed) const {
  DisjointnessReport rep;
  rep.alpha_constant = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < n_; ++j) {
    const auto ids = lattices_of_rank(j);
    std::vector<std::size_t> live;
    for (std::size_t id : ids)
      if (sample_zone(id, mix_seed(seed, id, 0x11fe))) live.push_back(id);
    rep.lattices_sampled += live.size();
    if (live.empty()) continue;
    const std::size_t per_rank = samples / (n_ - 1);
    for (std::size_t i = 0; i < live.size(); ++i) {
      const std::size_t quota = per_rank / live.size() + (i < per_rank % live.size() ? 1 : 0);
      if (quota == 0) continue;
      std::vector<std::size_t> others;
      for (std::size_t o : ids)
        if (o != live[i]) others.push_back(o);
      sample_extended(live[i], mix_seed(seed, j, i), quota, rep, others);
    }
  }
  if (!std::isfinite(rep.alpha_constant)) rep.alpha_constant = 0.0;
  rep.calibration_flag = rep.violation_count > 0;
  return rep;
}

CoverageReport Geography::covering_check(std::size_t samples, std::uint64_t seed) const {
  CoverageReport rep;
  rep.samples = samples;
  rep.histogram.assign(n_, 0);
  std::uint64_t state = mix_seed(seed, 0xc07e);
  for (std::size_t t = 0; t < samples; ++t) {
    const Vec I = random_ball_point(state, sched_.R);
    try {
      const BlockId b = classify(I);
      const BlockId d = classify_direct(I);
      if (b.multiplicity != d.multiplicity || b.lattice_id != d.lattice_id) rep.mismatches.push_back(I);
      ++rep.covered;
      ++rep.histogram[b.multiplicity];
    } catch (const ConsistencyError&) {
      rep.failures.push_back(I);
    }
  }
  rep.coverage = samples == 0 ? 1.0 : static_cast<double>(rep.covered) / static_cast<double>(samples);
  return rep;
}

void Geography::write_samples_csv(std::ostream& os, std::size_t samples, std::uint64_t seed) const {
  for (std::size_t i = 1; i <= n_; ++i) os << 'I' << i << ',';
  os << "multiplicity,lattice_id\n";
  std::uint64_t state = mix_seed(seed, 0xc5f);
  for (std::size_t t = 0; t < samples; ++t) {
    const Vec I = random_ball_point(state, sched_.R);
    const BlockId b = classify(I);
    for (Eigen::Index i = 0; i < I.size(); ++i) os << core::format_double(I(i)) << ',';
    os << b.multiplicity << ',' << b.lattice_id << '\n';
  }
}

// -------------------------------------------------------------- calibration

core::json CalibrationResult::to_json() const {
  return core::json{{"prefactors", prefactors.to_json()}, {"lambda", lambda}, {"iterations", iterations}};
}

CalibrationResult calibrate_prefactors(const GeographyParams& params, const FrequencyMap& omega, const Vec& I0,
                                       double eps0, const std::vector<double>& eps_values, const Prefactors& base,
                                       const std::vector<double>& weights, std::size_t samples, std::uint64_t seed,
                                       double lo, double hi, std::size_t iterations, double safety) {
  if (eps_values.empty() || weights.empty()) throw DomainError("calibrate_prefactors: nothing to calibrate");
  if (!(lo > 0.0 && hi > lo)) throw DomainError("calibrate_prefactors: needs 0 < lo < hi");
  const double M = omega.hessian_bound();
  auto with = [&](double lambda) {
    Prefactors p = base;
    p.c_delta.clear();
    for (double w : weights) p.c_delta.push_back(lambda * w);
    return p;
  };
  auto clean = [&](double lambda) {
    for (double eps : eps_values) {
      Geography g(make_schedule(eps, eps0, params, M, with(lambda)), omega, I0);
      if (g.disjointness_all(samples, seed).violation_count > 0) return false;
    }
    return true;
  };
  CalibrationResult out;
  if (!clean(lo)) throw DomainError("calibrate_prefactors: violations persist at the lower bracket");
  double a = lo, b = hi;
  if (clean(hi)) {
    a = hi;
  } else {
    for (std::size_t it = 0; it < iterations; ++it) {
      const double mid = std::sqrt(a * b);
      (clean(mid) ? a : b) = mid;
      ++out.iterations;
    }
  }
  out.lambda = a * safety;
  out.prefactors = with(out.lambda);
  // Small-divisor and disc-diameter constants measured with the final c_δ.
  double alpha_c = std::numeric_limits<double>::infinity(), rj_c = 0.0;
  for (double eps : eps_values) {
    Geography g(make_schedule(eps, eps0, params, M, out.prefactors), omega, I0);
    const auto rep = g.disjointness_all(samples, seed);
    if (rep.samples > 0) alpha_c = std::min(alpha_c, rep.alpha_constant);
    rj_c = std::max(rj_c, rep.rj_constant);
  }
  if (std::isfinite(alpha_c) && alpha_c > 0.0) out.prefactors.c_alpha = 0.5 * alpha_c;
  if (rj_c > 0.0) out.prefactors.c_rj = 2.0 * rj_c;
  return out;
}

std::vector<double> default_rank_weights(std::size_t n) {
  std::vector<double> w;
  for (std::size_t j = 1; j < n; ++j) w.push_back(std::pow(4.0, static_cast<double>(j) - static_cast<double>(n - 1)));
  return w;
}

Prefactors convex3_prefactors() {
  // calibrate_prefactors with weights (1/4, 1), 2000 samples, seed 7 and
  // safety 1/2 gave λ = 0.828, c_α = 0.0845, c_rj = 2.107; rounded down.
  Prefactors p;
  p.c_delta = {0.2, 0.8};
  p.c_alpha = 0.08;
  p.c_rj = 2.1;
  return p;
}

core::json geography_report(const Geography& g, const CoverageReport& cov, const DisjointnessReport& dis) {
  core::json j;
  j["params"] = g.schedule().params.to_json();
  j["schedule"] = g.schedule().to_json();
  j["center"] = to_std(g.center());
  j["lattice_count"] = g.lattices().size();
  j["coverage"] = cov.to_json();
  j["disjointness"] = dis.to_json();
  j["violations"] = dis.to_json()["violations"];
  return j;
}

}  // namespace neklab::geography

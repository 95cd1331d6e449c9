#include "neklab/geography/lattice.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "neklab/errors.hpp"

namespace neklab::geography {

namespace {

// Extended gcd: returns g = gcd(a, b) ≥ 0 with x a + y b = g.
long long ext_gcd(long long a, long long b, long long& x, long long& y) {
  long long x0 = 1, y0 = 0, x1 = 0, y1 = 1;
  while (b != 0) {
    const long long q = a / b;
    long long t = a - q * b;
    a = b;
    b = t;
    t = x0 - q * x1;
    x0 = x1;
    x1 = t;
    t = y0 - q * y1;
    y0 = y1;
    y1 = t;
  }
  if (a < 0) {
    a = -a;
    x0 = -x0;
    y0 = -y0;
  }
  x = x0;
  y = y0;
  return a;
}

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void check_magnitude(long long v) {
  if (v > (1LL << 40) || v < -(1LL << 40)) throw ConsistencyError("integer lattice entries overflowed");
}

// Row echelon form by unimodular row operations, mirrored on `mirror` when
// given. Returns the number of nonzero rows (which come first).
std::size_t echelon(IntMat& A, std::size_t ncols, IntMat* mirror) {
  const std::size_t m = A.size();
  std::size_t row = 0;
  auto combine = [&](IntMat& M, std::size_t r1, std::size_t r2, long long a, long long b, long long c,
                     long long d) {
    // (r1, r2) ← (a r1 + b r2, c r1 + d r2)
    for (std::size_t k = 0; k < M[r1].size(); ++k) {
      const long long u = M[r1][k], v = M[r2][k];
      M[r1][k] = a * u + b * v;
      M[r2][k] = c * u + d * v;
      check_magnitude(M[r1][k]);
      check_magnitude(M[r2][k]);
    }
  };
  for (std::size_t col = 0; col < ncols && row < m; ++col) {
    for (std::size_t r = row + 1; r < m; ++r) {
      if (A[r][col] == 0) continue;
      const long long p = A[row][col], q = A[r][col];
      long long x, y;
      const long long g = ext_gcd(p, q, x, y);
      // [x y; -q/g p/g] has determinant 1.
      combine(A, row, r, x, y, -q / g, p / g);
      if (mirror) combine(*mirror, row, r, x, y, -q / g, p / g);
    }
    if (A[row][col] == 0) continue;
    if (A[row][col] < 0) {
      for (auto& v : A[row]) v = -v;
      if (mirror)
        for (auto& v : (*mirror)[row]) v = -v;
    }
    ++row;
  }
  return row;
}

long long dot(const IntVec& a, const IntVec& b) {
  long long s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

IntMat hermite_normal_form(IntMat rows, std::size_t ncols) {
  for (const auto& r : rows)
    if (r.size() != ncols) throw DomainError("hermite_normal_form: ragged rows");
  const std::size_t rank = echelon(rows, ncols, nullptr);
  rows.resize(rank);
  // Reduce the entries above each pivot into [0, pivot).
  for (std::size_t r = 0; r < rank; ++r) {
    std::size_t pc = 0;
    while (rows[r][pc] == 0) ++pc;
    const long long p = rows[r][pc];
    for (std::size_t above = 0; above < r; ++above) {
      const long long q = floor_div(rows[above][pc], p);
      if (q == 0) continue;
      for (std::size_t k = 0; k < ncols; ++k) rows[above][k] -= q * rows[r][k];
    }
  }
  return rows;
}

IntMat integer_kernel(const IntMat& A, std::size_t ncols) {
  // Echelon on Aᵀ with the transform U accumulated: rows of U beyond the rank
  // annihilate A.
  IntMat T(ncols, IntVec(A.size(), 0));
  for (std::size_t i = 0; i < A.size(); ++i) {
    if (A[i].size() != ncols) throw DomainError("integer_kernel: ragged rows");
    for (std::size_t k = 0; k < ncols; ++k) T[k][i] = A[i][k];
  }
  IntMat U(ncols, IntVec(ncols, 0));
  for (std::size_t k = 0; k < ncols; ++k) U[k][k] = 1;
  const std::size_t rank = echelon(T, A.size(), &U);
  IntMat ker(U.begin() + static_cast<std::ptrdiff_t>(rank), U.end());
  return hermite_normal_form(ker, ncols);
}

Lattice Lattice::trivial(std::size_t n) {
  Lattice L;
  L.n_ = n;
  L.annihilator_.assign(n, IntVec(n, 0));
  for (std::size_t i = 0; i < n; ++i) L.annihilator_[i][i] = 1;
  return L;
}

Lattice Lattice::saturate(std::size_t n, const IntMat& generators, double K) {
  if (n == 0) throw DomainError("Lattice: dimension must be positive");
  IntMat gens;
  for (const auto& g : generators) {
    if (g.size() != n) throw DomainError("Lattice: generator has the wrong dimension");
    if (std::any_of(g.begin(), g.end(), [](long long v) { return v != 0; })) gens.push_back(g);
  }
  Lattice L;
  L.n_ = n;
  L.K_ = K;
  if (gens.empty()) {
    L = trivial(n);
    L.K_ = K;
    return L;
  }
  L.annihilator_ = integer_kernel(gens, n);
  if (L.annihilator_.size() == 0) throw DomainError("Lattice: generators span all of the ambient space");
  L.basis_ = integer_kernel(L.annihilator_, n);
  const auto j = static_cast<Eigen::Index>(L.basis_.size());
  Eigen::MatrixXd G(j, j);
  for (Eigen::Index a = 0; a < j; ++a)
    for (Eigen::Index b = 0; b < j; ++b) G(a, b) = static_cast<double>(dot(L.basis_[a], L.basis_[b]));
  L.covolume_ = std::sqrt(G.determinant());
  return L;
}

bool Lattice::contains(const IntVec& k) const {
  if (k.size() != n_) return false;
  for (const auto& a : annihilator_)
    if (dot(a, k) != 0) return false;
  return true;
}

std::vector<IntVec> Lattice::short_vectors(double K) const {
  std::vector<IntVec> out;
  if (rank() == 0) return out;
  for (auto& k : short_integer_vectors(n_, K))
    if (contains(k)) out.push_back(std::move(k));
  return out;
}

bool Lattice::operator<(const Lattice& o) const {
  if (rank() != o.rank()) return rank() < o.rank();
  return basis_ < o.basis_;
}

core::json Lattice::to_json() const {
  core::json j;
  j["n"] = n_;
  j["rank"] = rank();
  j["basis"] = basis_;
  j["covolume"] = covolume_;
  j["K"] = K_;
  return j;
}

std::vector<IntVec> short_integer_vectors(std::size_t n, double K) {
  if (!(K >= 0.0)) throw DomainError("short_integer_vectors: K must be non-negative");
  const long long B = static_cast<long long>(std::floor(K));
  std::vector<IntVec> out;
  IntVec k(n, -B);
  // Odometer over the box [−B, B]ⁿ.
  while (true) {
    long long l1 = 0;
    for (auto v : k) l1 += std::llabs(v);
    if (l1 > 0 && l1 <= B) {
      auto first = std::find_if(k.begin(), k.end(), [](long long v) { return v != 0; });
      if (*first > 0) out.push_back(k);
    }
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (k[i] < B) {
        ++k[i];
        break;
      }
      k[i] = -B;
      if (i == 0) return out;
    }
    if (n == 0) return out;
  }
}

std::vector<Lattice> enumerate_lattices(std::size_t n, double K, std::size_t j, std::size_t budget) {
  if (j >= n) throw DomainError("enumerate_lattices: rank must be below the dimension");
  if (!(K >= 1.0)) throw DomainError("enumerate_lattices: K must be at least 1");
  std::vector<Lattice> level{Lattice::trivial(n)};
  level[0] = Lattice::saturate(n, {}, K);
  if (j == 0) return level;
  const auto vecs = short_integer_vectors(n, K);
  std::size_t attempted = 0;
  for (std::size_t r = 1; r <= j; ++r) {
    std::set<Lattice> next;
    for (const Lattice& L : level) {
      for (const IntVec& k : vecs) {
        if (++attempted > budget)
          throw BudgetError("enumerate_lattices: candidate budget exceeded", static_cast<long long>(attempted));
        if (L.contains(k)) continue;
        IntMat gens = L.basis();
        gens.push_back(k);
        next.insert(Lattice::saturate(n, gens, K));
      }
    }
    level.assign(next.begin(), next.end());
  }
  return level;
}

core::json lattices_to_json(const std::vector<Lattice>& ls) {
  core::json a = core::json::array();
  for (const auto& L : ls) a.push_back(L.basis());
  return a;
}

}  // namespace neklab::geography

#include "neklab/core/fit.hpp"

#include <cmath>

#include "neklab/errors.hpp"

namespace neklab::core {

LogFit fit_line(const std::vector<double>& u, const std::vector<double>& v) {
  const std::size_t m = u.size();
  if (m < 2 || v.size() != m) throw DomainError("fit_line: need at least two matching points");
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= static_cast<double>(m);
  mv /= static_cast<double>(m);
  double suu = 0.0, suv = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suv += (u[i] - mu) * (v[i] - mv);
  }
  if (!(suu > 0.0)) throw DomainError("fit_line: abscissae are all equal");
  LogFit f;
  f.slope = suv / suu;
  f.intercept = mv - f.slope * mu;
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = v[i] - (f.intercept + f.slope * u[i]);
    f.residuals.push_back(r);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / static_cast<double>(m));
  f.slope_stderr = m > 2 ? std::sqrt(ss / static_cast<double>(m - 2) / suu) : 0.0;
  return f;
}

LogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("fit_loglog: length mismatch");
  std::vector<double> u, v;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit_loglog: coordinates must be positive");
    u.push_back(std::log(x[i]));
    v.push_back(std::log(y[i]));
  }
  return fit_line(u, v);
}

}  // namespace neklab::core

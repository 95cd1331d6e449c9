#pragma once

#include <vector>

namespace neklab::core {

/// Ordinary least-squares line through (log x, log y).
struct LogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double slope_stderr = 0.0;
  std::vector<double> residuals;
};

/// Requires at least two points with positive coordinates.
LogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Same fit on already transformed coordinates.
LogFit fit_line(const std::vector<double>& u, const std::vector<double>& v);

}  // namespace neklab::core

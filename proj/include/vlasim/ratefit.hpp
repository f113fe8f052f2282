#pragma once

#include <span>

namespace vlasim {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

enum class FitMode { log_linear, log_log };

// Ordinary least squares on (x, log y) or (log x, log y), restricted to
// window_lo <= x <= window_hi. Requires >= 4 points in the window and
// strictly positive ys (and xs in log-log mode); throws NonPositiveSeries.
RateFit fit_rate(std::span<const double> xs, std::span<const double> ys, FitMode mode,
                 double window_lo, double window_hi);

}  // namespace vlasim

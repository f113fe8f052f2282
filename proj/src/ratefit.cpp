#include "vlasim/ratefit.hpp"

#include <cmath>
#include <vector>

#include "vlasim/errors.hpp"

namespace vlasim {

RateFit fit_rate(std::span<const double> xs, std::span<const double> ys, FitMode mode,
                 double window_lo, double window_hi) {
    if (xs.size() != ys.size()) throw SizeMismatch("fit_rate: xs and ys lengths disagree");
    std::vector<double> u, v;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < window_lo || xs[i] > window_hi) continue;
        if (!(ys[i] > 0.0))
            throw NonPositiveSeries("y = " + std::to_string(ys[i]) + " at x = " + std::to_string(xs[i]));
        if (mode == FitMode::log_log) {
            if (!(xs[i] > 0.0))
                throw NonPositiveSeries("x = " + std::to_string(xs[i]) + " in log-log fit");
            u.push_back(std::log(xs[i]));
        } else {
            u.push_back(xs[i]);
        }
        v.push_back(std::log(ys[i]));
    }
    if (u.size() < 4)
        throw ConfigError("fit_rate: need at least 4 points in window, have " + std::to_string(u.size()));

    const double n = static_cast<double>(u.size());
    double su = 0, sv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        su += u[i];
        sv += v[i];
    }
    const double mu = su / n, mv = sv / n;
    double suu = 0, suv = 0, svv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double du = u[i] - mu, dv = v[i] - mv;
        suu += du * du;
        suv += du * dv;
        svv += dv * dv;
    }
    if (suu == 0.0) throw ConfigError("fit_rate: degenerate abscissa (all x equal in window)");

    RateFit fit;
    fit.slope = suv / suu;
    fit.intercept = mv - fit.slope * mu;
    fit.points = u.size();
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    if (svv == 0.0) {
        fit.r_squared = 1.0;  // constant series, perfectly fit by slope 0
    } else {
        double ss_res = svv - fit.slope * suv;
        fit.r_squared = 1.0 - ss_res / svv;
        if (fit.r_squared < 0.0) fit.r_squared = 0.0;
        if (fit.r_squared > 1.0) fit.r_squared = 1.0;
    }
    return fit;
}

}  // namespace vlasim

#include "vlasim/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vlasim/errors.hpp"
#include "vlasim/parallel.hpp"
#include "vlasim/rng.hpp"

namespace vlasim {

EmpiricalMeasure EmpiricalMeasure::from_ensemble(const ParticleEnsemble& ens) {
    EmpiricalMeasure m;
    m.dim = ens.dim;
    const std::size_t n = ens.size();
    const int d = ens.dim;
    m.points.resize(n * 3 * d);
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
            m.points[i * 3 * d + k] = ens.q[i * d + k];
            m.points[i * 3 * d + d + k] = ens.p[i * d + k];
            m.points[i * 3 * d + 2 * d + k] = ens.z[i * d + k];
        }
    return m;
}

GroundMetric GroundMetric::qform_metric(const QuadraticForm& f) {
    if (!f.positive_definite())
        throw NotPositiveDefinite("ground metric form fails the Sylvester test");
    GroundMetric m;
    m.kind = Kind::qform;
    m.form = f;
    return m;
}

double GroundMetric::cost(std::span<const double> x, std::span<const double> y, int dim) const {
    const int d = dim;
    if (kind == Kind::euclidean_sq) {
        double acc = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double diff = x[k] - y[k];
            acc += diff * diff;
        }
        return acc;
    }
    double acc = 0.0;
    for (int k = 0; k < d; ++k) {
        const double dq = x[k] - y[k];
        const double dp = x[d + k] - y[d + k];
        const double dz = x[2 * d + k] - y[2 * d + k];
        acc += form.a1 * dq * dq + form.a2 * dp * dp + form.a3 * dz * dz +
               2.0 * (form.a4 * dq * dp + form.a5 * dq * dz + dp * dz);
    }
    return acc;
}

// Jonker-Volgenant shortest augmenting path solve of the dense square LAP:
// column reduction, reduction transfer, two augmenting row reduction sweeps,
// then Dijkstra-style augmentation for the remaining free rows.
double solve_assignment(std::size_t n, const double* cost, std::vector<int>& rowsol) {
    const int dim = static_cast<int>(n);
    rowsol.assign(n, -1);
    std::vector<int> colsol(n, -1);
    std::vector<double> v(n, 0.0);

    std::vector<int> matches(n, 0);
    // Column reduction, scanned in reverse for better initial assignments.
    for (int j = dim - 1; j >= 0; --j) {
        double min_cost = cost[j];
        int imin = 0;
        for (int i = 1; i < dim; ++i) {
            const double c = cost[static_cast<std::size_t>(i) * n + j];
            if (c < min_cost) {
                min_cost = c;
                imin = i;
            }
        }
        v[j] = min_cost;
        if (++matches[imin] == 1) {
            rowsol[imin] = j;
            colsol[j] = imin;
        }
    }

    // Reduction transfer from singly assigned rows.
    std::vector<int> free_rows;
    free_rows.reserve(n);
    for (int i = 0; i < dim; ++i) {
        const double* row = cost + static_cast<std::size_t>(i) * n;
        if (matches[i] == 0) {
            free_rows.push_back(i);
        } else if (matches[i] == 1) {
            const int j1 = rowsol[i];
            double min_red = std::numeric_limits<double>::max();
            for (int j = 0; j < dim; ++j)
                if (j != j1) min_red = std::min(min_red, row[j] - v[j]);
            v[j1] -= min_red;
        }
    }

    // Augmenting row reduction, two sweeps.
    for (int sweep = 0; sweep < 2; ++sweep) {
        std::size_t k = 0;
        const std::size_t prev_free = free_rows.size();
        std::size_t nfree = 0;
        while (k < prev_free) {
            const int i = free_rows[k++];
            const double* row = cost + static_cast<std::size_t>(i) * n;
            double umin = row[0] - v[0], usubmin = std::numeric_limits<double>::max();
            int j1 = 0, j2 = -1;
            for (int j = 1; j < dim; ++j) {
                const double h = row[j] - v[j];
                if (h < usubmin) {
                    if (h >= umin) {
                        usubmin = h;
                        j2 = j;
                    } else {
                        usubmin = umin;
                        umin = h;
                        j2 = j1;
                        j1 = j;
                    }
                }
            }
            int i0 = colsol[j1];
            const double vj1_new = v[j1] - (usubmin - umin);
            const bool lowers = vj1_new < v[j1];
            if (lowers) {
                v[j1] = vj1_new;
            } else if (i0 >= 0 && j2 >= 0) {
                j1 = j2;
                i0 = colsol[j2];
            }
            rowsol[i] = j1;
            colsol[j1] = i;
            if (i0 >= 0) {
                if (lowers)
                    free_rows[--k] = i0;
                else
                    free_rows[nfree++] = i0;
            }
        }
        free_rows.resize(nfree);
    }

    // Augment remaining free rows along shortest alternating paths.
    std::vector<double> dist(n);
    std::vector<int> pred(n), collist(n);
    for (const int freerow : free_rows) {
        const double* frow = cost + static_cast<std::size_t>(freerow) * n;
        for (int j = 0; j < dim; ++j) {
            dist[j] = frow[j] - v[j];
            pred[j] = freerow;
            collist[j] = j;
        }
        int low = 0, up = 0, last = -1;
        int endofpath = -1;
        double min_d = 0.0;
        bool found = false;
        do {
            if (up == low) {
                last = low - 1;
                min_d = dist[collist[up++]];
                for (int k = up; k < dim; ++k) {
                    const int j = collist[k];
                    const double h = dist[j];
                    if (h <= min_d) {
                        if (h < min_d) {
                            up = low;
                            min_d = h;
                        }
                        collist[k] = collist[up];
                        collist[up++] = j;
                    }
                }
                for (int k = low; k < up; ++k) {
                    if (colsol[collist[k]] < 0) {
                        endofpath = collist[k];
                        found = true;
                        break;
                    }
                }
            }
            if (!found) {
                const int j1 = collist[low++];
                const int i = colsol[j1];
                const double* irow = cost + static_cast<std::size_t>(i) * n;
                const double h = irow[j1] - v[j1] - min_d;
                for (int k = up; k < dim; ++k) {
                    const int j = collist[k];
                    const double v2 = irow[j] - v[j] - h;
                    if (v2 < dist[j]) {
                        pred[j] = i;
                        if (v2 == min_d) {
                            if (colsol[j] < 0) {
                                endofpath = j;
                                found = true;
                                break;
                            }
                            collist[k] = collist[up];
                            collist[up++] = j;
                        }
                        dist[j] = v2;
                    }
                }
            }
        } while (!found);

        for (int k = 0; k <= last; ++k) {
            const int j1 = collist[k];
            v[j1] += dist[j1] - min_d;
        }
        int i;
        do {
            i = pred[endofpath];
            colsol[endofpath] = i;
            const int j1 = endofpath;
            endofpath = rowsol[i];
            rowsol[i] = j1;
        } while (i != freerow);
    }

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i * n + rowsol[i]];
    return total;
}

namespace {

void require_compatible(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.size() == 0 || nu.size() == 0) throw SizeMismatch("empirical measures must be non-empty");
    if (mu.size() != nu.size() || mu.dim != nu.dim)
        throw SizeMismatch("empirical measures must have equal size and dimension");
}

}  // namespace

double w2_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const GroundMetric& metric,
                int threads) {
    require_compatible(mu, nu);
    const std::size_t n = mu.size();
    if (n > kW2CostGuard) throw CostGuardExceeded(n, kW2CostGuard);
    if (metric.kind == GroundMetric::Kind::qform && !metric.form.positive_definite())
        throw NotPositiveDefinite("w2_exact: ground form fails the Sylvester test");

    std::vector<double> cost(n * n);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            for (std::size_t j = 0; j < n; ++j)
                cost[i * n + j] = metric.cost(mu.point(i), nu.point(j), mu.dim);
    });

    std::vector<int> rowsol;
    const double total = solve_assignment(n, cost.data(), rowsol);
    return std::sqrt(std::max(0.0, total / static_cast<double>(n)));
}

double w2_sliced_directions(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                            std::span<const double> directions) {
    require_compatible(mu, nu);
    const std::size_t n = mu.size();
    const std::size_t w = 3 * static_cast<std::size_t>(mu.dim);
    if (directions.size() == 0 || directions.size() % w != 0)
        throw SizeMismatch("slicing directions must be rows of length 3*dim");
    const std::size_t n_proj = directions.size() / w;

    std::vector<double> pa(n), pb(n);
    double acc = 0.0;
    for (std::size_t pidx = 0; pidx < n_proj; ++pidx) {
        const double* theta = directions.data() + pidx * w;
        for (std::size_t i = 0; i < n; ++i) {
            double sa = 0.0, sb = 0.0;
            const double* xa = mu.points.data() + i * w;
            const double* xb = nu.points.data() + i * w;
            for (std::size_t k = 0; k < w; ++k) {
                sa += theta[k] * xa[k];
                sb += theta[k] * xb[k];
            }
            pa[i] = sa;
            pb[i] = sb;
        }
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = pa[i] - pb[i];
            s += diff * diff;
        }
        acc += s / static_cast<double>(n);
    }
    return std::sqrt(acc / static_cast<double>(n_proj));
}

double w2_sliced(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, int n_projections,
                 std::uint64_t seed) {
    require_compatible(mu, nu);
    if (n_projections < 1) throw ConfigError("w2_sliced: need at least one projection");
    const std::size_t w = 3 * static_cast<std::size_t>(mu.dim);
    std::vector<double> dirs(static_cast<std::size_t>(n_projections) * w);
    for (int pidx = 0; pidx < n_projections; ++pidx) {
        std::span<double> row{dirs.data() + static_cast<std::size_t>(pidx) * w, w};
        philox_gaussians(seed, noise_domain::slicing, static_cast<std::uint32_t>(pidx), 0, row);
        double norm = 0.0;
        for (double x : row) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            row[0] = 1.0;
            norm = 1.0;
        }
        for (double& x : row) x /= norm;
    }
    return w2_sliced_directions(mu, nu, dirs);
}

W2QBoundsReport w2q_bounds_check(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                 const QuadraticForm& form) {
    W2QBoundsReport rep;
    auto [c_lo, c_hi] = equivalence_constants(form);
    rep.c_lo = c_lo;
    rep.c_hi = c_hi;
    rep.w2 = w2_exact(mu, nu, GroundMetric::euclidean());
    rep.w2q = w2_exact(mu, nu, GroundMetric::qform_metric(form));
    rep.slack_lo = rep.w2q - std::sqrt(c_lo) * rep.w2;
    rep.slack_hi = std::sqrt(c_hi) * rep.w2 - rep.w2q;
    const double tol = 1e-9 * (1.0 + rep.w2q);
    rep.ok = rep.slack_lo >= -tol && rep.slack_hi >= -tol;
    return rep;
}

}  // namespace vlasim

#include "sgcal/estimation.hpp"

#include "sgcal/design.hpp"
#include "sgcal/errors.hpp"
#include "sgcal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

namespace sgcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void clamp_into(Vec& x, const Bounds& box) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], box.lower[i], box.upper[i]);
}

class CountedObjective {
public:
    explicit CountedObjective(const Objective& f) : f_(f) {}

    double operator()(const Vec& x) {
        ++count_;
        const double v = f_(std::span<const double>(x));
        return std::isnan(v) ? kInf : v;
    }

    [[nodiscard]] std::size_t count() const noexcept { return count_; }

private:
    const Objective& f_;
    std::size_t count_ = 0;
};

Vec numeric_gradient(CountedObjective& f, const Vec& x, double fx, const Bounds& box, double step) {
    Vec g(x.size(), 0.0);
    Vec probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = step * (1.0 + std::abs(x[i]));
        const double up = std::min(x[i] + h, box.upper[i]);
        const double down = std::max(x[i] - h, box.lower[i]);
        probe[i] = up;
        const double fu = up > x[i] ? f(probe) : kInf;
        probe[i] = down;
        const double fd = down < x[i] ? f(probe) : kInf;
        probe[i] = x[i];
        const bool has_up = std::isfinite(fu);
        const bool has_down = std::isfinite(fd);
        if (has_up && has_down) {
            g[i] = (fu - fd) / (up - down);
        } else if (has_up) {
            g[i] = (fu - fx) / (up - x[i]);
        } else if (has_down) {
            g[i] = (fx - fd) / (x[i] - down);
        }
    }
    return g;
}

// Components pinned at a bound with the gradient pushing outward.
std::vector<bool> active_set(const Vec& x, const Vec& g, const Bounds& box) {
    std::vector<bool> active(x.size(), false);
    for (std::size_t i = 0; i < x.size(); ++i) {
        active[i] = (x[i] <= box.lower[i] && g[i] > 0.0) || (x[i] >= box.upper[i] && g[i] < 0.0);
    }
    return active;
}

struct Pair {
    Vec s;
    Vec y;
    double rho;
};

// L-BFGS two-loop recursion restricted to the free variables.
Vec quasi_newton_direction(const Vec& g, const std::deque<Pair>& memory, const std::vector<bool>& active) {
    Vec q(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) q[i] = active[i] ? 0.0 : g[i];
    auto masked_dot = [&](const Vec& a, const Vec& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!active[i]) s += a[i] * b[i];
        return s;
    };
    std::vector<double> alpha(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
        const Pair& m = memory[k];
        alpha[k] = m.rho * masked_dot(m.s, q);
        for (std::size_t i = 0; i < q.size(); ++i)
            if (!active[i]) q[i] -= alpha[k] * m.y[i];
    }
    if (!memory.empty()) {
        const Pair& last = memory.back();
        const double yy = masked_dot(last.y, last.y);
        const double sy = masked_dot(last.s, last.y);
        if (yy > 0.0 && sy > 0.0) {
            for (double& v : q) v *= sy / yy;
        }
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
        const Pair& m = memory[k];
        const double beta = m.rho * masked_dot(m.y, q);
        for (std::size_t i = 0; i < q.size(); ++i)
            if (!active[i]) q[i] += m.s[i] * (alpha[k] - beta);
    }
    for (double& v : q) v = -v;
    return q;
}

struct SimplexResult {
    Vec x;
    double f;
};

// Nelder-Mead with every trial point projected into the box.
SimplexResult bounded_simplex(CountedObjective& f, Vec x0, double f0, const Bounds& box, const OptimizerConfig& config) {
    const std::size_t n = x0.size();
    std::vector<Vec> pts(n + 1, x0);
    std::vector<double> vals(n + 1, f0);
    for (std::size_t i = 0; i < n; ++i) {
        const double width = box.upper[i] - box.lower[i];
        double step = 0.05 * width;
        if (pts[i + 1][i] + step > box.upper[i]) step = -step;
        pts[i + 1][i] = std::clamp(pts[i + 1][i] + step, box.lower[i], box.upper[i]);
        vals[i + 1] = f(pts[i + 1]);
    }
    const std::size_t max_evals = 400 * (n + 1);
    std::size_t evals = 0;
    auto trial = [&](const Vec& centroid, const Vec& worst, double coef) {
        Vec t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = centroid[i] + coef * (worst[i] - centroid[i]);
        clamp_into(t, box);
        return t;
    };
    std::vector<std::size_t> order(n + 1);
    while (evals < max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];
        double spread = 0.0;
        for (std::size_t k = 0; k <= n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                spread = std::max(spread, std::abs(pts[k][i] - pts[best][i]) / (box.upper[i] - box.lower[i]));
        const bool flat = std::isfinite(vals[worst]) &&
                          vals[worst] - vals[best] <= config.objective_tolerance * std::max(1.0, std::abs(vals[best]));
        if (flat && spread <= config.parameter_tolerance) break;
        if (spread <= 1e-14) break;

        Vec centroid(n, 0.0);
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == worst) continue;
            for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);
        }
        const Vec xr = trial(centroid, pts[worst], -1.0);
        const double fr = f(xr);
        ++evals;
        if (fr < vals[best]) {
            const Vec xe = trial(centroid, pts[worst], -2.0);
            const double fe = f(xe);
            ++evals;
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const Vec xc = trial(centroid, outside ? xr : pts[worst], 0.5);
        const double fc = f(xc);
        ++evals;
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == best) continue;
            for (std::size_t i = 0; i < n; ++i) pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
            vals[k] = f(pts[k]);
            ++evals;
        }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    return {pts[static_cast<std::size_t>(it - vals.begin())], *it};
}

}  // namespace

void OptimizerConfig::validate() const {
    if (starts < 1) throw DomainError("optimizer: need at least one start");
    if (!(gradient_step > 0.0)) throw DomainError("optimizer: gradient step must be positive");
    if (!(objective_tolerance > 0.0) || !(parameter_tolerance > 0.0)) {
        throw DomainError("optimizer: tolerances must be positive");
    }
    if (memory < 1) throw DomainError("optimizer: memory must be at least 1");
}

StartTrace minimize_from(const Objective& objective, const Bounds& box, Vec x0, const OptimizerConfig& config) {
    CountedObjective f(objective);
    StartTrace trace;
    clamp_into(x0, box);
    trace.initial = x0;
    Vec x = std::move(x0);
    double fx = f(x);
    trace.initial_value = fx;
    trace.accepted.push_back(fx);
    if (!std::isfinite(fx)) {
        trace.failed = true;
        trace.message = "objective not finite at the initial point";
        trace.argmin = x;
        trace.value = fx;
        trace.evaluations = f.count();
        return trace;
    }

    const std::size_t dim = x.size();
    double width_inf = 0.0;
    for (std::size_t i = 0; i < dim; ++i) width_inf = std::max(width_inf, box.upper[i] - box.lower[i]);

    Vec g = numeric_gradient(f, x, fx, box, config.gradient_step);
    std::deque<Pair> memory;
    bool stalled = false;
    std::size_t flat_iterations = 0;

    for (trace.iterations = 0; trace.iterations < config.max_iterations; ++trace.iterations) {
        const std::vector<bool> active = active_set(x, g, box);
        double pg = 0.0;
        for (std::size_t i = 0; i < dim; ++i)
            if (!active[i]) pg = std::max(pg, std::abs(g[i]));
        if (pg <= 1e-12 * std::max(1.0, std::abs(fx))) break;

        Vec d = quasi_newton_direction(g, memory, active);
        double slope = dot(g, d);
        if (!(slope < 0.0)) {
            memory.clear();
            d = quasi_newton_direction(g, memory, active);
            slope = dot(g, d);
        }
        // Without curvature information, cap the first step at a tenth of the box.
        double alpha = 1.0;
        if (memory.empty()) alpha = std::min(1.0, 0.1 * width_inf / std::max(norm_inf(d), 1e-300));

        bool accepted = false;
        Vec xn(dim);
        double fn = kInf;
        for (int backtrack = 0; backtrack < 50; ++backtrack) {
            for (std::size_t i = 0; i < dim; ++i) xn[i] = x[i] + alpha * d[i];
            clamp_into(xn, box);
            Vec step(dim);
            for (std::size_t i = 0; i < dim; ++i) step[i] = xn[i] - x[i];
            if (norm_inf(step) == 0.0) break;
            fn = f(xn);
            if (std::isfinite(fn) && fn <= fx + 1e-4 * dot(g, step)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (!memory.empty()) {
                memory.clear();
                continue;
            }
            stalled = true;
            break;
        }

        Vec gn = numeric_gradient(f, xn, fn, box, config.gradient_step);
        Pair pair{Vec(dim), Vec(dim), 0.0};
        for (std::size_t i = 0; i < dim; ++i) {
            pair.s[i] = xn[i] - x[i];
            pair.y[i] = gn[i] - g[i];
        }
        const double sy = dot(pair.s, pair.y);
        if (sy > 1e-12 * std::sqrt(dot(pair.s, pair.s) * dot(pair.y, pair.y))) {
            pair.rho = 1.0 / sy;
            memory.push_back(std::move(pair));
            if (memory.size() > config.memory) memory.pop_front();
        }

        const double decrease = fx - fn;
        double xscale = 0.0;
        double stepsize = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            xscale = std::max(xscale, std::abs(x[i]));
            stepsize = std::max(stepsize, std::abs(xn[i] - x[i]));
        }
        x = std::move(xn);
        fx = fn;
        g = std::move(gn);
        trace.accepted.push_back(fx);

        const bool small_decrease = decrease <= config.objective_tolerance * std::max(1.0, std::abs(fx));
        flat_iterations = small_decrease ? flat_iterations + 1 : 0;
        if (small_decrease && stepsize <= config.parameter_tolerance * (1.0 + xscale)) break;
        if (flat_iterations >= 5) break;
    }

    if (stalled) {
        const SimplexResult s = bounded_simplex(f, x, fx, box, config);
        trace.used_simplex = true;
        if (s.f < fx) {
            x = s.x;
            fx = s.f;
            trace.accepted.push_back(fx);
        }
    }
    trace.argmin = std::move(x);
    trace.value = fx;
    trace.evaluations = f.count();
    return trace;
}

MinimizeResult multistart_minimize(const Objective& objective, const Bounds& box, const OptimizerConfig& config) {
    config.validate();
    box.validate();
    const std::size_t dim = box.size();
    if (dim == 0) throw DomainError("multistart_minimize: empty parameter box");

    std::vector<Vec> starts;
    starts.push_back(box.center());
    if (config.starts > 1) {
        Engine engine = make_engine(config.seed, {4});
        const PointMatrix unit = random_lhs(config.starts - 1, dim, engine);
        for (Eigen::Index k = 0; k < unit.rows(); ++k) {
            Vec x(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                x[i] = box.lower[i] + unit(k, static_cast<Eigen::Index>(i)) * (box.upper[i] - box.lower[i]);
            }
            starts.push_back(std::move(x));
        }
    }

    MinimizeResult result;
    result.value = kInf;
    bool any = false;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        StartTrace t = minimize_from(objective, box, starts[k], config);
        t.index = k;
        if (!t.failed && std::isfinite(t.value) && (!any || t.value < result.value)) {
            any = true;
            result.value = t.value;
            result.argmin = t.argmin;
            result.best_start = k;
        }
        result.trace.push_back(std::move(t));
    }
    if (!any) {
        std::string msg = "optimization failed in all " + std::to_string(starts.size()) + " starts";
        for (const StartTrace& t : result.trace) msg += "; start " + std::to_string(t.index) + ": " + t.message;
        throw OptimizationFailed(msg);
    }
    return result;
}

// --- likelihood fit -------------------------------------------------------------

FittedCalibration fit(const CalibrationProblem& prob, const OptimizerConfig& config, const FitOptions& options) {
    prob.validate();
    config.validate();
    const std::size_t q = prob.q();
    const std::size_t p = prob.p();
    if (options.fixed_range && options.fixed_range->size() != p) throw DomainError("fit: fixed range has wrong length");
    if (options.fixed_lambda && !(*options.fixed_lambda > 0.0)) throw DomainError("fit: fixed lambda must be positive");

    const bool free_range = !options.fixed_range;
    const bool free_lambda = !options.fixed_lambda;
    Bounds box;
    box.lower = prob.theta_bounds.lower;
    box.upper = prob.theta_bounds.upper;
    if (free_range) {
        box.lower.insert(box.lower.end(), p, kLogRangeLower);
        box.upper.insert(box.upper.end(), p, kLogRangeUpper);
    }
    if (free_lambda) {
        box.lower.push_back(kLogLambdaLower);
        box.upper.push_back(kLogLambdaUpper);
    }

    struct Unpacked {
        Vec theta;
        Vec range;
        double lambda;
    };
    auto unpack = [&](std::span<const double> z) {
        Unpacked u;
        u.theta.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(q));
        std::size_t at = q;
        if (free_range) {
            for (std::size_t i = 0; i < p; ++i) u.range.push_back(std::exp(z[at + i]));
            at += p;
        } else {
            u.range = *options.fixed_range;
        }
        u.lambda = free_lambda ? std::exp(z[at]) : *options.fixed_lambda;
        return u;
    };

    if (box.size() == 0) {
        const Unpacked u = unpack({});
        return assemble_fit(prob, u.theta, u.range, u.lambda);
    }

    const ProfileLikelihood likelihood(prob);
    const Objective objective = [&](std::span<const double> z) {
        const Unpacked u = unpack(z);
        try {
            return likelihood.evaluate(u.theta, u.range, u.lambda).objective;
        } catch (const NotPositiveDefinite&) {
            return kInf;
        } catch (const DomainError&) {
            return kInf;
        }
    };
    const MinimizeResult best = multistart_minimize(objective, box, config);
    const Unpacked u = unpack(best.argmin);
    return assemble_fit(prob, u.theta, u.range, u.lambda);
}

FittedCalibration fit_theta(const CalibrationProblem& prob, std::shared_ptr<const EffectiveCovariance> covariance,
                            const KernelSpec& kernel, const OptimizerConfig& config) {
    prob.validate();
    if (!covariance || covariance->size() != prob.n()) throw DomainError("fit_theta: covariance does not match the data");
    const Objective objective = [&](std::span<const double> theta) {
        return profile_value(*covariance, prob.residual(theta)).objective;
    };
    // With no calibration parameters the residual is fixed and there is nothing to search.
    const std::vector<double> argmin =
        prob.q() == 0 ? std::vector<double>{} : multistart_minimize(objective, prob.theta_bounds, config).argmin;
    const linalg::Vector e = prob.residual(argmin);
    const ProfileValue v = profile_value(*covariance, e);
    FittedCalibration out;
    out.kind = prob.kind;
    out.theta = Eigen::Map<const linalg::Vector>(argmin.data(), static_cast<Eigen::Index>(argmin.size()));
    out.kernel = kernel;
    out.lambda = covariance->lambda();
    out.lambda_z = covariance->lambda_z();
    out.sigma0_sq = out.lambda * v.s2;
    out.weights = covariance->shrinkage() * covariance->krr_weights(e);
    out.objective = v.objective;
    out.degenerate = v.degenerate;
    out.covariance = std::move(covariance);
    return out;
}

// --- L2 oracle --------------------------------------------------------------------

void L2Oracle::validate() const {
    if (!truth || !simulator) throw DomainError("l2 oracle: truth and simulator must be set");
    theta_bounds.validate();
    if (dims == 0) throw DomainError("l2 oracle: dims must be positive");
    const std::size_t minimum = dims <= 2 ? 64 : 16;
    if (resolution < minimum) {
        throw DomainError("l2 oracle: grid resolution must be at least " + std::to_string(minimum));
    }
}

DesignSet midpoint_grid(std::size_t dims, std::size_t resolution) {
    if (dims == 0 || resolution == 0) throw DomainError("midpoint_grid: dims and resolution must be positive");
    std::size_t total = 1;
    for (std::size_t j = 0; j < dims; ++j) total *= resolution;
    PointMatrix x(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dims));
    for (std::size_t row = 0; row < total; ++row) {
        std::size_t rest = row;
        for (std::size_t j = dims; j-- > 0;) {
            x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) =
                (static_cast<double>(rest % resolution) + 0.5) / static_cast<double>(resolution);
            rest /= resolution;
        }
    }
    return DesignSet(std::move(x), Provenance::Grid);
}

L2Result l2_minimizer(const L2Oracle& oracle) {
    oracle.validate();
    const DesignSet grid = midpoint_grid(oracle.dims, oracle.resolution);
    std::vector<double> truth(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) truth[i] = oracle.truth(grid.point(i));
    const Objective objective = [&](std::span<const double> theta) {
        double s = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = truth[i] - oracle.simulator(grid.point(i), theta);
            s += d * d;
        }
        return s / static_cast<double>(grid.size());
    };
    const MinimizeResult r = multistart_minimize(objective, oracle.theta_bounds, oracle.optimizer);
    return {r.argmin, std::sqrt(std::max(0.0, r.value))};
}

}  // namespace sgcal

#include "sgcal/experiments.hpp"

#include "sgcal/baselines.hpp"
#include "sgcal/csv.hpp"
#include "sgcal/design.hpp"
#include "sgcal/errors.hpp"
#include "sgcal/kernel.hpp"
#include "sgcal/metrics.hpp"
#include "sgcal/rng.hpp"
#include "sgcal/truth.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace sgcal {

std::size_t default_thread_count() {
    if (const char* env = std::getenv("SGCAL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
    threads = std::min(std::max<std::size_t>(threads, 1), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

const MethodResult& ExperimentResult::find(const std::string& method, std::size_t n) const {
    for (const MethodResult& m : methods) {
        if (m.method == method && (n == 0 || m.n == n)) return m;
    }
    throw DomainError("experiment result has no method '" + method + "' at n = " + std::to_string(n));
}

Example1Config Example1Config::full() {
    Example1Config c;
    c.sizes.clear();
    for (int k = 0; k < 50; ++k) {
        const double logn = 5.0 + 5.0 * k / 49.0;
        const auto n = static_cast<std::size_t>(std::llround(std::exp(logn)));
        if (c.sizes.empty() || c.sizes.back() != n) c.sizes.push_back(n);
    }
    c.replicates = 100;
    c.test_points = 30000;
    return c;
}

Example2Config Example2Config::full(std::string case_name, std::size_t n) {
    Example2Config c;
    c.case_name = std::move(case_name);
    c.n = n;
    c.replicates = 200;
    c.test_points = 10000;
    return c;
}

Example3Config Example3Config::full(std::size_t n) {
    Example3Config c;
    c.n = n;
    c.replicates = 200;
    c.test_points = 10000;
    return c;
}

std::size_t default_l2_resolution(std::size_t dims) {
    switch (dims) {
        case 1: return 4096;
        case 2: return 128;
        case 3: return 64;
        default: return 24;
    }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

linalg::Vector evaluate(const std::function<double(std::span<const double>)>& f, const DesignSet& x) {
    linalg::Vector out(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) out[static_cast<Eigen::Index>(i)] = f(x.point(i));
    return out;
}

linalg::Vector add_noise(linalg::Vector y, double sd, Engine& engine) {
    std::normal_distribution<double> normal(0.0, sd);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += normal(engine);
    return y;
}

// Per-method slots filled by replicate tasks, then reduced in index order.
struct Slots {
    std::string method;
    std::size_t n;
    std::vector<linalg::Vector> theta;
    std::vector<double> rmse_pred;
    std::vector<double> rmse_model;
    std::vector<double> seconds;

    Slots(std::string name, std::size_t size, std::size_t replicates)
        : method(std::move(name)), n(size), theta(replicates), rmse_pred(replicates), rmse_model(replicates),
          seconds(replicates) {}

    void store(std::size_t r, const linalg::Vector& th, double pred, double model, double secs) {
        theta[r] = th;
        rmse_pred[r] = pred;
        rmse_model[r] = model;
        seconds[r] = secs;
    }

    [[nodiscard]] MethodResult reduce(const linalg::Vector& theta_l2) const {
        MethodResult m;
        m.method = method;
        m.n = n;
        m.theta = theta;
        m.rmse_pred = rmse_pred;
        m.rmse_model = rmse_model;
        const double count = static_cast<double>(rmse_pred.size());
        for (std::size_t r = 0; r < rmse_pred.size(); ++r) {
            m.avg_rmse_pred += rmse_pred[r] / count;
            m.avg_rmse_model += rmse_model[r] / count;
            m.seconds += seconds[r];
        }
        m.se_pred = standard_error(rmse_pred);
        m.se_model = standard_error(rmse_model);
        m.rmse_theta = rmse_theta(theta, theta_l2);
        return m;
    }
};

linalg::Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const linalg::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::span<const double> as_span(const linalg::Vector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

L2Result oracle_for(const TruthFunction& truth, std::size_t resolution, std::uint64_t seed) {
    L2Oracle oracle;
    oracle.truth = truth.reality;
    oracle.simulator = truth.simulator;
    oracle.theta_bounds = truth.theta_bounds;
    oracle.dims = truth.p;
    oracle.resolution = resolution;
    oracle.optimizer.seed = seed;
    return l2_minimizer(oracle);
}

constexpr std::uint64_t kExample1Id = 1;
constexpr std::uint64_t kExample2Id = 20;
constexpr std::uint64_t kExample3Id = 3;

}  // namespace

// --- Example 1 ------------------------------------------------------------------

ExperimentResult run_example1(const Example1Config& config) {
    if (config.sizes.empty() || config.replicates == 0 || config.test_points < 2) {
        throw DomainError("example1: need sizes, replicates and at least two test points");
    }
    config.optimizer.validate();
    const TruthFunction truth = truth_library("example1");
    const std::size_t threads = config.threads ? config.threads : default_thread_count();

    ExperimentResult result;
    result.experiment = config.mode == Example1Config::Mode::Fixed ? "example1-fixed" : "example1-mle";
    result.seed = config.seed;
    result.replicates = config.replicates;
    result.test_points = config.test_points;
    const L2Result l2 = oracle_for(truth, default_l2_resolution(1), config.seed);
    result.theta_l2 = to_vector(l2.theta);
    result.l2_floor = l2.rmse;

    const DesignSet test = equispaced(config.test_points);
    const linalg::Vector y_test = evaluate(truth.reality, test);
    const KernelSpec unit_range = KernelSpec::matern52({1.0});

    std::vector<double> ns;
    std::vector<double> gasp_curve;
    std::vector<double> sgasp_curve;
    for (std::size_t n : config.sizes) {
        const DesignSet design = equispaced(n);
        const linalg::Vector y_design = evaluate(truth.reality, design);
        const double lambda = std::pow(static_cast<double>(n), -6.0 / 7.0) * 1e-4;
        const double lambda_z = 1.0 / std::sqrt(lambda);

        std::shared_ptr<const EffectiveCovariance> cov_gasp;
        std::shared_ptr<const EffectiveCovariance> cov_sgasp;
        linalg::Matrix cross;
        if (config.mode == Example1Config::Mode::Fixed) {
            const linalg::Matrix r = correlation_matrix(design, unit_range);
            cov_gasp = std::make_shared<const EffectiveCovariance>(r, lambda, 0.0);
            cov_sgasp = std::make_shared<const EffectiveCovariance>(r, lambda, lambda_z);
            cross = cross_correlation_matrix(test, design, unit_range);
        }

        Slots gasp("gasp", n, config.replicates);
        Slots sgasp("sgasp1", n, config.replicates);
        parallel_for(config.replicates, threads, [&](std::size_t r) {
            Engine noise = make_engine(config.seed, {kExample1Id, n, r, 0});
            const linalg::Vector y = add_noise(y_design, truth.noise_sd, noise);
            for (int k = 0; k < 2; ++k) {
                const bool is_gasp = k == 0;
                const auto t0 = Clock::now();
                CalibrationProblem prob{design,
                                        y,
                                        truth.simulator,
                                        truth.theta_bounds,
                                        unit_range,
                                        is_gasp ? ModelKind::GaSP : ModelKind::SGaSP,
                                        LambdaZPolicy::inverse_sqrt_lambda()};
                OptimizerConfig opt = config.optimizer;
                opt.seed = stream_seed(config.seed, {kExample1Id, n, r, 1 + static_cast<std::uint64_t>(k)});
                linalg::Vector pred;
                FittedCalibration fitted;
                if (config.mode == Example1Config::Mode::Fixed) {
                    fitted = fit_theta(prob, is_gasp ? cov_gasp : cov_sgasp, unit_range, opt);
                    pred = cross * fitted.weights;
                    pred.array() += fitted.theta[0];
                } else {
                    fitted = fit(prob, opt);
                    pred = predict_mean(fitted, prob, test);
                }
                linalg::Vector model = linalg::Vector::Constant(y_test.size(), fitted.theta[0]);
                (is_gasp ? gasp : sgasp)
                    .store(r, fitted.theta, rmse(pred, y_test), rmse(model, y_test), seconds_since(t0));
            }
        });
        result.methods.push_back(gasp.reduce(result.theta_l2));
        result.methods.push_back(sgasp.reduce(result.theta_l2));
        ns.push_back(static_cast<double>(n));
        gasp_curve.push_back(result.methods[result.methods.size() - 2].avg_rmse_pred);
        sgasp_curve.push_back(result.methods.back().avg_rmse_pred);
    }
    if (ns.size() >= 2) {
        result.slopes.emplace_back("gasp", loglog_slope(ns, gasp_curve));
        result.slopes.emplace_back("sgasp1", loglog_slope(ns, sgasp_curve));
    }
    return result;
}

// --- Examples 2 and 3 -------------------------------------------------------------

namespace {

struct LhsExperiment {
    std::string experiment;
    std::uint64_t id;
    TruthFunction truth;
    std::size_t n;
    std::size_t replicates;
    std::size_t test_points;
    std::uint64_t seed;
    std::size_t threads;
    std::size_t l2_resolution;
    bool baselines;
    OptimizerConfig optimizer;
};

ExperimentResult run_lhs_experiment(const LhsExperiment& e) {
    if (e.n < 2 || e.replicates == 0 || e.test_points == 0) {
        throw DomainError(e.experiment + ": need n >= 2, replicates >= 1 and test points >= 1");
    }
    e.optimizer.validate();
    ExperimentResult result;
    result.experiment = e.experiment;
    result.seed = e.seed;
    result.replicates = e.replicates;
    result.test_points = e.test_points;
    const L2Result l2 = oracle_for(e.truth, e.l2_resolution, e.seed);
    result.theta_l2 = to_vector(l2.theta);
    result.l2_floor = l2.rmse;

    std::vector<std::string> names{"gasp", "sgasp1", "sgasp2"};
    if (e.baselines) {
        names.emplace_back("l2");
        names.emplace_back("ls");
    }
    std::vector<Slots> slots;
    for (const std::string& name : names) slots.emplace_back(name, e.n, e.replicates);

    const KernelSpec kernel = KernelSpec::matern52(std::vector<double>(e.truth.p, 1.0));
    const double sqrt_n = std::sqrt(static_cast<double>(e.n));
    const std::size_t threads = e.threads ? e.threads : default_thread_count();

    parallel_for(e.replicates, threads, [&](std::size_t r) {
        const DesignSet design = maximin_lhs(e.n, e.truth.p, stream_seed(e.seed, {e.id, r, 0}));
        Engine noise = make_engine(e.seed, {e.id, r, 1});
        const linalg::Vector y = add_noise(evaluate(e.truth.reality, design), e.truth.noise_sd, noise);
        const DesignSet test = uniform(e.test_points, e.truth.p, stream_seed(e.seed, {e.id, r, 2}));
        const linalg::Vector y_test = evaluate(e.truth.reality, test);

        for (std::size_t k = 0; k < names.size(); ++k) {
            const auto t0 = Clock::now();
            OptimizerConfig opt = e.optimizer;
            opt.seed = stream_seed(e.seed, {e.id, r, 10 + k});
            CalibrationProblem prob{design, y, e.truth.simulator, e.truth.theta_bounds, kernel, ModelKind::SGaSP,
                                    LambdaZPolicy::inverse_sqrt_lambda()};
            linalg::Vector theta;
            linalg::Vector pred;
            if (names[k] == "l2" || names[k] == "ls") {
                const BaselineFit b = names[k] == "l2" ? fit_l2(prob, e.l2_resolution, opt) : fit_ls(prob, opt);
                theta = b.theta;
                pred = baseline_predict_mean(b, prob, test);
            } else {
                if (names[k] == "gasp") prob.kind = ModelKind::GaSP;
                if (names[k] == "sgasp2") prob.lambda_z = LambdaZPolicy::fixed(100.0 * sqrt_n);
                const FittedCalibration f = fit(prob, opt);
                theta = f.theta;
                pred = predict_mean(f, prob, test);
            }
            const double model_rmse = rmse(simulate_at(e.truth.simulator, test, as_span(theta)), y_test);
            slots[k].store(r, theta, rmse(pred, y_test), model_rmse, seconds_since(t0));
        }
    });
    for (const Slots& s : slots) result.methods.push_back(s.reduce(result.theta_l2));
    return result;
}

}  // namespace

ExperimentResult run_example2(const Example2Config& config) {
    const TruthFunction truth = truth_library(config.case_name);
    if (truth.name == "example1" || truth.name == "example3") {
        throw DomainError("example2: case must be case-i, case-ii, case-iii or case-iv");
    }
    const std::size_t index = truth.name == "case-i" ? 1 : truth.name == "case-ii" ? 2 : truth.name == "case-iii" ? 3 : 4;
    LhsExperiment e{"example2-" + truth.name,
                    kExample2Id + index,
                    truth,
                    config.n ? config.n : 10 * (truth.p + 1),
                    config.replicates,
                    config.test_points,
                    config.seed,
                    config.threads,
                    config.l2_resolution ? config.l2_resolution : default_l2_resolution(truth.p),
                    false,
                    config.optimizer};
    return run_lhs_experiment(e);
}

ExperimentResult run_example3(const Example3Config& config) {
    LhsExperiment e{"example3",
                    kExample3Id,
                    truth_library("example3"),
                    config.n,
                    config.replicates,
                    config.test_points,
                    config.seed,
                    config.threads,
                    config.l2_resolution,
                    config.baselines,
                    config.optimizer};
    return run_lhs_experiment(e);
}

// --- output -------------------------------------------------------------------------

namespace {

nlohmann::json vector_json(const linalg::Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

}  // namespace

std::string to_json(const ExperimentResult& result, bool include_timing) {
    nlohmann::json j;
    j["experiment"] = result.experiment;
    j["seed"] = result.seed;
    j["replicates"] = result.replicates;
    j["test_points"] = result.test_points;
    j["theta_l2"] = vector_json(result.theta_l2);
    j["l2_floor"] = result.l2_floor;
    j["methods"] = nlohmann::json::array();
    for (const MethodResult& m : result.methods) {
        nlohmann::json mj;
        mj["method"] = m.method;
        mj["n"] = m.n;
        mj["avg_rmse_pred"] = m.avg_rmse_pred;
        mj["avg_rmse_model"] = m.avg_rmse_model;
        mj["se_pred"] = m.se_pred;
        mj["se_model"] = m.se_model;
        mj["rmse_theta"] = m.rmse_theta;
        if (include_timing) mj["seconds"] = m.seconds;
        nlohmann::json reps = nlohmann::json::array();
        for (std::size_t r = 0; r < m.theta.size(); ++r) {
            reps.push_back({{"replicate", r},
                            {"theta", vector_json(m.theta[r])},
                            {"rmse_pred", m.rmse_pred[r]},
                            {"rmse_model", m.rmse_model[r]}});
        }
        mj["per_replicate"] = std::move(reps);
        j["methods"].push_back(std::move(mj));
    }
    nlohmann::json slopes = nlohmann::json::object();
    for (const auto& [method, slope] : result.slopes) slopes[method] = slope;
    j["slopes"] = std::move(slopes);
    return j.dump(2);
}

void write_long_csv(const ExperimentResult& result, std::ostream& out, bool header) {
    if (header) out << "experiment,method,n,replicate,metric,value\n";
    for (const MethodResult& m : result.methods) {
        const std::string prefix = result.experiment + "," + m.method + "," + std::to_string(m.n) + ",";
        for (std::size_t r = 0; r < m.theta.size(); ++r) {
            const std::string row = prefix + std::to_string(r) + ",";
            out << row << "rmse_pred," << format_double(m.rmse_pred[r]) << '\n';
            out << row << "rmse_model," << format_double(m.rmse_model[r]) << '\n';
            for (Eigen::Index i = 0; i < m.theta[r].size(); ++i) {
                out << row << "theta" << (i + 1) << ',' << format_double(m.theta[r][i]) << '\n';
            }
        }
        const std::string all = prefix + "all,";
        out << all << "avg_rmse_pred," << format_double(m.avg_rmse_pred) << '\n';
        out << all << "avg_rmse_model," << format_double(m.avg_rmse_model) << '\n';
        out << all << "se_pred," << format_double(m.se_pred) << '\n';
        out << all << "se_model," << format_double(m.se_model) << '\n';
        out << all << "rmse_theta," << format_double(m.rmse_theta) << '\n';
    }
}

std::string summary_table(const ExperimentResult& result) {
    std::ostringstream os;
    os << result.experiment << "  (replicates " << result.replicates << ", test points " << result.test_points
       << ", seed " << result.seed << ")\n";
    os << "theta_L2 =";
    for (Eigen::Index i = 0; i < result.theta_l2.size(); ++i) os << ' ' << std::setprecision(6) << result.theta_l2[i];
    os << "   AvgRMSE_fM floor = " << std::setprecision(4) << result.l2_floor << "\n";
    os << std::left << std::setw(10) << "method" << std::right << std::setw(8) << "n" << std::setw(16)
       << "AvgRMSE_fM+d" << std::setw(14) << "AvgRMSE_fM" << std::setw(14) << "RMSE_theta" << "\n";
    for (const MethodResult& m : result.methods) {
        os << std::left << std::setw(10) << m.method << std::right << std::setw(8) << m.n << std::fixed
           << std::setprecision(5) << std::setw(16) << m.avg_rmse_pred << std::setw(14) << m.avg_rmse_model
           << std::setw(14) << m.rmse_theta << std::defaultfloat << "\n";
    }
    for (const auto& [method, slope] : result.slopes) {
        os << "log-log slope (" << method << "): " << std::setprecision(4) << slope << "\n";
    }
    return os.str();
}

}  // namespace sgcal

// Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include "cli.hpp"
#include "sgcal/design.hpp"
#include "sgcal/estimation.hpp"
#include "sgcal/experiments.hpp"
#include "sgcal/kernel.hpp"
#include "sgcal/linalg.hpp"
#include "sgcal/models.hpp"
#include "sgcal/truth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace sgcal;
using linalg::Matrix;
using linalg::Vector;

namespace {

struct Report {
    bool ok = true;
    std::vector<std::string> notes;

    void check(bool cond, const std::string& what) {
        if (!cond) ok = false;
        notes.push_back(std::string(cond ? "  ok   " : "  FAIL ") + what);
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::mt19937_64 engine(7);

double unif(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }

DesignSet random_design(std::size_t n, std::size_t p) {
    PointMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = unif(0.0, 1.0);
    return DesignSet(std::move(x), Provenance::Uniform);
}

KernelSpec random_kernel(std::size_t p, double nugget) {
    std::vector<double> range(p);
    for (double& g : range) g = std::exp(unif(std::log(0.05), std::log(0.5)));
    return KernelSpec::matern52(range, nugget);
}

double linear_sim(std::span<const double> x, std::span<const double> t) { return t[0] + t[1] * x[0]; }

CalibrationProblem random_problem(std::size_t n, std::size_t p, ModelKind kind, double nugget) {
    const DesignSet x = maximin_lhs(n, p, static_cast<std::uint64_t>(unif(0, 1e9)), 4);
    Vector y(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = unif(-2.0, 2.0);
    return CalibrationProblem{x, y, linear_sim, Bounds{{-5.0, -5.0}, {5.0, 5.0}}, random_kernel(p, nugget), kind,
                              LambdaZPolicy::fixed(0.0)};
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// --- 1: exactness ----------------------------------------------------------------

Report exactness() {
    Report rep;
    double worst_a = 0.0;
    double worst_b = 0.0;
    double worst_c1 = 0.0;
    double worst_c2 = 0.0;
    double worst_d = 0.0;
    double worst_e = 0.0;
    double worst_f = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 9);
        const std::size_t p = 1 + static_cast<std::size_t>(trial % 2);
        const std::vector<double> theta{unif(-2.0, 2.0), unif(-2.0, 2.0)};
        const double lambda = std::exp(unif(std::log(1e-4), 0.0));
        const double lz = std::exp(unif(std::log(0.1), std::log(500.0)));

        // (a) lambda_z = 0 against GaSP.
        {
            CalibrationProblem g = random_problem(n, p, ModelKind::GaSP, kDefaultNugget);
            CalibrationProblem s = g;
            s.kind = ModelKind::SGaSP;
            std::vector<double> lr;
            for (double r : g.kernel.range) lr.push_back(std::log(r));
            worst_a = std::max(worst_a, std::abs(gasp_neg_profile_loglik(theta, lr, std::log(lambda), g) -
                                                 sgasp_neg_profile_loglik(theta, lr, std::log(lambda), 0.0, s)));
            const FittedCalibration fg = assemble_fit(g, theta, g.kernel.range, lambda);
            const FittedCalibration fs = assemble_fit(s, theta, s.kernel.range, lambda, 0.0);
            worst_a = std::max(worst_a, max_abs(fg.weights - fs.weights));
            const DesignSet xs = random_design(7, p);
            for (PredictionTarget t : {PredictionTarget::Reality, PredictionTarget::Field}) {
                const PredictiveDistribution a = gasp_predict(fg, g, xs, t);
                const PredictiveDistribution b = sgasp_predict(fs, s, xs, t);
                worst_a = std::max({worst_a, max_abs(a.mean - b.mean), max_abs(a.variance - b.variance)});
            }
        }
        // (b) noise-free S-GaSP posterior against the GaSP interpolator.
        {
            const DesignSet x = maximin_lhs(n, p, static_cast<std::uint64_t>(trial), 4);
            const KernelSpec k = random_kernel(p, kDefaultNugget);
            Vector e(static_cast<Eigen::Index>(n));
            for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = unif(-1.0, 1.0);
            const double sigma_sq = unif(0.1, 2.0);
            const DiscrepancyPosterior post(x, k, e, 0.0, lz, sigma_sq);
            const Matrix rinv = correlation_matrix(x, k).inverse();
            const DesignSet xs = random_design(7, p);
            const Vector m = post.mean(xs);
            const Vector v = post.variance(xs);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const Vector r = cross_correlation(xs.point(i), x, k);
                const auto ii = static_cast<Eigen::Index>(i);
                worst_b = std::max({worst_b, std::abs(m[ii] - r.dot(rinv * e)),
                                    std::abs(v[ii] - sigma_sq * (1.0 + k.nugget - r.dot(rinv * r)))});
            }
        }
        // (c) R_zd^{-1} = R^{-1} + (lambda_z / n) I and r_zd = (n / lambda_z)(R + (n / lambda_z) I)^{-1} r.
        {
            const DesignSet x = maximin_lhs(n, p, static_cast<std::uint64_t>(100 + trial), 4);
            const KernelSpec k = random_kernel(p, 0.0);
            const Matrix r = correlation_matrix(x, k);
            const Matrix lhs = discretized_correlation(x, k, lz).inverse();
            Matrix rhs = r.inverse();
            rhs.diagonal().array() += lz / static_cast<double>(n);
            worst_c1 = std::max(worst_c1, max_abs(lhs - rhs) / std::max(1.0, max_abs(rhs)));

            const TransformedKernel kzd(x, k, lz);
            Matrix rt = r;
            rt.diagonal().array() += static_cast<double>(n) / lz;
            const DesignSet xs = random_design(5, p);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const Vector rv = cross_correlation(xs.point(i), x, k);
                const Vector expect = (static_cast<double>(n) / lz) * rt.inverse() * rv;
                for (std::size_t j = 0; j < n; ++j) {
                    worst_c2 = std::max(worst_c2,
                                        std::abs(kzd(x.point(j), xs.point(i)) - expect[static_cast<Eigen::Index>(j)]));
                }
            }
        }
        // (d) S-GaSP mean against a GaSP predictor on the transformed kernel.
        {
            CalibrationProblem s = random_problem(n, p, ModelKind::SGaSP, 0.0);
            const FittedCalibration f = assemble_fit(s, theta, s.kernel.range, lambda, lz);
            const DesignSet xs = random_design(6, p);
            const Vector mean = sgasp_predict(f, s, xs).mean;
            const TransformedKernel kzd(s.design, s.kernel, lz);
            Matrix c = kzd.gram(s.design);
            c.diagonal().array() += static_cast<double>(n) * lambda;
            const Vector alpha = c.inverse() * s.residual(theta);
            const Vector fm = simulate_at(s.simulator, xs, theta);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                double m = fm[static_cast<Eigen::Index>(i)];
                for (std::size_t j = 0; j < n; ++j) m += kzd(xs.point(i), s.design.point(j)) * alpha[static_cast<Eigen::Index>(j)];
                worst_d = std::max(worst_d, std::abs(mean[static_cast<Eigen::Index>(i)] - m));
            }
        }
        // (e) profiled quadratic against the kernel ridge normal equations.
        {
            using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
            using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
            const DesignSet x = random_design(n, p);
            const KernelSpec k = random_kernel(p, kDefaultNugget);
            const Matrix r = correlation_matrix(x, k);
            Vector e(static_cast<Eigen::Index>(n));
            for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = unif(-1.0, 1.0);
            const double profiled = lambda * EffectiveCovariance(r, lambda, 0.0).quadratic(e);
            const LMatrix rl = r.cast<long double>();
            const LVector el = e.cast<long double>();
            const LVector w = (rl * rl + static_cast<long double>(n) * lambda * rl).ldlt().solve(rl * el);
            const long double krr = (el - rl * w).squaredNorm() / static_cast<long double>(n) + lambda * w.dot(rl * w);
            worst_e = std::max(worst_e, std::abs(profiled - static_cast<double>(krr)));
        }
        // (f) eigenvalue transform.
        {
            const DesignSet x = random_design(n, p);
            const KernelSpec k = random_kernel(p, kDefaultNugget);
            const Vector rho = linalg::sym_eigen(correlation_matrix(x, k)).values;
            const Vector got = linalg::sym_eigen(TransformedKernel(x, k, lz).gram(x)).values;
            for (Eigen::Index i = 0; i < rho.size(); ++i) {
                const double expect = rho[i] / (1.0 + lz * rho[i] / static_cast<double>(n));
                worst_f = std::max(worst_f, std::abs(got[i] - expect) / std::max(1.0, rho.maxCoeff()));
            }
        }
    }
    rep.check(worst_a <= 1e-10, "(a) lambda_z = 0 equals GaSP, max diff " + fmt(worst_a));
    rep.check(worst_b <= 1e-8, "(b) noise-free S-GaSP equals the GaSP interpolator, max diff " + fmt(worst_b));
    rep.check(worst_c1 <= 1e-9, "(c) inverse discretized correlation, max relative diff " + fmt(worst_c1));
    rep.check(worst_c2 <= 1e-9, "(c) transformed cross-correlation, max diff " + fmt(worst_c2));
    rep.check(worst_d <= 1e-8, "(d) transformed-kernel predictor, max diff " + fmt(worst_d));
    rep.check(worst_e <= 1e-8, "(e) profile likelihood equals kernel ridge minimum, max diff " + fmt(worst_e));
    rep.check(worst_f <= 1e-8, "(f) eigenvalue transform, max diff " + fmt(worst_f));
    return rep;
}

// --- 2: distributional ----------------------------------------------------------

Report distributional() {
    Report rep;
    const DesignSet x = maximin_lhs(10, 2, 31);
    const KernelSpec k = KernelSpec::matern52({0.3, 0.4});
    const std::size_t draws = 50000;
    for (double lz : {0.0, 5.0, 50.0}) {
        const double sigma_sq = 1.3;
        const Matrix d = sample_discrepancy(x, k, lz, sigma_sq, 2024, draws);
        const Vector stat = d.rowwise().squaredNorm() / 10.0;
        const double mean = stat.mean();
        const double sd = std::sqrt((stat.array() - mean).square().sum() / static_cast<double>(draws - 1));
        const double se = sd / std::sqrt(static_cast<double>(draws));
        const Vector rho = linalg::sym_eigen(correlation_matrix(x, k)).values;
        double expect = 0.0;
        for (Eigen::Index i = 0; i < rho.size(); ++i) expect += rho[i] / (1.0 + lz * rho[i] / 10.0);
        expect *= sigma_sq / 10.0;
        rep.check(std::abs(mean - expect) <= 3.0 * se, "lambda_z = " + fmt(lz) + ": Monte Carlo mean " + fmt(mean) +
                                                           ", eigenvalue formula " + fmt(expect) + ", SE " + fmt(se));
    }
    return rep;
}

// --- 3: Example 1 ----------------------------------------------------------------

Report example1() {
    Report rep;
    const ExperimentResult r = run_example1(Example1Config{});
    double slope = NAN;
    for (const auto& [m, s] : r.slopes) {
        if (m == "sgasp1") slope = s;
    }
    rep.check(slope >= -0.55 && slope <= -0.30, "(i) S-GaSP log-log slope " + fmt(slope) + " in [-0.55, -0.30]");
    const std::vector<std::size_t> sizes = Example1Config{}.sizes;
    double worst = 0.0;
    for (std::size_t n : sizes) {
        const double g = r.find("gasp", n).avg_rmse_pred;
        const double s = r.find("sgasp1", n).avg_rmse_pred;
        worst = std::max(worst, std::abs(g - s) / std::min(g, s));
    }
    rep.check(worst <= 0.02, "(ii) GaSP and S-GaSP AvgRMSE agree, worst relative gap " + fmt(worst));
    const double s0 = r.find("sgasp1", sizes.front()).rmse_theta;
    const double s1 = r.find("sgasp1", sizes.back()).rmse_theta;
    const double g0 = r.find("gasp", sizes.front()).rmse_theta;
    const double g1 = r.find("gasp", sizes.back()).rmse_theta;
    rep.check(s1 < 0.25 * s0, "(iii) S-GaSP RMSE_theta " + fmt(s0) + " -> " + fmt(s1) + " (ratio " + fmt(s1 / s0) + ")");
    rep.check(g1 > 0.5 * g0, "(iii) GaSP RMSE_theta " + fmt(g0) + " -> " + fmt(g1) + " (ratio " + fmt(g1 / g0) + ")");
    return rep;
}

// --- 4: Example 2 ----------------------------------------------------------------

Report example2() {
    Report rep;
    struct Target {
        const char* name;
        double sgasp;
        double gasp_min;
    };
    for (const Target& t : {Target{"case-i", 0.405, 0.45}, Target{"case-ii", 0.281, 0.5}}) {
        Example2Config c;
        c.case_name = t.name;
        const ExperimentResult r = run_example2(c);
        const double s = r.find("sgasp1").avg_rmse_model;
        const double g = r.find("gasp").avg_rmse_model;
        rep.check(std::abs(s - t.sgasp) <= 0.2 * t.sgasp,
                  std::string(t.name) + ": S-GaSP AvgRMSE_fM " + fmt(s) + " within 20% of " + fmt(t.sgasp));
        rep.check(g >= t.gasp_min, std::string(t.name) + ": GaSP AvgRMSE_fM " + fmt(g) + " >= " + fmt(t.gasp_min));
    }
    const std::vector<std::pair<const char*, double>> floors{
        {"case-i", 0.404}, {"case-ii", 0.277}, {"case-iii", 0.462}, {"case-iv", 0.729}};
    for (const auto& [name, expect] : floors) {
        const TruthFunction t = truth_library(name);
        const L2Result l2 = l2_minimizer(
            L2Oracle{t.reality, t.simulator, t.theta_bounds, t.p, default_l2_resolution(t.p), OptimizerConfig{}});
        rep.check(std::abs(l2.rmse - expect) <= 0.02,
                  std::string(name) + ": L2 floor " + fmt(l2.rmse) + " within 0.02 of " + fmt(expect));
    }
    return rep;
}

// --- 5: Example 3 ----------------------------------------------------------------

Report example3() {
    Report rep;
    constexpr std::uint64_t kReruns = 10;
    std::size_t ordered = 0;
    double gasp_fm = 0.0;
    double sgasp_fm = 0.0;
    double l2_fm = 0.0;
    double ls_fm = 0.0;
    for (std::uint64_t seed = 1; seed <= kReruns; ++seed) {
        Example3Config c;
        c.seed = seed;
        const ExperimentResult r = run_example3(c);
        const double g = r.find("gasp").avg_rmse_pred;
        const double s = r.find("sgasp1").avg_rmse_pred;
        const double ls = r.find("ls").avg_rmse_pred;
        const double l2 = r.find("l2").avg_rmse_pred;
        const bool ok = std::max(g, s) < ls && ls < l2;
        if (ok) ++ordered;
        gasp_fm += r.find("gasp").avg_rmse_model / kReruns;
        sgasp_fm += r.find("sgasp1").avg_rmse_model / kReruns;
        l2_fm += r.find("l2").avg_rmse_model / kReruns;
        ls_fm += r.find("ls").avg_rmse_model / kReruns;
        rep.notes.push_back("       seed " + std::to_string(seed) + ": pred gasp " + fmt(g) + ", sgasp " + fmt(s) +
                            ", ls " + fmt(ls) + ", l2 " + fmt(l2) + (ok ? "" : "  (ordering violated)"));
    }
    rep.check(ordered * 10 >= kReruns * 9,
              "ordering max(GaSP, S-GaSP) < LS < L2 in " + std::to_string(ordered) + "/" + std::to_string(kReruns) +
                  " reruns");
    rep.check(sgasp_fm < gasp_fm, "S-GaSP AvgRMSE_fM " + fmt(sgasp_fm) + " < GaSP " + fmt(gasp_fm));
    rep.check(std::abs(l2_fm - 0.129) <= 0.2 * 0.129, "L2 AvgRMSE_fM " + fmt(l2_fm) + " within 20% of 0.129");
    rep.check(std::abs(ls_fm - 0.129) <= 0.2 * 0.129, "LS AvgRMSE_fM " + fmt(ls_fm) + " within 20% of 0.129");
    const TruthFunction t = truth_library("example3");
    const L2Result l2 =
        l2_minimizer(L2Oracle{t.reality, t.simulator, t.theta_bounds, 2, default_l2_resolution(2), OptimizerConfig{}});
    rep.check(std::abs(l2.theta[0] - 6.48) <= 0.05 && std::abs(l2.theta[1] - 1.15) <= 0.05,
              "theta_L2 = (" + fmt(l2.theta[0]) + ", " + fmt(l2.theta[1]) + ")");
    return rep;
}

// --- 6: full-scale configuration - ------------------------------------------------

Report full_flag() {
    Report rep;
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run({"bench", "--help"}, out, err);
    rep.check(code == 0 && out.str().find("--full") != std::string::npos, "bench accepts --full");
    const Example1Config e1 = Example1Config::full();
    const bool sizes_ok = e1.sizes.size() == 50 && e1.sizes.front() == static_cast<std::size_t>(std::lround(std::exp(5.0))) &&
                          e1.sizes.back() == static_cast<std::size_t>(std::lround(std::exp(10.0)));
    rep.check(sizes_ok && e1.replicates == 100 && e1.test_points == 30000,
              "Example 1 full sweep: 50 sizes " + std::to_string(e1.sizes.front()) + ".." +
                  std::to_string(e1.sizes.back()) + ", N = " + std::to_string(e1.replicates));
    const Example2Config e2 = Example2Config::full("case-i", 20);
    const Example3Config e3 = Example3Config::full(30);
    rep.check(e2.replicates >= 100 && e2.test_points == 10000 && e3.replicates >= 100 && e3.test_points == 10000,
              "Examples 2 and 3 full runs use N >= 100 and 10000 test points");
    return rep;
}

// --- 7: property suites ----------------------------------------------------------

Report properties() {
    Report rep;
    const std::string cmd = std::string("\"") + SGCAL_UNIT_TESTS + "\" --test-case=\"property:*\" --no-version";
    const int status = std::system(cmd.c_str());
    rep.check(status == 0, "property test cases (1000 randomized cases each) in the unit suite");
    return rep;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Report()>>> criteria{
        {"exactness suite", exactness},
        {"distributional suite", distributional},
        {"Example 1 convergence", example1},
        {"Example 2 tables", example2},
        {"Example 3 ordering", example3},
        {"full-scale --full configuration", full_flag},
        {"property suites", properties},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    bool all = true;
    std::vector<std::string> summary;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        const Report rep = criteria[i].second();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const std::string& n : rep.notes) std::cout << n << "\n";
        const std::string line = std::string(rep.ok ? "PASS" : "FAIL") + " criterion " + std::to_string(id) + ": " +
                                 criteria[i].first + " (" + fmt(secs) + " s)";
        std::cout << line << "\n" << std::flush;
        summary.push_back(line);
        all = all && rep.ok;
    }
    std::cout << "\nsummary\n";
    for (const std::string& s : summary) std::cout << s << "\n";
    return all ? 0 : 1;
}

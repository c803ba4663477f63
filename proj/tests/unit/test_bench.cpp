#include "doctest.h"
#include "helpers.hpp"

#include "sgcal/design.hpp"
#include "sgcal/errors.hpp"
#include "sgcal/experiments.hpp"
#include "sgcal/metrics.hpp"
#include "sgcal/rng.hpp"
#include "sgcal/truth.hpp"

#include "json.hpp"

#include <cmath>
#include <algorithm>
#include <set>
#include <sstream>

using namespace sgcal;
using namespace testing;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

Example3Config tiny_example3() {
    Example3Config c;
    c.n = 12;
    c.replicates = 4;
    c.test_points = 100;
    c.seed = 9;
    c.optimizer.starts = 2;
    return c;
}

}  // namespace

TEST_CASE("truth_eg1 truncation and smoothness") {
    CHECK(std::abs(truth_eg1(0.0) - truth_eg1(0.0, 1000000)) < 1e-8);
    for (int i = 0; i < 100; ++i) {
        const double x = i / 99.0;
        CHECK(std::abs(truth_eg1(x, 10000) - truth_eg1(x, 100000)) < 1e-8);
        if (x + 1e-6 <= 1.0) CHECK(std::abs(truth_eg1(x + 1e-6) - truth_eg1(x)) < 1e-4);
    }
    double direct = 0.0;
    for (int j = 1; j <= 10; ++j) direct += 2.0 * std::pow(j, -3.0) * std::cos(M_PI * (j - 0.5) * 0.3) * std::sin(j);
    CHECK(truth_eg1(0.3, 10) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("truth library examples") {
    const std::vector<double> zero1{0.0};
    CHECK(truth_library("case-i").reality(zero1) == doctest::Approx(1.0).epsilon(1e-15));
    const std::vector<double> ones3{1.0, 1.0, 1.0};
    CHECK(truth_library("case-iii").reality(ones3) == doctest::Approx(64.0 / 27.0).epsilon(1e-12));
    const TruthFunction eg3 = truth_library("example3");
    for (double x2 : {0.0, 0.3, 1.0}) CHECK(eg3.reality(std::vector<double>{0.0, x2}) == doctest::Approx(1.0));
    CHECK(eg3.noise_sd == 0.1);
    CHECK(truth_library("example1").noise_sd == 0.05);
    for (const std::string& name : truth_names()) {
        const TruthFunction t = truth_library(name);
        CHECK(t.p >= 1);
        CHECK(t.theta_bounds.size() == t.q);
        CHECK(t.noise_sd >= 0.0);
        const std::vector<double> x(t.p, 0.5);
        CHECK(std::isfinite(t.simulator(x, t.theta_bounds.center())));
    }
    CHECK_THROWS_AS((void)truth_library("case-v"), DomainError);
}

TEST_CASE("avg_rmse_pred examples") {
    const Vector truth = vec({1.0, 2.0, 3.0});
    CHECK(avg_rmse_pred({truth, truth}, {truth}) == 0.0);
    CHECK(avg_rmse_pred({truth.array() + 0.4}, {truth}) == doctest::Approx(0.4).epsilon(1e-14));

    std::vector<Vector> preds;
    std::vector<Vector> truths;
    for (int r = 0; r < 3; ++r) {
        preds.push_back(random_vector(5));
        truths.push_back(random_vector(5));
    }
    double oracle = 0.0;
    for (int r = 0; r < 3; ++r) {
        double s = 0.0;
        for (int i = 0; i < 5; ++i) s += std::pow(preds[r][i] - truths[r][i], 2);
        oracle += std::sqrt(s / 5.0);
    }
    CHECK(std::abs(avg_rmse_pred(preds, truths) - oracle / 3.0) <= 1e-12);
}

TEST_CASE("avg_rmse_model and rmse_theta examples") {
    const auto reality = [](std::span<const double> x) { return 0.5 + x[0]; };
    const DesignSet test = uniform(50, 1, 3);
    CHECK(avg_rmse_model({vec({0.5, 1.0})}, reality, linear_sim, test) <= 1e-15);
    const Vector th = vec({0.2, 0.8});
    double s = 0.0;
    for (std::size_t i = 0; i < 50; ++i) s += std::pow(linear_sim(test.point(i), std::span<const double>(th.data(), 2)) - reality(test.point(i)), 2);
    CHECK(avg_rmse_model({th}, reality, linear_sim, test) == doctest::Approx(std::sqrt(s / 50.0)).epsilon(1e-12));

    const Vector l2 = vec({1.0, 2.0});
    CHECK(rmse_theta({l2, l2}, l2) == 0.0);
    CHECK(rmse_theta({vec({4.0, 6.0})}, l2) == doctest::Approx(5.0).epsilon(1e-15));
    const std::vector<Vector> three{vec({1.0, 3.0}), vec({2.0, 2.0}), vec({1.0, 1.5})};
    CHECK(rmse_theta(three, l2) == doctest::Approx(std::sqrt((1.0 + 1.0 + 0.25) / 3.0)).epsilon(1e-14));

    CHECK(standard_error({1.0}) == 0.0);
    CHECK(standard_error({1.0, 3.0}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(loglog_slope({1.0, 10.0, 100.0}, {1.0, 0.1, 0.01}) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("experiments are reproducible and independent of the thread count") {
    Example3Config c = tiny_example3();
    c.threads = 1;
    const std::string one = to_json(run_example3(c), false);
    c.threads = 3;
    const std::string three = to_json(run_example3(c), false);
    CHECK(one == three);
    CHECK(one == to_json(run_example3(c), false));
    c.seed = 10;
    CHECK(one != to_json(run_example3(c), false));
}

TEST_CASE("experiment output schema") {
    const ExperimentResult r = run_example3(tiny_example3());
    const nlohmann::json j = nlohmann::json::parse(to_json(r));
    CHECK(j.at("experiment").get<std::string>() == r.experiment);
    CHECK(j.at("replicates").get<std::size_t>() == 4);
    CHECK(j.at("methods").size() == 5);
    CHECK(j.at("methods")[0].at("per_replicate").size() == 4);
    CHECK(j.at("methods")[0].at("per_replicate")[0].contains("rmse_model"));

    std::ostringstream csv;
    write_long_csv(r, csv);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "experiment,method,n,replicate,metric,value");
    std::set<std::string> methods;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 5);
        methods.insert(line.substr(line.find(',') + 1, line.find(',', line.find(',') + 1) - line.find(',') - 1));
    }
    CHECK(rows > 0);
    CHECK(methods == std::set<std::string>{"gasp", "sgasp1", "sgasp2", "l2", "ls"});
    CHECK(!summary_table(r).empty());
}

TEST_CASE("property: no training point appears among the test points of LHS experiments") {
    int failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::uint64_t seed = static_cast<std::uint64_t>(trial);
        const std::uint64_t id = trial % 2 ? 3 : 21;
        const std::size_t p = trial % 2 ? 2 : 1;
        const std::size_t r = pick(0, 49);
        const DesignSet design = maximin_lhs(30, p, stream_seed(seed, {id, r, 0}), 2);
        const DesignSet test = uniform(200, p, stream_seed(seed, {id, r, 2}));
        std::set<std::vector<double>> train;
        for (std::size_t i = 0; i < design.size(); ++i) train.emplace(design.point(i).begin(), design.point(i).end());
        for (std::size_t i = 0; i < test.size(); ++i) {
            if (train.count(std::vector<double>(test.point(i).begin(), test.point(i).end()))) {
                ++failures;
                break;
            }
        }
    }
    CHECK(failures == 0);
}

TEST_CASE("every method's AvgRMSE of the simulator is above the L2 floor up to two standard errors") {
    Example2Config c;
    c.case_name = "case-i";
    c.replicates = 12;
    c.test_points = 500;
    c.seed = 4;
    c.optimizer.starts = 4;
    const ExperimentResult r = run_example2(c);
    for (const MethodResult& m : r.methods) CHECK(m.avg_rmse_model >= r.l2_floor - 2.0 * m.se_model);
}

#include "cli.hpp"

#include "sgcal/csv.hpp"
#include "sgcal/design.hpp"
#include "sgcal/errors.hpp"
#include "sgcal/estimation.hpp"
#include "sgcal/experiments.hpp"
#include "sgcal/external_simulator.hpp"
#include "sgcal/models.hpp"
#include "sgcal/truth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace sgcal::cli {

namespace {

using json = nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open '" + path + "' for writing");
    return out;
}

// --- simulators -----------------------------------------------------------------

struct SimulatorChoice {
    std::string name;     // built-in name, or "external"
    std::string command;  // external only
    std::size_t q = 0;
    Bounds bounds;
    Simulator fn;
};

SimulatorChoice resolve_simulator(const std::string& name, const std::string& command, std::size_t p,
                                  std::optional<std::size_t> q_external) {
    SimulatorChoice c;
    c.name = name;
    c.command = command;
    if (name == "external") {
        if (command.empty()) throw UsageError("--simulator external needs --simulator-command");
        if (!q_external) throw UsageError("--simulator external needs --q");
        c.q = *q_external;
        c.fn = make_external_simulator(command, p, c.q);
    } else if (name == "constant") {
        c.q = 1;
        c.fn = [](std::span<const double>, std::span<const double> t) { return t[0]; };
    } else if (name == "linear") {
        c.q = p + 1;
        c.fn = [](std::span<const double> x, std::span<const double> t) {
            double v = t[0];
            for (std::size_t i = 0; i < x.size(); ++i) v += t[i + 1] * x[i];
            return v;
        };
    } else {
        const std::vector<std::string> names = truth_names();
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            throw UsageError("unknown simulator '" + name +
                             "' (expected constant, linear, external, example1, case-i, case-ii, case-iii, case-iv "
                             "or example3)");
        }
        const TruthFunction t = truth_library(name);
        if (t.p != p) {
            throw UsageError("simulator '" + name + "' expects " + std::to_string(t.p) + " inputs, data has " +
                             std::to_string(p));
        }
        c.q = t.q;
        c.bounds = t.theta_bounds;
        c.fn = t.simulator;
    }
    if (c.bounds.size() == 0) {
        c.bounds.lower.assign(c.q, -10.0);
        c.bounds.upper.assign(c.q, 10.0);
    }
    return c;
}

LambdaZPolicy parse_lambda_z(const std::string& text) {
    if (text == "inverse-sqrt-lambda") return LambdaZPolicy::inverse_sqrt_lambda();
    if (text.rfind("sqrt-n:", 0) == 0) return LambdaZPolicy::scaled_sqrt_n(parse_double(text.substr(7)));
    double v;
    try {
        v = parse_double(text);
    } catch (const ParseError&) {
        throw UsageError("--lambda-z must be a number, inverse-sqrt-lambda or sqrt-n:C (got '" + text + "')");
    }
    if (!(v >= 0.0)) throw UsageError("--lambda-z must be non-negative");
    return LambdaZPolicy::fixed(v);
}

std::string policy_rule(LambdaZPolicy::Rule r) {
    switch (r) {
        case LambdaZPolicy::Rule::Fixed: return "fixed";
        case LambdaZPolicy::Rule::InverseSqrtLambda: return "inverse-sqrt-lambda";
        case LambdaZPolicy::Rule::ScaledSqrtN: return "sqrt-n";
    }
    return "fixed";
}

LambdaZPolicy::Rule parse_rule(const std::string& s) {
    if (s == "fixed") return LambdaZPolicy::Rule::Fixed;
    if (s == "inverse-sqrt-lambda") return LambdaZPolicy::Rule::InverseSqrtLambda;
    if (s == "sqrt-n") return LambdaZPolicy::Rule::ScaledSqrtN;
    throw ParseError("model file: unknown lambda_z rule '" + s + "'", 0);
}

std::string smoothness_text(Smoothness s) {
    switch (s) {
        case Smoothness::Half: return "1/2";
        case Smoothness::ThreeHalves: return "3/2";
        case Smoothness::FiveHalves: return "5/2";
    }
    return "5/2";
}

json vec(const linalg::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

linalg::Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const linalg::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string join(const linalg::Vector& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
    return s;
}

std::string join(const std::vector<double>& v) { return join(to_vector(v)); }

// --- fit ------------------------------------------------------------------------

struct FitArgs {
    std::string data;
    std::string out = "model.json";
    std::string model = "sgasp";
    std::string lambda_z = "inverse-sqrt-lambda";
    std::string simulator = "linear";
    std::string simulator_command;
    std::optional<std::size_t> q;
    std::vector<double> theta_lower;
    std::vector<double> theta_upper;
    std::string smoothness = "5/2";
    double nugget = kDefaultNugget;
    std::size_t starts = 10;
    std::size_t max_iterations = 200;
    std::uint64_t seed = 0;
};

void register_fit(CLI::App& app, FitArgs& a) {
    app.add_option("--data", a.data, "CSV with columns x1..xp,y (inputs in [0,1])")->required();
    app.add_option("--out", a.out, "Model file to write (JSON)");
    app.add_option("--model", a.model, "gasp or sgasp");
    app.add_option("--lambda-z", a.lambda_z, "S-GaSP scaling: a number, inverse-sqrt-lambda, or sqrt-n:C");
    app.add_option("--simulator", a.simulator,
                   "constant, linear, external, or a library name (example1, case-i..case-iv, example3)");
    app.add_option("--simulator-command", a.simulator_command, "Command for --simulator external");
    app.add_option("--q", a.q, "Number of calibration parameters for an external simulator");
    app.add_option("--theta-lower", a.theta_lower, "Lower bounds for theta")->delimiter(',');
    app.add_option("--theta-upper", a.theta_upper, "Upper bounds for theta")->delimiter(',');
    app.add_option("--smoothness", a.smoothness, "Matern smoothness 1/2, 3/2 or 5/2");
    app.add_option("--nugget", a.nugget, "Nugget added to the correlation diagonal");
    app.add_option("--starts", a.starts, "Optimizer starts");
    app.add_option("--max-iterations", a.max_iterations, "Iterations per start");
    app.add_option("--seed", a.seed, "Seed for the start points");
}

json model_json(const FittedCalibration& f, const CalibrationProblem& prob, const SimulatorChoice& sim) {
    json j;
    j["format"] = "sgcal-model";
    j["version"] = 1;
    j["kind"] = std::string(to_string(f.kind));
    j["theta"] = vec(f.theta);
    j["range"] = f.kernel.range;
    std::vector<std::string> smooth;
    for (Smoothness s : f.kernel.smoothness) smooth.push_back(smoothness_text(s));
    j["smoothness"] = smooth;
    j["nugget"] = f.kernel.nugget;
    j["lambda"] = f.lambda;
    j["lambda_z"] = f.lambda_z;
    j["lambda_z_policy"] = {{"rule", policy_rule(prob.lambda_z.rule)}, {"constant", prob.lambda_z.constant}};
    j["sigma0_sq"] = f.sigma0_sq;
    j["signal_variance"] = f.signal_variance();
    j["objective"] = f.objective;
    j["degenerate"] = f.degenerate;
    j["weights"] = vec(f.weights);
    j["simulator"] = {{"name", sim.name},
                      {"command", sim.command},
                      {"q", sim.q},
                      {"theta_lower", prob.theta_bounds.lower},
                      {"theta_upper", prob.theta_bounds.upper}};
    json xs = json::array();
    for (std::size_t i = 0; i < prob.n(); ++i) {
        const auto pt = prob.design.point(i);
        xs.push_back(std::vector<double>(pt.begin(), pt.end()));
    }
    j["data"] = {{"x", xs}, {"y", vec(prob.observations)}};
    return j;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
    std::ifstream in = open_input(a.data);
    Dataset data = read_dataset(in);
    const std::size_t p = data.design.dims();
    SimulatorChoice sim = resolve_simulator(a.simulator, a.simulator_command, p, a.q);
    if (!a.theta_lower.empty()) sim.bounds.lower = a.theta_lower;
    if (!a.theta_upper.empty()) sim.bounds.upper = a.theta_upper;
    if (sim.bounds.size() != sim.q || sim.bounds.upper.size() != sim.q) {
        throw UsageError("theta bounds need " + std::to_string(sim.q) + " entries each");
    }
    const Smoothness nu = parse_smoothness(a.smoothness);
    KernelSpec kernel{std::vector<Smoothness>(p, nu), std::vector<double>(p, 1.0), a.nugget};
    CalibrationProblem prob{std::move(data.design), std::move(data.y), sim.fn, sim.bounds, kernel,
                            parse_model_kind(a.model), parse_lambda_z(a.lambda_z)};
    OptimizerConfig opt;
    opt.starts = a.starts;
    opt.max_iterations = a.max_iterations;
    opt.seed = a.seed;
    const FittedCalibration f = fit(prob, opt);

    std::ofstream file = open_output(a.out);
    file << model_json(f, prob, sim).dump(2) << '\n';
    out << "model:     " << to_string(f.kind) << "\n";
    out << "theta:     " << join(f.theta) << "\n";
    out << "gamma:     " << join(f.kernel.range) << "\n";
    out << "lambda:    " << format_double(f.lambda) << "\n";
    out << "lambda_z:  " << format_double(f.lambda_z) << "\n";
    out << "sigma0^2:  " << format_double(f.sigma0_sq) << "\n";
    out << "objective: " << format_double(f.objective) << (f.degenerate ? "  (degenerate: perfect fit)" : "")
        << "\n";
    out << "wrote " << a.out << "\n";
    return kExitOk;
}

// --- predict --------------------------------------------------------------------

struct PredictArgs {
    std::string model;
    std::string points;
    std::string out = "predictions.csv";
};

void register_predict(CLI::App& app, PredictArgs& a) {
    app.add_option("--model", a.model, "Model file written by fit")->required();
    app.add_option("--points", a.points, "CSV with columns x1..xp")->required();
    app.add_option("--out", a.out, "Predictions CSV to write");
}

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("model file: missing '") + key + "'", 0);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: bad '") + key + "': " + e.what(), 0);
    }
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
    std::ifstream model_in = open_input(a.model);
    json j;
    try {
        j = json::parse(model_in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what(), 0);
    }
    if (!j.is_object() || j.value("format", "") != "sgcal-model") throw ParseError("not an sgcal model file", 0);

    const auto xs = field<std::vector<std::vector<double>>>(j["data"], "x");
    const auto ys = field<std::vector<double>>(j["data"], "y");
    if (xs.empty() || xs.size() != ys.size()) throw ParseError("model file: inconsistent training data", 0);
    const std::size_t p = xs.front().size();
    PointMatrix px(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].size() != p) throw ParseError("model file: ragged training inputs", 0);
        for (std::size_t k = 0; k < p; ++k) px(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = xs[i][k];
    }

    const json& sj = j["simulator"];
    const auto sim_name = field<std::string>(sj, "name");
    SimulatorChoice sim = resolve_simulator(sim_name, field<std::string>(sj, "command"), p, field<std::size_t>(sj, "q"));
    sim.bounds = {field<std::vector<double>>(sj, "theta_lower"), field<std::vector<double>>(sj, "theta_upper")};

    std::vector<Smoothness> smooth;
    for (const std::string& s : field<std::vector<std::string>>(j, "smoothness")) smooth.push_back(parse_smoothness(s));
    KernelSpec kernel{smooth, field<std::vector<double>>(j, "range"), field<double>(j, "nugget")};
    const json& pj = j["lambda_z_policy"];
    LambdaZPolicy policy{parse_rule(field<std::string>(pj, "rule")), field<double>(pj, "constant")};
    CalibrationProblem prob{DesignSet(std::move(px), Provenance::File),
                            to_vector(ys),
                            sim.fn,
                            sim.bounds,
                            kernel,
                            parse_model_kind(field<std::string>(j, "kind")),
                            policy};
    const auto theta = field<std::vector<double>>(j, "theta");
    const FittedCalibration f =
        assemble_fit(prob, theta, kernel.range, field<double>(j, "lambda"), field<double>(j, "lambda_z"));

    std::ifstream points_in = open_input(a.points);
    const DesignSet xstar = read_points(points_in);
    if (xstar.dims() != p) {
        throw UsageError("test points have " + std::to_string(xstar.dims()) + " inputs, model expects " +
                         std::to_string(p));
    }
    const PredictiveDistribution reality = predict(f, prob, xstar, PredictionTarget::Reality);
    const PredictiveDistribution fieldp = predict(f, prob, xstar, PredictionTarget::Field);
    std::ofstream file = open_output(a.out);
    write_predictions(file, xstar, reality, fieldp);
    out << "wrote " << xstar.size() << " predictions to " << a.out << "\n";
    return kExitOk;
}

// --- bench ----------------------------------------------------------------------

struct BenchArgs {
    std::string suite;
    bool full = false;
    std::uint64_t seed = 0;
    std::string out = "bench-results";
    std::string mode = "fixed";
    std::string cases = "all";
    std::optional<std::size_t> replicates;
    std::optional<std::size_t> n;
    std::vector<std::size_t> sizes;
    std::optional<std::size_t> test_points;
    std::size_t threads = 0;
};

const std::vector<std::string> kSuites{"example1", "example2", "example3"};

void register_bench(CLI::App& app, BenchArgs& a) {
    app.add_option("suite", a.suite, "example1, example2 or example3")->required();
    app.add_flag("--full", a.full, "Large replicate counts, test sizes and sample-size sweeps");
    app.add_option("--seed", a.seed, "Master seed");
    app.add_option("--out", a.out, "Output directory");
    app.add_option("--mode", a.mode, "example1: fixed or mle");
    app.add_option("--case", a.cases, "example2: i, ii, iii, iv or all");
    app.add_option("--replicates", a.replicates, "Override the replicate count");
    app.add_option("--n", a.n, "Override the sample size (example2, example3)");
    app.add_option("--sizes", a.sizes, "example1: comma-separated sample sizes")->delimiter(',');
    app.add_option("--test-points", a.test_points, "Override the number of test points");
    app.add_option("--threads", a.threads, "Worker threads (default: SGCAL_THREADS or all cores)");
}

void emit(const ExperimentResult& r, const std::string& dir, std::ostream& out) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base = std::filesystem::path(dir) / r.experiment;
    std::ofstream js = open_output(base.string() + ".json");
    js << to_json(r) << '\n';
    std::ofstream csv = open_output(base.string() + ".csv");
    write_long_csv(r, csv);
    out << summary_table(r) << "wrote " << base.string() << ".json and .csv\n\n";
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    if (std::find(kSuites.begin(), kSuites.end(), a.suite) == kSuites.end()) {
        throw UsageError("unknown suite '" + a.suite + "'; available suites: example1, example2, example3");
    }
    if (a.suite == "example1") {
        Example1Config c = a.full ? Example1Config::full() : Example1Config{};
        if (a.mode == "mle") {
            c.mode = Example1Config::Mode::Mle;
        } else if (a.mode != "fixed") {
            throw UsageError("--mode must be fixed or mle");
        }
        c.seed = a.seed;
        c.threads = a.threads;
        if (a.replicates) c.replicates = *a.replicates;
        if (a.test_points) c.test_points = *a.test_points;
        if (!a.sizes.empty()) {
            if (std::find(a.sizes.begin(), a.sizes.end(), std::size_t{0}) != a.sizes.end()) {
                throw UsageError("--sizes must be positive");
            }
            c.sizes = a.sizes;
        }
        emit(run_example1(c), a.out, out);
    } else if (a.suite == "example2") {
        std::vector<std::string> cases;
        if (a.cases == "all") {
            cases = {"case-i", "case-ii", "case-iii", "case-iv"};
        } else if (a.cases == "i" || a.cases == "ii" || a.cases == "iii" || a.cases == "iv") {
            cases = {"case-" + a.cases};
        } else {
            throw UsageError("--case must be i, ii, iii, iv or all");
        }
        for (const std::string& name : cases) {
            const std::size_t p = truth_library(name).p;
            std::vector<std::size_t> sizes{a.n.value_or(10 * (p + 1))};
            if (a.full && !a.n) sizes.push_back(20 * (p + 1));
            for (std::size_t n : sizes) {
                Example2Config c = a.full ? Example2Config::full(name, n) : Example2Config{};
                c.case_name = name;
                c.n = n;
                c.seed = a.seed;
                c.threads = a.threads;
                if (a.replicates) c.replicates = *a.replicates;
                if (a.test_points) c.test_points = *a.test_points;
                ExperimentResult r = run_example2(c);
                r.experiment += "-n" + std::to_string(n);
                emit(r, a.out, out);
            }
        }
    } else {
        std::vector<std::size_t> sizes{a.n.value_or(30)};
        if (a.full && !a.n) sizes.push_back(60);
        for (std::size_t n : sizes) {
            Example3Config c = a.full ? Example3Config::full(n) : Example3Config{};
            c.n = n;
            c.seed = a.seed;
            c.threads = a.threads;
            if (a.replicates) c.replicates = *a.replicates;
            if (a.test_points) c.test_points = *a.test_points;
            ExperimentResult r = run_example3(c);
            r.experiment += "-n" + std::to_string(n);
            emit(r, a.out, out);
        }
    }
    return kExitOk;
}

// --- design ---------------------------------------------------------------------

struct DesignArgs {
    std::string kind = "lhs";
    std::size_t n = 10;
    std::size_t p = 1;
    std::uint64_t seed = 0;
    std::size_t restarts = 20;
    std::string out;
    std::string check;
};

void register_design(CLI::App& app, DesignArgs& a) {
    app.add_option("--kind", a.kind, "grid, lhs or uniform");
    app.add_option("--n", a.n, "Points (per axis for grid)");
    app.add_option("--p", a.p, "Input dimension");
    app.add_option("--seed", a.seed, "Seed for lhs and uniform");
    app.add_option("--restarts", a.restarts, "Maximin LHS restarts");
    app.add_option("--out", a.out, "CSV to write (default: standard output)");
    app.add_option("--check", a.check, "Verify that a design CSV is a Latin hypercube and exit");
}

int cmd_design(const DesignArgs& a, std::ostream& out) {
    if (!a.check.empty()) {
        std::ifstream in = open_input(a.check);
        const DesignSet d = read_points(in);
        const bool ok = is_latin_hypercube(d.points());
        out << (ok ? "latin hypercube: yes" : "latin hypercube: no") << " (n = " << d.size() << ", p = " << d.dims()
            << ", min distance = " << format_double(min_pairwise_distance(d.points())) << ")\n";
        return ok ? kExitOk : kExitUsage;
    }
    if (a.n == 0 || a.p == 0) throw UsageError("--n and --p must be positive");
    std::optional<DesignSet> d;
    if (a.kind == "grid") {
        d.emplace(equispaced(a.n, a.p));
    } else if (a.kind == "lhs") {
        d.emplace(maximin_lhs(a.n, a.p, a.seed, a.restarts));
    } else if (a.kind == "uniform") {
        d.emplace(uniform(a.n, a.p, a.seed));
    } else {
        throw UsageError("--kind must be grid, lhs or uniform");
    }
    if (a.out.empty()) {
        write_points(out, *d);
    } else {
        std::ofstream file = open_output(a.out);
        write_points(file, *d);
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Calibration of imperfect computer models with GaSP and S-GaSP discrepancies", "sgcal"};
    app.set_config("--config", "", "INI file with [fit], [predict], [bench] or [design] sections");
    app.require_subcommand(1);
    FitArgs fit_args;
    PredictArgs predict_args;
    BenchArgs bench_args;
    DesignArgs design_args;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Estimate theta, gamma, lambda and sigma0^2 from field data");
    CLI::App* predict_cmd = app.add_subcommand("predict", "Predict the reality and field data at new inputs");
    CLI::App* bench_cmd = app.add_subcommand("bench", "Run a simulation study");
    CLI::App* design_cmd = app.add_subcommand("design", "Generate or check an input design");
    register_fit(*fit_cmd, fit_args);
    register_predict(*predict_cmd, predict_args);
    register_bench(*bench_cmd, bench_args);
    register_design(*design_cmd, design_args);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit_args, out);
        if (predict_cmd->parsed()) return cmd_predict(predict_args, out);
        if (bench_cmd->parsed()) return cmd_bench(bench_args, out);
        return cmd_design(design_args, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NotPositiveDefinite& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const OptimizationFailed& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace sgcal::cli

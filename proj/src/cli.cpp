#include "bsimplex/cli.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "bsimplex/errors.hpp"
#include "bsimplex/oracle.hpp"
#include "bsimplex/sampler.hpp"
#include "bsimplex/specfun.hpp"

namespace bsimplex::cli {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20240601;

json number(double v)
{
    if (!std::isfinite(v)) return nullptr;
    return v;
}

double read_number(const json& v, const char* what)
{
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) throw ParseError(std::string("result document: ") + what + " is not a number");
    return v.get<double>();
}

json per_param(const std::array<double, kNumParams>& v)
{
    json o = json::object();
    for (std::size_t j = 0; j < kNumParams; ++j) o[param_name(j)] = number(v[j]);
    return o;
}

std::array<double, kNumParams> read_per_param(const json& doc, const char* key)
{
    if (!doc.contains(key) || !doc[key].is_object()) {
        throw ParseError(std::string("result document: missing object '") + key + "'");
    }
    std::array<double, kNumParams> v{};
    for (std::size_t j = 0; j < kNumParams; ++j) {
        if (!doc[key].contains(param_name(j))) {
            throw ParseError(std::string("result document: '") + key + "' lacks " + param_name(j));
        }
        v[j] = read_number(doc[key][param_name(j)], key);
    }
    return v;
}

json describe(const std::vector<double>& y)
{
    const double n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    return {{"mean", mean}, {"sd", n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0}, {"min", *lo}, {"max", *hi}};
}

// Writes to the named file, or to `fallback` when the name is empty.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback)
    {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw IoError("cannot open '" + path + "' for writing");
        stream_ = file_.get();
    }
    std::ostream& get() { return *stream_; }
    void close(const std::string& path)
    {
        if (!file_) return;
        file_->close();
        if (!*file_) throw IoError("error writing '" + path + "'");
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

struct ThetaFlags {
    double mu1 = 0.0, mu2 = 0.0, s1 = 0.0, s2 = 0.0, lambda = 0.0;

    void add_to(CLI::App& app)
    {
        app.add_option("--mu1", mu1, "mean of y1, in (0, 1)")->required();
        app.add_option("--mu2", mu2, "mean of y2, in (0, 1)")->required();
        app.add_option("--s1", s1, "dispersion sigma1^2 > 0")->required();
        app.add_option("--s2", s2, "dispersion sigma2^2 > 0")->required();
        app.add_option("--lambda", lambda, "FGM dependence in [-1, 1]")->required();
    }
    BivParams theta() const { return BivParams(mu1, mu2, s1, s2, lambda); }
};

void print_fit_table(std::ostream& out, const estimate::FitResult& r)
{
    const auto e = r.estimates.to_array();
    out << std::left << std::setw(10) << "parameter" << std::right << std::setw(12) << "estimate" << std::setw(12)
        << "std.error" << std::setw(26) << "confidence interval" << '\n';
    out << std::fixed << std::setprecision(4);
    for (std::size_t j = 0; j < kNumParams; ++j) {
        out << std::left << std::setw(10) << param_name(j) << std::right << std::setw(12) << e[j] << std::setw(12)
            << r.std_errors[j] << "    (" << r.ci[j].first << " ; " << r.ci[j].second << ")"
            << (r.se_reliable[j] ? "" : "  *") << '\n';
    }
    out << "E(y1 y2) = " << r.e_xy << ", loglik = " << r.loglik << ", n = " << r.n << '\n';
    out << std::defaultfloat;
    if (!r.converged || !r.message.empty()) out << r.message << '\n';
}

int cmd_fit(const std::string& input, double level, int max_iter, const std::string& out_path, std::ostream& out)
{
    const Dataset data = read_dataset(input);
    estimate::FitOptions opt;
    opt.level = level;
    opt.max_iter = max_iter;
    const auto r = estimate::fit(data, opt);
    const json doc = result_document(r, data);
    if (out_path.empty()) {
        out << doc.dump(2) << '\n';
    } else {
        Sink sink(out_path, out);
        sink.get() << doc.dump(2) << '\n';
        sink.close(out_path);
        print_fit_table(out, r);
    }
    return r.converged ? kOk : kNumeric;
}

int cmd_moment(const BivParams& th, bool with_oracle, bool with_published, std::ostream& out)
{
    const double closed = bivariate::joint_moment(th);
    out << "e_xy " << format_double(closed) << '\n';
    if (with_oracle) {
        const double q = oracle::numeric_joint_moment(th);
        out << "oracle " << format_double(q) << '\n';
        out << "rel_diff " << format_double(std::abs(closed - q) / std::abs(q)) << '\n';
    }
    if (with_published) out << "published " << format_double(bivariate::published_joint_moment(th)) << '\n';
    return kOk;
}

struct GridScenario {
    const char* label;
    double mu, s2, lambda;
};

// Three parameter vectors under each of three dependence settings. The
// third vector's dispersion is sqrt(11) itself.
const double kSqrt11 = std::sqrt(11.0);
const std::array<GridScenario, 9> kFullGrid = {{
    {"S1-theta1", 0.5, 2.0, 1.0},
    {"S1-theta2", 0.5, 5.0, 1.0},
    {"S1-theta3", 0.9, kSqrt11, 1.0},
    {"S2-theta1", 0.5, 2.0, -1.0},
    {"S2-theta2", 0.5, 5.0, -1.0},
    {"S2-theta3", 0.9, kSqrt11, -1.0},
    {"S3-theta1", 0.5, 2.0, 0.0},
    {"S3-theta2", 0.5, 5.0, 0.0},
    {"S3-theta3", 0.9, kSqrt11, 0.0},
}};

int cmd_simulate(const std::string& scenario_path, bool full_grid, std::optional<std::size_t> reps,
                 std::optional<std::uint64_t> seed, unsigned threads, const std::string& out_path, std::ostream& out)
{
    std::vector<std::pair<std::string, montecarlo::ScenarioConfig>> runs;
    if (full_grid) {
        for (const auto& s : kFullGrid) {
            montecarlo::ScenarioConfig cfg;
            cfg.theta = BivParams(s.mu, s.mu, s.s2, s.s2, s.lambda);
            cfg.sizes = {50, 100, 150, 200, 1000};
            cfg.reps = 1000;
            runs.emplace_back(s.label, cfg);
        }
    } else {
        if (scenario_path.empty()) throw CLI::RequiredError("--scenario (or --full-grid)");
        auto cfg = read_scenario(scenario_path);
        std::ifstream in(scenario_path);
        const json doc = json::parse(in, nullptr, false);
        runs.emplace_back(doc.is_object() && doc.contains("name") ? doc["name"].get<std::string>() : "scenario", cfg);
    }
    Sink sink(out_path, out);
    write_mc_header(sink.get());
    for (auto& [label, cfg] : runs) {
        if (reps) cfg.reps = *reps;
        if (seed) cfg.seed = *seed;
        cfg.threads = threads;
        write_mc_rows(sink.get(), label, montecarlo::run_scenario(cfg));
        sink.get().flush();
    }
    sink.close(out_path);
    return kOk;
}

int cmd_check(double perturb, std::ostream& out)
{
    std::optional<specfun::testing::ScopedStruvePerturbation> hook;
    if (perturb != 0.0) hook.emplace(perturb);
    int failures = 0;
    for (const auto& r : oracle::battery()) {
        out << (r.pass ? "PASS " : "FAIL ") << r.name << "  got " << format_double(r.got) << " want "
            << format_double(r.want) << " rel " << format_double(r.rel_error) << " tol " << format_double(r.tolerance)
            << '\n';
        failures += r.pass ? 0 : 1;
    }
    out << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << '\n';
    return failures == 0 ? kOk : kNumeric;
}

}  // namespace

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

json result_document(const estimate::FitResult& fit, const Dataset& data)
{
    std::array<double, kNumParams> lower{}, upper{};
    std::array<double, kNumParams> reliable{};
    for (std::size_t j = 0; j < kNumParams; ++j) {
        lower[j] = fit.ci[j].first;
        upper[j] = fit.ci[j].second;
        reliable[j] = fit.se_reliable[j] ? 1.0 : 0.0;
    }
    json rel = json::object();
    for (std::size_t j = 0; j < kNumParams; ++j) rel[param_name(j)] = reliable[j] != 0.0;
    json vcov = json::array();
    for (int i = 0; i < 5; ++i) {
        json row = json::array();
        for (int j = 0; j < 5; ++j) row.push_back(number(fit.vcov(i, j)));
        vcov.push_back(row);
    }
    return {
        {"estimates", per_param(fit.estimates.to_array())},
        {"std_errors", per_param(fit.std_errors)},
        {"ci_lower", per_param(lower)},
        {"ci_upper", per_param(upper)},
        {"level", fit.level},
        {"loglik", number(fit.loglik)},
        {"converged", fit.converged},
        {"iterations", fit.iterations},
        {"e_xy", number(fit.e_xy)},
        {"n", fit.n},
        {"lambda_at_boundary", fit.lambda_at_boundary},
        {"se_reliable", rel},
        {"max_abs_score", number(fit.max_abs_score)},
        {"vcov", vcov},
        {"message", fit.message},
        {"descriptive", {{"y1", describe(data.column1())}, {"y2", describe(data.column2())}}},
    };
}

estimate::FitResult parse_result_document(const json& doc)
{
    if (!doc.is_object()) throw ParseError("result document: not an object");
    estimate::FitResult r;
    try {
        r.estimates = BivParams::from_array(read_per_param(doc, "estimates"));
        r.std_errors = read_per_param(doc, "std_errors");
        const auto lo = read_per_param(doc, "ci_lower");
        const auto hi = read_per_param(doc, "ci_upper");
        for (std::size_t j = 0; j < kNumParams; ++j) r.ci[j] = {lo[j], hi[j]};
        r.level = read_number(doc.at("level"), "level");
        r.loglik = read_number(doc.at("loglik"), "loglik");
        r.converged = doc.at("converged").get<bool>();
        r.iterations = doc.at("iterations").get<int>();
        r.e_xy = read_number(doc.at("e_xy"), "e_xy");
        r.n = doc.at("n").get<std::size_t>();
        r.lambda_at_boundary = doc.value("lambda_at_boundary", false);
        r.max_abs_score = doc.contains("max_abs_score") ? read_number(doc["max_abs_score"], "max_abs_score") : 0.0;
        r.message = doc.value("message", std::string());
        if (doc.contains("se_reliable")) {
            for (std::size_t j = 0; j < kNumParams; ++j) r.se_reliable[j] = doc["se_reliable"].at(param_name(j)).get<bool>();
        }
        if (doc.contains("vcov")) {
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) r.vcov(i, j) = read_number(doc["vcov"].at(i).at(j), "vcov");
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("result document: ") + e.what());
    }
    return r;
}

montecarlo::ScenarioConfig parse_scenario(const json& doc)
{
    if (!doc.is_object()) throw ParseError("scenario: expected a JSON object");
    montecarlo::ScenarioConfig cfg;
    try {
        const auto& theta = doc.at("theta");
        if (!theta.is_array() || theta.size() != kNumParams) throw ParseError("scenario: theta needs 5 numbers");
        std::array<double, kNumParams> v{};
        for (std::size_t j = 0; j < kNumParams; ++j) v[j] = theta.at(j).get<double>();
        cfg.theta = BivParams::from_array(v);
        cfg.sizes = doc.at("sizes").get<std::vector<std::size_t>>();
        cfg.reps = doc.at("reps").get<std::size_t>();
        cfg.seed = doc.value("seed", kDefaultSeed);
        cfg.level = doc.value("level", 0.95);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    if (cfg.reps < 1) detail::domain_fail("scenario", "reps must be at least 1");
    if (cfg.sizes.empty()) detail::domain_fail("scenario", "sizes is empty");
    for (std::size_t n : cfg.sizes) {
        if (n < 5) detail::domain_fail("scenario", "sample sizes must be at least 5");
    }
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) detail::domain_fail("scenario", "level must lie in (0, 1)");
    return cfg;
}

montecarlo::ScenarioConfig read_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path.string() + "'");
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ParseError("scenario file '" + path.string() + "' is not valid JSON");
    return parse_scenario(doc);
}

void write_mc_header(std::ostream& out)
{
    out << "scenario,n,parameter,true,mean,bias,rmse,coverage,used,nonconverged\n";
}

void write_mc_rows(std::ostream& out, const std::string& label, const montecarlo::McSummary& summary)
{
    const auto truth = summary.theta.to_array();
    for (const auto& cell : summary.cells) {
        for (std::size_t j = 0; j < kNumParams; ++j) {
            const auto& p = cell.params[j];
            out << label << ',' << cell.n << ',' << param_name(j) << ',' << format_double(truth[j]) << ','
                << format_double(p.mean) << ',' << format_double(p.bias) << ',' << format_double(p.rmse) << ','
                << format_double(p.coverage) << ',' << cell.used << ',' << cell.nonconverged << '\n';
        }
    }
}

std::vector<GridPoint> density_grid(const BivParams& th, std::size_t k, double eps)
{
    if (k == 0) detail::domain_fail("density_grid", "resolution must be at least 1");
    if (!(eps > 0.0 && eps < 0.5)) detail::domain_fail("density_grid", "eps must lie in (0, 1/2)");
    std::vector<double> y(k + 1);
    for (std::size_t i = 0; i <= k; ++i) y[i] = eps + (1.0 - 2.0 * eps) * static_cast<double>(i) / static_cast<double>(k);
    // Marginal pieces once per axis; the copula couples them pointwise.
    auto axis = [&y](const UniParams& p) {
        const auto F = simplex::cdf_many(y, p);
        std::vector<std::pair<double, double>> gw(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) gw[i] = {simplex::pdf(y[i], p), 1.0 - 2.0 * F[i]};
        return gw;
    };
    const auto a = axis(th.m1());
    const auto b = axis(th.m2());
    const double lam = th.lam();
    std::vector<GridPoint> out;
    out.reserve((k + 1) * (k + 1));
    for (std::size_t i = 0; i <= k; ++i) {
        for (std::size_t j = 0; j <= k; ++j) {
            out.push_back({y[i], y[j], a[i].first * b[j].first * (1.0 + lam * a[i].second * b[j].second)});
        }
    }
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Bivariate Simplex distribution with FGM dependence: fitting, sampling and moments", "bsimplex"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bsimplex 0.1.0");

    auto* fit = app.add_subcommand("fit", "Maximum likelihood fit of a two-column data file");
    std::string fit_input, fit_out;
    double fit_level = 0.95;
    int fit_max_iter = 200;
    fit->add_option("input", fit_input, "data file (y1,y2 per row)")->required();
    fit->add_option("--level", fit_level, "confidence level")->capture_default_str();
    fit->add_option("--max-iter", fit_max_iter, "Newton iteration cap")->capture_default_str();
    fit->add_option("--out", fit_out, "write the JSON result here and print a table");

    auto* sample = app.add_subcommand("sample", "Draw a sample and write it as a data file");
    ThetaFlags sample_theta;
    sample_theta.add_to(*sample);
    std::size_t sample_n = 0;
    std::uint64_t sample_seed = kDefaultSeed;
    std::string sample_out;
    sample->add_option("--n", sample_n, "sample size")->required();
    sample->add_option("--seed", sample_seed, "seed")->capture_default_str();
    sample->add_option("--out", sample_out, "output file (default: standard output)");

    auto* moment = app.add_subcommand("moment", "E[y1 y2] in closed form");
    ThetaFlags moment_theta;
    moment_theta.add_to(*moment);
    bool moment_oracle = false, moment_published = false;
    moment->add_flag("--oracle", moment_oracle, "also print the quadrature value");
    moment->add_flag("--published", moment_published, "also print the formula as originally published");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo study: mean, bias, RMSE and coverage");
    std::string sim_scenario, sim_out;
    bool sim_full_grid = false;
    std::optional<std::size_t> sim_reps;
    std::optional<std::uint64_t> sim_seed;
    unsigned sim_threads = 0;
    simulate->add_option("--scenario", sim_scenario, "scenario file (JSON)");
    simulate->add_flag("--full-grid", sim_full_grid, "all nine vectors, n in {50,100,150,200,1000}, 1000 reps (long)");
    simulate->add_option("--reps", sim_reps, "override the replication count");
    simulate->add_option("--seed", sim_seed, "override the master seed");
    simulate->add_option("--threads", sim_threads, "worker threads (default: BSIMPLEX_THREADS or all cores)");
    simulate->add_option("--out", sim_out, "output table (default: standard output)");

    auto* grid = app.add_subcommand("grid", "Joint density on a regular lattice");
    ThetaFlags grid_theta;
    grid_theta.add_to(*grid);
    std::size_t grid_k = 100;
    double grid_eps = 0.005;
    std::string grid_out;
    grid->add_option("--resolution", grid_k, "k: the lattice has (k+1)^2 points")->capture_default_str();
    grid->add_option("--eps", grid_eps, "distance of the lattice from the edges")->capture_default_str();
    grid->add_option("--out", grid_out, "output file (default: standard output)");

    auto* check = app.add_subcommand("check", "Compare closed forms with independent quadrature");
    double check_perturb = 0.0;
    check->add_option("--perturb-struve", check_perturb, "scale L0 by (1 + value), for testing the report")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*fit) return cmd_fit(fit_input, fit_level, fit_max_iter, fit_out, out);
        if (*sample) {
            const Dataset d = sampler::sample_matrix(sample_theta.theta(), sample_n, sample_seed);
            if (sample_out.empty()) {
                write_dataset(out, d);
            } else {
                write_dataset(sample_out, d);
            }
            return kOk;
        }
        if (*moment) return cmd_moment(moment_theta.theta(), moment_oracle, moment_published, out);
        if (*simulate) {
            return cmd_simulate(sim_scenario, sim_full_grid, sim_reps, sim_seed, sim_threads, sim_out, out);
        }
        if (*grid) {
            const auto points = density_grid(grid_theta.theta(), grid_k, grid_eps);
            Sink sink(grid_out, out);
            sink.get() << "y1,y2,density\n";
            for (const auto& p : points) {
                sink.get() << format_double(p.y1) << ',' << format_double(p.y2) << ',' << format_double(p.density)
                           << '\n';
            }
            sink.close(grid_out);
            return kOk;
        }
        if (*check) return cmd_check(check_perturb, out);
    } catch (const CLI::RequiredError& e) {
        err << "error: " << e.what() << " is required\n";
        return kUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kBadInput;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kBadInput;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kBadInput;
    } catch (const EstimationError& e) {
        err << "estimation error: " << e.what() << '\n';
        return kBadInput;
    } catch (const AccuracyError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumeric;
    } catch (const OverflowError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumeric;
    }
    return kUsage;
}

}  // namespace bsimplex::cli

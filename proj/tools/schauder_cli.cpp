// schauder_cli: batch front end for the schauder library.
//
// Artifacts (CSV, or JSON for analyze) go to --out, else to
// $SCHAUDER_OUTPUT_DIR/<command>.<ext>, else stdout. Relative --out paths are
// taken relative to $SCHAUDER_OUTPUT_DIR when it is set. The run report goes to
// --report, or next to a file artifact as <stem>.report.json.
//
// exit status: 0 ok, 2 bad input, 3 numerical failure

#include <schauder/schauder.hpp>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace schauder;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

// ---- scalar function table ------------------------------------------------

struct ScalarFn {
    std::function<double(double)> g, dg, d2g;
};

const std::map<std::string, ScalarFn>& functions() {
    static const std::map<std::string, ScalarFn> table{
        {"identity", {[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }}},
        {"square", {[](double x) { return x * x; }, [](double x) { return 2 * x; }, [](double) { return 2.0; }}},
        {"sin", {[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
                 [](double x) { return -std::sin(x); }}},
        {"cos", {[](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); },
                 [](double x) { return -std::cos(x); }}},
        {"exp", {[](double x) { return std::exp(x); }, [](double x) { return std::exp(x); },
                 [](double x) { return std::exp(x); }}},
    };
    return table;
}

std::vector<std::string> function_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : functions()) names.push_back(k);
    return names;
}

// x in R^d  ->  row vector (g(x_1), ..., g(x_d)), Jacobian diagonal
SmoothMap componentwise(const ScalarFn& fn, std::size_t d) {
    return {d, d,
            [fn](std::span<const double> x, std::span<double> y) {
                for (std::size_t j = 0; j < x.size(); ++j) y[j] = fn.g(x[j]);
            },
            [fn, d](std::span<const double> x, std::span<double> jac) {
                std::fill(jac.begin(), jac.end(), 0.0);
                for (std::size_t j = 0; j < d; ++j) jac[j * d + j] = fn.dg(x[j]);
            },
            {}};
}

// x in R^d  ->  sum_j g(x_j)
SmoothMap summed(const ScalarFn& fn, std::size_t d) {
    return {d, 1,
            [fn](std::span<const double> x, std::span<double> y) {
                y[0] = 0.0;
                for (double xj : x) y[0] += fn.g(xj);
            },
            [fn](std::span<const double> x, std::span<double> jac) {
                for (std::size_t j = 0; j < x.size(); ++j) jac[j] = fn.dg(x[j]);
            },
            [fn, d](std::span<const double> x, std::span<double> h) {
                std::fill(h.begin(), h.end(), 0.0);
                for (std::size_t j = 0; j < d; ++j) h[j * d + j] = fn.d2g(x[j]);
            }};
}

// "name" or "name:param"
std::pair<std::string, double> parse_spec(const std::string& s, double fallback) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) return {s, fallback};
    return {s.substr(0, colon), io::parse_double(std::string_view(s).substr(colon + 1))};
}

// "7..13" or "7,9,11"
std::vector<int> parse_levels(const std::string& s) {
    std::vector<int> out;
    auto to_int = [&](std::string_view t) {
        const double x = io::parse_double(t);
        if (x != std::floor(x) || x < 0 || x > 30) throw ValidationError("bad level '" + std::string(t) + "'");
        return static_cast<int>(x);
    };
    if (const auto dots = s.find(".."); dots != std::string::npos) {
        const int a = to_int(std::string_view(s).substr(0, dots));
        const int b = to_int(std::string_view(s).substr(dots + 2));
        if (b < a) throw ValidationError("empty level range '" + s + "'");
        for (int k = a; k <= b; ++k) out.push_back(k);
    } else {
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(to_int(item));
    }
    if (out.empty()) throw ValidationError("no levels given");
    return out;
}

json path_norms(const SampledPath& p, double alpha) {
    return {{"sup", p.sup_norm()}, {"holder", holder_norm(p, alpha)}, {"alpha", alpha}};
}

// ---- output plumbing ------------------------------------------------------

struct Output {
    std::string out;
    std::string report;
    std::string command;

    [[nodiscard]] std::string artifact_path(const std::string& ext) const {
        const char* dir = std::getenv("SCHAUDER_OUTPUT_DIR");
        if (!out.empty()) {
            if (out == "-") return {};
            fs::path p(out);
            if (dir && *dir && p.is_relative()) p = fs::path(dir) / p;
            return p.string();
        }
        if (dir && *dir) return (fs::path(dir) / (command + ext)).string();
        return {};
    }

    [[nodiscard]] std::string report_path(const std::string& artifact) const {
        if (!report.empty()) {
            fs::path p(report);
            const char* dir = std::getenv("SCHAUDER_OUTPUT_DIR");
            if (dir && *dir && p.is_relative()) p = fs::path(dir) / p;
            return p.string();
        }
        if (artifact.empty()) return {};
        fs::path p(artifact);
        return (p.parent_path() / (p.stem().string() + ".report.json")).string();
    }
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ValidationError("cannot open '" + path + "' for writing");
    os << text;
    if (!os) throw ValidationError("write to '" + path + "' failed");
}

std::string csv(const SampledPath& p, const std::vector<std::string>& names = {}) {
    std::ostringstream os;
    io::write_csv(os, p, names);
    return os.str();
}

std::vector<std::string> numbered(const std::string& stem, std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= n; ++i) names.push_back(stem + std::to_string(i));
    return names;
}

std::vector<std::string> matrix_names(const std::string& stem, std::size_t d) {
    std::vector<std::string> names;
    for (std::size_t j = 1; j <= d; ++j)
        for (std::size_t l = 1; l <= d; ++l) names.push_back(stem + std::to_string(j) + std::to_string(l));
    return names;
}

// Paths side by side, columns named per block.
SampledPath hstack(const std::vector<const SampledPath*>& blocks) {
    std::size_t dims = 0;
    for (const auto* b : blocks) dims += b->dims();
    SampledPath out(blocks.front()->grid(), dims);
    std::size_t col = 0;
    for (const auto* b : blocks) {
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t k = 0; k < b->dims(); ++k) out(i, col + k) = (*b)(i, k);
        col += b->dims();
    }
    return out;
}

json config_echo(const CLI::App* sub) {
    json cfg = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_name() == "--help") continue;
        std::string name = opt->get_name();
        while (!name.empty() && name.front() == '-') name.erase(0, 1);
        if (opt->count() > 0) {
            const auto& r = opt->results();
            cfg[name] = r.size() == 1 ? json(r.front()) : json(r);
        } else if (!opt->get_default_str().empty()) {
            cfg[name] = opt->get_default_str();
        } else {
            cfg[name] = nullptr;
        }
    }
    return cfg;
}

json versions() {
    return {{"schauder", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"cli11", CLI11_VERSION},
            {"compiler", __VERSION__}};
}

// ---- options --------------------------------------------------------------

struct Options {
    // common
    std::string out, report;
    int level = -1;
    std::uint64_t seed = 0;
    double alpha = 0.45, beta = 0.45;
    // gen
    std::string process = "bm";
    double hurst = -1.0;
    std::size_t dims = 1;
    // inputs
    std::string in, with, driver, integrand, derivative;
    std::string format = "json";
    // integrate
    std::string method;
    std::string fn;
    bool diagnostics = false;
    // levy-area
    int k_min = -1;
    // follmer
    int k = -1;
    // solve
    std::string mode = "strat", sigma = "gbm:0.5", drift = "zero";
    std::vector<double> y0{1.0};
    double tol = 1e-8;
    int max_iter = 200;
    // convergence
    std::string levels = "7..13";
};

int level_or(const Options& o, const SampledPath& p) {
    if (o.level < 0) return p.level();
    if (o.level > p.level()) {
        throw IndexError("--level " + std::to_string(o.level) + " exceeds the input level " +
                         std::to_string(p.level()));
    }
    return o.level;
}

// ---- commands -------------------------------------------------------------

struct Result {
    std::string artifact;  // text
    std::string ext = ".csv";
    json report = json::object();
};

Result run_gen(const Options& o) {
    if (o.level < 1) throw ValidationError("gen needs --level >= 1");
    Result r;
    SampledPath p;
    if (o.process == "bm") {
        p = brownian_path(o.level, o.dims, o.seed);
    } else {
        if (!(o.hurst > 0.0 && o.hurst < 1.0)) throw ValidationError("fbm needs --hurst in (0, 1)");
        p = fbm_path(o.level, o.hurst, o.dims, o.seed);
    }
    r.artifact = csv(p);
    r.report["result"] = {{"points", p.size()}, {"dims", p.dims()}, {"endpoint", std::vector<double>(
                                                                         p.row(p.size() - 1).begin(),
                                                                         p.row(p.size() - 1).end())}};
    return r;
}

Result run_analyze(const Options& o) {
    const auto p = io::load_csv(o.in);
    const auto c = analyze(p);
    const auto rep = holder_report(c);
    Result r;
    if (o.format == "json") {
        r.artifact = io::to_json(c).dump(1) + "\n";
        r.ext = ".json";
    } else {
        // one row per stored coefficient; p = -1 is c_init, (0, 0) is c_00
        std::ostringstream os;
        os << "p,m";
        for (std::size_t k = 1; k <= c.dims(); ++k) os << ",c" << k;
        os << '\n';
        auto row = [&](int p, std::size_t m, std::span<const double> v) {
            os << p << ',' << m;
            for (double x : v) os << ',' << io::format_double(x);
            os << '\n';
        };
        row(-1, 0, c.c_init());
        row(0, 0, c.c_00());
        for (int q = 0; q <= c.max_level(); ++q)
            for (std::size_t m = 1; m <= (std::size_t{1} << q); ++m) row(q, m, c.at(q, m));
        r.artifact = os.str();
    }
    r.report["result"] = {{"max_level", c.max_level()},
                          {"dims", c.dims()},
                          {"holder_norm", holder_norm(c, o.alpha)},
                          {"estimated_alpha", rep.estimated_alpha},
                          {"per_level_max", rep.per_level_max}};
    return r;
}

struct Integrand {
    SampledPath f;
    std::optional<SampledPath> fv;
};

Integrand make_integrand(const Options& o, const SampledPath& v) {
    if (!o.fn.empty()) {
        const auto F = componentwise(functions().at(o.fn), v.dims());
        return {apply(F, v), apply_jacobian(F, v)};
    }
    Integrand x{io::load_csv(o.integrand), std::nullopt};
    if (!o.derivative.empty()) x.fv = io::load_csv(o.derivative);
    return x;
}

Result run_integrate(const Options& o) {
    if (o.fn.empty() == o.integrand.empty()) throw ValidationError("give exactly one of --fn and --integrand");
    if (!o.derivative.empty() && o.integrand.empty()) throw ValidationError("--derivative goes with --integrand");
    const auto full = io::load_csv(o.driver);
    const int level = level_or(o, full);
    const SampledPath v = full.restrict_to(level);
    Integrand x = make_integrand(o, full);
    if (x.f.grid() != full.grid()) throw ShapeError("integrand and driver live on different grids");
    x.f = x.f.restrict_to(level);
    if (x.fv) {
        if (x.fv->grid() != full.grid()) throw ShapeError("derivative and driver live on different grids");
        x.fv = x.fv->restrict_to(level);
    }
    const std::size_t d = v.dims();
    if (x.f.dims() % d != 0) throw ShapeError("integrand columns must hold n x d matrices");
    const std::size_t n = x.f.dims() / d;

    Result r;
    json res = {{"level", level}, {"method", o.method}};
    SampledPath value;
    std::vector<const SampledPath*> extra;
    std::vector<std::string> names = numbered("I", n);
    SampledPath c1, c2, c3, c4, c5;

    if (o.method == "young") {
        const auto y = young_integral(x.f, v, level);
        value = y.value;
        if (o.diagnostics) {
            c1 = paraproduct(x.f, v, level).value;
            c2 = symmetric_part(x.f, v, level).value;
            c3 = levy_area_partial(x.f, v, level).value;
            extra = {&c1, &c2, &c3};
            for (const auto& s : {"paraproduct", "symmetric", "area"})
                for (auto& nm : numbered(s, n)) names.push_back(nm);
            res["components"] = {{"paraproduct", path_norms(c1, o.alpha)},
                                 {"symmetric", path_norms(c2, o.alpha + o.beta)},
                                 {"area", path_norms(c3, o.alpha + o.beta)}};
        }
    } else {
        if (!x.fv) throw ValidationError(o.method + " integration needs --fn or --derivative");
        const ControlledPath cp(x.f, *x.fv, v, o.alpha, o.beta);
        const LevyArea area = levy_area(v, level);
        if (o.method == "rough") {
            auto ri = rough_integral(cp, area, o.diagnostics);
            value = ri.integral.f();
            if (ri.decomposition) {
                auto& dec = *ri.decomposition;
                c1 = dec.symmetric;
                c2 = dec.paraproduct;
                c3 = dec.remainder_area;
                c4 = dec.commutator;
                c5 = dec.area_integral;
                extra = {&c1, &c2, &c3, &c4, &c5};
                for (const auto& s : {"symmetric", "paraproduct", "remainder_area", "commutator", "area_integral"})
                    for (auto& nm : numbered(s, n)) names.push_back(nm);
                res["components"] = {{"symmetric", path_norms(c1, 2 * o.alpha)},
                                     {"paraproduct", path_norms(c2, o.alpha)},
                                     {"remainder_area", path_norms(c3, 2 * o.alpha)},
                                     {"commutator", path_norms(c4, 2 * o.alpha)},
                                     {"area_integral", path_norms(c5, 2 * o.alpha)},
                                     {"decomposition_gap", (dec.total - value).sup_norm()}};
                res["integrand"] = {{"derivative_norm", cp.derivative_norm()},
                                    {"remainder_norm", cp.remainder_norm()},
                                    {"controlled_norm", cp.norm()}};
            }
        } else {
            const auto qv = qv_k(v, v, level);
            value = ito_integral(cp, area, qv);
            if (o.diagnostics) {
                c1 = controlled_bracket(cp, qv);
                extra = {&c1};
                for (auto& nm : numbered("bracket", n)) names.push_back(nm);
                res["components"] = {{"bracket", path_norms(c1, 1.0)}};
            }
        }
    }
    std::vector<const SampledPath*> blocks{&value};
    blocks.insert(blocks.end(), extra.begin(), extra.end());
    r.artifact = csv(hstack(blocks), names);
    res["endpoint"] = std::vector<double>(value.row(value.size() - 1).begin(), value.row(value.size() - 1).end());
    res["holder_norm"] = holder_norm(value, o.alpha);
    r.report["result"] = res;
    return r;
}

Result run_qv(const Options& o) {
    const auto v = io::load_csv(o.in);
    const auto w = o.with.empty() ? v : io::load_csv(o.with);
    const int k = level_or(o, v);
    const auto q = qv_k(v, w, k);
    Result r;
    std::vector<std::string> names;
    for (std::size_t j = 1; j <= v.dims(); ++j)
        for (std::size_t l = 1; l <= w.dims(); ++l) names.push_back("q" + std::to_string(j) + std::to_string(l));
    r.artifact = csv(q.values, names);
    r.report["result"] = {{"level", k}, {"endpoint_history", q.endpoint_history}};
    return r;
}

Result run_levy(const Options& o) {
    const auto v = io::load_csv(o.in);
    const int k_max = level_or(o, v);
    const int k_min = o.k_min < 0 ? std::max(1, k_max - 6) : o.k_min;
    const auto a = levy_area_sequence(v, k_min, k_max, o.alpha);
    if (a.degenerate) std::cerr << "warning: one-dimensional path, the area vanishes\n";
    Result r;
    r.artifact = csv(a.value, matrix_names("L", v.dims()));
    r.report["result"] = {{"k_min", a.k_min},        {"k_max", a.level},
                          {"deltas", a.deltas},      {"weighted_norms", a.weighted_norms},
                          {"converged", a.converged}, {"degenerate", a.degenerate}};
    return r;
}

Result run_follmer(const Options& o) {
    const auto v = io::load_csv(o.in);
    const auto F = summed(functions().at(o.fn.empty() ? "square" : o.fn), v.dims());
    const int k_max = o.k < 0 ? v.level() : o.k;
    if (k_max > v.level()) throw IndexError("--k exceeds the path level");
    const auto qv = qv_k(v, v, v.level());
    std::ostringstream os;
    os << "k,residual\n";
    std::vector<double> res;
    for (int k = 0; k <= k_max; ++k) {
        res.push_back(follmer_check(F, v, k, qv));
        os << k << ',' << io::format_double(res.back()) << '\n';
    }
    Result r;
    r.artifact = os.str();
    r.report["result"] = {{"residuals", res}, {"bracket_level", v.level()}};
    return r;
}

SmoothMap diffusion_from(const std::string& spec, std::size_t d) {
    const auto [name, theta] = parse_spec(spec, 1.0);
    if (name == "gbm") return SmoothMap::linear(std::vector<double>(d, theta), d, 1);
    if (name == "const") return SmoothMap::constant(std::vector<double>(d, theta), 1);
    if (name == "sin") {
        const double th = theta;
        return {1, d, [th](std::span<const double> y, std::span<double> s) { std::fill(s.begin(), s.end(), th * std::sin(y[0])); },
                [th](std::span<const double> y, std::span<double> j) { std::fill(j.begin(), j.end(), th * std::cos(y[0])); },
                {}};
    }
    throw ValidationError("unknown diffusion '" + spec + "' (gbm:θ, const:c, sin:θ)");
}

SmoothMap drift_from(const std::string& spec) {
    const auto [name, a] = parse_spec(spec, 0.0);
    if (name == "zero") return zero_drift(1);
    if (name == "linear") return SmoothMap::linear({a}, 1, 1);
    if (name == "const") return SmoothMap::constant({a}, 1);
    throw ValidationError("unknown drift '" + spec + "' (zero, linear:a, const:c)");
}

Result run_solve(const Options& o) {
    if (o.y0.size() != 1) throw ValidationError("solve handles scalar equations: give one --y0");
    if (!(o.tol > 0.0)) throw ValidationError("--tol must be positive");
    const auto v = io::load_csv(o.driver);
    const int level = level_or(o, v);
    SdeProblem p{drift_from(o.drift), diffusion_from(o.sigma, v.dims()), o.y0, v, levy_area(v, v.level()),
                 std::nullopt, o.mode == "ito" ? SdeMode::ito : SdeMode::stratonovich, o.alpha};
    if (p.mode == SdeMode::ito) p.qv = qv_k(v, v, v.level());
    const SolveOptions opts{o.tol, o.max_iter, 6};
    const auto sol = solve(p, level, opts);
    Result r;
    r.artifact = csv(sol.y.f(), numbered("y", 1));
    r.report["result"] = {{"level", level},
                          {"k0", sol.k0},
                          {"lambda", sol.lambda},
                          {"contraction_factor", sol.contraction_factor},
                          {"picard_iterations", sol.picard_iterations},
                          {"residuals", sol.residuals},
                          {"window_boundaries", sol.window_boundaries},
                          {"endpoint", sol.y.f()(sol.y.f().size() - 1, 0)}};
    return r;
}

Result run_convergence(const Options& o) {
    const auto levels = parse_levels(o.levels);
    if (levels.size() < 3) throw ValidationError("a convergence study needs at least 3 levels");
    const int top = *std::max_element(levels.begin(), levels.end());
    SampledPath v;
    if (!o.driver.empty()) {
        v = io::load_csv(o.driver);
        if (top > v.level()) throw IndexError("levels exceed the driver level");
        v = v.restrict_to(top);
    } else if (o.process == "bm") {
        v = brownian_path(top, o.dims, o.seed);
    } else if (o.process == "fbm") {
        if (!(o.hurst > 0.0 && o.hurst < 1.0)) throw ValidationError("fbm needs --hurst in (0, 1)");
        v = fbm_path(top, o.hurst, o.dims, o.seed);
    } else {
        v = SampledPath::from_function(top, o.dims, [](double t, std::span<double> x) {
            for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::sin(2.0 * 3.14159265358979323846 * (j + 1) * t);
        });
    }
    const auto F = componentwise(functions().at(o.fn.empty() ? "sin" : o.fn), v.dims());
    const ControlledPath x(apply(F, v), apply_jacobian(F, v), v, o.alpha, o.beta);
    ConvergenceStudy study;
    if (o.method == "rough") {
        study = convergence_rate_study(x, levels);
    } else {
        std::vector<int> ls = levels;
        std::sort(ls.begin(), ls.end());
        study.reference_level = ls.back();
        const SampledPath ref = young_integral(x.f(), v, ls.back()).value;
        for (std::size_t i = 0; i + 1 < ls.size(); ++i) {
            study.levels.push_back(ls[i]);
            study.errors.push_back((young_integral(x.f(), v, ls[i]).value - ref).sup_norm());
        }
        if (std::all_of(study.errors.begin(), study.errors.end(), [](double e) { return e > 0.0; })) {
            std::vector<double> xs(study.levels.begin(), study.levels.end()), ys;
            for (double e : study.errors) ys.push_back(std::log2(e));
            study.slope = ols_slope(xs, ys);
        }
    }
    std::ostringstream os;
    os << "level,error\n";
    for (std::size_t i = 0; i < study.levels.size(); ++i)
        os << study.levels[i] << ',' << io::format_double(study.errors[i]) << '\n';
    Result r;
    r.artifact = os.str();
    r.report["result"] = {{"reference_level", study.reference_level},
                          {"levels", study.levels},
                          {"errors", study.errors},
                          {"slope", study.slope ? json(*study.slope) : json(nullptr)}};
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pathwise integration with Schauder expansions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));
    Options o;
    const auto fn_names = function_names();

    auto add_io = [&](CLI::App* s) {
        s->add_option("--out", o.out, "artifact path ('-' for stdout)");
        s->add_option("--report", o.report, "JSON run report path");
    };

    auto* gen = app.add_subcommand("gen", "sample a Brownian or fractional Brownian path");
    gen->add_option("--process", o.process)->check(CLI::IsMember({"bm", "fbm"}))->capture_default_str();
    gen->add_option("--level", o.level)->required()->check(CLI::Range(1, 24));
    gen->add_option("--hurst", o.hurst, "Hurst index for fbm");
    gen->add_option("--seed", o.seed)->capture_default_str();
    gen->add_option("--dims", o.dims)->check(CLI::Range(1, 64))->capture_default_str();
    add_io(gen);

    auto* an = app.add_subcommand("analyze", "Schauder coefficients of a path");
    an->add_option("--in", o.in)->required()->check(CLI::ExistingFile);
    an->add_option("--format", o.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    an->add_option("--alpha", o.alpha)->capture_default_str();
    add_io(an);

    auto* in = app.add_subcommand("integrate", "Young, rough or Ito integral against a driver");
    in->add_option("--method", o.method)->required()->check(CLI::IsMember({"young", "rough", "ito"}));
    in->add_option("--driver", o.driver)->required()->check(CLI::ExistingFile);
    in->add_option("--integrand", o.integrand, "integrand path, n*d columns")->check(CLI::ExistingFile);
    in->add_option("--derivative", o.derivative, "Gubinelli derivative path, n*d*d columns")
        ->check(CLI::ExistingFile);
    in->add_option("--fn", o.fn, "integrand g(v) applied componentwise")->check(CLI::IsMember(fn_names));
    in->add_option("--level", o.level);
    in->add_option("--alpha", o.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    in->add_option("--beta", o.beta)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    in->add_flag("--diagnostics", o.diagnostics, "add component columns and norms");
    add_io(in);

    auto* qv = app.add_subcommand("qv", "dyadic quadratic (co)variation");
    qv->add_option("--in", o.in)->required()->check(CLI::ExistingFile);
    qv->add_option("--with", o.with, "second path for the covariation")->check(CLI::ExistingFile);
    qv->add_option("--level", o.level);
    add_io(qv);

    auto* la = app.add_subcommand("levy-area", "Levy area sequence of a multidimensional path");
    la->add_option("--in", o.in)->required()->check(CLI::ExistingFile);
    la->add_option("--level", o.level, "finest level");
    la->add_option("--kmin", o.k_min, "coarsest level");
    la->add_option("--alpha", o.alpha)->capture_default_str();
    add_io(la);

    auto* fo = app.add_subcommand("follmer", "Ito formula residual for F(x) = sum g(x_j)");
    fo->add_option("--in", o.in)->required()->check(CLI::ExistingFile);
    fo->add_option("--fn", o.fn)->check(CLI::IsMember(fn_names));
    fo->add_option("--k", o.k, "largest Riemann-sum level");
    add_io(fo);

    auto* so = app.add_subcommand("solve", "pathwise scalar SDE dy = b(y) dt + sigma(y) dv");
    so->add_option("--mode", o.mode)->check(CLI::IsMember({"ito", "strat"}))->capture_default_str();
    so->add_option("--sigma", o.sigma, "gbm:θ | const:c | sin:θ")->capture_default_str();
    so->add_option("--b", o.drift, "zero | linear:a | const:c")->capture_default_str();
    so->add_option("--y0", o.y0)->capture_default_str();
    so->add_option("--driver", o.driver)->required()->check(CLI::ExistingFile);
    so->add_option("--level", o.level);
    so->add_option("--tol", o.tol)->capture_default_str();
    so->add_option("--max-iter", o.max_iter)->check(CLI::PositiveNumber)->capture_default_str();
    so->add_option("--alpha", o.alpha)->capture_default_str();
    add_io(so);

    auto* co = app.add_subcommand("convergence", "self-convergence of I(S_K f, dS_K v) in K");
    co->add_option("--method", o.method)->required()->check(CLI::IsMember({"young", "rough"}));
    co->add_option("--levels", o.levels, "a..b or a,b,c")->capture_default_str();
    co->add_option("--driver", o.driver)->check(CLI::ExistingFile);
    co->add_option("--process", o.process, "driver when --driver is absent: smooth | bm | fbm");
    co->add_option("--hurst", o.hurst);
    co->add_option("--seed", o.seed)->capture_default_str();
    co->add_option("--dims", o.dims)->check(CLI::Range(1, 64))->capture_default_str();
    co->add_option("--fn", o.fn, "integrand g(v), default sin")->check(CLI::IsMember(fn_names));
    co->add_option("--alpha", o.alpha)->capture_default_str();
    co->add_option("--beta", o.beta)->capture_default_str();
    add_io(co);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    if (command == "convergence" && !sub->get_option("--process")->count()) o.process = "smooth";
    if (command == "convergence" && !o.driver.empty() && sub->get_option("--process")->count()) {
        std::cerr << "error: --driver and --process are exclusive\n";
        return kExitInput;
    }
    if (command == "convergence" && o.process != "smooth" && o.process != "bm" && o.process != "fbm") {
        std::cerr << "error: --process must be smooth, bm or fbm\n";
        return kExitInput;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        Result r;
        if (command == "gen") r = run_gen(o);
        else if (command == "analyze") r = run_analyze(o);
        else if (command == "integrate") r = run_integrate(o);
        else if (command == "qv") r = run_qv(o);
        else if (command == "levy-area") r = run_levy(o);
        else if (command == "follmer") r = run_follmer(o);
        else if (command == "solve") r = run_solve(o);
        else r = run_convergence(o);

        const Output out{o.out, o.report, command};
        const std::string artifact = out.artifact_path(r.ext);
        write_text(artifact, r.artifact);
        if (const std::string report = out.report_path(artifact); !report.empty()) {
            r.report["command"] = command;
            r.report["config"] = config_echo(sub);
            r.report["versions"] = versions();
            r.report["artifact"] = artifact.empty() ? json("stdout") : json(artifact);
            r.report["wall_time_seconds"] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            write_text(report, r.report.dump(2) + "\n");
        }
        return 0;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

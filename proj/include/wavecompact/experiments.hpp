#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavecompact/data.hpp"
#include "wavecompact/errors.hpp"
#include "wavecompact/mesh.hpp"
#include "wavecompact/norms.hpp"
#include "wavecompact/presets.hpp"
#include "wavecompact/reference.hpp"
#include "wavecompact/scheme.hpp"
#include "wavecompact/spectral.hpp"

namespace wavecompact
{

inline constexpr const char* library_version = "0.1.0";

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

enum class ExperimentKind
{
    solve,
    converge,
    sharpness,
    oracle_check,
    stability_probe,
};

inline const char* to_string(ExperimentKind k)
{
    switch (k)
    {
    case ExperimentKind::solve: return "solve";
    case ExperimentKind::converge: return "converge";
    case ExperimentKind::sharpness: return "sharpness";
    case ExperimentKind::oracle_check: return "oracle_check";
    case ExperimentKind::stability_probe: return "stability_probe";
    }
    return "?";
}

struct Rung
{
    int N = 0;
    int M = 0;
};

struct MeshLadder
{
    double X = std::numbers::pi;
    double T = std::numbers::pi;
    double a = 1.0;
    double eps0 = 1.0;
    std::vector<Rung> rungs;

    MeshSpec rung(std::size_t i) const { return build_mesh(X, T, rungs.at(i).N, rungs.at(i).M, a, eps0); }
    int max_N() const
    {
        int n = 0;
        for (const auto& r : rungs) n = std::max(n, r.N);
        return n;
    }
};

//! Where the data of an experiment comes from.
struct DataSource
{
    std::optional<HarmonicKind> harmonic;
    std::optional<std::string> preset;
    std::optional<DataSpec> spec;  //!< explicit descriptors, or the resolved preset

    bool is_harmonic() const noexcept { return harmonic.has_value(); }
};

struct ExperimentConfig
{
    ExperimentKind kind = ExperimentKind::solve;
    MeshLadder mesh;
    DataSource data;
    std::vector<U1Variant> variants{U1Variant::v2};
    V0Mode v0_mode = V0Mode::node_samples;
    ErrorMode mode = ErrorMode::node_sampled;
    std::vector<std::string> norms{"energy"};
    double alpha = 2.0;
    int j = 0;
    int l = 0;
    int K = 0;  //!< spectral modes; 0 selects 8 * max N
    int fit_skip = 1;
    int decimate = 1;
    bool use_oracle = false;
    bool reference = true;
    int samples = 20;
    int pairs = 100;
    std::uint64_t seed = 20240611;
    std::string out_dir = "out";
    json echo;

    U1Variant variant() const { return variants.front(); }
};

namespace detail
{

[[noreturn]] inline void config_fail(const std::string& what) { throw ConfigError("config: " + what); }

template<class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try
    {
        return j.at(key).get<T>();
    }
    catch (const json::exception& e)
    {
        config_fail(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where)
{
    if (!j.is_object()) config_fail(where + " must be an object");
    for (const auto& [k, v] : j.items())
    {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; }))
        {
            config_fail("unknown key '" + k + "' in " + where);
        }
    }
}

inline NodeConvention parse_convention(const std::string& s)
{
    if (s == "left") return NodeConvention::left;
    if (s == "right") return NodeConvention::right;
    if (s == "mean") return NodeConvention::mean;
    config_fail("node convention must be left, right or mean");
}

}  // namespace detail

inline U1Variant parse_variant(const std::string& s)
{
    if (s == "v0") return U1Variant::v0;
    if (s == "v1") return U1Variant::v1;
    if (s == "v2") return U1Variant::v2;
    detail::config_fail("variant must be v0, v1 or v2, got '" + s + "'");
}

/*!
 * Profile descriptor:
 * {"type": "zero"} | {"type": "harmonic", "k", "amplitude"} |
 * {"type": "sine_series", "coeffs"} |
 * {"type": "piecewise_polynomial", "breakpoints", "pieces", "convention"} |
 * {"type": "hat", "peak"} | {"type": "step", "at", "convention"} | {"type": "kinked_quadratic"}
 */
inline Profile parse_profile(const json& j, double X)
{
    if (!j.is_object() || !j.contains("type")) detail::config_fail("profile needs a 'type'");
    const auto type = detail::get_or<std::string>(j, "type", "");
    if (type == "zero")
    {
        detail::only_keys(j, {"type"}, "zero profile");
        return Profile::zero(X);
    }
    if (type == "harmonic")
    {
        detail::only_keys(j, {"type", "k", "amplitude"}, "harmonic profile");
        return Profile::harmonic(X, detail::get_or<int>(j, "k", 1), detail::get_or<double>(j, "amplitude", 1.0));
    }
    if (type == "sine_series")
    {
        detail::only_keys(j, {"type", "coeffs"}, "sine_series profile");
        return Profile::sine_series(X, detail::get_or<std::vector<double>>(j, "coeffs", {}));
    }
    if (type == "piecewise_polynomial")
    {
        detail::only_keys(j, {"type", "breakpoints", "pieces", "convention"}, "piecewise_polynomial profile");
        return Profile::piecewise_polynomial(
            X, detail::get_or<std::vector<double>>(j, "breakpoints", {}),
            detail::get_or<std::vector<std::vector<double>>>(j, "pieces", {}),
            detail::parse_convention(detail::get_or<std::string>(j, "convention", "mean")));
    }
    if (type == "hat")
    {
        detail::only_keys(j, {"type", "peak"}, "hat profile");
        return presets::hat(X, detail::get_or<double>(j, "peak", 1.0));
    }
    if (type == "step")
    {
        detail::only_keys(j, {"type", "at", "convention"}, "step profile");
        const double at = detail::get_or<double>(j, "at", 0.5 * X);
        if (!(at > 0 && at < X)) detail::config_fail("step position must lie in (0, X)");
        return presets::step(X, at, detail::parse_convention(detail::get_or<std::string>(j, "convention", "mean")));
    }
    if (type == "kinked_quadratic")
    {
        detail::only_keys(j, {"type"}, "kinked_quadratic profile");
        return presets::kinked_quadratic(X);
    }
    detail::config_fail("unknown profile type '" + type + "'");
}

//! {"type": "harmonic_sin", "omega", "amplitude"} | {"type": "polynomial", "coeffs"} | {"type": "constant", "value"}
inline TimeProfile parse_time_profile(const json& j)
{
    if (!j.is_object() || !j.contains("type")) detail::config_fail("time profile needs a 'type'");
    const auto type = detail::get_or<std::string>(j, "type", "");
    if (type == "harmonic_sin")
    {
        detail::only_keys(j, {"type", "omega", "amplitude"}, "harmonic_sin time profile");
        return TimeProfile::harmonic_sin(detail::get_or<double>(j, "omega", 1.0),
                                         detail::get_or<double>(j, "amplitude", 1.0));
    }
    if (type == "polynomial")
    {
        detail::only_keys(j, {"type", "coeffs"}, "polynomial time profile");
        return TimeProfile::polynomial(detail::get_or<std::vector<double>>(j, "coeffs", {}));
    }
    if (type == "constant")
    {
        detail::only_keys(j, {"type", "value"}, "constant time profile");
        return TimeProfile::constant(detail::get_or<double>(j, "value", 1.0));
    }
    detail::config_fail("unknown time profile type '" + type + "'");
}

inline DataSource parse_data(const json& j, double X)
{
    DataSource src;
    if (!j.is_object()) detail::config_fail("'data' must be an object");
    if (j.contains("harmonic"))
    {
        detail::only_keys(j, {"harmonic"}, "data");
        const json& h = j.at("harmonic");
        detail::only_keys(h, {"j", "k"}, "data.harmonic");
        HarmonicKind kind{detail::get_or<int>(h, "j", 0), detail::get_or<int>(h, "k", 1)};
        kind.validate();
        src.harmonic = kind;
        return src;
    }
    if (j.contains("preset"))
    {
        detail::only_keys(j, {"preset"}, "data");
        const auto name = detail::get_or<std::string>(j, "preset", "");
        src.preset = name;
        src.spec = presets::make_preset(name, X).data;
        return src;
    }
    detail::only_keys(j, {"u0", "u1", "f"}, "data");
    DataSpec d = DataSpec::zero(X);
    if (j.contains("u0")) d.u0 = parse_profile(j.at("u0"), X);
    if (j.contains("u1")) d.u1 = parse_profile(j.at("u1"), X);
    if (j.contains("f"))
    {
        const json& f = j.at("f");
        detail::only_keys(f, {"space", "time"}, "data.f");
        if (!f.contains("space") || !f.contains("time")) detail::config_fail("data.f needs 'space' and 'time'");
        d.f = Forcing{parse_profile(f.at("space"), X), parse_time_profile(f.at("time"))};
    }
    src.spec = std::move(d);
    return src;
}

/*!
 * mesh: {X, T, a, eps0, N, M | tau_over_h, refinements} or {X, T, a, eps0, ladder: [[N, M], ...]}.
 * Refinement doubles N and M, keeping tau / h fixed.
 */
inline MeshLadder parse_mesh(const json& j)
{
    detail::only_keys(j, {"X", "T", "a", "eps0", "N", "M", "tau_over_h", "refinements", "ladder"}, "mesh");
    MeshLadder ladder;
    ladder.X = detail::get_or<double>(j, "X", std::numbers::pi);
    ladder.T = detail::get_or<double>(j, "T", std::numbers::pi);
    ladder.a = detail::get_or<double>(j, "a", 1.0);
    ladder.eps0 = detail::get_or<double>(j, "eps0", 1.0);
    if (j.contains("ladder"))
    {
        if (j.contains("N") || j.contains("M") || j.contains("refinements") || j.contains("tau_over_h"))
        {
            detail::config_fail("mesh.ladder excludes N, M, tau_over_h and refinements");
        }
        for (const auto& r : detail::get_or<std::vector<std::vector<int>>>(j, "ladder", {}))
        {
            if (r.size() != 2) detail::config_fail("mesh.ladder entries are [N, M] pairs");
            ladder.rungs.push_back({r[0], r[1]});
        }
        if (ladder.rungs.empty()) detail::config_fail("mesh.ladder is empty");
    }
    else
    {
        if (!j.contains("N")) detail::config_fail("mesh.N is required");
        const int N = detail::get_or<int>(j, "N", 0);
        int M = 0;
        if (j.contains("M") && j.contains("tau_over_h")) detail::config_fail("give mesh.M or mesh.tau_over_h, not both");
        if (j.contains("M"))
        {
            M = detail::get_or<int>(j, "M", 0);
        }
        else
        {
            const double r = detail::get_or<double>(j, "tau_over_h", 0.5);
            if (!(r > 0) || !(ladder.X > 0)) detail::config_fail("mesh.tau_over_h must be positive");
            M = static_cast<int>(std::llround(ladder.T * N / (ladder.X * r)));
        }
        const int refinements = detail::get_or<int>(j, "refinements", 0);
        if (refinements < 0 || refinements > 16) detail::config_fail("mesh.refinements must lie in 0..16");
        for (int i = 0; i <= refinements; ++i) ladder.rungs.push_back({N << i, M << i});
    }
    // build_mesh validates every rung
    for (std::size_t i = 0; i < ladder.rungs.size(); ++i) (void)ladder.rung(i);
    return ladder;
}

inline ExperimentConfig parse_config(const json& j)
{
    detail::only_keys(j,
                      {"kind", "mesh", "data", "variant", "variants", "v0_mode", "mode", "norms", "alpha", "j", "l",
                       "K", "fit_skip", "decimate", "use_oracle", "reference", "samples", "pairs", "seed", "out_dir"},
                      "config");
    ExperimentConfig c;
    c.echo = j;
    const auto kind = detail::get_or<std::string>(j, "kind", "");
    if (kind == "solve") c.kind = ExperimentKind::solve;
    else if (kind == "converge") c.kind = ExperimentKind::converge;
    else if (kind == "sharpness") c.kind = ExperimentKind::sharpness;
    else if (kind == "oracle_check" || kind == "oracle-check") c.kind = ExperimentKind::oracle_check;
    else if (kind == "stability_probe" || kind == "stability-probe") c.kind = ExperimentKind::stability_probe;
    else detail::config_fail("kind must be solve, converge, sharpness, oracle_check or stability_probe");

    if (!j.contains("mesh")) detail::config_fail("'mesh' is required");
    c.mesh = parse_mesh(j.at("mesh"));

    if (j.contains("data")) c.data = parse_data(j.at("data"), c.mesh.X);
    if (j.contains("variant") && j.contains("variants")) detail::config_fail("give variant or variants, not both");
    if (j.contains("variant")) c.variants = {parse_variant(detail::get_or<std::string>(j, "variant", "v2"))};
    if (j.contains("variants"))
    {
        c.variants.clear();
        for (const auto& v : detail::get_or<std::vector<std::string>>(j, "variants", {})) c.variants.push_back(parse_variant(v));
        if (c.variants.empty()) detail::config_fail("variants is empty");
    }
    else if (c.kind == ExperimentKind::oracle_check && !j.contains("variant"))
    {
        c.variants = {U1Variant::v0, U1Variant::v1, U1Variant::v2};
    }
    const auto v0 = detail::get_or<std::string>(j, "v0_mode", "node_samples");
    if (v0 == "node_samples") c.v0_mode = V0Mode::node_samples;
    else if (v0 == "qh_average") c.v0_mode = V0Mode::qh_average;
    else detail::config_fail("v0_mode must be node_samples or qh_average");
    const auto mode = detail::get_or<std::string>(j, "mode", "node_sampled");
    if (mode == "node_sampled") c.mode = ErrorMode::node_sampled;
    else if (mode == "q2h_filtered") c.mode = ErrorMode::q2h_filtered;
    else detail::config_fail("mode must be node_sampled or q2h_filtered");
    c.norms = detail::get_or<std::vector<std::string>>(j, "norms", {"energy"});
    for (const auto& n : c.norms)
    {
        if (n != "energy" && n != "dx" && n != "l1" && n != "l1_dx") detail::config_fail("unknown norm '" + n + "'");
    }
    if (c.norms.empty()) detail::config_fail("norms is empty");
    c.alpha = detail::get_or<double>(j, "alpha", 2.0);
    c.j = detail::get_or<int>(j, "j", 0);
    c.l = detail::get_or<int>(j, "l", 0);
    c.K = detail::get_or<int>(j, "K", 0);
    c.fit_skip = detail::get_or<int>(j, "fit_skip", 1);
    c.decimate = detail::get_or<int>(j, "decimate", 1);
    c.use_oracle = detail::get_or<bool>(j, "use_oracle", false);
    c.reference = detail::get_or<bool>(j, "reference", true);
    c.samples = detail::get_or<int>(j, "samples", 20);
    c.pairs = detail::get_or<int>(j, "pairs", 100);
    c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
    c.out_dir = detail::get_or<std::string>(j, "out_dir", "out");

    if (!(c.alpha > 0)) detail::config_fail("alpha must be positive");
    if (c.l != 0 && c.l != 1) detail::config_fail("l must be 0 or 1");
    if (c.K < 0) detail::config_fail("K must be >= 0");
    if (c.fit_skip < 0) detail::config_fail("fit_skip must be >= 0");
    if (c.decimate < 1) detail::config_fail("decimate must be >= 1");
    if (c.samples < 0 || c.pairs < 0) detail::config_fail("samples and pairs must be >= 0");

    switch (c.kind)
    {
    case ExperimentKind::solve:
    case ExperimentKind::converge:
        if (!c.data.harmonic && !c.data.spec) detail::config_fail("'data' is required");
        if (c.kind == ExperimentKind::converge && c.mesh.rungs.size() < 3)
        {
            detail::config_fail("converge needs a ladder of at least 3 rungs");
        }
        break;
    case ExperimentKind::sharpness:
        if (c.data.harmonic) c.j = c.data.harmonic->j;
        if (c.j < 0 || c.j > 2) detail::config_fail("sharpness: j must be 0, 1 or 2");
        if (std::abs(c.mesh.X - std::numbers::pi) > 1e-14 || c.mesh.a != 1.0)
        {
            detail::config_fail("sharpness runs use X = pi and a = 1");
        }
        break;
    case ExperimentKind::oracle_check:
        if (!c.data.harmonic) detail::config_fail("oracle_check needs data.harmonic");
        break;
    case ExperimentKind::stability_probe: break;
    }
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json j;
    try
    {
        in >> j;
    }
    catch (const json::exception& e)
    {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

//! Every rung must satisfy the stability condition; throws StabilityError naming the first violation.
inline void require_stable_ladder(const MeshLadder& ladder)
{
    for (std::size_t i = 0; i < ladder.rungs.size(); ++i) ladder.rung(i).require_stable("ladder");
}

// ---------------------------------------------------------------------------
// Utilities

struct FitResult
{
    double slope = 0;
    double intercept = 0;
    double residual = 0;  //!< Euclidean norm of the log-log residuals
    int points = 0;
};

//! Least-squares slope of log(error) against log(h).
inline FitResult fit_order(const std::vector<std::pair<double, double>>& points)
{
    detail::require(points.size() >= 2, "fit_order: need at least 2 points");
    std::vector<double> x, y;
    for (const auto& [h, e] : points)
    {
        detail::require(h > 0 && e > 0 && std::isfinite(h) && std::isfinite(e),
                        "fit_order: h and error must be positive");
        x.push_back(std::log(h));
        y.push_back(std::log(e));
    }
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    detail::require(sxx > 0, "fit_order: h values must be distinct");
    FitResult r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double rr = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double d = y[i] - (r.intercept + r.slope * x[i]);
        rr += d * d;
    }
    r.residual = std::sqrt(rr);
    r.points = static_cast<int>(x.size());
    return r;
}

//! Worker count: explicit value, else WAVECOMPACT_JOBS, else hardware concurrency.
inline int resolve_jobs(std::optional<int> requested = std::nullopt)
{
    if (requested)
    {
        if (*requested < 1) throw ConfigError("--jobs must be >= 1");
        return *requested;
    }
    if (const char* env = std::getenv("WAVECOMPACT_JOBS"))
    {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw ConfigError("WAVECOMPACT_JOBS must be a positive integer");
        return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

//! Run body(i) for i in [0, n) on up to \p jobs threads; rethrows the first exception.
template<class F>
void parallel_for(int n, int jobs, F&& body)
{
    if (n <= 0) return;
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1)
    {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (int i = next++; i < n; i = next++)
        {
            try
            {
                body(i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace detail
{

inline std::ofstream open_output(const std::filesystem::path& path)
{
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

inline void write_json(const std::filesystem::path& path, const json& j)
{
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

inline json to_json(const ErrorReport& r)
{
    return {{"mode", to_string(r.mode)},
            {"max_energy_error", r.max_energy_error},
            {"max_dx_error", r.max_dx_error},
            {"l1_spacetime_error", r.l1_spacetime_error},
            {"l1_spacetime_dx_error", r.l1_spacetime_dx_error}};
}

inline double finite_or_null(double v) { return v; }

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

//! Exact reference for a data source on one mesh, or nullptr when none is available.
inline std::unique_ptr<Reference> make_reference(const DataSource& src, const MeshSpec& mesh,
                                                 const std::shared_ptr<const SpectralModel>& model)
{
    if (src.harmonic) return std::make_unique<ModeReference>(harmonic_reference(*src.harmonic, mesh));
    if (model) return std::make_unique<SpectralReference>(model, mesh);
    return nullptr;
}

inline DataSpec resolve_data(const DataSource& src, const MeshLadder& ladder)
{
    if (src.harmonic) return harmonic_data(*src.harmonic, ladder.X, ladder.a);
    detail::require(src.spec.has_value(), "experiment has no data");
    return *src.spec;
}

inline std::shared_ptr<const SpectralModel> make_spectral_model(const ExperimentConfig& c)
{
    if (c.data.harmonic || !c.data.spec) return nullptr;
    const int K = c.K > 0 ? c.K : 8 * c.mesh.max_N();
    return std::make_shared<const SpectralModel>(*c.data.spec, K, c.mesh.a, c.mesh.T);
}

struct RunOptions
{
    std::filesystem::path out_dir = "out";
    int jobs = 1;
};

// ---------------------------------------------------------------------------
// solve

struct SolveResult
{
    MeshSpec mesh;
    std::optional<ErrorReport> report;
    std::optional<TailEstimate> tail;
    double max_residual = 0;
    std::filesystem::path trajectory_file;
};

inline SolveResult run_solve(const ExperimentConfig& c, const RunOptions& opt)
{
    require_stable_ladder(c.mesh);
    const MeshSpec mesh = c.mesh.rung(0);
    const DataSpec data = resolve_data(c.data, c.mesh);
    std::shared_ptr<const SpectralModel> model;
    if (c.reference && !c.data.harmonic)
    {
        try
        {
            model = make_spectral_model(c);
        }
        catch (const ConfigError&)
        {
            model = nullptr;  // forcing not representable; run without a reference
        }
    }
    const auto reference = c.reference ? make_reference(c.data, mesh, model) : nullptr;

    SchemeRun run = evolve(mesh, data, c.variant(), c.v0_mode);
    SolveResult res{mesh, std::nullopt, std::nullopt, run.diagnostics.max_residual(), opt.out_dir / "trajectory.csv"};
    if (reference)
    {
        res.report = error_report(run, *reference, c.mode);
        if (auto sr = dynamic_cast<const SpectralReference*>(reference.get())) res.tail = sr->tail(c.mode);
    }

    {
        auto out = detail::open_output(res.trajectory_file);
        out << "m,t";
        for (int i = 0; i <= mesh.N(); ++i) out << ",v" << i;
        out << '\n';
        for (int m = 0; m <= mesh.M(); ++m)
        {
            if (m % c.decimate != 0 && m != mesh.M()) continue;
            out << m << ',' << mesh.t(m);
            for (double v : run.trajectory.slices[static_cast<std::size_t>(m)].values()) out << ',' << v;
            out << '\n';
        }
    }
    if (res.report) detail::write_json(opt.out_dir / "error_report.json", detail::to_json(*res.report));
    return res;
}

// ---------------------------------------------------------------------------
// converge

struct ConvergenceRow
{
    int N = 0, M = 0;
    double h = 0, tau = 0;
    ErrorReport report;
    double order_energy = std::numeric_limits<double>::quiet_NaN();
    std::optional<TailEstimate> tail;
    double max_residual = 0;
};

struct ConvergenceResult
{
    std::vector<ConvergenceRow> rows;
    std::vector<std::pair<std::string, FitResult>> fits;  //!< per requested norm

    const FitResult& fit(const std::string& norm) const
    {
        for (const auto& [n, f] : fits)
        {
            if (n == norm) return f;
        }
        throw ContractViolation("no fit for norm '" + norm + "'");
    }
};

inline double norm_value(const ErrorReport& r, const std::string& norm)
{
    if (norm == "energy") return r.max_energy_error;
    if (norm == "dx") return r.max_dx_error;
    if (norm == "l1") return r.l1_spacetime_error;
    if (norm == "l1_dx") return r.l1_spacetime_dx_error;
    throw ContractViolation("unknown norm '" + norm + "'");
}

inline ConvergenceResult run_convergence(const ExperimentConfig& c, const RunOptions& opt)
{
    require_stable_ladder(c.mesh);
    const DataSpec data = resolve_data(c.data, c.mesh);
    const auto model = make_spectral_model(c);
    const int n = static_cast<int>(c.mesh.rungs.size());
    ConvergenceResult res;
    res.rows.resize(static_cast<std::size_t>(n));
    parallel_for(n, opt.jobs, [&](int i) {
        const MeshSpec mesh = c.mesh.rung(static_cast<std::size_t>(i));
        const auto reference = make_reference(c.data, mesh, model);
        auto [report, diag] = evolve_and_measure(mesh, data, c.variant(), c.v0_mode, *reference, c.mode);
        ConvergenceRow& row = res.rows[static_cast<std::size_t>(i)];
        row.N = mesh.N();
        row.M = mesh.M();
        row.h = mesh.h();
        row.tau = mesh.tau();
        row.report = report;
        row.max_residual = diag.max_residual();
        if (auto sr = dynamic_cast<const SpectralReference*>(reference.get())) row.tail = sr->tail(c.mode);
    });
    for (int i = 1; i < n; ++i)
    {
        auto& prev = res.rows[static_cast<std::size_t>(i - 1)];
        auto& row = res.rows[static_cast<std::size_t>(i)];
        row.order_energy = std::log(prev.report.max_energy_error / row.report.max_energy_error) / std::log(prev.h / row.h);
    }
    const int skip = std::min(c.fit_skip, n - 2);
    for (const auto& norm : c.norms)
    {
        std::vector<std::pair<double, double>> pts;
        for (int i = skip; i < n; ++i) pts.emplace_back(res.rows[i].h, norm_value(res.rows[i].report, norm));
        res.fits.emplace_back(norm, fit_order(pts));
    }

    auto out = detail::open_output(opt.out_dir / "converge.csv");
    out << "N,M,h,tau,err_energy,err_dx,err_l1,order_energy\n";
    for (const auto& r : res.rows)
    {
        out << r.N << ',' << r.M << ',' << r.h << ',' << r.tau << ',' << r.report.max_energy_error << ','
            << r.report.max_dx_error << ',' << r.report.l1_spacetime_error << ',' << r.order_energy << '\n';
    }
    return res;
}

// ---------------------------------------------------------------------------
// sharpness

struct SharpnessRow
{
    int N = 0, M = 0;
    int k_h = 0;
    double measured = 0;
    double predicted = 0;
    double ratio = 0;
    double predicted_shift = 0;
};

struct SharpnessResult
{
    int j = 0, l = 0;
    std::vector<SharpnessRow> rows;
    bool monotone = false;          //!< |ratio - 1| strictly decreasing along the ladder
    double extrapolated_ratio = 0;  //!< limit under an h^{1/5} correction, from the last three rungs
    double band = 0;                //!< |last ratio - extrapolated ratio|
};

/*!
 * Mesh L^1(Q) norm of u - v (l = 0) or of dbar_x (u - v) (l = 1) for
 * harmonic data with k = k_h. With \p use_oracle the closed-form discrete
 * solution replaces the stepper.
 */
inline SharpnessRow measure_sharpness(int j, int l, double alpha, const MeshSpec& mesh, U1Variant variant,
                                      bool use_oracle)
{
    const FrequencyChoice choice = choose_k_h(alpha, mesh);
    const HarmonicKind kind{j, choice.k_h};
    kind.validate();
    const ModeReference exact = harmonic_reference(kind, mesh);
    ErrorAccumulator acc(mesh, ErrorMode::node_sampled);
    if (use_oracle)
    {
        const ModeReference discrete = discrete_harmonic_reference(kind, mesh, variant);
        for (int m = 0; m <= mesh.M(); ++m) acc.add(m, discrete.nodal(m), exact);
    }
    else
    {
        evolve_streaming(mesh, harmonic_data(kind, mesh.X(), mesh.a()), variant, V0Mode::node_samples,
                         [&](int m, const GridFn& v) { acc.add(m, v, exact); });
    }
    const ErrorReport r = acc.finish();
    SharpnessRow row;
    row.N = mesh.N();
    row.M = mesh.M();
    row.k_h = choice.k_h;
    row.measured = l == 0 ? r.l1_spacetime_error : r.l1_spacetime_dx_error;
    row.predicted = sharpness_prediction(j, l, choice.k_h, NormalizedFrame(mesh).T);
    row.ratio = row.measured / row.predicted;
    row.predicted_shift = choice.predicted_shift;
    return row;
}

inline SharpnessResult run_sharpness(const ExperimentConfig& c, const RunOptions& opt)
{
    require_stable_ladder(c.mesh);
    const int n = static_cast<int>(c.mesh.rungs.size());
    // fail early on coarse rungs, before any work
    for (int i = 0; i < n; ++i) (void)choose_k_h(c.alpha, c.mesh.rung(static_cast<std::size_t>(i)));
    SharpnessResult res;
    res.j = c.j;
    res.l = c.l;
    res.rows.resize(static_cast<std::size_t>(n));
    parallel_for(n, opt.jobs, [&](int i) {
        res.rows[static_cast<std::size_t>(i)] =
            measure_sharpness(c.j, c.l, c.alpha, c.mesh.rung(static_cast<std::size_t>(i)), c.variant(), c.use_oracle);
    });
    res.monotone = true;
    for (int i = 1; i < n; ++i)
    {
        if (!(std::abs(res.rows[i].ratio - 1.0) < std::abs(res.rows[i - 1].ratio - 1.0))) res.monotone = false;
    }
    const double last = res.rows.back().ratio;
    res.extrapolated_ratio = last;
    if (n >= 3)
    {
        const double prev = res.rows[static_cast<std::size_t>(n - 2)].ratio;
        const double hr = res.rows[static_cast<std::size_t>(n - 2)].N > 0
                              ? static_cast<double>(res.rows.back().N) / res.rows[static_cast<std::size_t>(n - 2)].N
                              : 2.0;
        res.extrapolated_ratio = last - (prev - last) / (std::pow(hr, 0.2) - 1.0);
    }
    res.band = std::abs(last - res.extrapolated_ratio);

    auto out = detail::open_output(opt.out_dir / "sharpness.csv");
    out << "N,k_h,measured,predicted,ratio\n";
    for (const auto& r : res.rows)
    {
        out << r.N << ',' << r.k_h << ',' << r.measured << ',' << r.predicted << ',' << r.ratio << '\n';
    }
    return res;
}

// ---------------------------------------------------------------------------
// oracle check

struct OracleCheckRow
{
    int N = 0, M = 0, j = 0, k = 0;
    U1Variant variant = U1Variant::v2;
    double max_abs_dev = 0;
    double max_rel_dev = 0;
    bool pass = false;
};

inline constexpr double oracle_tolerance = 1e-9;

//! Max deviation over all (i, m) between the stepper and the closed-form discrete solution.
inline OracleCheckRow oracle_check(const HarmonicKind& kind, const MeshSpec& mesh, U1Variant variant)
{
    kind.validate();
    const ModeReference oracle = discrete_harmonic_reference(kind, mesh, variant);
    OracleCheckRow row{mesh.N(), mesh.M(), kind.j, kind.k, variant, 0, 0, false};
    double scale = 0;
    evolve_streaming(mesh, harmonic_data(kind, mesh.X(), mesh.a()), variant, V0Mode::node_samples,
                     [&](int m, const GridFn& v) {
                         const GridFn o = oracle.nodal(m);
                         scale = std::max(scale, o.max_abs());
                         row.max_abs_dev = std::max(row.max_abs_dev, (o - v).max_abs());
                     });
    row.max_rel_dev = scale > 0 ? row.max_abs_dev / scale : row.max_abs_dev;
    row.pass = row.max_rel_dev <= oracle_tolerance;
    return row;
}

inline std::vector<OracleCheckRow> run_oracle_check(const ExperimentConfig& c, const RunOptions& opt)
{
    require_stable_ladder(c.mesh);
    const HarmonicKind kind = *c.data.harmonic;
    for (std::size_t i = 0; i < c.mesh.rungs.size(); ++i)
    {
        if (kind.k > c.mesh.rungs[i].N - 1) detail::config_fail("oracle_check: k exceeds N - 1 on a rung");
    }
    const int nv = static_cast<int>(c.variants.size());
    const int n = static_cast<int>(c.mesh.rungs.size()) * nv;
    std::vector<OracleCheckRow> rows(static_cast<std::size_t>(n));
    parallel_for(n, opt.jobs, [&](int idx) {
        rows[static_cast<std::size_t>(idx)] = oracle_check(kind, c.mesh.rung(static_cast<std::size_t>(idx / nv)),
                                                           c.variants[static_cast<std::size_t>(idx % nv)]);
    });
    auto out = detail::open_output(opt.out_dir / "oracle_check.csv");
    out << "N,M,j,k,variant,max_abs_dev,max_rel_dev,pass\n";
    for (const auto& r : rows)
    {
        out << r.N << ',' << r.M << ',' << r.j << ',' << r.k << ',' << to_string(r.variant) << ',' << r.max_abs_dev
            << ',' << r.max_rel_dev << ',' << (r.pass ? "true" : "false") << '\n';
    }
    return rows;
}

// ---------------------------------------------------------------------------
// stability probe

struct StabilityCheck
{
    int N = 0, M = 0;
    int sample = 0;
    std::string check;  //!< stab_bound, mesh_energy_bound, lower_bound_1, lower_bound_2
    double lhs = 0, rhs = 0;
    bool holds = false;
};

inline constexpr double stability_slack = 1e-11;

namespace detail
{

//! Random continuous piecewise cubic vanishing at 0 and X.
inline Profile random_continuous_profile(double X, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> pieces_dist(1, 5);
    const int pieces = pieces_dist(rng);
    std::vector<double> b{0.0};
    for (int p = 1; p < pieces; ++p) b.push_back(X * (p + 0.8 * U(rng) * 0.5) / pieces);
    b.push_back(X);
    std::vector<double> nodal(b.size(), 0.0);
    for (std::size_t p = 1; p + 1 < b.size(); ++p) nodal[p] = U(rng);
    std::vector<std::vector<double>> coeffs;
    for (std::size_t p = 0; p + 1 < b.size(); ++p)
    {
        const double L = b[p + 1] - b[p];
        const double c0 = U(rng) / (L * L), c1 = U(rng) / (L * L * L);
        // v_p + slope y + y (y - L)(c0 + c1 y)
        coeffs.push_back({nodal[p], (nodal[p + 1] - nodal[p]) / L - L * c0, c0 - L * c1, c1});
    }
    return Profile::piecewise_polynomial(X, std::move(b), std::move(coeffs));
}

//! Random, possibly discontinuous, piecewise quadratic.
inline Profile random_piecewise_profile(double X, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> pieces_dist(1, 4);
    const int pieces = pieces_dist(rng);
    std::vector<double> b{0.0};
    for (int p = 1; p < pieces; ++p) b.push_back(X * (p + 0.4 * U(rng)) / pieces);
    b.push_back(X);
    std::vector<std::vector<double>> coeffs;
    for (int p = 0; p < pieces; ++p) coeffs.push_back({U(rng), U(rng) / X, U(rng) / (X * X)});
    return Profile::piecewise_polynomial(X, std::move(b), std::move(coeffs));
}

inline GridFn random_dirichlet(int N, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    GridFn w(N);
    for (int i = 1; i < N; ++i) w[i] = U(rng);
    return w;
}

}  // namespace detail

//! Random DataSpec with continuous u0 (zero at the ends), piecewise u1 and separable polynomial-in-time f.
inline DataSpec random_data_spec(double X, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    DataSpec d{detail::random_continuous_profile(X, rng), detail::random_piecewise_profile(X, rng), std::nullopt};
    d.f = Forcing{detail::random_piecewise_profile(X, rng), TimeProfile::polynomial({U(rng), U(rng), U(rng)})};
    return d;
}

/*!
 * Both sides of the discrete stability bound for scheme data (v0, u1h, f_h)
 * and of the data-norm bound for the DataSpec it came from.
 */
inline std::pair<StabilityCheck, StabilityCheck> stability_bounds(const DataSpec& data, const MeshSpec& mesh)
{
    const double a = mesh.a(), e0 = mesh.eps0(), tau = mesh.tau();
    const GridFn v0 = build_v0(data.u0, mesh, V0Mode::node_samples);
    const GridFn u1h = build_u1h(U1Variant::v2, data.u1, mesh);
    const std::vector<GridFn> fh = build_fh(data.f, mesh);

    double energy = 0, dt_b = 0, dx = 0;
    GridFn prev;
    evolve_streaming(mesh, data, U1Variant::v2, V0Mode::node_samples, [&](int m, const GridFn& v) {
        dx = std::max(dx, space_norm(v, SpaceNorm::L2_hstar_backward, mesh));
        if (m > 0)
        {
            energy = std::max(energy, energy_norm_pair(prev, v, mesh));
            dt_b = std::max(dt_b, space_norm((v - prev) * (1.0 / tau), SpaceNorm::B_norm, mesh));
        }
        prev = v;
    });

    StabilityCheck s;
    s.check = "stab_bound";
    s.lhs = energy;
    const double lam = space_norm(v0, SpaceNorm::negLambda_norm, mesh);
    const double w = inverse_mass_norm(u1h, mesh);
    double fsum = 0;
    for (int m = 1; m < mesh.M(); ++m) fsum += inverse_mass_norm(fh[static_cast<std::size_t>(m)], mesh);
    s.rhs = std::sqrt(a * a * lam * lam + w * w / (e0 * e0)) +
            (inverse_mass_norm(fh[0], mesh) * tau + 2.0 * tau * fsum) / e0;

    StabilityCheck c;
    c.check = "mesh_energy_bound";
    c.lhs = e0 * std::max(dt_b, a * dx / std::sqrt(6.0));
    const double du0 = h1_seminorm(data.u0);
    const double nu1 = l2_norm(data.u1);
    c.rhs = std::sqrt(a * a * du0 * du0 + nu1 * nu1 / (e0 * e0)) + (data.f ? 2.0 * l21_norm(*data.f, mesh.T()) / e0 : 0.0);
    for (auto* chk : {&s, &c})
    {
        chk->N = mesh.N();
        chk->M = mesh.M();
        chk->holds = chk->lhs <= chk->rhs * (1.0 + stability_slack);
    }
    return {s, c};
}

//! Lower energy inequalities for one pair (v_prev, v).
inline std::pair<StabilityCheck, StabilityCheck> lower_energy_bounds(const GridFn& v_prev, const GridFn& v,
                                                                      const MeshSpec& mesh)
{
    const double a2 = mesh.a() * mesh.a();
    const double e0sq = mesh.eps0() * mesh.eps0();
    const double E2 = std::pow(energy_norm_pair(v_prev, v, mesh), 2);
    const GridFn dt = (v - v_prev) * (1.0 / mesh.tau());
    const GridFn st = (v + v_prev) * 0.5;
    StabilityCheck one{mesh.N(), mesh.M(), 0, "lower_bound_1", 0, E2, false};
    one.lhs = e0sq * std::pow(space_norm(dt, SpaceNorm::B_norm, mesh), 2) +
              a2 * std::pow(space_norm(st, SpaceNorm::negLambda_norm, mesh), 2);
    StabilityCheck two{mesh.N(), mesh.M(), 0, "lower_bound_2", 0, E2, false};
    two.lhs = e0sq / 3.0 * a2 * 0.5 *
              (std::pow(space_norm(v_prev, SpaceNorm::negLambda_norm, mesh), 2) +
               std::pow(space_norm(v, SpaceNorm::negLambda_norm, mesh), 2));
    for (auto* chk : {&one, &two}) chk->holds = chk->lhs <= chk->rhs * (1.0 + stability_slack);
    return {one, two};
}

struct StabilityProbeResult
{
    std::vector<StabilityCheck> checks;
    int violations = 0;
};

inline StabilityProbeResult run_stability_probe(const ExperimentConfig& c, const RunOptions& opt)
{
    require_stable_ladder(c.mesh);
    const int n = static_cast<int>(c.mesh.rungs.size());
    std::vector<std::vector<StabilityCheck>> per_rung(static_cast<std::size_t>(n));
    parallel_for(n, opt.jobs, [&](int i) {
        const MeshSpec mesh = c.mesh.rung(static_cast<std::size_t>(i));
        std::mt19937_64 rng(c.seed + 7919ULL * static_cast<std::uint64_t>(i));
        auto& out = per_rung[static_cast<std::size_t>(i)];
        for (int s = 0; s < c.samples; ++s)
        {
            auto [a, b] = stability_bounds(random_data_spec(mesh.X(), rng), mesh);
            a.sample = b.sample = s;
            out.push_back(a);
            out.push_back(b);
        }
        for (int p = 0; p < c.pairs; ++p)
        {
            const GridFn v_prev = detail::random_dirichlet(mesh.N(), rng);
            const GridFn v = detail::random_dirichlet(mesh.N(), rng);
            auto [a, b] = lower_energy_bounds(v_prev, v, mesh);
            a.sample = b.sample = p;
            out.push_back(a);
            out.push_back(b);
        }
    });
    StabilityProbeResult res;
    for (auto& v : per_rung)
    {
        for (auto& chk : v)
        {
            if (!chk.holds) ++res.violations;
            res.checks.push_back(std::move(chk));
        }
    }
    auto out = detail::open_output(opt.out_dir / "stability_probe.csv");
    out << "N,M,sample,check,lhs,rhs,holds\n";
    for (const auto& r : res.checks)
    {
        out << r.N << ',' << r.M << ',' << r.sample << ',' << r.check << ',' << r.lhs << ',' << r.rhs << ','
            << (r.holds ? "true" : "false") << '\n';
    }
    return res;
}

// ---------------------------------------------------------------------------
// dispatch

//! Run the configured experiment, write its tables and summary.json, and return the summary.
inline json run_experiment(const ExperimentConfig& c, const RunOptions& opt)
{
    const auto start = std::chrono::steady_clock::now();
    json results;
    switch (c.kind)
    {
    case ExperimentKind::solve:
    {
        const auto r = run_solve(c, opt);
        results["N"] = r.mesh.N();
        results["M"] = r.mesh.M();
        results["max_residual"] = r.max_residual;
        results["trajectory"] = r.trajectory_file.filename().string();
        if (r.report) results["error_report"] = detail::to_json(*r.report);
        if (r.tail) results["tail_energy"] = detail::number_or_null(r.tail->energy);
        break;
    }
    case ExperimentKind::converge:
    {
        const auto r = run_convergence(c, opt);
        json fits = json::object();
        for (const auto& [norm, f] : r.fits)
        {
            fits[norm] = {{"order", f.slope}, {"residual", f.residual}, {"points", f.points}};
        }
        results["fits"] = fits;
        json rows = json::array();
        for (const auto& row : r.rows)
        {
            json jr = {{"N", row.N}, {"M", row.M}, {"max_residual", row.max_residual}};
            if (row.tail)
            {
                jr["tail_energy"] = detail::number_or_null(row.tail->energy);
                jr["tail_l1"] = detail::number_or_null(row.tail->l1_spacetime);
                jr["tail_fraction"] = detail::number_or_null(row.tail->energy / row.report.max_energy_error);
            }
            rows.push_back(jr);
        }
        results["rows"] = rows;
        break;
    }
    case ExperimentKind::sharpness:
    {
        const auto r = run_sharpness(c, opt);
        results = {{"j", r.j},
                   {"l", r.l},
                   {"monotone", r.monotone},
                   {"final_ratio", r.rows.back().ratio},
                   {"extrapolated_ratio", r.extrapolated_ratio},
                   {"band", r.band}};
        json shifts = json::array();
        for (const auto& row : r.rows) shifts.push_back(row.predicted_shift);
        results["predicted_shift"] = shifts;
        break;
    }
    case ExperimentKind::oracle_check:
    {
        const auto rows = run_oracle_check(c, opt);
        double worst = 0;
        bool pass = true;
        for (const auto& r : rows)
        {
            worst = std::max(worst, r.max_rel_dev);
            pass = pass && r.pass;
        }
        results = {{"max_rel_dev", worst}, {"pass", pass}, {"tolerance", oracle_tolerance}};
        break;
    }
    case ExperimentKind::stability_probe:
    {
        const auto r = run_stability_probe(c, opt);
        results = {{"checks", r.checks.size()}, {"violations", r.violations}, {"slack", stability_slack}};
        break;
    }
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json summary = {{"kind", to_string(c.kind)},
                    {"version", library_version},
                    {"config", c.echo},
                    {"jobs", opt.jobs},
                    {"wall_time_s", wall},
                    {"results", results}};
    detail::write_json(opt.out_dir / "summary.json", summary);
    return summary;
}

}  // namespace wavecompact

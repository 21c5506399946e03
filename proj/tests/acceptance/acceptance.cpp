#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wavecompact/wavecompact.hpp"

using namespace wavecompact;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace
{

struct Outcome
{
    bool pass = false;
    std::string detail;
};

fs::path out_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "wavecompact_acceptance" / name;
    fs::remove_all(p);
    return p;
}

int jobs() { return resolve_jobs(); }

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1. stepper vs closed-form discrete solution
Outcome oracle_equivalence()
{
    double worst = 0;
    int cases = 0;
    for (auto [N, M] : {std::pair{16, 64}, std::pair{64, 256}})
    {
        const auto mesh = build_mesh(pi, pi, N, M);
        for (int j = 0; j <= 2; ++j)
        {
            for (int k = 1; k <= 5; ++k)
            {
                if (j == 2 && k < 2) continue;
                for (auto v : {U1Variant::v0, U1Variant::v1, U1Variant::v2})
                {
                    worst = std::max(worst, oracle_check({j, k}, mesh, v).max_rel_dev);
                    ++cases;
                }
            }
        }
    }
    return {worst <= oracle_tolerance,
            std::to_string(cases) + " cases, max relative deviation " + fmt("%.3e", worst) + " (limit 1e-9)"};
}

// 2. manufactured u = sin t sin x
Outcome smooth_order()
{
    const auto c = parse_config({{"kind", "converge"},
                                 {"mesh", {{"N", 16}, {"tau_over_h", 0.5}, {"refinements", 3}}},
                                 {"data", {{"harmonic", {{"j", 1}, {"k", 1}}}}},
                                 {"variant", "v2"}});
    const auto r = run_convergence(c, {out_dir("smooth"), jobs()});
    const double slope = r.fit("energy").slope;
    std::vector<std::pair<double, double>> all;
    for (const auto& row : r.rows) all.emplace_back(row.h, row.report.max_energy_error);
    const double slope_all = fit_order(all).slope;
    const bool ok = slope >= 3.7 && slope <= 4.3 && slope_all >= 3.7 && slope_all <= 4.3;
    return {ok, "energy order " + fmt("%.4f", slope) + " (N = 32..128), " + fmt("%.4f", slope_all) +
                    " (N = 16..128); band [3.7, 4.3]"};
}

// 3. nonsmooth presets against the truncated spectral solution
Outcome fractional_rates()
{
    bool ok = true;
    std::ostringstream detail;
    for (const auto& name : presets::preset_names())
    {
        const auto preset = presets::make_preset(name, pi);
        const double tol = name == "lambda_3_2" ? 0.1 : 0.15;
        const auto c = parse_config({{"kind", "converge"},
                                     {"mesh", {{"N", 64}, {"tau_over_h", 0.5}, {"refinements", 4}}},
                                     {"data", {{"preset", name}}},
                                     {"mode", "q2h_filtered"},
                                     {"variant", "v2"}});
        const auto r = run_convergence(c, {out_dir(name), jobs()});
        const double slope = r.fit("energy").slope;
        double worst_tail = 0;
        for (const auto& row : r.rows) worst_tail = std::max(worst_tail, row.tail->energy / row.report.max_energy_error);
        const bool good = std::abs(slope - preset.expected_rate) <= tol && worst_tail < 0.01;
        ok = ok && good;
        detail << name << " order " << fmt("%.3f", slope) << " (target " << preset.expected_rate << " +- " << tol
               << ", tail/error <= " << fmt("%.1e", worst_tail) << "); ";
    }
    std::string d = detail.str();
    d.resize(d.size() - 2);
    return {ok, d};
}

// 4. error norms at k = k_h against the leading asymptotic constants
Outcome sharpness()
{
    bool ok = true;
    std::ostringstream detail;
    for (int j = 0; j <= 2; ++j)
    {
        const auto c = parse_config({{"kind", "sharpness"},
                                     {"mesh", {{"N", 512}, {"tau_over_h", 0.5}, {"refinements", 2}}},
                                     {"j", j},
                                     {"l", 0},
                                     {"alpha", 2.0}});
        const auto r = run_sharpness(c, {out_dir("sharpness_j" + std::to_string(j)), jobs()});
        const double last = r.rows.back().ratio;
        const bool good = r.monotone && last >= 0.75 && last <= 1.25;
        ok = ok && good;
        detail << "j=" << j << " ratios";
        for (const auto& row : r.rows) detail << ' ' << fmt("%.4f", row.ratio);
        detail << (r.monotone ? " monotone" : " NOT monotone") << ", extrapolated "
               << fmt("%.3f", r.extrapolated_ratio) << "; ";
    }
    std::string d = detail.str();
    d.resize(d.size() - 2);
    return {ok, d};
}

// 5. stability inequalities on random data
Outcome stability_probe_criterion()
{
    const auto c = parse_config({{"kind", "stability_probe"},
                                 {"mesh", {{"ladder", {{16, 32}, {32, 64}, {64, 128}, {16, 23}, {32, 46}, {64, 92}}}}},
                                 {"samples", 20},
                                 {"pairs", 100},
                                 {"seed", 4242}});
    const auto r = run_stability_probe(c, {out_dir("stability"), jobs()});
    double tightest = 0;
    for (const auto& chk : r.checks)
    {
        if (chk.rhs > 0) tightest = std::max(tightest, chk.lhs / chk.rhs);
    }
    return {r.violations == 0, std::to_string(r.checks.size()) + " checks, " + std::to_string(r.violations) +
                                   " violations, largest lhs/rhs " + fmt("%.6f", tightest)};
}

// 6. mu_k = k - k^5 nu_h + O(k^7 h^6) and the range of nu_h
Outcome dispersion_expansion()
{
    bool ok = true;
    std::ostringstream detail;
    for (double ratio : {0.5, 0.7})
    {
        double cmax = 0, cmin = 1e300;
        std::vector<double> per_mesh;
        for (int N : {64, 128, 256})
        {
            const auto mesh = build_mesh(pi, pi, N, static_cast<int>(std::ceil(N / ratio)));
            const long double h = std::numbers::pi_v<long double> / N;
            double c_mesh = 0;
            for (int k = 1; k * k <= N; ++k)
            {
                const auto d = dispersion<long double>(k, mesh);
                const long double res = std::fabs(d.mu_k - k + std::pow(static_cast<long double>(k), 5) * d.nu_h);
                const double c = static_cast<double>(res / (std::pow(static_cast<long double>(k), 7) * std::pow(h, 6)));
                c_mesh = std::max(c_mesh, c);
            }
            per_mesh.push_back(c_mesh);
            cmax = std::max(cmax, c_mesh);
            cmin = std::min(cmin, c_mesh);
        }
        // one C for all meshes; it must not drift with N
        const bool good = cmax / cmin <= 1.05;
        ok = ok && good;
        detail << "tau/h=" << ratio << " C=" << fmt("%.4e", cmax) << " (per-mesh spread " << fmt("%.4f", cmax / cmin)
               << "); ";
    }
    int meshes = 0;
    for (double eps0 : {1.0, 0.8, 0.5, 0.2})
    {
        for (int N : {16, 64, 256, 1024})
        {
            for (double r : {0.999, 0.8, 0.5, 0.1})
            {
                const double h = pi / N;
                const double tau_max = std::sqrt(1 - eps0 * eps0 / 2) * h;
                const auto mesh = build_mesh(pi, pi, N, static_cast<int>(std::ceil(pi / (r * tau_max))), 1.0, eps0);
                if (!mesh.stable()) continue;
                const double v = 480.0 * dispersion(1, mesh).nu_h;
                const double h4 = std::pow(h, 4);
                if (!(v >= eps0 * eps0 * h4 / 2 && v <= h4)) ok = false;
                ++meshes;
            }
        }
    }
    detail << "480 nu_h in [eps0^2 h^4 / 2, h^4] on " << meshes << " stable meshes";
    return {ok, detail.str()};
}

// 7. operator identities and inequalities on random grid functions
Outcome operator_suite()
{
    int checks = 0, failures = 0;
    auto check = [&](bool c) {
        ++checks;
        if (!c) ++failures;
    };
    const double tol = 1e-11;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int N : {8, 64, 256})
    {
        const auto m = build_mesh(pi, pi, N, 3 * N);
        const double h = m.h();
        for (int k = 1; k < N; k += std::max(1, N / 16))
        {
            GridFn w(N);
            for (int i = 1; i < N; ++i) w[i] = std::sin(k * m.x(i));
            const GridFn lw = apply_spatial(SpatialOp::LambdaX, w, m);
            const double lam = std::pow(2 / h * std::sin(k * h / 2), 2);
            check((lw + w * lam).max_abs() <= tol * lam);
        }
        for (int trial = 0; trial < 50; ++trial)
        {
            GridFn w(N);
            for (int i = 1; i < N; ++i) w[i] = U(rng);
            const double ww = inner_h(w, w, m);
            const GridFn sn = apply_spatial(SpatialOp::sN, w, m);
            const GridFn bw = apply_spatial(SpatialOp::B, w, m);
            const GridFn lw = apply_spatial(SpatialOp::LambdaX, w, m);
            const double s = inner_h(sn, w, m), b = inner_h(bw, w, m), l = -inner_h(lw, w, m);
            check(s >= 2.0 / 3.0 * ww * (1 - tol) && s <= ww * (1 + tol));
            check(b >= ww / 3.0 * (1 - tol) && b <= ww * (1 + tol));
            check(l > 0 && l <= 4 / (h * h) * ww * (1 + tol));
            check((sn - (bw - lw * (h * h / 12))).max_abs() <= tol * sn.max_abs());
            check((sn - (w + lw * (h * h / 12))).max_abs() <= tol * sn.max_abs());
            double grad = 0;
            for (int i = 1; i <= N; ++i) grad += std::pow((w[i] - w[i - 1]) / h, 2) * h;
            check(std::abs(l - grad) <= tol * grad);
            const GridFn back = solve_implicit(ImplicitOperator(m).apply(w), m);
            check((back - w).max_abs() <= tol * w.max_abs());
        }
    }
    return {failures == 0, std::to_string(checks) + " checks on N = 8, 64, 256, " + std::to_string(failures) + " failures"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"fourth-order smooth convergence", smooth_order},
        {"fractional-order rates", fractional_rates},
        {"sharpness constants", sharpness},
        {"stability bounds", stability_probe_criterion},
        {"dispersion expansion", dispersion_expansion},
        {"operator suite", operator_suite},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::printf("criterion %zu %s: %s (%s; %.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "wavecompact/data.hpp"
#include "wavecompact/presets.hpp"

using namespace wavecompact;
using std::numbers::pi;

namespace
{

// Composite Simpson on [a, b] with n (even) panels; independent of the library quadrature.
double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000)
{
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

double lambda_of(int k, double h) { return std::pow(2.0 / h * std::sin(k * h / 2), 2); }

double hat_average(const std::function<double(double)>& f, double xi, double h)
{
    return (simpson([&](double x) { return f(x) * (x - (xi - h)) / h; }, xi - h, xi) +
            simpson([&](double x) { return f(x) * ((xi + h) - x) / h; }, xi, xi + h)) /
           h;
}

}  // namespace

TEST(Profiles, Validation)
{
    EXPECT_THROW(Profile::harmonic(pi, 0), ConfigError);
    EXPECT_THROW(Profile::harmonic(-1, 1), ConfigError);
    EXPECT_THROW(Profile::piecewise_polynomial(1, {0, 0.5}, {{1}}), ConfigError);
    EXPECT_THROW(Profile::piecewise_polynomial(1, {0, 0.6, 0.5, 1}, {{1}, {1}, {1}}), ConfigError);
    EXPECT_THROW(Profile::piecewise_polynomial(1, {0, 1}, {{1}, {2}}), ConfigError);
    DataSpec d{Profile::zero(1), Profile::zero(2), std::nullopt};
    EXPECT_THROW(d.validate(), ConfigError);
}

TEST(Profiles, NodeConventionAtJumps)
{
    const auto l = presets::step(1, 0.5, NodeConvention::left);
    const auto r = presets::step(1, 0.5, NodeConvention::right);
    const auto m = presets::step(1, 0.5, NodeConvention::mean);
    EXPECT_EQ(l(0.5), 0.0);
    EXPECT_EQ(r(0.5), 1.0);
    EXPECT_EQ(m(0.5), 0.5);
    EXPECT_EQ(m(0.25), 0.0);
    EXPECT_EQ(m(0.75), 1.0);
}

TEST(AverageQh, ConstantGivesOne)
{
    const auto mesh = build_mesh(1, 1, 8, 16);
    const auto q = average_qh(Profile::piecewise_polynomial(1, {0, 1}, {{1.0}}), mesh);
    for (int i = 1; i < 8; ++i) EXPECT_NEAR(q[i], 1.0, 1e-15);
    EXPECT_EQ(q[0], 0.0);
    EXPECT_EQ(q[8], 0.0);
}

TEST(AverageQh, SineFactor)
{
    const auto mesh = build_mesh(pi, pi, 4, 8);
    const double h = pi / 4;
    const double factor = std::pow(std::sin(h / 2) / (h / 2), 2);
    EXPECT_NEAR(factor, 0.949641, 5e-7);
    const auto harmonic = average_qh(Profile::harmonic(pi, 1), mesh);
    const auto as_callable =
        average_qh(Profile::callable(pi, [](double x) { return std::sin(x); }), mesh);
    for (int i = 1; i < 4; ++i)
    {
        const double brute = hat_average([](double x) { return std::sin(x); }, mesh.x(i), h);
        EXPECT_NEAR(harmonic[i], factor * std::sin(mesh.x(i)), 1e-14);
        EXPECT_NEAR(as_callable[i], brute, 1e-12);
        EXPECT_NEAR(harmonic[i], brute, 1e-12);
    }
}

TEST(AverageQh, StepExact)
{
    const auto mesh = build_mesh(1, 1, 8, 16);
    const auto q = average_qh(presets::step(1, 0.5), mesh);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(q[i], 0.0, 1e-15);
    EXPECT_NEAR(q[4], 0.5, 1e-15);
    for (int i = 5; i < 8; ++i) EXPECT_NEAR(q[i], 1.0, 1e-15);
    // jump off the nodes: step at 0.3 = x_2 + 0.05, h = 0.125
    const auto q2 = average_qh(presets::step(1, 0.3), mesh);
    const auto step = [](double x) { return x > 0.3 ? 1.0 : 0.0; };
    for (int i = 1; i < 8; ++i)
    {
        const double xi = mesh.x(i), h = mesh.h();
        // closed form: integral of the hat over x > 0.3
        auto hat_int = [&](double lo) {
            // int_lo^{xi+h} hat dx / h, hat centered at xi
            auto F = [&](double x) {
                if (x <= xi - h) return 0.0;
                if (x <= xi) return std::pow(x - (xi - h), 2) / (2 * h);
                if (x <= xi + h) return h - std::pow(xi + h - x, 2) / (2 * h);
                return h;
            };
            return (h - F(lo)) / h;
        };
        EXPECT_NEAR(q2[i], hat_int(0.3), 1e-14) << i;
        EXPECT_NEAR(q2[i], hat_average(step, xi, h), 1e-3) << i;
    }
}

TEST(AverageQtau, ClosedForms)
{
    const auto mesh = build_mesh(1, 1, 4, 10);
    for (int m = 0; m < 10; ++m) EXPECT_NEAR(average_qtau(TimeProfile::constant(1.0), mesh, m), 1.0, 1e-14);
    EXPECT_NEAR(average_qtau(TimeProfile::polynomial({0, 1}), mesh, 0), 0.1 / 3, 1e-15);
    EXPECT_THROW(average_qtau(TimeProfile::constant(1.0), mesh, 10), ContractViolation);

    const double w = 2.7, tau = 0.1;
    const auto g = TimeProfile::harmonic_sin(w);
    const auto gc = TimeProfile::callable([&](double t) { return std::sin(w * t); });
    for (int m = 1; m < 10; ++m)
    {
        const double expect = 2 * (1 - std::cos(w * tau)) / (w * w * tau * tau) * std::sin(w * m * tau);
        EXPECT_NEAR(average_qtau(g, mesh, m), expect, 1e-14);
        EXPECT_NEAR(average_qtau(gc, mesh, m), expect, 1e-12);
    }
    const double brute0 = 2 / tau * simpson([&](double t) { return std::sin(w * t) * (1 - t / tau); }, 0, tau);
    EXPECT_NEAR(average_qtau(g, mesh, 0), brute0, 1e-12);
    EXPECT_NEAR(average_qtau(gc, mesh, 0), brute0, 1e-12);
}

TEST(AverageQ2h, EigenFactorAndOrder)
{
    const auto mesh = build_mesh(pi, pi, 8, 16);
    const int k = 2;
    const double h = mesh.h();
    const double lam = lambda_of(k, h);
    const double factor = lam / (k * k) * (1 + h * h * lam / 12);
    EXPECT_NEAR(q2h_factor(k, h), factor, 1e-15);
    const auto q = average_q2h(Profile::harmonic(pi, k), mesh);
    // stencil applied by hand to the q_h eigen-relation
    for (int i = 1; i < 8; ++i) EXPECT_NEAR(q[i], factor * std::sin(k * mesh.x(i)), 1e-14);
    EXPECT_EQ(average_q2h(Profile::zero(pi), mesh).max_abs(), 0.0);

    std::vector<double> err;
    for (int N : {8, 16, 32})
    {
        const auto m = build_mesh(pi, pi, N, 2 * N);
        const auto q2 = average_q2h(Profile::harmonic(pi, 1), m);
        double s = 0;
        for (int i = 1; i < N; ++i) s += std::pow(std::sin(m.x(i)) - q2[i], 2) * m.h();
        err.push_back(std::sqrt(s));
    }
    EXPECT_NEAR(err[0] / err[1], 16.0, 0.5);
    EXPECT_NEAR(err[1] / err[2], 16.0, 0.2);
}

TEST(BuildU1h, VariantMultipliers)
{
    const auto mesh = build_mesh(pi, pi, 8, 32);
    const double h = mesh.h(), tau = mesh.tau();
    for (int k = 1; k <= 7; ++k)
    {
        const double lam = lambda_of(k, h);
        const double expect[3] = {1 - (h * h + tau * tau) * lam / 12, lam / (k * k) * (1 - tau * tau * k * k / 12),
                                  lam / (k * k) * (1 - tau * tau * lam / 12)};
        int idx = 0;
        for (auto v : {U1Variant::v0, U1Variant::v1, U1Variant::v2})
        {
            const auto u = build_u1h(v, Profile::harmonic(pi, k), mesh);
            for (int i = 1; i < 8; ++i)
            {
                EXPECT_NEAR(u[i], expect[idx] * std::sin(k * mesh.x(i)), 1e-12) << to_string(v) << " k=" << k;
            }
            EXPECT_EQ(build_u1h(v, Profile::zero(pi), mesh).max_abs(), 0.0);
            ++idx;
        }
    }
}

TEST(BuildU1h, V2ByDirectOperatorApplication)
{
    const auto mesh = build_mesh(pi, pi, 8, 32);
    const double h = mesh.h(), tau = mesh.tau();
    const int k = 3;
    // q_h by brute quadrature, then (I + tau^2/12 Lambda) by hand
    std::vector<double> q(9, 0.0);
    for (int i = 1; i < 8; ++i) q[i] = hat_average([&](double x) { return std::sin(k * x); }, mesh.x(i), h);
    const auto u = build_u1h(U1Variant::v2, Profile::harmonic(pi, k), mesh);
    const double lam = lambda_of(k, h);
    const double formula = lam / (k * k) * (1 - tau * tau * lam / 12);
    for (int i = 1; i < 8; ++i)
    {
        const double direct = q[i] + tau * tau / 12 * (q[i - 1] - 2 * q[i] + q[i + 1]) / (h * h);
        EXPECT_NEAR(u[i], direct, 1e-11);
        EXPECT_NEAR(direct / std::sin(k * mesh.x(i)), formula, 1e-11);
    }
}

TEST(BuildFh, Cases)
{
    const auto mesh = build_mesh(pi, pi, 16, 16);
    for (const auto& s : build_fh(std::nullopt, mesh)) EXPECT_EQ(s.max_abs(), 0.0);

    const int k = 3;
    const double lam = lambda_of(k, mesh.h());
    const auto fh = build_fh(Forcing{Profile::harmonic(pi, k), TimeProfile::constant(1.0)}, mesh);
    ASSERT_EQ(fh.size(), 16u);
    for (const auto& s : fh)
    {
        for (int i = 1; i < 16; ++i) EXPECT_NEAR(s[i], lam / (k * k) * std::sin(k * mesh.x(i)), 1e-13);
    }

    // sin(2x) sin(t): product of the two hat factors; 2D quadrature at three (i, m)
    const auto fh2 = build_fh(Forcing{Profile::harmonic(pi, 2), TimeProfile::harmonic_sin(1.0)}, mesh);
    const double h = mesh.h(), tau = mesh.tau();
    const double sx = lambda_of(2, h) / 4;
    const double st = 2 * (1 - std::cos(tau)) / (tau * tau);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> I(1, 15);
    for (int trial = 0; trial < 3; ++trial)
    {
        const int i = I(rng), m = I(rng);
        EXPECT_NEAR(fh2[m][i], sx * st * std::sin(2 * mesh.x(i)) * std::sin(mesh.t(m)), 1e-14);
        const double xi = mesh.x(i), tm = mesh.t(m);
        const double quad =
            hat_average([](double x) { return std::sin(2 * x); }, xi, h) *
            hat_average([](double t) { return std::sin(t); }, tm, tau);
        EXPECT_NEAR(fh2[m][i], quad, 1e-11);
    }
}

TEST(SineCoefficients, Basics)
{
    const double X = 2.0;
    const auto c1 = sine_coefficients(Profile::harmonic(X, 1), 4);
    EXPECT_NEAR(c1[0], std::sqrt(X / 2), 1e-15);
    for (int k = 1; k < 4; ++k) EXPECT_EQ(c1[k], 0.0);
    const auto c2 = sine_coefficients(Profile::callable(X, [&](double x) { return std::sin(pi * x / X); }), 4);
    EXPECT_NEAR(c2[0], std::sqrt(X / 2), 1e-13);
    for (int k = 1; k < 4; ++k) EXPECT_NEAR(c2[k], 0.0, 1e-13);

    const auto one = sine_coefficients(Profile::piecewise_polynomial(pi, {0, pi}, {{1.0}}), 8);
    for (int k = 1; k <= 8; ++k)
    {
        const double expect = k % 2 ? std::sqrt(2 / pi) * 2 / k : 0.0;
        EXPECT_NEAR(one[k - 1], expect, 1e-14) << k;
    }
}

TEST(SineCoefficients, HatAgainstQuadrature)
{
    const auto hat = presets::hat(pi);
    const auto c = sine_coefficients(hat, 32);
    for (int k = 1; k <= 32; ++k)
    {
        const double quad = std::sqrt(2 / pi) * (simpson([&](double x) { return hat(x) * std::sin(k * x); }, 0, pi / 2) +
                                                 simpson([&](double x) { return hat(x) * std::sin(k * x); }, pi / 2, pi));
        EXPECT_NEAR(c[k - 1], quad, 1e-11) << k;
        if (k % 2 == 0) EXPECT_NEAR(c[k - 1], 0.0, 1e-14);
        else EXPECT_NEAR(std::abs(c[k - 1]) * k * k, std::abs(c[0]), 1e-12);  // exact k^{-2}
    }
}

TEST(FractionalNorm, Values)
{
    const auto c = sine_coefficients(Profile::harmonic(pi, 3), 8);
    for (double alpha : {0.0, 0.5, 1.0, 2.5})
    {
        EXPECT_NEAR(fractional_norm(c, alpha, pi).value, std::pow(3.0, alpha) * std::sqrt(pi / 2), 1e-12);
    }
    const std::vector<double> s{0.3, -0.2, 0.1};
    EXPECT_NEAR(fractional_norm(s, 0.0, 1.0).value, std::sqrt(0.09 + 0.04 + 0.01), 1e-15);
}

TEST(FractionalNorm, StepIsBorderlineAtOneHalf)
{
    // sum_k k |w_k|^2 for a jump behaves like log K: equal increments per doubling
    const auto step = presets::step(pi, pi / 3);
    const auto c = sine_coefficients(step, 4096);
    auto sq = [&](int K) {
        return std::pow(fractional_norm(std::vector<double>(c.begin(), c.begin() + K), 0.5, pi).value, 2);
    };
    const double d1 = sq(1024) - sq(512), d2 = sq(2048) - sq(1024), d3 = sq(4096) - sq(2048);
    EXPECT_GT(d1, 0.1);
    EXPECT_NEAR(d2 / d1, 1.0, 0.02);
    EXPECT_NEAR(d3 / d2, 1.0, 0.02);
    // below the threshold the partial sums settle
    const double e1 = std::pow(fractional_norm(std::vector<double>(c.begin(), c.begin() + 2048), 0.4, pi).value, 2) -
                      std::pow(fractional_norm(std::vector<double>(c.begin(), c.begin() + 1024), 0.4, pi).value, 2);
    EXPECT_LT(e1, 0.8 * d2);
    EXPECT_EQ(fractional_norm(c, 0.5, pi, 1.0).tail, std::numeric_limits<double>::infinity());
    EXPECT_TRUE(std::isfinite(*fractional_norm(c, 0.4, pi, 1.0).tail));
}

TEST(DataNorms, HatAndTime)
{
    const double X = 2.0;
    const auto hat = presets::hat(X);
    EXPECT_NEAR(l2_norm(hat), std::sqrt(X / 3), 1e-14);
    EXPECT_NEAR(h1_seminorm(hat), std::sqrt(4 / X), 1e-14);
    EXPECT_EQ(h1_seminorm(presets::step(X, 1.0)), std::numeric_limits<double>::infinity());
    EXPECT_NEAR(h1_seminorm(Profile::harmonic(pi, 2)), 2 * std::sqrt(pi / 2), 1e-14);
    EXPECT_NEAR(l1_norm_time(TimeProfile::harmonic_sin(1.0), 2 * pi), 4.0, 1e-8);
    EXPECT_NEAR(l21_norm(Forcing{Profile::harmonic(pi, 1), TimeProfile::constant(-2.0)}, 3.0),
                std::sqrt(pi / 2) * 6.0, 1e-12);
}

TEST(Presets, CoefficientDecay)
{
    const auto p = presets::make_preset("lambda_3_2", pi);
    const auto c0 = sine_coefficients(p.data.u0, 257);
    const auto c1 = sine_coefficients(p.data.u1, 257);
    // Theta(k^-2) and Theta(k^-1) along the nonvanishing odd modes
    for (int k : {1, 33, 65, 129, 257})
    {
        EXPECT_NEAR(std::abs(c0[k - 1]) * k * k, std::abs(c0[0]), 1e-9 * std::abs(c0[0]));
        const double scaled = std::abs(c1[k - 1]) * k;
        EXPECT_GT(scaled, 0.5);
        EXPECT_LT(scaled, 2.0);
    }
    const auto q = presets::make_preset("lambda_5_2", pi);
    const auto d0 = sine_coefficients(q.data.u0, 1024);
    double lo = 1e300, hi = 0;
    for (int k = 512; k <= 1024; ++k)
    {
        const double v = std::abs(d0[k - 1]) * std::pow(k, 3);
        if (v > 1e-9) lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi, 10.0);
    EXPECT_NEAR(p.expected_rate, 0.4, 1e-15);
    EXPECT_NEAR(q.expected_rate, 1.2, 1e-15);
    EXPECT_THROW(presets::make_preset("nope", pi), ConfigError);
}

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "wavecompact/mesh.hpp"
#include "wavecompact/norms.hpp"

using namespace wavecompact;
using std::numbers::pi;

namespace
{

GridFn sine_grid(const MeshSpec& mesh, int k)
{
    GridFn w(mesh.N());
    for (int i = 1; i < mesh.N(); ++i) w[i] = std::sin(k * mesh.x(i));
    return w;
}

GridFn random_dirichlet(int N, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(-1, 1);
    GridFn w(N);
    for (int i = 1; i < N; ++i) w[i] = U(rng);
    return w;
}

}  // namespace

TEST(Mesh, BuildsStepsAndSigma)
{
    const auto m = build_mesh(pi, pi, 4, 8);
    EXPECT_DOUBLE_EQ(m.h(), pi / 4);
    EXPECT_DOUBLE_EQ(m.tau(), pi / 8);
    EXPECT_NEAR(m.sigma_N(), 5.0 / 12.0, 1e-15);
    EXPECT_TRUE(m.stable());
}

TEST(Mesh, StabilityFlag)
{
    EXPECT_FALSE(build_mesh(1, 1, 10, 10).stable());
    EXPECT_TRUE(build_mesh(1, 1, 10, 20).stable());
    EXPECT_THROW(build_mesh(1, 1, 10, 10).require_stable("test"), StabilityError);
    // eps0 < 1 relaxes the bound: (1 - 0.125) h^2
    EXPECT_TRUE(build_mesh(1, 1, 10, 11, 1.0, 0.5).stable());
    EXPECT_FALSE(build_mesh(1, 1, 10, 10, 1.0, 0.5).stable());
}

TEST(Mesh, RejectsBadParameters)
{
    EXPECT_THROW(build_mesh(0, 1, 4, 4), ConfigError);
    EXPECT_THROW(build_mesh(1, -1, 4, 4), ConfigError);
    EXPECT_THROW(build_mesh(1, 1, 1, 4), ConfigError);
    EXPECT_THROW(build_mesh(1, 1, 4, 0), ConfigError);
    EXPECT_THROW(build_mesh(1, 1, 4, 4, 0.0), ConfigError);
    EXPECT_THROW(build_mesh(1, 1, 4, 4, 1.0, 1.5), ConfigError);
}

TEST(GridFn, ArithmeticAndDirichlet)
{
    GridFn a(std::vector<double>{0, 1, 2, 0});
    GridFn b(std::vector<double>{0, 3, -1, 0});
    EXPECT_EQ((a + b)[1], 4);
    EXPECT_EQ((a - b)[2], 3);
    EXPECT_EQ((2.0 * a)[2], 4);
    EXPECT_EQ(a.max_abs(), 2);
    EXPECT_TRUE(a.is_dirichlet());
    EXPECT_FALSE(GridFn(std::vector<double>{1e-300, 0, 0}).is_dirichlet());
    GridFn c = a;
    c.axpy(-1.0, a);
    EXPECT_EQ(c.max_abs(), 0);
    EXPECT_THROW(a + GridFn(2), ContractViolation);
}

TEST(SpaceNorm, ZeroIsZero)
{
    const auto m = build_mesh(pi, pi, 8, 16);
    const GridFn z(8);
    for (auto k : {SpaceNorm::L2_h, SpaceNorm::L2_hstar_backward, SpaceNorm::L1_h, SpaceNorm::L1_backward_diff,
                   SpaceNorm::B_norm, SpaceNorm::negLambda_norm})
    {
        EXPECT_EQ(space_norm(z, k, m), 0.0);
    }
}

TEST(SpaceNorm, SineL2)
{
    const auto m = build_mesh(pi, pi, 8, 16);
    EXPECT_NEAR(std::pow(space_norm(sine_grid(m, 1), SpaceNorm::L2_h, m), 2), pi / 2, 1e-14);
}

TEST(SpaceNorm, NegLambdaOfSinesMatchesEigenvalues)
{
    const auto m = build_mesh(pi, pi, 8, 16);
    const double h = m.h();
    for (int k = 1; k <= 7; ++k)
    {
        const GridFn w = sine_grid(m, k);
        // brute force: -sum (w_{i+1} - 2 w_i + w_{i-1}) w_i / h
        double brute = 0;
        for (int i = 1; i < 8; ++i) brute -= (w[i + 1] - 2 * w[i] + w[i - 1]) / (h * h) * w[i] * h;
        const double lam = std::pow(2.0 / h * std::sin(k * h / 2), 2);
        const double got = std::pow(space_norm(w, SpaceNorm::negLambda_norm, m), 2);
        EXPECT_NEAR(got, brute, 1e-13);
        EXPECT_NEAR(got, lam * pi / 2, 1e-12) << "k=" << k;
    }
}

TEST(SpaceNorm, BruteForceDefinitions)
{
    std::mt19937_64 rng(3);
    const auto m = build_mesh(2.0, 1.0, 12, 24);
    const GridFn w = random_dirichlet(12, rng);
    const double h = m.h();
    double l2 = 0, l2s = 0, l1 = 0, l1d = 0, b = 0;
    for (int i = 1; i <= 12; ++i)
    {
        l2s += std::pow((w[i] - w[i - 1]) / h, 2) * h;
        l1 += (std::abs(w[i - 1]) + std::abs(w[i])) * h / 2;
        l1d += std::abs(w[i] - w[i - 1]);
    }
    for (int i = 1; i < 12; ++i)
    {
        l2 += w[i] * w[i] * h;
        b += (w[i - 1] + 4 * w[i] + w[i + 1]) / 6 * w[i] * h;
    }
    EXPECT_NEAR(space_norm(w, SpaceNorm::L2_h, m), std::sqrt(l2), 1e-14);
    EXPECT_NEAR(space_norm(w, SpaceNorm::L2_hstar_backward, m), std::sqrt(l2s), 1e-13);
    EXPECT_NEAR(space_norm(w, SpaceNorm::L1_h, m), l1, 1e-14);
    EXPECT_NEAR(space_norm(w, SpaceNorm::L1_backward_diff, m), l1d, 1e-13);
    EXPECT_NEAR(space_norm(w, SpaceNorm::B_norm, m), std::sqrt(b), 1e-14);
}

TEST(TimeAggregate, Trapezoid)
{
    const auto m = build_mesh(pi, pi, 4, 8);
    const std::vector<double> ones(9, 1.0);
    EXPECT_NEAR(time_aggregate(ones, TimeAggregate::L1_tau, m), pi, 1e-14);
    EXPECT_EQ(time_aggregate(std::vector<double>(9, 0.0), TimeAggregate::L1_tau, m), 0.0);
    EXPECT_EQ(time_aggregate(std::vector<double>(9, 0.0), TimeAggregate::max, m), 0.0);

    const auto m1 = build_mesh(1, 1, 4, 4);
    const std::vector<double> t{0, 0.25, 0.5, 0.75, 1.0};
    EXPECT_NEAR(time_aggregate(t, TimeAggregate::L1_tau, m1), 0.5, 1e-15);
    EXPECT_EQ(time_aggregate(t, TimeAggregate::max, m1), 1.0);
    EXPECT_THROW(time_aggregate(std::vector<double>(3, 1.0), TimeAggregate::L1_tau, m1), ContractViolation);
}

TEST(EnergyNorm, TrivialCases)
{
    const auto m = build_mesh(pi, pi, 8, 16);
    const GridFn w = sine_grid(m, 2);
    EXPECT_NEAR(energy_norm_pair(w, w, m), m.a() * space_norm(w, SpaceNorm::negLambda_norm, m), 1e-13);
    EXPECT_EQ(energy_norm_pair(GridFn(8), GridFn(8), m), 0.0);
}

TEST(EnergyNorm, TermByTermBruteForce)
{
    const auto m = build_mesh(pi, pi, 8, 16);
    const GridFn prev(8);
    const GridFn curr = sine_grid(m, 1);
    const double h = m.h(), tau = m.tau();
    const double sigma = (1 + h * h / (tau * tau)) / 12;
    double b = 0, lam_dt = 0, lam_st = 0;
    for (int i = 1; i < 8; ++i)
    {
        auto dt = [&](int j) { return (curr[j] - prev[j]) / tau; };
        auto st = [&](int j) { return (curr[j] + prev[j]) / 2; };
        b += (dt(i - 1) + 4 * dt(i) + dt(i + 1)) / 6 * dt(i) * h;
        lam_dt -= (dt(i - 1) - 2 * dt(i) + dt(i + 1)) / (h * h) * dt(i) * h;
        lam_st -= (st(i - 1) - 2 * st(i) + st(i + 1)) / (h * h) * st(i) * h;
    }
    const double expect = std::sqrt(b + (sigma - 0.25) * tau * tau * lam_dt + lam_st);
    EXPECT_NEAR(energy_norm_pair(prev, curr, m), expect, 1e-13);
}

TEST(EnergyNorm, RejectsUnstableMesh)
{
    const auto m = build_mesh(1, 1, 10, 10);
    EXPECT_THROW(energy_norm_pair(GridFn(10), GridFn(10), m), ContractViolation);
}

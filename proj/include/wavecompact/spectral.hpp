#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "wavecompact/data.hpp"
#include "wavecompact/errors.hpp"
#include "wavecompact/mesh.hpp"

namespace wavecompact
{

/*!
 * Closed-form solutions of the continuous problem and of the compact scheme
 * for harmonic data.
 *
 * All formulas are evaluated in the normalized frame x' = pi x / X,
 * t' = a pi t / X, where the domain is (0, pi) and the wave speed is 1. In
 * that frame mode k is sin(k x'). Meshes with X = pi and a = 1 are already
 * normalized.
 */
struct NormalizedFrame
{
    double length_scale;  //!< x' = length_scale * x
    double time_scale;    //!< t' = time_scale * t
    double h;             //!< normalized space step
    double tau;           //!< normalized time step
    double T;             //!< normalized final time

    explicit NormalizedFrame(const MeshSpec& mesh)
        : length_scale(std::numbers::pi / mesh.X()), time_scale(mesh.a() * std::numbers::pi / mesh.X()),
          h(std::numbers::pi / mesh.N()), tau(mesh.a() * std::numbers::pi * mesh.T() / mesh.X() / mesh.M()),
          T(mesh.a() * std::numbers::pi * mesh.T() / mesh.X())
    {
    }
};

//! Per-mode discrete dispersion data, in the normalized frame.
template<class Real = double>
struct DispersionRecord
{
    int k = 0;
    Real lambda_k = 0;  //!< (2/h sin(k h / 2))^2
    Real phi_k = 0;     //!< (lambda_k / (1 + (tau^2 - h^2) lambda_k / 12))^{1/2}
    Real mu_k = 0;      //!< (2/tau) arcsin(tau phi_k / 2)
    Real nu_h = 0;      //!< (h^4 - tau^4) / 480
};

namespace detail
{

template<class Real>
Real pi_v()
{
    return std::numbers::pi_v<Real>;
}

template<class Real>
struct NormalizedSteps
{
    Real h;
    Real tau;
};

//! Normalized steps evaluated in Real arithmetic; exact ratios are preserved when T/X is exact.
template<class Real>
NormalizedSteps<Real> normalized_steps(const MeshSpec& mesh)
{
    const Real pi = pi_v<Real>();
    return {pi / Real(mesh.N()),
            pi * (Real(mesh.a()) * Real(mesh.T()) / Real(mesh.X())) / Real(mesh.M())};
}

inline void require_mode(int k, const MeshSpec& mesh, const char* who)
{
    if (k < 1 || k > mesh.N() - 1)
    {
        throw ContractViolation(std::string(who) + ": mode k=" + std::to_string(k) + " outside 1.." +
                                std::to_string(mesh.N() - 1));
    }
}

}  // namespace detail

/*!
 * Discrete eigenvalue and frequencies of mode k. \p Real may be wider than
 * double (e.g. long double) when the expansion residual is tiny.
 */
template<class Real = double>
DispersionRecord<Real> dispersion(int k, const MeshSpec& mesh)
{
    detail::require_mode(k, mesh, "dispersion");
    mesh.require_stable("dispersion");
    using std::asin;
    using std::sin;
    using std::sqrt;
    const auto [h, tau] = detail::normalized_steps<Real>(mesh);
    const Real pi = detail::pi_v<Real>();

    DispersionRecord<Real> r;
    r.k = k;
    const Real s = Real(2) / h * sin(pi * Real(k) / Real(2 * mesh.N()));
    r.lambda_k = s * s;
    const Real denom = Real(1) + (tau * tau - h * h) * r.lambda_k / Real(12);
    r.phi_k = sqrt(r.lambda_k / denom);
    const Real arg = tau * r.phi_k / Real(2);
    if (!(arg < Real(1)))
    {
        throw InternalInvariantError("dispersion: arcsin argument tau phi_k / 2 >= 1 for k=" + std::to_string(k));
    }
    r.mu_k = Real(2) / tau * asin(arg);
    r.nu_h = (h * h * h * h - tau * tau * tau * tau) / Real(480);
    return r;
}

//! The unsimplified denominator 1 - (h^2/6) lambda + tau^2 sigma_N lambda (normalized frame).
inline double dispersion_denominator_unsimplified(int k, const MeshSpec& mesh)
{
    const NormalizedFrame f(mesh);
    const double lam = std::pow(2.0 / f.h * std::sin(0.5 * k * f.h), 2);
    const double sigma = (1.0 + f.h * f.h / (f.tau * f.tau)) / 12.0;
    return 1.0 - f.h * f.h / 6.0 * lam + f.tau * f.tau * sigma * lam;
}

struct HarmonicCoefficients
{
    double a_1k = 0;          //!< u_{1h} = a_1k sin(k x) for u1 = sin(k x)
    double gamma_hat_1k = 0;  //!< velocity amplitude of the discrete solution
    double gamma_1k = 0;      //!< forcing amplitude of the discrete solution
};

//! a_1k of a u_{1h} variant (normalized frame).
inline double initial_velocity_factor(U1Variant variant, double lambda, int k, double h, double tau)
{
    const double k2 = double(k) * double(k);
    switch (variant)
    {
    case U1Variant::v0: return 1.0 - (h * h + tau * tau) / 12.0 * lambda;
    case U1Variant::v1: return lambda / k2 * (1.0 - tau * tau * k2 / 12.0);
    case U1Variant::v2: return lambda / k2 * (1.0 - tau * tau * lambda / 12.0);
    }
    return 0;
}

inline HarmonicCoefficients harmonic_coefficients(int k, const MeshSpec& mesh, U1Variant variant)
{
    const auto d = dispersion(k, mesh);
    const NormalizedFrame f(mesh);
    const double half = 0.5 * d.mu_k * f.tau;
    if (!(half < 0.5 * std::numbers::pi))
    {
        throw InternalInvariantError("harmonic_coefficients: mu_k tau / 2 reached pi / 2");
    }
    const double t = std::tan(half);
    HarmonicCoefficients c;
    c.a_1k = initial_velocity_factor(variant, d.lambda_k, k, f.h, f.tau);
    c.gamma_hat_1k = c.a_1k * 2.0 * k / (d.lambda_k * f.tau) * t;
    c.gamma_1k = 2.0 / (k * f.tau) * t;
    return c;
}

/*!
 * Harmonic data families (original coordinates, omega_k = pi k / X):
 * j = 0: (sin omega_k x, 0, 0); j = 1: (0, sin omega_k x, 0);
 * j = 2: (0, 0, sin(omega_k x) sin((k-1) a pi t / X)), k >= 2.
 */
struct HarmonicKind
{
    int j = 0;
    int k = 1;

    void validate() const
    {
        if (j < 0 || j > 2) throw ConfigError("harmonic data: j must be 0, 1 or 2");
        if (k < 1) throw ConfigError("harmonic data: k must be >= 1");
        if (j == 2 && k < 2) throw ConfigError("harmonic data: j = 2 needs k >= 2 (resonant forcing at k = 1)");
    }
};

inline DataSpec harmonic_data(const HarmonicKind& kind, double X, double a)
{
    kind.validate();
    DataSpec d = DataSpec::zero(X);
    switch (kind.j)
    {
    case 0: d.u0 = Profile::harmonic(X, kind.k); break;
    case 1: d.u1 = Profile::harmonic(X, kind.k); break;
    case 2:
        d.f = Forcing{Profile::harmonic(X, kind.k),
                      TimeProfile::harmonic_sin((kind.k - 1) * a * std::numbers::pi / X)};
        break;
    }
    return d;
}

namespace detail
{

//! int_0^t sin(b theta) sin(kappa (t - theta)) d theta, |kappa| != b handled with its limit.
inline double sine_convolution(double b, double kappa, double t)
{
    const double diff = b - kappa;
    if (std::abs(diff) <= 1e-9 * std::max(1.0, std::abs(b)))
    {
        return (std::sin(b * t) - b * t * std::cos(b * t)) / (2.0 * b);
    }
    return -0.5 * (std::sin(b * t) - std::sin(kappa * t)) / diff +
           0.5 * (std::sin(b * t) + std::sin(kappa * t)) / (b + kappa);
}

}  // namespace detail

/*!
 * Exact solution u(x, t) for harmonic data, by the Fourier formula.
 */
inline double exact_harmonic_solution(const HarmonicKind& kind, const MeshSpec& mesh, double x, double t)
{
    kind.validate();
    const NormalizedFrame f(mesh);
    const int k = kind.k;
    const double xs = std::sin(k * f.length_scale * x);
    const double ts = f.time_scale * t;
    switch (kind.j)
    {
    case 0: return std::cos(k * ts) * xs;
    case 1: return std::sin(k * ts) / k * xs / f.time_scale;
    case 2:
        return detail::sine_convolution(k - 1, k, ts) / k * xs / (f.time_scale * f.time_scale);
    }
    return 0;
}

/*!
 * Time amplitudes A(t_m), m = 0..M, of the discrete solution
 * v_i^m = A(t_m) sin(k x'_i) for harmonic data.
 *
 * For j = 2 the interpolated convolution is built from exact per-interval
 * antiderivatives in O(M^2).
 */
inline std::vector<double> discrete_harmonic_amplitudes(const HarmonicKind& kind, const MeshSpec& mesh,
                                                        U1Variant variant)
{
    kind.validate();
    detail::require_mode(kind.k, mesh, "discrete_harmonic_amplitudes");
    mesh.require_stable("discrete_harmonic_amplitudes");
    const NormalizedFrame f(mesh);
    const int k = kind.k;
    const int M = mesh.M();
    const auto d = dispersion(k, mesh);
    const double mu = d.mu_k;
    std::vector<double> A(static_cast<std::size_t>(M) + 1, 0.0);
    if (kind.j == 0)
    {
        for (int m = 0; m <= M; ++m) A[m] = std::cos(mu * m * f.tau);
        return A;
    }
    const auto c = harmonic_coefficients(k, mesh, variant);
    if (kind.j == 1)
    {
        for (int m = 0; m <= M; ++m) A[m] = c.gamma_hat_1k / k * std::sin(mu * m * f.tau) / f.time_scale;
        return A;
    }
    // j = 2
    const double b = k - 1;
    std::vector<double> s(static_cast<std::size_t>(M) + 1), alpha(static_cast<std::size_t>(M) + 1),
        beta(static_cast<std::size_t>(M) + 1);
    for (int j = 0; j <= M; ++j) s[j] = std::sin(mu * j * f.tau);
    for (int n = 1; n <= M; ++n)
    {
        const double lo = (n - 1) * f.tau, hi = n * f.tau;
        // (hi - theta)/tau and (theta - lo)/tau as polynomials in (theta - lo)
        alpha[n] = detail::poly_sine_integral({1.0, -1.0 / f.tau}, lo, lo, hi, b);
        beta[n] = detail::poly_sine_integral({0.0, 1.0 / f.tau}, lo, lo, hi, b);
    }
    const double scale = c.gamma_1k / k / (f.time_scale * f.time_scale);
    for (int m = 1; m <= M; ++m)
    {
        double y = 0;
        for (int n = 1; n <= m; ++n) y += alpha[n] * s[m - n + 1] + beta[n] * s[m - n];
        A[m] = scale * y;
    }
    return A;
}

//! v_i^m of the compact scheme for harmonic data.
inline double discrete_harmonic_solution(const HarmonicKind& kind, const MeshSpec& mesh, U1Variant variant, int i,
                                         int m)
{
    detail::require(i >= 0 && i <= mesh.N() && m >= 0 && m <= mesh.M(),
                    "discrete_harmonic_solution: index out of range");
    const NormalizedFrame f(mesh);
    const double xs = std::sin(kind.k * f.h * i);
    if (kind.j == 2)
    {
        // only the first m + 1 amplitudes are needed
        const MeshSpec sub = build_mesh(mesh.X(), std::max(1, m) * mesh.tau(), mesh.N(), std::max(1, m), mesh.a(),
                                        mesh.eps0());
        const auto A = discrete_harmonic_amplitudes(kind, sub, variant);
        return (m == 0 ? 0.0 : A[static_cast<std::size_t>(m)]) * xs;
    }
    const auto d = dispersion(kind.k, mesh);
    if (kind.j == 0) return std::cos(d.mu_k * m * f.tau) * xs;
    const auto c = harmonic_coefficients(kind.k, mesh, variant);
    return c.gamma_hat_1k / kind.k * std::sin(d.mu_k * m * f.tau) / f.time_scale * xs;
}

struct FrequencyChoice
{
    int k_h = 0;
    double rho_h = 0;            //!< (alpha / nu_h)^{1/5}
    double nu_h = 0;             //!< normalized dispersion coefficient
    double predicted_shift = 0;  //!< mu_{k_h} - (k_h - alpha), expected O(h^{2/5})
};

//! k_h and rho_h for normalized steps h, tau, without checking k_h against a mesh.
inline FrequencyChoice frequency_for_steps(double alpha, double h, double tau)
{
    detail::require(alpha > 0, "choose_k_h: alpha must be positive");
    detail::require(h > 0 && tau > 0 && tau < h, "choose_k_h: need 0 < tau < h");
    FrequencyChoice out;
    out.nu_h = (std::pow(h, 4) - std::pow(tau, 4)) / 480.0;
    out.rho_h = std::pow(alpha / out.nu_h, 0.2);
    out.k_h = static_cast<int>(std::floor(out.rho_h)) + 1;
    return out;
}

/*!
 * Frequency k_h = floor((alpha / nu_h)^{1/5}) + 1, for which the discrete
 * frequency lags the exact one by about alpha.
 */
inline FrequencyChoice choose_k_h(double alpha, const MeshSpec& mesh)
{
    mesh.require_stable("choose_k_h");
    const NormalizedFrame f(mesh);
    FrequencyChoice out = frequency_for_steps(alpha, f.h, f.tau);
    if (out.k_h > mesh.N() - 1)
    {
        const double ratio = f.tau / f.h;
        auto fits = [&](int n) {
            const double h = std::numbers::pi / n;
            return frequency_for_steps(alpha, h, ratio * h).k_h <= n - 1;
        };
        int hi = mesh.N();
        while (!fits(hi)) hi *= 2;
        int lo = hi / 2 < mesh.N() ? mesh.N() : hi / 2;
        // k_h grows like n^{4/5}, so fits() is monotone in n
        while (hi - lo > 1)
        {
            const int mid = lo + (hi - lo) / 2;
            (fits(mid) ? hi : lo) = mid;
        }
        throw MeshTooCoarse("choose_k_h: k_h = " + std::to_string(out.k_h) + " exceeds N - 1 = " +
                                std::to_string(mesh.N() - 1) + "; need N >= " + std::to_string(hi),
                            hi);
    }
    out.predicted_shift = dispersion(out.k_h, mesh).mu_k - (out.k_h - alpha);
    return out;
}

//! c_j(T) of the error-norm asymptotics; T is the normalized final time.
inline double asymptotic_constant(int j, double T)
{
    detail::require(T > 0, "asymptotic_constant: T must be positive");
    detail::require(j >= 0 && j <= 2, "asymptotic_constant: j must be 0, 1 or 2");
    if (j == 2) return T - std::sin(T);
    const double KT = std::floor(T / std::numbers::pi);
    return 2.0 * (2.0 * KT + 1.0 - std::cos(T - KT * std::numbers::pi));
}

//! Leading term k^{-p_j + l} (4/pi) c_j(T) of the mesh L^1(Q) error norm; p_0 = 0, p_1 = p_2 = 1.
inline double sharpness_prediction(int j, int l, int k, double T)
{
    detail::require(l == 0 || l == 1, "sharpness_prediction: l must be 0 or 1");
    if (j == 2) detail::require(k >= 2, "sharpness_prediction: j = 2 needs k >= 2");
    const int p = j == 0 ? 0 : 1;
    return std::pow(static_cast<double>(k), l - p) * 4.0 / std::numbers::pi * asymptotic_constant(j, T);
}

}  // namespace wavecompact

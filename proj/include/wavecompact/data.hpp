#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wavecompact/errors.hpp"
#include "wavecompact/mesh.hpp"
#include "wavecompact/operators.hpp"
#include "wavecompact/quadrature.hpp"

namespace wavecompact
{

//! Which one-sided value a discontinuous descriptor reports at a breakpoint.
enum class NodeConvention
{
    left,
    right,
    mean,
};

//! amplitude * sin(pi k x / X)
struct HarmonicForm
{
    int k = 1;
    double amplitude = 1.0;
};

//! sqrt(2/X) sum_k coeffs[k-1] sin(pi k x / X); coefficients are orthonormal-basis coordinates.
struct SineSeriesForm
{
    std::vector<double> coeffs;
};

//! Piece j lives on [b_j, b_{j+1}] and equals sum_m c_m (x - b_j)^m.
struct PiecewisePolynomialForm
{
    std::vector<double> breakpoints;
    std::vector<std::vector<double>> pieces;
    NodeConvention convention = NodeConvention::mean;
};

struct CallableForm
{
    std::function<double(double)> fn;
    std::vector<double> breakpoints;  //!< interior points where fn may be nonsmooth
    bool pointwise = true;            //!< false when fn is only meaningful under integrals
};

/*!
 * A function of x on (0, X): initial displacement, initial velocity, or the
 * spatial factor of a separable forcing term.
 */
class Profile
{
public:
    using Form = std::variant<HarmonicForm, SineSeriesForm, PiecewisePolynomialForm, CallableForm>;

    static Profile zero(double X) { return piecewise_polynomial(X, {0.0, X}, {{0.0}}); }

    static Profile harmonic(double X, int k, double amplitude = 1.0)
    {
        check_length(X);
        if (k < 1) throw ConfigError("harmonic profile: k must be >= 1");
        return Profile(X, HarmonicForm{k, amplitude});
    }

    static Profile sine_series(double X, std::vector<double> coeffs)
    {
        check_length(X);
        return Profile(X, SineSeriesForm{std::move(coeffs)});
    }

    static Profile piecewise_polynomial(double X, std::vector<double> breakpoints,
                                        std::vector<std::vector<double>> pieces,
                                        NodeConvention convention = NodeConvention::mean)
    {
        check_length(X);
        if (breakpoints.size() < 2 || pieces.size() + 1 != breakpoints.size())
        {
            throw ConfigError("piecewise polynomial: need one coefficient list per interval between breakpoints");
        }
        if (std::abs(breakpoints.front()) > 1e-14 * X || std::abs(breakpoints.back() - X) > 1e-14 * X)
        {
            throw ConfigError("piecewise polynomial: breakpoints must start at 0 and end at X");
        }
        breakpoints.front() = 0.0;
        breakpoints.back() = X;
        for (std::size_t j = 1; j < breakpoints.size(); ++j)
        {
            if (!(breakpoints[j] > breakpoints[j - 1]))
            {
                throw ConfigError("piecewise polynomial: breakpoints must be strictly increasing");
            }
        }
        for (auto& p : pieces)
        {
            if (p.empty()) p.push_back(0.0);
        }
        return Profile(X, PiecewisePolynomialForm{std::move(breakpoints), std::move(pieces), convention});
    }

    static Profile callable(double X, std::function<double(double)> fn, std::vector<double> breakpoints = {},
                            bool pointwise = true)
    {
        check_length(X);
        if (!fn) throw ConfigError("callable profile: empty function");
        std::sort(breakpoints.begin(), breakpoints.end());
        return Profile(X, CallableForm{std::move(fn), std::move(breakpoints), pointwise});
    }

    double X() const noexcept { return X_; }
    const Form& form() const noexcept { return form_; }

    bool pointwise() const noexcept
    {
        if (auto c = std::get_if<CallableForm>(&form_)) return c->pointwise;
        return true;
    }

    //! Value at x in [0, X]; breakpoints follow the descriptor's node convention.
    double operator()(double x) const
    {
        return std::visit([&](const auto& f) { return value(f, x); }, form_);
    }

    //! Breakpoints strictly inside (0, X).
    std::vector<double> interior_breakpoints() const
    {
        std::vector<double> out;
        if (auto p = std::get_if<PiecewisePolynomialForm>(&form_))
        {
            out.assign(p->breakpoints.begin() + 1, p->breakpoints.end() - 1);
        }
        else if (auto c = std::get_if<CallableForm>(&form_))
        {
            for (double b : c->breakpoints)
                if (b > 0 && b < X_) out.push_back(b);
        }
        return out;
    }

    //! Highest polynomial degree over pieces, or -1 if not a piecewise polynomial.
    int polynomial_degree() const noexcept
    {
        if (auto p = std::get_if<PiecewisePolynomialForm>(&form_))
        {
            std::size_t d = 0;
            for (const auto& c : p->pieces) d = std::max(d, c.size() - 1);
            return static_cast<int>(d);
        }
        return -1;
    }

private:
    Profile(double X, Form form) : X_(X), form_(std::move(form)) {}

    static void check_length(double X)
    {
        if (!(X > 0) || !std::isfinite(X)) throw ConfigError("profile: X must be positive");
    }

    double value(const HarmonicForm& f, double x) const
    {
        return f.amplitude * std::sin(std::numbers::pi * f.k * x / X_);
    }

    double value(const SineSeriesForm& f, double x) const
    {
        double s = 0;
        for (std::size_t k = 0; k < f.coeffs.size(); ++k)
        {
            s += f.coeffs[k] * std::sin(std::numbers::pi * static_cast<double>(k + 1) * x / X_);
        }
        return s * std::sqrt(2.0 / X_);
    }

    static double horner(const std::vector<double>& c, double y)
    {
        double s = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * y + *it;
        return s;
    }

    double value(const PiecewisePolynomialForm& f, double x) const
    {
        const auto& b = f.breakpoints;
        const std::size_t pieces = f.pieces.size();
        auto piece_value = [&](std::size_t j) { return horner(f.pieces[j], x - b[j]); };
        // first breakpoint strictly greater than x
        std::size_t j = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), x) - b.begin());
        if (j == 0) return piece_value(0);
        if (j >= b.size()) return piece_value(pieces - 1);
        std::size_t piece = j - 1;
        if (x == b[piece] && piece > 0)
        {
            const double left = piece_value(piece - 1);
            const double right = piece_value(piece);
            switch (f.convention)
            {
            case NodeConvention::left: return left;
            case NodeConvention::right: return right;
            case NodeConvention::mean: return 0.5 * (left + right);
            }
        }
        return piece_value(piece);
    }

    double value(const CallableForm& f, double x) const
    {
        if (!f.pointwise)
        {
            throw ContractViolation("profile has no pointwise values; declare a node convention or use averages");
        }
        return f.fn(x);
    }

    double X_;
    Form form_;
};

//! amplitude * sin(omega t)
struct TimeHarmonicSin
{
    double omega = 1.0;
    double amplitude = 1.0;
};

//! sum_m coeffs[m] t^m
struct TimePolynomial
{
    std::vector<double> coeffs;
};

struct TimeCallable
{
    std::function<double(double)> fn;
};

//! Time factor g(t) of a separable forcing term.
class TimeProfile
{
public:
    using Form = std::variant<TimeHarmonicSin, TimePolynomial, TimeCallable>;

    static TimeProfile constant(double c) { return TimeProfile(TimePolynomial{{c}}); }
    static TimeProfile harmonic_sin(double omega, double amplitude = 1.0)
    {
        return TimeProfile(TimeHarmonicSin{omega, amplitude});
    }
    static TimeProfile polynomial(std::vector<double> coeffs)
    {
        if (coeffs.empty()) coeffs.push_back(0.0);
        return TimeProfile(TimePolynomial{std::move(coeffs)});
    }
    static TimeProfile callable(std::function<double(double)> fn)
    {
        if (!fn) throw ConfigError("callable time profile: empty function");
        return TimeProfile(TimeCallable{std::move(fn)});
    }

    const Form& form() const noexcept { return form_; }

    double operator()(double t) const
    {
        if (auto h = std::get_if<TimeHarmonicSin>(&form_)) return h->amplitude * std::sin(h->omega * t);
        if (auto p = std::get_if<TimePolynomial>(&form_))
        {
            double s = 0;
            for (auto it = p->coeffs.rbegin(); it != p->coeffs.rend(); ++it) s = s * t + *it;
            return s;
        }
        return std::get<TimeCallable>(form_).fn(t);
    }

private:
    explicit TimeProfile(Form f) : form_(std::move(f)) {}
    Form form_;
};

//! f(x, t) = space(x) * time(t)
struct Forcing
{
    Profile space;
    TimeProfile time;
};

//! The data triple (u0, u1, f); f absent means f = 0.
struct DataSpec
{
    Profile u0;
    Profile u1;
    std::optional<Forcing> f;

    double X() const noexcept { return u0.X(); }

    void validate() const
    {
        auto same = [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(a, b); };
        if (!same(u0.X(), u1.X()) || (f && !same(u0.X(), f->space.X())))
        {
            throw ConfigError("DataSpec: u0, u1 and f must share the same X");
        }
    }

    static DataSpec zero(double X) { return DataSpec{Profile::zero(X), Profile::zero(X), std::nullopt}; }
};

//! Choice of the discrete initial velocity u_{1h}.
enum class U1Variant
{
    v0,  //!< s_N u1 + (tau^2 a^2 / 12) Lambda_x u1, node samples
    v1,  //!< q_h u1 + (tau^2 a^2 / 12) Lambda_x u1, Lambda_x on node samples
    v2,  //!< (I + (tau^2 a^2 / 12) Lambda_x) q_h u1
};

inline const char* to_string(U1Variant v)
{
    switch (v)
    {
    case U1Variant::v0: return "v0";
    case U1Variant::v1: return "v1";
    case U1Variant::v2: return "v2";
    }
    return "?";
}

namespace detail
{

//! (2/h sin(omega h / 2))^2, the discrete symbol of -Lambda_x on sin(omega x).
inline double discrete_symbol(double omega, double h)
{
    const double s = 2.0 / h * std::sin(0.5 * omega * h);
    return s * s;
}

//! q_h sin(omega x) = hat_factor * sin(omega x_i)
inline double hat_factor(double omega, double h)
{
    const double z = 0.5 * omega * h;
    if (std::abs(z) < 1e-8) return 1.0 - z * z / 3.0;
    const double s = std::sin(z) / z;
    return s * s;
}

inline double frequency(int k, double X) { return std::numbers::pi * k / X; }

/*!
 * Integral of profile(x) * weight(x) over [lo, hi], split at breakpoints.
 * \p weight_degree is the polynomial degree of the weight (for exactness on
 * polynomial pieces).
 */
template<class W>
double integrate_profile(const Profile& p, double lo, double hi, W&& weight, int weight_degree, int cell,
                         int min_points = 8)
{
    if (hi <= lo) return 0.0;
    std::vector<double> cuts{lo};
    for (double b : p.interior_breakpoints())
    {
        if (b > lo && b < hi) cuts.push_back(b);
    }
    cuts.push_back(hi);

    double total = 0;
    const auto& form = p.form();
    if (auto pp = std::get_if<PiecewisePolynomialForm>(&form))
    {
        const int n = gauss_points_for_degree(p.polynomial_degree() + weight_degree, min_points);
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
        {
            const double a = cuts[s], b = cuts[s + 1];
            // locate the piece that owns this open subinterval
            const double mid = 0.5 * (a + b);
            const auto& br = pp->breakpoints;
            std::size_t j = static_cast<std::size_t>(std::upper_bound(br.begin(), br.end(), mid) - br.begin());
            j = std::min(std::max<std::size_t>(j, 1), pp->pieces.size()) - 1;
            const auto& c = pp->pieces[j];
            const double base = br[j];
            total += integrate_gauss(
                [&](double x) {
                    double v = 0;
                    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * (x - base) + *it;
                    return v * weight(x);
                },
                a, b, n);
        }
        return total;
    }
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
    {
        total += integrate_adaptive([&](double x) { return p(x) * weight(x); }, cuts[s], cuts[s + 1], min_points,
                                    cell);
    }
    return total;
}

template<class W>
double integrate_time(const TimeProfile& g, double lo, double hi, W&& weight, int weight_degree, int cell)
{
    if (auto p = std::get_if<TimePolynomial>(&g.form()))
    {
        const int deg = static_cast<int>(p->coeffs.size()) - 1;
        return integrate_gauss([&](double t) { return g(t) * weight(t); }, lo, hi,
                               gauss_points_for_degree(deg + weight_degree));
    }
    return integrate_adaptive([&](double t) { return g(t) * weight(t); }, lo, hi, 8, cell);
}

}  // namespace detail

//! Node samples u(x_i), i = 0..N. Requires pointwise values.
inline GridFn sample_nodes(const Profile& p, const MeshSpec& mesh)
{
    if (!p.pointwise())
    {
        throw ContractViolation("sample_nodes: profile has no pointwise values");
    }
    return GridFn::sample(mesh, [&](double x) { return p(x); });
}

/*!
 * Hat-function averages (q_h w)_i = (1/h) int w e_i^h dx for 1 <= i <= N-1;
 * boundary entries are zero.
 */
inline GridFn average_qh(const Profile& w, const MeshSpec& mesh)
{
    const int N = mesh.N();
    const double h = mesh.h();
    GridFn out(N);
    const auto& form = w.form();
    if (auto hf = std::get_if<HarmonicForm>(&form))
    {
        const double om = detail::frequency(hf->k, w.X());
        const double fac = hf->amplitude * detail::hat_factor(om, h);
        for (int i = 1; i < N; ++i) out[i] = fac * std::sin(om * mesh.x(i));
        return out;
    }
    if (auto sf = std::get_if<SineSeriesForm>(&form))
    {
        const double norm = std::sqrt(2.0 / w.X());
        for (std::size_t k = 0; k < sf->coeffs.size(); ++k)
        {
            if (sf->coeffs[k] == 0.0) continue;
            const double om = detail::frequency(static_cast<int>(k + 1), w.X());
            const double fac = norm * sf->coeffs[k] * detail::hat_factor(om, h);
            for (int i = 1; i < N; ++i) out[i] += fac * std::sin(om * mesh.x(i));
        }
        return out;
    }
    // Per cell [x_j, x_{j+1}]: left-falling and right-rising hat halves.
    std::vector<double> falling(static_cast<std::size_t>(N)), rising(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j)
    {
        const double xl = mesh.x(j), xr = mesh.x(j + 1);
        falling[j] = detail::integrate_profile(w, xl, xr, [&](double x) { return (xr - x) / h; }, 1, j) / h;
        rising[j] = detail::integrate_profile(w, xl, xr, [&](double x) { return (x - xl) / h; }, 1, j) / h;
    }
    for (int i = 1; i < N; ++i) out[i] = rising[i - 1] + falling[i];
    return out;
}

/*!
 * Time hat average of g:
 * m = 0: (2/tau) int_0^tau g e^{tau,0} dt; 1 <= m <= M-1: (1/tau) int g e^{tau,m} dt.
 */
inline double average_qtau(const TimeProfile& g, const MeshSpec& mesh, int m)
{
    detail::require(m >= 0 && m <= mesh.M() - 1, "average_qtau: m must lie in 0..M-1");
    const double tau = mesh.tau();
    const double tm = mesh.t(m);
    if (auto hs = std::get_if<TimeHarmonicSin>(&g.form()))
    {
        const double w = hs->omega;
        const double z = w * tau;
        if (m == 0)
        {
            // (2/tau) int_0^tau sin(w t)(1 - t/tau) dt = 2 (z - sin z) / (w tau z)
            if (std::abs(z) < 1e-4) return hs->amplitude * w * tau / 3.0 * (1.0 - z * z / 20.0);
            return hs->amplitude * 2.0 * (z - std::sin(z)) / (w * tau * z);
        }
        return hs->amplitude * detail::hat_factor(w, tau) * std::sin(w * tm);
    }
    if (m == 0)
    {
        return 2.0 / tau * detail::integrate_time(g, 0.0, tau, [&](double t) { return 1.0 - t / tau; }, 1, 0);
    }
    const double left =
        detail::integrate_time(g, tm - tau, tm, [&](double t) { return (t - (tm - tau)) / tau; }, 1, m);
    const double right =
        detail::integrate_time(g, tm, tm + tau, [&](double t) { return ((tm + tau) - t) / tau; }, 1, m);
    return (left + right) / tau;
}

//! Stencil (-q_{i-1} + 14 q_i - q_{i+1}) / 12 applied to q = q_h w (q_0 = q_N = 0).
inline GridFn q2h_from_qh(const GridFn& q)
{
    const int N = q.cells();
    GridFn out(N);
    for (int i = 1; i < N; ++i)
    {
        const double l = i > 1 ? q[i - 1] : 0.0;
        const double r = i < N - 1 ? q[i + 1] : 0.0;
        out[i] = (-l + 14.0 * q[i] - r) / 12.0;
    }
    return out;
}

//! q_{2h} w = q_h w - (h^2/12) Lambda_x q_h w
inline GridFn average_q2h(const Profile& w, const MeshSpec& mesh)
{
    return q2h_from_qh(average_qh(w, mesh));
}

//! Multiplier of q_{2h} on sin(omega x): (lambda/omega^2)(1 + h^2 lambda / 12).
inline double q2h_factor(double omega, double h)
{
    return detail::hat_factor(omega, h) * (1.0 + h * h * detail::discrete_symbol(omega, h) / 12.0);
}

inline GridFn build_u1h(U1Variant variant, const Profile& u1, const MeshSpec& mesh)
{
    const double c = mesh.tau() * mesh.tau() * mesh.a() * mesh.a() / 12.0;
    switch (variant)
    {
    case U1Variant::v0:
    {
        const GridFn s = sample_nodes(u1, mesh);
        GridFn out = apply_spatial_samples(SpatialOp::sN, s, mesh);
        out.axpy(c, apply_spatial_samples(SpatialOp::LambdaX, s, mesh));
        return out;
    }
    case U1Variant::v1:
    {
        const GridFn s = sample_nodes(u1, mesh);
        GridFn out = average_qh(u1, mesh);
        out.axpy(c, apply_spatial_samples(SpatialOp::LambdaX, s, mesh));
        return out;
    }
    case U1Variant::v2:
    {
        GridFn q = average_qh(u1, mesh);
        GridFn out = q;
        out.axpy(c, apply_spatial(SpatialOp::LambdaX, q, mesh));
        return out;
    }
    }
    return GridFn(mesh.N());
}

/*!
 * q_h q_tau f for separable f, stored as one spatial grid function and M
 * time weights; slice m is their product.
 */
class SeparableForcing
{
public:
    SeparableForcing() = default;

    SeparableForcing(const Forcing& f, const MeshSpec& mesh) : space_(average_qh(f.space, mesh))
    {
        time_.resize(static_cast<std::size_t>(mesh.M()));
        for (int m = 0; m < mesh.M(); ++m) time_[m] = average_qtau(f.time, mesh, m);
    }

    bool empty() const noexcept { return time_.empty(); }

    GridFn slice(int m) const { return space_ * time_[static_cast<std::size_t>(m)]; }

    const GridFn& space() const noexcept { return space_; }
    const std::vector<double>& time() const noexcept { return time_; }

private:
    GridFn space_;
    std::vector<double> time_;
};

//! (q_h q_tau f)^m for m = 0..M-1.
inline std::vector<GridFn> build_fh(const std::optional<Forcing>& f, const MeshSpec& mesh)
{
    std::vector<GridFn> out;
    out.reserve(static_cast<std::size_t>(mesh.M()));
    if (!f)
    {
        out.assign(static_cast<std::size_t>(mesh.M()), GridFn(mesh.N()));
        return out;
    }
    SeparableForcing sf(*f, mesh);
    for (int m = 0; m < mesh.M(); ++m) out.push_back(sf.slice(m));
    return out;
}

namespace detail
{

//! int_{lo}^{hi} p(x) sin(omega x) dx for p(x) = sum_m c_m (x - base)^m, by repeated integration by parts.
inline double poly_sine_integral(const std::vector<double>& c, double base, double lo, double hi, double omega)
{
    auto antiderivative = [&](double x) {
        // derivatives of p at x
        std::vector<double> d(c);
        const double y = x - base;
        double s = 0;
        const double sn = std::sin(omega * x), cs = std::cos(omega * x);
        double inv = 1.0 / omega;
        for (std::size_t j = 0; j < c.size(); ++j)
        {
            double pj = 0;
            for (std::size_t m = d.size(); m-- > j;) pj = pj * y + d[m];
            // S_{j+1}: -cos/w, -sin/w^2, cos/w^3, sin/w^4, ...
            double sj = 0;
            switch (j % 4)
            {
            case 0: sj = -cs; break;
            case 1: sj = -sn; break;
            case 2: sj = cs; break;
            case 3: sj = sn; break;
            }
            s += ((j % 2 == 0) ? 1.0 : -1.0) * pj * sj * inv;
            inv /= omega;
            // differentiate in place: d[m] <- m * d[m] shifted
            for (std::size_t m = j + 1; m < d.size(); ++m) d[m] *= static_cast<double>(m - j);
        }
        return s;
    };
    return antiderivative(hi) - antiderivative(lo);
}

}  // namespace detail

/*!
 * First K sine coefficients w_k = sqrt(2/X) int_0^X w sin(pi k x / X) dx.
 * Exact for harmonic, sine-series and piecewise-polynomial descriptors.
 */
inline std::vector<double> sine_coefficients(const Profile& w, int K)
{
    detail::require(K >= 1, "sine_coefficients: K >= 1");
    const double X = w.X();
    const double norm = std::sqrt(2.0 / X);
    std::vector<double> out(static_cast<std::size_t>(K), 0.0);
    const auto& form = w.form();
    if (auto hf = std::get_if<HarmonicForm>(&form))
    {
        if (hf->k <= K) out[hf->k - 1] = hf->amplitude * std::sqrt(0.5 * X);
        return out;
    }
    if (auto sf = std::get_if<SineSeriesForm>(&form))
    {
        for (std::size_t k = 0; k < out.size() && k < sf->coeffs.size(); ++k) out[k] = sf->coeffs[k];
        return out;
    }
    if (auto pp = std::get_if<PiecewisePolynomialForm>(&form))
    {
        for (int k = 1; k <= K; ++k)
        {
            const double om = detail::frequency(k, X);
            double s = 0;
            for (std::size_t j = 0; j < pp->pieces.size(); ++j)
            {
                const auto& c = pp->pieces[j];
                if (c.size() == 1 && c[0] == 0.0) continue;
                s += detail::poly_sine_integral(c, pp->breakpoints[j], pp->breakpoints[j], pp->breakpoints[j + 1], om);
            }
            out[k - 1] = norm * s;
        }
        return out;
    }
    // Callable: composite Gauss with cells resolving the highest frequency.
    const int cells = std::max(64, 4 * K);
    std::vector<double> nodes, weights;
    std::vector<double> cuts;
    for (int c = 0; c <= cells; ++c) cuts.push_back(X * c / cells);
    for (double b : w.interior_breakpoints()) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    const GaussRule& rule = gauss_legendre(8);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
    {
        const double a = cuts[s], b = cuts[s + 1];
        if (b <= a) continue;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q)
        {
            nodes.push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q]);
            weights.push_back(0.5 * (b - a) * rule.weights[q]);
        }
    }
    std::vector<double> values(nodes.size());
    const auto& cf = std::get<CallableForm>(form);
    for (std::size_t q = 0; q < nodes.size(); ++q) values[q] = cf.fn(nodes[q]) * weights[q];
    for (int k = 1; k <= K; ++k)
    {
        const double om = detail::frequency(k, X);
        double s = 0;
        for (std::size_t q = 0; q < nodes.size(); ++q) s += values[q] * std::sin(om * nodes[q]);
        out[k - 1] = norm * s;
    }
    return out;
}

struct FractionalNorm
{
    double value = 0;                   //!< partial-sum norm over the supplied coefficients
    std::optional<double> tail;         //!< estimate of the omitted tail (same units as value)
};

/*!
 * Partial sum of ||w||_{H^alpha}^2 = sum (pi k / X)^{2 alpha} w_k^2.
 *
 * When \p decay_exponent p is given (|w_k| ~ C k^{-p}) the omitted tail
 * k > K is estimated from C fitted on the last quarter of the coefficients;
 * the tail is infinite when 2 p - 2 alpha <= 1.
 */
inline FractionalNorm fractional_norm(const std::vector<double>& coeffs, double alpha, double X,
                                      std::optional<double> decay_exponent = std::nullopt)
{
    detail::require(alpha >= 0, "fractional_norm: alpha >= 0");
    FractionalNorm out;
    double s = 0;
    for (std::size_t k = 0; k < coeffs.size(); ++k)
    {
        const double f = std::pow(std::numbers::pi * static_cast<double>(k + 1) / X, 2 * alpha);
        s += f * coeffs[k] * coeffs[k];
    }
    out.value = std::sqrt(s);
    if (decay_exponent && !coeffs.empty())
    {
        const double p = *decay_exponent;
        const std::size_t K = coeffs.size();
        double C = 0;
        for (std::size_t k = K - std::max<std::size_t>(1, K / 4); k < K; ++k)
        {
            C = std::max(C, std::abs(coeffs[k]) * std::pow(static_cast<double>(k + 1), p));
        }
        const double e = 2 * p - 2 * alpha;
        if (e <= 1)
        {
            out.tail = std::numeric_limits<double>::infinity();
        }
        else
        {
            const double t = C * C * std::pow(std::numbers::pi / X, 2 * alpha) *
                             std::pow(static_cast<double>(K) + 0.5, 1 - e) / (e - 1);
            out.tail = std::sqrt(t);
        }
    }
    return out;
}

//! ||w||_{L^2(0,X)}, exact for polynomial pieces.
inline double l2_norm(const Profile& w)
{
    const auto& form = w.form();
    if (auto hf = std::get_if<HarmonicForm>(&form)) return std::abs(hf->amplitude) * std::sqrt(0.5 * w.X());
    if (auto sf = std::get_if<SineSeriesForm>(&form))
    {
        double s = 0;
        for (double c : sf->coeffs) s += c * c;
        return std::sqrt(s);
    }
    // integrate w^2: weight w itself has the profile's degree
    const int deg = std::max(0, w.polynomial_degree());
    const double s = detail::integrate_profile(w, 0.0, w.X(), [&](double x) { return w(x); }, deg, 0);
    return std::sqrt(std::max(s, 0.0));
}

/*!
 * ||w'||_{L^2(0,X)} for harmonic, sine-series and continuous piecewise
 * polynomial profiles. Returns +infinity for a piecewise polynomial that
 * jumps at a breakpoint.
 */
inline double h1_seminorm(const Profile& w)
{
    const auto& form = w.form();
    if (auto hf = std::get_if<HarmonicForm>(&form))
    {
        return std::abs(hf->amplitude) * detail::frequency(hf->k, w.X()) * std::sqrt(0.5 * w.X());
    }
    if (auto sf = std::get_if<SineSeriesForm>(&form))
    {
        double s = 0;
        for (std::size_t k = 0; k < sf->coeffs.size(); ++k)
        {
            const double om = detail::frequency(static_cast<int>(k + 1), w.X());
            s += om * om * sf->coeffs[k] * sf->coeffs[k];
        }
        return std::sqrt(s);
    }
    auto pp = std::get_if<PiecewisePolynomialForm>(&form);
    if (!pp) throw ContractViolation("h1_seminorm: needs an explicit descriptor, not a callable");
    double s = 0;
    for (std::size_t j = 0; j < pp->pieces.size(); ++j)
    {
        const auto& c = pp->pieces[j];
        const double base = pp->breakpoints[j];
        if (j > 0)
        {
            const auto& prev = pp->pieces[j - 1];
            const double y = base - pp->breakpoints[j - 1];
            double left = 0;
            for (auto it = prev.rbegin(); it != prev.rend(); ++it) left = left * y + *it;
            if (std::abs(left - c[0]) > 1e-12 * std::max(1.0, std::abs(left)))
            {
                return std::numeric_limits<double>::infinity();
            }
        }
        std::vector<double> d;
        for (std::size_t m = 1; m < c.size(); ++m) d.push_back(static_cast<double>(m) * c[m]);
        if (d.empty()) continue;
        const int n = gauss_points_for_degree(2 * static_cast<int>(d.size()));
        s += integrate_gauss(
            [&](double x) {
                double v = 0;
                for (auto it = d.rbegin(); it != d.rend(); ++it) v = v * (x - base) + *it;
                return v * v;
            },
            base, pp->breakpoints[j + 1], n);
    }
    return std::sqrt(s);
}

//! int_0^T |g(t)| dt by composite Gauss on a fine partition.
inline double l1_norm_time(const TimeProfile& g, double T, int cells = 4096)
{
    double s = 0;
    for (int c = 0; c < cells; ++c)
    {
        s += integrate_gauss([&](double t) { return std::abs(g(t)); }, T * c / cells, T * (c + 1) / cells, 8);
    }
    return s;
}

//! ||f||_{L^{2,1}(Q)} = ||space||_{L^2} * int_0^T |time| dt for separable f.
inline double l21_norm(const Forcing& f, double T) { return l2_norm(f.space) * l1_norm_time(f.time, T); }

}  // namespace wavecompact

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "wavecompact/data.hpp"
#include "wavecompact/errors.hpp"
#include "wavecompact/mesh.hpp"
#include "wavecompact/scheme.hpp"
#include "wavecompact/spectral.hpp"

namespace wavecompact
{

namespace detail
{

//! Values sin(pi k i / X * h) for i = 0..N with exact zeros at the ends.
inline GridFn mode_shape(int k, const MeshSpec& mesh)
{
    GridFn s(mesh.N());
    const double om = frequency(k, mesh.X());
    for (int i = 1; i < mesh.N(); ++i) s[i] = std::sin(om * mesh.x(i));
    return s;
}

}  // namespace detail

/*!
 * A single-mode solution A(t_m) sin(omega_k x_i) with precomputed amplitudes.
 * q_{2h} acts on the mode by a scalar multiplier.
 */
class ModeReference : public Reference
{
public:
    ModeReference(int k, const MeshSpec& mesh, std::vector<double> amplitudes)
        : shape_(detail::mode_shape(k, mesh)), amp_(std::move(amplitudes)),
          q2h_(q2h_factor(detail::frequency(k, mesh.X()), mesh.h()))
    {
        detail::require(static_cast<int>(amp_.size()) == mesh.M() + 1, "ModeReference: need M + 1 amplitudes");
    }

    GridFn nodal(int m) const override { return shape_ * amp_.at(static_cast<std::size_t>(m)); }
    bool has_q2h() const override { return true; }
    GridFn q2h(int m) const override { return shape_ * (q2h_ * amp_.at(static_cast<std::size_t>(m))); }

    const std::vector<double>& amplitudes() const noexcept { return amp_; }

private:
    GridFn shape_;
    std::vector<double> amp_;
    double q2h_;
};

//! Exact solution for harmonic data.
inline ModeReference harmonic_reference(const HarmonicKind& kind, const MeshSpec& mesh)
{
    kind.validate();
    const double xs = std::numbers::pi / (2.0 * kind.k);  // normalized x' where sin(k x') = 1
    const double x = xs / NormalizedFrame(mesh).length_scale;
    std::vector<double> amp(static_cast<std::size_t>(mesh.M()) + 1);
    for (int m = 0; m <= mesh.M(); ++m) amp[m] = exact_harmonic_solution(kind, mesh, x, mesh.t(m));
    return ModeReference(kind.k, mesh, std::move(amp));
}

//! Closed-form discrete solution for harmonic data, usable in place of the stepper output.
inline ModeReference discrete_harmonic_reference(const HarmonicKind& kind, const MeshSpec& mesh, U1Variant variant)
{
    return ModeReference(kind.k, mesh, discrete_harmonic_amplitudes(kind, mesh, variant));
}

//! A stored trajectory on the same mesh. No q_{2h} values.
class TrajectoryReference : public Reference
{
public:
    explicit TrajectoryReference(const Trajectory& t) : t_(t) {}
    GridFn nodal(int m) const override { return t_.slices.at(static_cast<std::size_t>(m)); }

private:
    const Trajectory& t_;
};

//! u(x, t) given as a function; boundary values are set to zero.
class CallableReference : public Reference
{
public:
    CallableReference(std::function<double(double, double)> u, const MeshSpec& mesh) : u_(std::move(u)), mesh_(mesh)
    {
    }

    GridFn nodal(int m) const override
    {
        GridFn w(mesh_.N());
        const double t = mesh_.t(m);
        for (int i = 1; i < mesh_.N(); ++i) w[i] = u_(mesh_.x(i), t);
        return w;
    }

private:
    std::function<double(double, double)> u_;
    MeshSpec mesh_;
};

/*!
 * Truncated Fourier solution u = sqrt(2/X) sum_{k<=K} A_k(t) sin(omega_k x)
 * of the continuous problem, mesh independent.
 *
 * Forcing is supported for time factors harmonic_sin and constant.
 */
class SpectralModel
{
public:
    SpectralModel(const DataSpec& data, int K, double a, double T) : X_(data.X()), a_(a), T_(T), K_(K)
    {
        data.validate();
        detail::require(K >= 1, "SpectralModel: K must be >= 1");
        detail::require(a > 0 && T > 0, "SpectralModel: a and T must be positive");
        u0_ = sine_coefficients(data.u0, K);
        u1_ = sine_coefficients(data.u1, K);
        f_.assign(static_cast<std::size_t>(K), 0.0);
        if (data.f)
        {
            const auto& form = data.f->time.form();
            if (auto hs = std::get_if<TimeHarmonicSin>(&form))
            {
                time_kind_ = TimeKind::harmonic_sin;
                omega_ = hs->omega;
                g_amp_ = hs->amplitude;
            }
            else if (auto p = std::get_if<TimePolynomial>(&form); p && p->coeffs.size() == 1)
            {
                time_kind_ = TimeKind::constant;
                g_amp_ = p->coeffs[0];
            }
            else
            {
                throw ConfigError("spectral reference: forcing time factor must be harmonic_sin or constant");
            }
            f_ = sine_coefficients(data.f->space, K);
            g_l1_ = l1_norm_time(data.f->time, T);
        }
    }

    int K() const noexcept { return K_; }
    double X() const noexcept { return X_; }
    double a() const noexcept { return a_; }
    double T() const noexcept { return T_; }
    const std::vector<double>& u0_coefficients() const noexcept { return u0_; }
    const std::vector<double>& u1_coefficients() const noexcept { return u1_; }

    //! A_k(t), k = 1..K
    double amplitude(int k, double t) const
    {
        const double kappa = a_ * detail::frequency(k, X_);
        const std::size_t j = static_cast<std::size_t>(k - 1);
        double A = u0_[j] * std::cos(kappa * t) + u1_[j] * std::sin(kappa * t) / kappa;
        if (f_[j] != 0.0)
        {
            double G = 0;
            if (time_kind_ == TimeKind::harmonic_sin)
            {
                G = g_amp_ * detail::sine_convolution(omega_, kappa, t) / kappa;
            }
            else
            {
                G = g_amp_ * (1.0 - std::cos(kappa * t)) / (kappa * kappa);
            }
            A += f_[j] * G;
        }
        return A;
    }

    //! Upper bound of sup_t |A_k(t)|.
    double amplitude_bound(int k) const
    {
        const double kappa = a_ * detail::frequency(k, X_);
        const std::size_t j = static_cast<std::size_t>(k - 1);
        return std::abs(u0_[j]) + std::abs(u1_[j]) / kappa + std::abs(f_[j]) * g_l1_ / kappa;
    }

private:
    enum class TimeKind
    {
        none,
        harmonic_sin,
        constant
    };

    double X_, a_, T_;
    int K_;
    std::vector<double> u0_, u1_, f_;
    TimeKind time_kind_ = TimeKind::none;
    double omega_ = 0, g_amp_ = 0, g_l1_ = 0;
};

//! Heuristic size of the omitted modes k > K, extrapolated from the coefficient decay.
struct TailEstimate
{
    double energy = 0;        //!< energy-norm size of the omitted modes on the mesh
    double l1_spacetime = 0;  //!< bound for their mesh L^1(Q) norm
    double decay_exponent = std::numeric_limits<double>::quiet_NaN();
};

/*!
 * SpectralModel evaluated on a mesh. Modes above N - 1 are folded onto the
 * mesh modes (sin(pi k i / N) is 2N-periodic and odd in k); the nodal sums
 * use a direct O(N^2) sine transform.
 */
class SpectralReference : public Reference
{
public:
    SpectralReference(std::shared_ptr<const SpectralModel> model, const MeshSpec& mesh)
        : model_(std::move(model)), mesh_(mesh)
    {
        detail::require(model_ != nullptr, "SpectralReference: null model");
        const double rel = std::abs(model_->X() - mesh.X()) / mesh.X();
        detail::require(rel < 1e-14 && std::abs(model_->a() - mesh.a()) <= 1e-14 * mesh.a(),
                        "SpectralReference: model and mesh disagree on X or a");
        const int N = mesh.N();
        table_.resize(static_cast<std::size_t>(2 * N));
        for (int j = 0; j < 2 * N; ++j) table_[j] = std::sin(std::numbers::pi * j / N);
        table_[0] = 0.0;
        table_[static_cast<std::size_t>(N)] = 0.0;
        const int K = model_->K();
        fold_.resize(static_cast<std::size_t>(K));
        filter_.resize(static_cast<std::size_t>(K));
        for (int k = 1; k <= K; ++k)
        {
            const int r = k % (2 * N);
            Fold f{0, 0.0};
            if (r != 0 && r != N) f = r < N ? Fold{r, 1.0} : Fold{2 * N - r, -1.0};
            fold_[k - 1] = f;
            filter_[k - 1] = q2h_factor(detail::frequency(k, mesh.X()), mesh.h());
        }
    }

    GridFn nodal(int m) const override { return evaluate(m, false).first; }
    bool has_q2h() const override { return true; }
    GridFn q2h(int m) const override { return evaluate(m, true).first; }
    std::pair<GridFn, GridFn> nodal_and_q2h(int m) const override { return evaluate(m, true, true); }

    TailEstimate tail(ErrorMode mode) const
    {
        const int K = model_->K();
        const double h = mesh_.h(), tau = mesh_.tau(), a = mesh_.a();
        std::vector<double> energy(static_cast<std::size_t>(K)), amp(static_cast<std::size_t>(K));
        for (int k = 1; k <= K; ++k)
        {
            const double om = detail::frequency(k, mesh_.X());
            const double d = model_->amplitude_bound(k);
            double vel = std::min(a * om, 2.0 / tau) * d;
            if (mode == ErrorMode::q2h_filtered) vel *= std::abs(filter_[k - 1]);
            const double grad = a * std::min(om, 2.0 / h) * d;
            energy[k - 1] = std::hypot(vel, grad);
            amp[k - 1] = d;
        }
        TailEstimate out;
        const auto e = power_tail(energy, 2.0);
        out.energy = e.first;
        out.decay_exponent = e.second;
        out.l1_spacetime = mesh_.X() * mesh_.T() * std::sqrt(2.0 / mesh_.X()) * power_tail(amp, 1.0).first;
        return out;
    }

private:
    struct Fold
    {
        int index;
        double sign;
    };

    //! Folded mode sums; with \p both the second entry holds the filtered slice.
    std::pair<GridFn, GridFn> evaluate(int m, bool filtered, bool both = false) const
    {
        const int N = mesh_.N();
        const double t = mesh_.t(m);
        const double norm = std::sqrt(2.0 / mesh_.X());
        std::vector<double> b(static_cast<std::size_t>(N), 0.0), bq;
        if (both) bq.assign(static_cast<std::size_t>(N), 0.0);
        for (int k = 1; k <= model_->K(); ++k)
        {
            const Fold& f = fold_[k - 1];
            if (f.index == 0) continue;
            const double A = f.sign * norm * model_->amplitude(k, t);
            if (both)
            {
                b[f.index] += A;
                bq[f.index] += A * filter_[k - 1];
            }
            else
            {
                b[f.index] += filtered ? A * filter_[k - 1] : A;
            }
        }
        std::pair<GridFn, GridFn> out{sine_transform(b), both ? sine_transform(bq) : GridFn()};
        return out;
    }

    /*!
     * w_i = sum_r b_r sin(pi r i / N). Uses sin(pi r (N - i) / N) = (-1)^{r+1} sin(pi r i / N)
     * to evaluate both halves from one pass.
     */
    GridFn sine_transform(const std::vector<double>& b) const
    {
        const int N = mesh_.N();
        std::vector<double> even(static_cast<std::size_t>(N / 2 + 1), 0.0), odd(even.size(), 0.0);
        for (int r = 1; r < N; ++r)
        {
            const double br = b[r];
            if (br == 0.0) continue;
            auto& acc = (r % 2 == 0) ? even : odd;
            int j = 0;
            for (int i = 1; i <= N / 2; ++i)
            {
                j += r;
                if (j >= 2 * N) j -= 2 * N;
                acc[i] += br * table_[static_cast<std::size_t>(j)];
            }
        }
        GridFn w(N);
        for (int i = 1; i <= N / 2; ++i)
        {
            w[i] = even[i] + odd[i];
            if (N - i != i) w[N - i] = odd[i] - even[i];
        }
        return w;
    }

    /*!
     * Extrapolated (sum_{k>K} c_k^p)^{1/p} for a power-law fit of the block
     * maxima of c over the upper half of the computed modes. Returns
     * (tail, decay exponent).
     */
    static std::pair<double, double> power_tail(const std::vector<double>& c, double p)
    {
        const int K = static_cast<int>(c.size());
        const int block = std::max(1, K / 64);
        std::vector<double> lx, ly;
        for (int start = K / 2; start + block <= K; start += block)
        {
            double mx = 0;
            int at = start + 1;
            for (int k = start + 1; k <= start + block; ++k)
            {
                if (c[k - 1] > mx)
                {
                    mx = c[k - 1];
                    at = k;
                }
            }
            if (mx > 0)
            {
                lx.push_back(std::log(static_cast<double>(at)));
                ly.push_back(std::log(mx));
            }
        }
        if (lx.size() < 2)
        {
            const bool zero = std::all_of(c.begin() + K / 2, c.end(), [](double v) { return v == 0.0; });
            return {zero ? 0.0 : std::numeric_limits<double>::infinity(), std::numeric_limits<double>::quiet_NaN()};
        }
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i)
        {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double q = -slope;
        // envelope C k^{-q} through the largest block maximum
        double logC = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < lx.size(); ++i) logC = std::max(logC, ly[i] + q * lx[i]);
        if (p * q <= 1.0) return {std::numeric_limits<double>::infinity(), q};
        const double sum = std::exp(p * logC) * std::pow(static_cast<double>(K), 1.0 - p * q) / (p * q - 1.0);
        return {std::pow(sum, 1.0 / p), q};
    }

    std::shared_ptr<const SpectralModel> model_;
    MeshSpec mesh_;
    std::vector<double> table_;
    std::vector<Fold> fold_;
    std::vector<double> filter_;
};

}  // namespace wavecompact

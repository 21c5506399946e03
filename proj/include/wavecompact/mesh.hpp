#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wavecompact/errors.hpp"

namespace wavecompact
{

/*!
 * Uniform space-time mesh on [0, X] x [0, T] together with the wave speed
 * and the stability margin eps0.
 *
 * Immutable after construction; use build_mesh() to create one.
 */
class MeshSpec
{
public:
    double X() const noexcept { return X_; }
    double T() const noexcept { return T_; }
    int N() const noexcept { return N_; }
    int M() const noexcept { return M_; }
    double a() const noexcept { return a_; }
    double eps0() const noexcept { return eps0_; }

    double h() const noexcept { return h_; }
    double tau() const noexcept { return tau_; }

    //! sigma_N = (1 + h^2 / (a^2 tau^2)) / 12
    double sigma_N() const noexcept { return sigma_; }

    //! a tau / h
    double courant() const noexcept { return a_ * tau_ / h_; }

    double x(int i) const noexcept { return i * h_; }
    double t(int m) const noexcept { return m * tau_; }

    //! a^2 tau^2 <= (1 - eps0^2/2) h^2, up to a relative 1e-12 rounding allowance.
    bool stable() const noexcept
    {
        return stability_lhs() <= stability_rhs() * (1.0 + 1e-12);
    }

    double stability_lhs() const noexcept { return a_ * a_ * tau_ * tau_; }
    double stability_rhs() const noexcept { return (1.0 - 0.5 * eps0_ * eps0_) * h_ * h_; }

    //! Human-readable statement of the stability inequality for this mesh.
    std::string stability_report() const
    {
        std::ostringstream os;
        os.precision(12);
        os << "a^2 tau^2 = " << stability_lhs() << (stable() ? " <= " : " > ")
           << "(1 - eps0^2/2) h^2 = " << stability_rhs() << " (N=" << N_ << ", M=" << M_
           << ", h=" << h_ << ", tau=" << tau_ << ", a=" << a_ << ", eps0=" << eps0_ << ")";
        return os.str();
    }

    void require_stable(const char* who) const
    {
        if (!stable())
        {
            throw StabilityError(std::string(who) + ": unstable mesh, " + stability_report());
        }
    }

    friend MeshSpec build_mesh(double X, double T, int N, int M, double a, double eps0);

private:
    MeshSpec() = default;

    double X_ = 0, T_ = 0;
    int N_ = 0, M_ = 0;
    double a_ = 0, eps0_ = 0;
    double h_ = 0, tau_ = 0, sigma_ = 0;
};

inline MeshSpec build_mesh(double X, double T, int N, int M, double a = 1.0, double eps0 = 1.0)
{
    auto fail = [](const std::string& what) { throw ConfigError("build_mesh: " + what); };
    if (!(X > 0) || !std::isfinite(X)) fail("X must be positive");
    if (!(T > 0) || !std::isfinite(T)) fail("T must be positive");
    if (N < 2) fail("N must be at least 2");
    if (M < 1) fail("M must be at least 1");
    if (!(a > 0) || !std::isfinite(a)) fail("a must be positive");
    if (!(eps0 > 0) || eps0 > 1) fail("eps0 must lie in (0, 1]");

    MeshSpec mesh;
    mesh.X_ = X;
    mesh.T_ = T;
    mesh.N_ = N;
    mesh.M_ = M;
    mesh.a_ = a;
    mesh.eps0_ = eps0;
    mesh.h_ = X / N;
    mesh.tau_ = T / M;
    mesh.sigma_ = (1.0 + mesh.h_ * mesh.h_ / (a * a * mesh.tau_ * mesh.tau_)) / 12.0;
    return mesh;
}

/*!
 * Real values on the nodes x_0..x_N of a spatial mesh.
 *
 * Members of the Dirichlet space H_h additionally vanish at i = 0 and i = N.
 */
class GridFn
{
public:
    GridFn() = default;

    //! Zero function on a mesh with \p cells cells (cells + 1 nodes).
    explicit GridFn(int cells) : values_(static_cast<std::size_t>(cells) + 1, 0.0) {}

    explicit GridFn(std::vector<double> values) : values_(std::move(values)) {}

    static GridFn zeros(const MeshSpec& mesh) { return GridFn(mesh.N()); }

    //! Node samples f(x_i), i = 0..N.
    template<class F>
    static GridFn sample(const MeshSpec& mesh, F&& f)
    {
        GridFn w(mesh.N());
        for (int i = 0; i <= mesh.N(); ++i)
        {
            w[i] = f(mesh.x(i));
        }
        return w;
    }

    std::size_t size() const noexcept { return values_.size(); }
    int cells() const noexcept { return static_cast<int>(values_.size()) - 1; }

    double& operator[](int i) noexcept { return values_[static_cast<std::size_t>(i)]; }
    double operator[](int i) const noexcept { return values_[static_cast<std::size_t>(i)]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool is_dirichlet() const noexcept
    {
        return values_.empty() || (values_.front() == 0.0 && values_.back() == 0.0);
    }

    double max_abs() const noexcept
    {
        double r = 0;
        for (double v : values_) r = std::max(r, std::abs(v));
        return r;
    }

    GridFn& operator+=(const GridFn& o)
    {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    GridFn& operator-=(const GridFn& o)
    {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    GridFn& operator*=(double c) noexcept
    {
        for (double& v : values_) v *= c;
        return *this;
    }

    //! this += c * o
    GridFn& axpy(double c, const GridFn& o)
    {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * o.values_[i];
        return *this;
    }

    friend GridFn operator+(GridFn l, const GridFn& r) { return l += r; }
    friend GridFn operator-(GridFn l, const GridFn& r) { return l -= r; }
    friend GridFn operator*(double c, GridFn w) { return w *= c; }
    friend GridFn operator*(GridFn w, double c) { return w *= c; }

    bool operator==(const GridFn&) const = default;

private:
    void check_same(const GridFn& o) const
    {
        detail::require(o.values_.size() == values_.size(), "GridFn: size mismatch");
    }

    std::vector<double> values_;
};

inline void require_on_mesh(const GridFn& w, const MeshSpec& mesh, const char* who)
{
    if (w.cells() != mesh.N())
    {
        throw ContractViolation(std::string(who) + ": grid function has " + std::to_string(w.size()) +
                                " values, mesh has " + std::to_string(mesh.N() + 1) + " nodes");
    }
}

inline void require_dirichlet(const GridFn& w, const MeshSpec& mesh, const char* who)
{
    require_on_mesh(w, mesh, who);
    if (!w.is_dirichlet())
    {
        throw ContractViolation(std::string(who) + ": grid function is not in H_h (nonzero boundary value)");
    }
}

//! Slices v^0..v^M of a run on \p mesh.
struct Trajectory
{
    MeshSpec mesh;
    std::vector<GridFn> slices;
};

}  // namespace wavecompact

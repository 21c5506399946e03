#pragma once

#include <cmath>
#include <vector>

#include "wavecompact/errors.hpp"
#include "wavecompact/mesh.hpp"

namespace wavecompact
{

//! Three-point spatial operators acting in H_h.
enum class SpatialOp
{
    sN,       //!< Numerov average (w_{i-1} + 10 w_i + w_{i+1}) / 12
    B,        //!< linear FEM mass average (w_{i-1} + 4 w_i + w_{i+1}) / 6
    LambdaX,  //!< second difference (w_{i-1} - 2 w_i + w_{i+1}) / h^2
};

namespace detail
{

struct Stencil
{
    double off;
    double diag;
};

inline Stencil stencil_of(SpatialOp op, double h)
{
    switch (op)
    {
    case SpatialOp::sN: return {1.0 / 12.0, 10.0 / 12.0};
    case SpatialOp::B: return {1.0 / 6.0, 4.0 / 6.0};
    case SpatialOp::LambdaX: return {1.0 / (h * h), -2.0 / (h * h)};
    }
    return {0, 0};
}

//! Interior rows of a symmetric three-point stencil; boundary rows are set to zero.
//! Uses whatever boundary values \p w carries.
inline GridFn apply_stencil(Stencil s, const GridFn& w)
{
    const int n = w.cells();
    GridFn out(n);
    for (int i = 1; i < n; ++i)
    {
        out[i] = s.off * (w[i - 1] + w[i + 1]) + s.diag * w[i];
    }
    return out;
}

}  // namespace detail

/*!
 * Apply s_N, B or Lambda_x to \p w in H_h. Output boundary rows are zero.
 */
inline GridFn apply_spatial(SpatialOp op, const GridFn& w, const MeshSpec& mesh)
{
    require_dirichlet(w, mesh, "apply_spatial");
    return detail::apply_stencil(detail::stencil_of(op, mesh.h()), w);
}

//! Like apply_spatial but accepts nonzero boundary samples (used on raw node samples of data).
inline GridFn apply_spatial_samples(SpatialOp op, const GridFn& w, const MeshSpec& mesh)
{
    require_on_mesh(w, mesh, "apply_spatial_samples");
    return detail::apply_stencil(detail::stencil_of(op, mesh.h()), w);
}

/*!
 * Symmetric constant-coefficient tridiagonal system on the interior nodes
 * 1..N-1 (size N-1), factored once for repeated solves.
 *
 * Elimination runs without pivoting, so the matrix must be strictly
 * diagonally dominant.
 */
class TridiagonalSolver
{
public:
    TridiagonalSolver(int cells, double diag, double off) : n_(cells - 1), diag_(diag), off_(off)
    {
        detail::require(cells >= 2, "TridiagonalSolver: need at least 2 cells");
        if (!(std::abs(diag) > 2.0 * std::abs(off)))
        {
            throw InternalInvariantError("TridiagonalSolver: matrix is not strictly diagonally dominant");
        }
        // Forward-elimination factors for the Thomas algorithm.
        cprime_.resize(static_cast<std::size_t>(n_));
        inv_denom_.resize(static_cast<std::size_t>(n_));
        double c = 0;
        for (int j = 0; j < n_; ++j)
        {
            const double denom = diag_ - off_ * c;
            inv_denom_[j] = 1.0 / denom;
            c = off_ * inv_denom_[j];
            cprime_[j] = c;
        }
    }

    double diag() const noexcept { return diag_; }
    double off() const noexcept { return off_; }

    //! Solve for w in H_h with (off, diag, off) w = rhs on interior nodes.
    GridFn solve(const GridFn& rhs) const
    {
        detail::require(rhs.cells() == n_ + 1, "TridiagonalSolver: size mismatch");
        GridFn w(n_ + 1);
        double prev = 0;
        for (int j = 0; j < n_; ++j)
        {
            prev = (rhs[j + 1] - off_ * prev) * inv_denom_[j];
            w[j + 1] = prev;
        }
        for (int j = n_ - 2; j >= 0; --j)
        {
            w[j + 1] -= cprime_[j] * w[j + 2];
        }
        return w;
    }

    //! Interior rows of the matrix applied to w (boundary values of w are ignored).
    GridFn apply(const GridFn& w) const
    {
        detail::require(w.cells() == n_ + 1, "TridiagonalSolver: size mismatch");
        GridFn out(n_ + 1);
        for (int i = 1; i <= n_; ++i)
        {
            const double left = i > 1 ? w[i - 1] : 0.0;
            const double right = i < n_ ? w[i + 1] : 0.0;
            out[i] = diag_ * w[i] + off_ * (left + right);
        }
        return out;
    }

private:
    int n_;
    double diag_, off_;
    std::vector<double> cprime_;
    std::vector<double> inv_denom_;
};

/*!
 * The implicit operator B - sigma_N tau^2 a^2 Lambda_x of the compact scheme.
 *
 * With s = sigma_N tau^2 a^2 / h^2 the matrix has diagonal 2/3 + 2s and
 * off-diagonals 1/6 - s; it is strictly diagonally dominant for every s > 0.
 */
class ImplicitOperator
{
public:
    explicit ImplicitOperator(const MeshSpec& mesh)
        : mesh_(mesh), s_(mesh.sigma_N() * mesh.tau() * mesh.tau() * mesh.a() * mesh.a() / (mesh.h() * mesh.h())),
          solver_(mesh.N(), 2.0 / 3.0 + 2.0 * s_, 1.0 / 6.0 - s_)
    {
    }

    const MeshSpec& mesh() const noexcept { return mesh_; }
    double s() const noexcept { return s_; }
    double diag() const noexcept { return solver_.diag(); }
    double off() const noexcept { return solver_.off(); }

    GridFn apply(const GridFn& w) const
    {
        require_dirichlet(w, mesh_, "ImplicitOperator::apply");
        return solver_.apply(w);
    }

    GridFn solve(const GridFn& rhs) const
    {
        require_dirichlet(rhs, mesh_, "ImplicitOperator::solve");
        return solver_.solve(rhs);
    }

private:
    MeshSpec mesh_;
    double s_;
    TridiagonalSolver solver_;
};

/*!
 * Solve (B - sigma_N tau^2 a^2 Lambda_x) w = rhs for w in H_h.
 *
 * Builds the factorization on every call; hold an ImplicitOperator to reuse it.
 */
inline GridFn solve_implicit(const GridFn& rhs, const MeshSpec& mesh)
{
    mesh.require_stable("solve_implicit");
    return ImplicitOperator(mesh).solve(rhs);
}

//! B^{-1} rhs for rhs in H_h.
inline GridFn solve_mass(const GridFn& rhs, const MeshSpec& mesh)
{
    require_dirichlet(rhs, mesh, "solve_mass");
    return TridiagonalSolver(mesh.N(), 4.0 / 6.0, 1.0 / 6.0).solve(rhs);
}

//! Discrete inner product (v, w)_h over interior nodes.
inline double inner_h(const GridFn& v, const GridFn& w, const MeshSpec& mesh)
{
    require_on_mesh(v, mesh, "inner_h");
    require_on_mesh(w, mesh, "inner_h");
    double s = 0;
    for (int i = 1; i < mesh.N(); ++i) s += v[i] * w[i];
    return s * mesh.h();
}

}  // namespace wavecompact

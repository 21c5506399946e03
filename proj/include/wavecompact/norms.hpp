#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "wavecompact/errors.hpp"
#include "wavecompact/mesh.hpp"
#include "wavecompact/operators.hpp"

namespace wavecompact
{

enum class SpaceNorm
{
    L2_h,                //!< (sum_{i=1}^{N-1} w_i^2 h)^{1/2}
    L2_hstar_backward,   //!< (sum_{i=1}^{N} (dbar_x w_i)^2 h)^{1/2}
    L1_h,                //!< sum_{i=1}^{N} (|w_{i-1}| + |w_i|) h / 2
    L1_backward_diff,    //!< sum_{i=1}^{N} |dbar_x w_i| h
    B_norm,              //!< (B w, w)_h^{1/2}, w in H_h
    negLambda_norm,      //!< (-Lambda_x w, w)_h^{1/2}, w in H_h
};

inline double space_norm(const GridFn& w, SpaceNorm kind, const MeshSpec& mesh)
{
    require_on_mesh(w, mesh, "space_norm");
    const int n = mesh.N();
    const double h = mesh.h();
    double s = 0;
    switch (kind)
    {
    case SpaceNorm::L2_h:
        for (int i = 1; i < n; ++i) s += w[i] * w[i];
        return std::sqrt(s * h);
    case SpaceNorm::L2_hstar_backward:
        for (int i = 1; i <= n; ++i)
        {
            const double d = (w[i] - w[i - 1]) / h;
            s += d * d;
        }
        return std::sqrt(s * h);
    case SpaceNorm::L1_h:
        for (int i = 1; i <= n; ++i) s += 0.5 * (std::abs(w[i - 1]) + std::abs(w[i]));
        return s * h;
    case SpaceNorm::L1_backward_diff:
        for (int i = 1; i <= n; ++i) s += std::abs(w[i] - w[i - 1]);
        return s;
    case SpaceNorm::B_norm:
    {
        require_dirichlet(w, mesh, "space_norm(B_norm)");
        const double v = inner_h(apply_spatial(SpatialOp::B, w, mesh), w, mesh);
        return std::sqrt(std::max(v, 0.0));
    }
    case SpaceNorm::negLambda_norm:
    {
        require_dirichlet(w, mesh, "space_norm(negLambda_norm)");
        const double v = -inner_h(apply_spatial(SpatialOp::LambdaX, w, mesh), w, mesh);
        return std::sqrt(std::max(v, 0.0));
    }
    }
    return 0;
}

//! sum_{i=1}^{N} |w_{i-1/2}| h for half-node samples w_{1/2}..w_{N-1/2}.
inline double l1_hstar_midpoint(std::span<const double> half_nodes, const MeshSpec& mesh)
{
    detail::require(static_cast<int>(half_nodes.size()) == mesh.N(),
                    "l1_hstar_midpoint: expected N half-node values");
    double s = 0;
    for (double v : half_nodes) s += std::abs(v);
    return s * mesh.h();
}

//! ||B^{-1/2} w||_h = (B^{-1} w, w)_h^{1/2}
inline double inverse_mass_norm(const GridFn& w, const MeshSpec& mesh)
{
    const double v = inner_h(solve_mass(w, mesh), w, mesh);
    return std::sqrt(std::max(v, 0.0));
}

enum class TimeAggregate
{
    L1_tau,            //!< sum_{j=1}^{M} (|y_{j-1}| + |y_j|) tau / 2 over y_0..y_M
    max,               //!< max |y| over the series
    tau_sum_interior,  //!< tau sum_{m=1}^{M-1} y_m over y_0..y_M
};

inline double time_aggregate(std::span<const double> series, TimeAggregate kind, const MeshSpec& mesh)
{
    detail::require(!series.empty(), "time_aggregate: empty series");
    const int M = mesh.M();
    const double tau = mesh.tau();
    double s = 0;
    switch (kind)
    {
    case TimeAggregate::L1_tau:
        detail::require(static_cast<int>(series.size()) == M + 1, "time_aggregate(L1_tau): need M+1 values");
        for (int j = 1; j <= M; ++j) s += 0.5 * (std::abs(series[j - 1]) + std::abs(series[j]));
        return s * tau;
    case TimeAggregate::max:
        for (double y : series) s = std::max(s, std::abs(y));
        return s;
    case TimeAggregate::tau_sum_interior:
        detail::require(static_cast<int>(series.size()) == M + 1,
                        "time_aggregate(tau_sum_interior): need M+1 values");
        for (int m = 1; m < M; ++m) s += series[m];
        return s * tau;
    }
    return 0;
}

/*!
 * Level energy norm from the time difference dt = dbar_t v and the time
 * average st = sbar_t v:
 *
 *   ||dt||_B^2 + (sigma_N - 1/4) a^2 ||dt||_{-Lambda_x}^2 + a^2 ||st||_{-Lambda_x}^2.
 *
 * The middle coefficient may be negative; only the total is guaranteed
 * nonnegative on stable meshes.
 */
inline double energy_norm_parts(const GridFn& dt, const GridFn& st, const MeshSpec& mesh)
{
    if (!mesh.stable())
    {
        throw ContractViolation("energy norm requested on unstable mesh: " + mesh.stability_report());
    }
    const double a2 = mesh.a() * mesh.a();
    const double t2 = mesh.tau() * mesh.tau();
    const double b = std::pow(space_norm(dt, SpaceNorm::B_norm, mesh), 2);
    const double ld = std::pow(space_norm(dt, SpaceNorm::negLambda_norm, mesh), 2);
    const double ls = std::pow(space_norm(st, SpaceNorm::negLambda_norm, mesh), 2);
    const double total = b + (mesh.sigma_N() - 0.25) * t2 * a2 * ld + a2 * ls;
    const double scale = b + std::abs(mesh.sigma_N() - 0.25) * t2 * a2 * ld + a2 * ls;
    if (total < -1e-12 * scale)
    {
        throw InternalInvariantError("energy norm radicand is negative: " + std::to_string(total));
    }
    return std::sqrt(std::max(total, 0.0));
}

//! ||{v_prev, v_curr}||_{E_h}
inline double energy_norm_pair(const GridFn& v_prev, const GridFn& v_curr, const MeshSpec& mesh)
{
    require_dirichlet(v_prev, mesh, "energy_norm_pair");
    require_dirichlet(v_curr, mesh, "energy_norm_pair");
    GridFn dt = (v_curr - v_prev) * (1.0 / mesh.tau());
    GridFn st = (v_curr + v_prev) * 0.5;
    return energy_norm_parts(dt, st, mesh);
}

}  // namespace wavecompact

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wavecompact/data.hpp"
#include "wavecompact/errors.hpp"
#include "wavecompact/mesh.hpp"
#include "wavecompact/norms.hpp"
#include "wavecompact/operators.hpp"

namespace wavecompact
{

//! How v^0 is built from u0.
enum class V0Mode
{
    node_samples,  //!< v^0 = u0 on the mesh nodes (u0 must vanish at both ends)
    qh_average,    //!< v^0 = q_h u0
};

/*!
 * The three-level compact scheme on one mesh:
 *
 *   (B - sigma_N tau^2 a^2 Lambda_x) Lambda_t v = a^2 Lambda_x v + f_h,
 *   (B - sigma_N tau^2 a^2 Lambda_x) delta_t v^0 = (tau/2) a^2 Lambda_x v^0 + u_{1h} + (tau/2) f_h^0.
 *
 * The factorization of the implicit operator is built once and reused.
 */
class CompactStepper
{
public:
    explicit CompactStepper(const MeshSpec& mesh) : mesh_(checked(mesh)), op_(mesh) {}

    const MeshSpec& mesh() const noexcept { return mesh_; }

    //! v^1 from v^0. When \p residual is given it receives the relative defining-equation residual.
    GridFn initial_step(const GridFn& v0, const GridFn& u1h, const GridFn& fh0, double* residual = nullptr) const
    {
        require_dirichlet(v0, mesh_, "initial_step(v0)");
        require_dirichlet(u1h, mesh_, "initial_step(u1h)");
        require_dirichlet(fh0, mesh_, "initial_step(fh0)");
        const double tau = mesh_.tau();
        const double a2 = mesh_.a() * mesh_.a();
        GridFn rhs = u1h;
        rhs.axpy(0.5 * tau * a2, apply_spatial(SpatialOp::LambdaX, v0, mesh_));
        rhs.axpy(0.5 * tau, fh0);
        const GridFn z = op_.solve(rhs);
        GridFn v1 = v0;
        v1.axpy(tau, z);
        if (residual)
        {
            const GridFn zr = (v1 - v0) * (1.0 / tau);
            const double scale = std::max({rhs.max_abs(), (v0.max_abs() + v1.max_abs()) / tau, 1e-300});
            *residual = (op_.apply(zr) - rhs).max_abs() / scale;
        }
        return v1;
    }

    //! v^{m+1} from v^{m-1}, v^m and f_h^m.
    GridFn time_step(const GridFn& v_prev, const GridFn& v_curr, const GridFn& fh, double* residual = nullptr) const
    {
        require_dirichlet(v_prev, mesh_, "time_step(v_prev)");
        require_dirichlet(v_curr, mesh_, "time_step(v_curr)");
        require_dirichlet(fh, mesh_, "time_step(fh)");
        const double tau2 = mesh_.tau() * mesh_.tau();
        GridFn rhs = fh;
        rhs.axpy(mesh_.a() * mesh_.a(), apply_spatial(SpatialOp::LambdaX, v_curr, mesh_));
        const GridFn z = op_.solve(rhs);
        GridFn next = v_curr * 2.0;
        next -= v_prev;
        next.axpy(tau2, z);
        if (residual)
        {
            GridFn lt = next - v_curr * 2.0 + v_prev;
            lt *= 1.0 / tau2;
            const double scale = std::max(
                {rhs.max_abs(), (v_prev.max_abs() + 2.0 * v_curr.max_abs() + next.max_abs()) / tau2, 1e-300});
            *residual = (op_.apply(lt) - rhs).max_abs() / scale;
        }
        return next;
    }

private:
    static const MeshSpec& checked(const MeshSpec& mesh)
    {
        mesh.require_stable("compact scheme");
        return mesh;
    }

    MeshSpec mesh_;
    ImplicitOperator op_;
};

inline GridFn initial_step(const MeshSpec& mesh, const GridFn& v0, const GridFn& u1h, const GridFn& fh0)
{
    return CompactStepper(mesh).initial_step(v0, u1h, fh0);
}

inline GridFn time_step(const MeshSpec& mesh, const GridFn& v_prev, const GridFn& v_curr, const GridFn& fh)
{
    return CompactStepper(mesh).time_step(v_prev, v_curr, fh);
}

//! v^0 from u0.
inline GridFn build_v0(const Profile& u0, const MeshSpec& mesh, V0Mode mode)
{
    if (mode == V0Mode::qh_average) return average_qh(u0, mesh);
    GridFn v = sample_nodes(u0, mesh);
    const double tol = 1e-12 * std::max(1.0, v.max_abs());
    if (std::abs(v[0]) > tol || std::abs(v[mesh.N()]) > tol)
    {
        throw ContractViolation("build_v0: u0 does not vanish at x = 0, X; use qh_average");
    }
    v[0] = 0.0;
    v[mesh.N()] = 0.0;
    return v;
}

//! Per-run diagnostics: relative residual of the defining equation for each produced slice.
struct SchemeDiagnostics
{
    std::vector<double> residuals;  //!< entry m - 1 belongs to v^m

    double max_residual() const
    {
        double r = 0;
        for (double v : residuals) r = std::max(r, v);
        return r;
    }
};

struct SchemeRun
{
    MeshSpec mesh;
    U1Variant u1_variant = U1Variant::v2;
    Trajectory trajectory;
    SchemeDiagnostics diagnostics;
};

/*!
 * Run the scheme and hand every slice v^0..v^M to \p observe(m, v^m) in
 * order, keeping only two slices in memory.
 */
template<class Observer>
SchemeDiagnostics evolve_streaming(const MeshSpec& mesh, const DataSpec& data, U1Variant variant, V0Mode v0_mode,
                                   Observer&& observe)
{
    data.validate();
    const CompactStepper stepper(mesh);
    const int M = mesh.M();
    const std::optional<SeparableForcing> f =
        data.f ? std::optional<SeparableForcing>(SeparableForcing(*data.f, mesh)) : std::nullopt;
    const GridFn zero(mesh.N());
    auto fh = [&](int m) { return f ? f->slice(m) : zero; };

    SchemeDiagnostics diag;
    diag.residuals.reserve(static_cast<std::size_t>(M));
    GridFn prev = build_v0(data.u0, mesh, v0_mode);
    observe(0, static_cast<const GridFn&>(prev));
    double res = 0;
    GridFn curr = stepper.initial_step(prev, build_u1h(variant, data.u1, mesh), fh(0), &res);
    diag.residuals.push_back(res);
    observe(1, static_cast<const GridFn&>(curr));
    for (int m = 1; m < M; ++m)
    {
        GridFn next = stepper.time_step(prev, curr, fh(m), &res);
        diag.residuals.push_back(res);
        prev = std::move(curr);
        curr = std::move(next);
        observe(m + 1, static_cast<const GridFn&>(curr));
    }
    return diag;
}

//! Run the scheme and keep the full trajectory.
inline SchemeRun evolve(const MeshSpec& mesh, const DataSpec& data, U1Variant variant,
                        V0Mode v0_mode = V0Mode::node_samples)
{
    SchemeRun run{mesh, variant, Trajectory{mesh, {}}, {}};
    run.trajectory.slices.reserve(static_cast<std::size_t>(mesh.M()) + 1);
    run.diagnostics = evolve_streaming(mesh, data, variant, v0_mode,
                                       [&](int, const GridFn& v) { run.trajectory.slices.push_back(v); });
    return run;
}

enum class ErrorMode
{
    node_sampled,   //!< r = u - v with u sampled at nodes
    q2h_filtered,   //!< time differences use q_{2h} u - v (fractional-order error measure)
};

inline const char* to_string(ErrorMode m) { return m == ErrorMode::node_sampled ? "node_sampled" : "q2h_filtered"; }

struct ErrorReport
{
    /*!
     * node_sampled: max_{m>=1} ||{r^{m-1}, r^m}||_{E_h};
     * q2h_filtered: max_{m>=1} (||dbar_t (q_{2h} u - v)^m||_h + ||dbar_x r^m||_{h*}).
     */
    double max_energy_error = 0;
    double max_dx_error = 0;           //!< max_m ||dbar_x r^m||_{h*}
    double l1_spacetime_error = 0;     //!< || ||r||_{L^1_h} ||_{L^1_tau}
    double l1_spacetime_dx_error = 0;  //!< || ||dbar_x r||_{L^1_h} ||_{L^1_tau}
    ErrorMode mode = ErrorMode::node_sampled;
};

/*!
 * Exact solution evaluated on one mesh: nodal(m) = u(x_i, t_m) and, when
 * available, q2h(m) = (q_{2h} u)(x_i, t_m). Both vanish at the boundary.
 */
class Reference
{
public:
    virtual ~Reference() = default;
    virtual GridFn nodal(int m) const = 0;
    virtual bool has_q2h() const { return false; }
    virtual GridFn q2h(int) const { throw ContractViolation("reference has no q2h-filtered values"); }

    //! Both slices at once; implementations may share work.
    virtual std::pair<GridFn, GridFn> nodal_and_q2h(int m) const { return {nodal(m), q2h(m)}; }
};

/*!
 * Streaming accumulation of the ErrorReport norms. Feed slices in order
 * m = 0..M.
 *
 * In q2h_filtered mode the first entry is the fractional-order error measure
 * built from dbar_t (q_{2h} u - v) and dbar_x (u - v); the remaining norms
 * always use u - v.
 */
class ErrorAccumulator
{
public:
    ErrorAccumulator(const MeshSpec& mesh, ErrorMode mode) : mesh_(mesh), mode_(mode)
    {
        report_.mode = mode;
        l1_.reserve(static_cast<std::size_t>(mesh.M()) + 1);
        l1dx_.reserve(static_cast<std::size_t>(mesh.M()) + 1);
    }

    void add(int m, const GridFn& v, const Reference& ref)
    {
        if (mode_ == ErrorMode::q2h_filtered)
        {
            auto [u, uq] = ref.nodal_and_q2h(m);
            add_error(m, u - v, uq - v);
            return;
        }
        add_error(m, ref.nodal(m) - v);
    }

    //! Add r^m = u^m - v^m directly; \p r_filtered is q_{2h} u^m - v^m in q2h mode.
    void add_error(int m, GridFn r, std::optional<GridFn> r_filtered = std::nullopt)
    {
        detail::require(m == next_, "ErrorAccumulator: slices must arrive in order");
        detail::require(mode_ == ErrorMode::node_sampled || r_filtered.has_value(),
                        "ErrorAccumulator: q2h mode needs filtered errors");
        const double dx = space_norm(r, SpaceNorm::L2_hstar_backward, mesh_);
        report_.max_dx_error = std::max(report_.max_dx_error, dx);
        l1_.push_back(space_norm(r, SpaceNorm::L1_h, mesh_));
        l1dx_.push_back(space_norm(r, SpaceNorm::L1_backward_diff, mesh_));
        const GridFn& rt = r_filtered ? *r_filtered : r;
        if (m > 0)
        {
            GridFn dt = (rt - prev_t_) * (1.0 / mesh_.tau());
            double e = 0;
            if (mode_ == ErrorMode::q2h_filtered)
            {
                e = space_norm(dt, SpaceNorm::L2_h, mesh_) + dx;
            }
            else
            {
                e = energy_norm_parts(dt, (r + prev_) * 0.5, mesh_);
            }
            report_.max_energy_error = std::max(report_.max_energy_error, e);
        }
        prev_t_ = rt;
        prev_ = std::move(r);
        ++next_;
    }

    ErrorReport finish() const
    {
        detail::require(next_ == mesh_.M() + 1, "ErrorAccumulator: expected M + 1 slices");
        ErrorReport out = report_;
        out.l1_spacetime_error = time_aggregate(l1_, TimeAggregate::L1_tau, mesh_);
        out.l1_spacetime_dx_error = time_aggregate(l1dx_, TimeAggregate::L1_tau, mesh_);
        return out;
    }

private:
    MeshSpec mesh_;
    ErrorMode mode_;
    ErrorReport report_;
    std::vector<double> l1_, l1dx_;
    GridFn prev_, prev_t_;
    int next_ = 0;
};

inline ErrorReport error_report(const SchemeRun& run, const Reference& reference, ErrorMode mode)
{
    const auto& slices = run.trajectory.slices;
    detail::require(static_cast<int>(slices.size()) == run.mesh.M() + 1, "error_report: incomplete trajectory");
    ErrorAccumulator acc(run.mesh, mode);
    for (int m = 0; m <= run.mesh.M(); ++m) acc.add(m, slices[static_cast<std::size_t>(m)], reference);
    return acc.finish();
}

//! Evolve and measure in one pass without storing the trajectory.
inline std::pair<ErrorReport, SchemeDiagnostics> evolve_and_measure(const MeshSpec& mesh, const DataSpec& data,
                                                                    U1Variant variant, V0Mode v0_mode,
                                                                    const Reference& reference, ErrorMode mode)
{
    ErrorAccumulator acc(mesh, mode);
    auto diag = evolve_streaming(mesh, data, variant, v0_mode,
                                 [&](int m, const GridFn& v) { acc.add(m, v, reference); });
    return {acc.finish(), std::move(diag)};
}

}  // namespace wavecompact

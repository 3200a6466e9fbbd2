#include "diffsplines/functional.hpp"

#include <cmath>
#include <string>

namespace diffsplines {

namespace {

Vector nonlocal_u(const Vector& f, const QGeometry& geo) {
    return 0.5 * tail_trapezoid(geo.eta().cwiseProduct(f), geo.h());
}

Vector pi1_raw(const Vector& p, const QGeometry& geo) {
    const Vector big_p = cumulative_trapezoid(p.cwiseProduct(geo.eta()), geo.h());
    const double b = 1.5 * trapezoid((geo.eta().array() * big_p.array().square()).matrix(), geo.h());
    return geo.span_one_phi(Eigen::Vector2d(0.0, b));
}

Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

void check_times(const TimeGrid& a, const TimeGrid& b) {
    if (!(a == b)) throw DomainError("defect and trajectory use different time grids");
}

}  // namespace

ScalarField nonlocal_U(const ScalarField& f, const ScalarField& q) {
    if (!(f.grid == q.grid)) throw DomainError("fields live on different grids");
    return ScalarField(q.grid, nonlocal_u(f.values, QGeometry(q.values, q.grid.h())));
}

ScalarField pi1(const ScalarField& p, const ScalarField& q) {
    if (!(p.grid == q.grid)) throw DomainError("fields live on different grids");
    return ScalarField(q.grid, pi1_raw(p.values, QGeometry(q.values, q.grid.h())));
}

ScalarField pi2(const ScalarField& q, const ScalarField& f) {
    if (!(f.grid == q.grid)) throw DomainError("fields live on different grids");
    const QGeometry geo(q.values, q.grid.h());
    const Vector u = nonlocal_u(f.values, geo);
    return ScalarField(q.grid, u - geo.project_cotangent(u));
}

PathField eta_path(const PathField& q_path) {
    PathField out(q_path.times, q_path.grid);
    for (std::size_t k = 0; k < q_path.times.samples(); ++k)
        out.set_slice(k, eta_from_q(q_path.values.row(idx(k)).transpose(), q_path.grid.h()));
    return out;
}

PathField covariant_accel_flat(const PQTrajectory& traj) {
    if (traj.times.samples() < 3) throw DomainError("acceleration needs at least 3 time samples");
    const PathField pdot = finite_diff_time(traj.p_path);
    const double h = traj.q_path.grid.h();
    PathField out(traj.times, traj.q_path.grid);
    for (std::size_t k = 0; k < traj.times.samples(); ++k) {
        const QGeometry geo(traj.q_path.values.row(idx(k)).transpose(), h);
        const Vector p = traj.p_path.values.row(idx(k)).transpose();
        // U - pi2 collapses to the cotangent projection of U.
        const Vector u = nonlocal_u(p.cwiseProduct(p), geo);
        out.set_slice(k, pdot.values.row(idx(k)).transpose() + geo.project_cotangent(u) -
                             pi1_raw(p, geo));
    }
    return out;
}

namespace {

TimeSeries weighted_square_per_time(const PathField& field, const PathField& eta) {
    TimeSeries out{field.times, Vector(field.times.samples())};
    for (Eigen::Index k = 0; k < out.values.size(); ++k)
        out.values[k] = trapezoid(
            (eta.values.row(k).array() * field.values.row(k).array().square()).matrix().transpose(),
            field.grid.h());
    return out;
}

}  // namespace

double acceleration_J0(const PQTrajectory& traj) {
    const TimeSeries integrand =
        weighted_square_per_time(covariant_accel_flat(traj), eta_path(traj.q_path));
    return trapezoid(integrand.values, traj.times.dt());
}

AccelerationReport relaxed_J(const PQTrajectory& traj, const ScalarField& p1_target,
                             const ScalarField& q1_target, double sigma1, double sigma2) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw DomainError("penalty scales must be positive");
    if (!(p1_target.grid == traj.p_path.grid) || !(q1_target.grid == traj.q_path.grid))
        throw DomainError("targets live on a different grid");
    AccelerationReport report;
    report.per_time_integrand =
        weighted_square_per_time(covariant_accel_flat(traj), eta_path(traj.q_path));
    report.J0 = trapezoid(report.per_time_integrand.values, traj.times.dt());
    const auto last = idx(traj.times.steps());
    const double h = traj.q_path.grid.h();
    const Vector dp = traj.p_path.values.row(last).transpose() - p1_target.values;
    const Vector dq = traj.q_path.values.row(last).transpose() - q1_target.values;
    report.penalty = trapezoid(dp.cwiseProduct(dp), h) / (sigma1 * sigma1) +
                     trapezoid(dq.cwiseProduct(dq), h) / (sigma2 * sigma2);
    report.J = report.J0 + report.penalty;
    return report;
}

Vector defect_U(const Defect& defect, std::size_t k, const QGeometry& geo) {
    const auto n = geo.eta().size();
    if (std::holds_alternative<NoDefect>(defect)) return Vector::Zero(n);
    if (const auto* atom = std::get_if<AtomicMeasurePath>(&defect)) {
        const double f = atom->f.values[idx(k)];
        const double mass = 0.5 * f * f * sample_in_space(geo.eta(), geo.h(), atom->x0);
        Vector out = Vector::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = static_cast<double>(i) * geo.h();
            if (std::abs(x - atom->x0) <= 1e-12 * geo.h()) out[i] = 0.5 * mass;
            else if (x < atom->x0) out[i] = mass;
        }
        return out;
    }
    const auto& pair = std::get<GridMeasurePair>(defect);
    return nonlocal_u(pair.rho_mu.values.row(idx(k)).transpose(), geo);
}

namespace {

void validate_defect(const Defect& defect, const PQTrajectory& traj) {
    if (const auto* atom = std::get_if<AtomicMeasurePath>(&defect)) {
        atom->validate(true);
        check_times(atom->f.times, traj.times);
    } else if (const auto* pair = std::get_if<GridMeasurePair>(&defect)) {
        pair->validate();
        check_times(pair->rho_mu.times, traj.times);
        if (!(pair->rho_mu.grid == traj.q_path.grid))
            throw DomainError("defect density lives on a different spatial grid");
        if (pair->rho_mu.values.row(0).cwiseAbs().maxCoeff() != 0.0)
            throw DomainError("defect measure must vanish at t=0");
    }
}

}  // namespace

double defect_fisher_rao(const Defect& defect, const PQTrajectory& traj) {
    validate_defect(defect, traj);
    if (std::holds_alternative<NoDefect>(defect)) return 0.0;
    const PathField eta = eta_path(traj.q_path);
    if (const auto* atom = std::get_if<AtomicMeasurePath>(&defect)) return fr_atomic(*atom, eta);
    return fr_grid(std::get<GridMeasurePair>(defect), eta);
}

RelaxedBreakdown relaxed_F_terms(const PQTrajectory& traj, const Defect& defect, double penalty) {
    validate_defect(defect, traj);
    if (!(penalty >= 0.0)) throw DomainError("penalty must be nonnegative");
    const PathField accel = covariant_accel_flat(traj);
    const PathField eta = eta_path(traj.q_path);
    const double h = traj.q_path.grid.h();
    PathField shifted = accel;
    if (!std::holds_alternative<NoDefect>(defect)) {
        for (std::size_t k = 0; k < traj.times.samples(); ++k) {
            const QGeometry geo(traj.q_path.values.row(idx(k)).transpose(), h);
            shifted.values.row(idx(k)) += geo.project_cotangent(defect_U(defect, k, geo)).transpose();
        }
    }
    RelaxedBreakdown out;
    out.fisher_rao = defect_fisher_rao(defect, traj);
    out.J0 = trapezoid(weighted_square_per_time(accel, eta).values, traj.times.dt());
    out.accel_with_defect = trapezoid(weighted_square_per_time(shifted, eta).values, traj.times.dt());
    out.penalty = penalty;
    out.F = out.fisher_rao + out.accel_with_defect + penalty;
    return out;
}

double relaxed_F(const PQTrajectory& traj, const Defect& defect, double penalty) {
    return relaxed_F_terms(traj, defect, penalty).F;
}

CauchySchwarzReport check_cs_inequality(const PQTrajectory& traj, double tol) {
    const Vector p0 = traj.p_path.values.row(0).transpose();
    const double scale = 1.0 + traj.p_path.values.cwiseAbs().maxCoeff();
    if (p0.cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw DomainError("Cauchy-Schwarz bound needs a path starting at rest");
    const PathField eta = eta_path(traj.q_path);
    const TimeSeries speed = weighted_square_per_time(traj.p_path, eta);
    CauchySchwarzReport report;
    report.lhs = trapezoid(speed.values, traj.times.dt());
    const double T = traj.times.t_final();
    report.rhs = 4.0 * T * T * acceleration_J0(traj);
    report.ok = report.lhs <= report.rhs + tol;
    return report;
}

}  // namespace diffsplines

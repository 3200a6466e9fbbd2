#include "diffsplines/geodesic_pq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace diffsplines {

namespace {

void same_grid(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid)) throw DomainError("fields live on different grids");
}

ConstraintRecord record(double t, const Vector& q, const Vector& p, double h) {
    const QGeometry geo(q, h);
    return {t, trapezoid(q, h), trapezoid(geo.eta(), h) - 1.0,
            geo.eta_inner(p, Vector::Ones(p.size())), geo.eta_inner(p, geo.phi())};
}

double worst(const ConstraintRecord& r) {
    return std::max({std::abs(r.r1), std::abs(r.r2), std::abs(r.p_one), std::abs(r.p_phi)});
}

}  // namespace

ABCCoefficients abc_coefficients(const ScalarField& p, const ScalarField& q) {
    same_grid(p, q);
    const double h = q.grid.h();
    const Vector eta = eta_from_q(q.values, h);
    const Vector phi = cumulative_trapezoid(eta, h);
    const Eigen::ArrayXd w = p.values.array().square() * eta.array();
    const Vector big_p = cumulative_trapezoid(p.values.cwiseProduct(eta), h);
    ABCCoefficients out;
    out.a = 0.5 * trapezoid((phi.array() * w).matrix(), h);
    out.c = 0.25 * trapezoid((phi.array().square() * w).matrix(), h);
    out.b = 1.5 * trapezoid((eta.array() * big_p.array().square()).matrix(), h);
    return out;
}

std::pair<Vector, Vector> geodesic_rhs(const Vector& p, const Vector& q, double h) {
    const QGeometry geo(q, h);
    const Vector& eta = geo.eta();
    const Vector qdot = eta.cwiseProduct(p);
    const Vector u = 0.5 * tail_trapezoid(qdot.cwiseProduct(p), h);
    const Vector big_p = cumulative_trapezoid(qdot, h);
    const double b = 1.5 * trapezoid((eta.array() * big_p.array().square()).matrix(), h);
    // a and c enter as <U,1>_eta and <U,phi>_eta, which keeps <pdot,1>_eta = 0 exactly.
    const double a = geo.eta_inner(u, Vector::Ones(u.size()));
    const double c = geo.eta_inner(u, geo.phi());
    const Vector pdot = -u + geo.span_one_phi(Eigen::Vector2d(a, b + c));
    return {qdot, pdot};
}

GeodesicDerivative geodesic_rhs(const ScalarField& p, const ScalarField& q) {
    same_grid(p, q);
    auto [qdot, pdot] = geodesic_rhs(p.values, q.values, q.grid.h());
    return {ScalarField(q.grid, std::move(qdot)), ScalarField(q.grid, std::move(pdot))};
}

PQTrajectory integrate_geodesic(const ScalarField& p0, const QState& q0, const TimeGrid& times,
                                const GeodesicOptions& options) {
    q0.validate();
    same_grid(p0, q0.q);
    const SpatialGrid grid = q0.q.grid;
    const double h = grid.h();
    const auto n = static_cast<Eigen::Index>(grid.size());
    const bool reproject =
        options.reprojection == Reprojection::on ||
        (options.reprojection == Reprojection::automatic && times.t_final() > 1.0);

    PQTrajectory traj{times, PathField(times, grid), PathField(times, grid), {}};
    traj.constraints.reserve(times.samples());

    Vector q = q0.q.values;
    Vector p = QGeometry(q, h).project_cotangent(p0.values);
    traj.q_path.set_slice(0, q);
    traj.p_path.set_slice(0, p);
    traj.constraints.push_back(record(0.0, q, p, h));

    const OdeRhs rhs = [h, n](double, const Vector& y) {
        auto [qdot, pdot] = geodesic_rhs(y.tail(n), y.head(n), h);
        Vector out(2 * n);
        out << qdot, pdot;
        return out;
    };
    Vector y(2 * n);
    for (std::size_t k = 0; k < times.steps(); ++k) {
        y << q, p;
        y = ode_step(rhs, times.time(k), y, times.dt(), OdeMethod::rk4);
        const double t = times.time(k + 1);
        if (!y.allFinite()) throw NonFiniteError("geodesic became non-finite at t=" + std::to_string(t), t);
        q = y.head(n);
        p = y.tail(n);
        const ConstraintRecord r = record(t, q, p, h);
        traj.constraints.push_back(r);
        if (reproject) {
            q = repair_constraints(q, h);
            p = QGeometry(q, h).project_cotangent(p);
        } else if (worst(r) > options.drift_tol) {
            throw ConstraintViolation("constraint drift " + std::to_string(worst(r)) +
                                      " at t=" + std::to_string(t) + " without reprojection");
        }
        traj.q_path.set_slice(k + 1, q);
        traj.p_path.set_slice(k + 1, p);
    }
    return traj;
}

PathField projected_flow(const PathField& p_path, const QState& q0, bool repair) {
    q0.validate();
    if (!(p_path.grid == q0.q.grid)) throw DomainError("momentum path and q0 use different grids");
    const double h = q0.q.grid.h();
    const TimeGrid& times = p_path.times;
    PathField out(times, q0.q.grid);
    Vector q = q0.q.values;
    out.set_slice(0, q);
    const OdeRhs rhs = [&p_path, h](double t, const Vector& qq) {
        const QGeometry geo(qq, h);
        return Vector(geo.eta().cwiseProduct(geo.project_cotangent(sample_in_time(p_path, t))));
    };
    for (std::size_t k = 0; k < times.steps(); ++k) {
        q = ode_step(rhs, times.time(k), q, times.dt(), OdeMethod::rk4);
        const double t = times.time(k + 1);
        if (!q.allFinite()) throw NonFiniteError("projected flow became non-finite at t=" + std::to_string(t), t);
        if (repair) q = repair_constraints(q, h);
        out.set_slice(k + 1, q);
    }
    return out;
}

ScalarField initial_p_from_velocity(const ScalarField& v0) {
    const Vector& v = v0.values;
    const auto n = v.size();
    if (n < 4) throw DomainError("initial velocity needs at least 4 nodes");
    const double h = v0.grid.h();
    Vector d2(n);
    for (Eigen::Index i = 1; i < n - 1; ++i) d2[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
    d2[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
    d2[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / (h * h);

    const double scale = 1.0 + v.cwiseAbs().maxCoeff();
    const Vector d1 = diff_x(v, h);
    const double slope_tol = 1e-8 * scale + 4.0 * h * d2.cwiseAbs().maxCoeff();
    if (std::abs(v[0]) > 1e-10 * scale || std::abs(v[n - 1]) > 1e-10 * scale ||
        std::abs(d1[0]) > slope_tol || std::abs(d1[n - 1]) > slope_tol)
        throw DomainError("initial velocity is not clamped at the endpoints");
    return ScalarField(v0.grid, std::move(d2));
}

}  // namespace diffsplines

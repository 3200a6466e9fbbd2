#include "diffsplines/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace diffsplines {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

SpatialGrid::SpatialGrid(std::size_t n) : n_(n) {
    if (n < 3) throw DomainError("spatial grid needs at least 3 nodes");
    h_ = 1.0 / static_cast<double>(n - 1);
}

double SpatialGrid::node(std::size_t i) const {
    if (i + 1 == n_) return 1.0;
    return static_cast<double>(i) * h_;
}

Vector SpatialGrid::nodes() const {
    Vector x(idx(n_));
    for (std::size_t i = 0; i < n_; ++i) x[idx(i)] = node(i);
    return x;
}

TimeGrid::TimeGrid(std::size_t steps, double t_final) : m_(steps), t_final_(t_final) {
    if (steps < 1) throw DomainError("time grid needs at least one step");
    if (!(t_final > 0.0) || !std::isfinite(t_final))
        throw DomainError("time horizon must be positive and finite");
    dt_ = t_final / static_cast<double>(steps);
}

double TimeGrid::time(std::size_t k) const {
    if (k == m_) return t_final_;
    return static_cast<double>(k) * dt_;
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw DomainError(std::string(what) + " contains non-finite values");
}

ScalarField::ScalarField(const SpatialGrid& g, Vector v) : grid(g), values(std::move(v)) {
    if (static_cast<std::size_t>(values.size()) != grid.size())
        throw DomainError("field length does not match grid");
    require_finite(values, "field");
}

ScalarField::ScalarField(const SpatialGrid& g, double fill)
    : grid(g), values(Vector::Constant(idx(g.size()), fill)) {}

PathField::PathField(const TimeGrid& t, const SpatialGrid& g, double fill)
    : times(t), grid(g), values(RowMatrix::Constant(idx(t.samples()), idx(g.size()), fill)) {}

PathField::PathField(const TimeGrid& t, const SpatialGrid& g, RowMatrix v)
    : times(t), grid(g), values(std::move(v)) {
    if (static_cast<std::size_t>(values.rows()) != t.samples() ||
        static_cast<std::size_t>(values.cols()) != g.size())
        throw DomainError("path shape does not match grids");
    if (!values.allFinite()) throw DomainError("path contains non-finite values");
}

ScalarField PathField::slice(std::size_t k) const {
    return ScalarField(grid, Vector(values.row(idx(k)).transpose()));
}

void PathField::set_slice(std::size_t k, const Vector& v) { values.row(idx(k)) = v.transpose(); }

double trapezoid(const Vector& values, double h) {
    const auto n = values.size();
    if (n < 2) return 0.0;
    return h * (values.sum() - 0.5 * (values[0] + values[n - 1]));
}

double simpson(const Vector& values, double h) {
    const auto n = values.size();
    if (n < 3 || n % 2 == 0) throw DomainError("simpson rule needs an odd node count >= 3");
    double odd = 0.0, even = 0.0;
    for (Eigen::Index i = 1; i < n - 1; ++i) (i % 2 ? odd : even) += values[i];
    return h / 3.0 * (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even);
}

Vector cumulative_trapezoid(const Vector& values, double h) {
    Vector out(values.size());
    if (values.size() == 0) return out;
    out[0] = 0.0;
    for (Eigen::Index i = 1; i < values.size(); ++i)
        out[i] = out[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
    return out;
}

Vector tail_trapezoid(const Vector& values, double h) {
    const auto n = values.size();
    Vector out(n);
    if (n == 0) return out;
    out[n - 1] = 0.0;
    for (Eigen::Index i = n - 1; i > 0; --i) out[i - 1] = out[i] + 0.5 * h * (values[i - 1] + values[i]);
    return out;
}

double quadrature(const ScalarField& field, QuadratureRule rule) {
    require_finite(field.values, "quadrature input");
    if (rule == QuadratureRule::simpson) return simpson(field.values, field.grid.h());
    return trapezoid(field.values, field.grid.h());
}

ScalarField cumulative_integral(const ScalarField& field) {
    require_finite(field.values, "cumulative integral input");
    return ScalarField(field.grid, cumulative_trapezoid(field.values, field.grid.h()));
}

ScalarField tail_integral(const ScalarField& field) {
    require_finite(field.values, "tail integral input");
    return ScalarField(field.grid, tail_trapezoid(field.values, field.grid.h()));
}

double quadrature(const PathField& field) {
    Vector per_time(field.values.rows());
    for (Eigen::Index k = 0; k < field.values.rows(); ++k)
        per_time[k] = trapezoid(field.values.row(k).transpose(), field.grid.h());
    return trapezoid(per_time, field.times.dt());
}

Vector diff_x(const Vector& v, double h) {
    const auto n = v.size();
    if (n < 3) throw DomainError("differentiation needs at least 3 samples");
    Vector d(n);
    for (Eigen::Index i = 1; i < n - 1; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    return d;
}

Vector ode_step(const OdeRhs& rhs, double t, const Vector& y, double dt, OdeMethod method) {
    if (method == OdeMethod::midpoint) {
        const Vector k1 = rhs(t, y);
        return y + dt * rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
    }
    const Vector k1 = rhs(t, y);
    const Vector k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
    const Vector k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2);
    const Vector k4 = rhs(t + dt, y + dt * k3);
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

OdeTrajectory ode_solve(const Vector& state0, const OdeRhs& rhs, const TimeGrid& times,
                        OdeMethod method) {
    if (!state0.allFinite()) throw NonFiniteError("initial state is not finite", 0.0);
    OdeTrajectory out{times, {}};
    out.states.reserve(times.samples());
    out.states.push_back(state0);
    for (std::size_t k = 0; k < times.steps(); ++k) {
        Vector next = ode_step(rhs, times.time(k), out.states.back(), times.dt(), method);
        if (!next.allFinite())
            throw NonFiniteError("non-finite state at t=" + std::to_string(times.time(k + 1)),
                                 times.time(k + 1));
        out.states.push_back(std::move(next));
    }
    return out;
}

Vector finite_diff_time(const Vector& s, double dt) {
    const auto m = s.size();
    if (m < 3) throw DomainError("time differentiation needs at least 3 samples");
    return diff_x(s, dt);
}

PathField finite_diff_time(const PathField& path) {
    const auto m = path.values.rows();
    if (m < 3) throw DomainError("time differentiation needs at least 3 samples");
    const double dt = path.times.dt();
    PathField out(path.times, path.grid);
    for (Eigen::Index k = 1; k < m - 1; ++k)
        out.values.row(k) = (path.values.row(k + 1) - path.values.row(k - 1)) / (2.0 * dt);
    out.values.row(0) =
        (-3.0 * path.values.row(0) + 4.0 * path.values.row(1) - path.values.row(2)) / (2.0 * dt);
    out.values.row(m - 1) = (3.0 * path.values.row(m - 1) - 4.0 * path.values.row(m - 2) +
                             path.values.row(m - 3)) /
                            (2.0 * dt);
    return out;
}

namespace {

// Four-point Lagrange stencil around u (in units of the spacing) over m+1 samples.
template <class Get>
auto lagrange_cubic(Eigen::Index m, double u, Get&& get) -> decltype(get(0)) {
    u = std::clamp(u, 0.0, static_cast<double>(m));
    auto k = static_cast<Eigen::Index>(std::floor(u));
    if (k >= m) k = m - 1;
    if (std::abs(u - static_cast<double>(k)) < 1e-13) return get(k);
    if (m < 3) {
        const double w = u - static_cast<double>(k);
        return (1.0 - w) * get(k) + w * get(k + 1);
    }
    const Eigen::Index start = std::clamp<Eigen::Index>(k - 1, 0, m - 3);
    decltype(get(0)) out = 0.0 * get(start);
    for (Eigen::Index j = 0; j < 4; ++j) {
        double w = 1.0;
        for (Eigen::Index l = 0; l < 4; ++l) {
            if (l == j) continue;
            w *= (u - static_cast<double>(start + l)) / static_cast<double>(j - l);
        }
        out += w * get(start + j);
    }
    return out;
}

}  // namespace

double sample_series(const Vector& series, double dt, double t) {
    return lagrange_cubic(series.size() - 1, t / dt, [&](Eigen::Index k) { return series[k]; });
}

Vector sample_in_time(const PathField& path, double t) {
    return lagrange_cubic(static_cast<Eigen::Index>(path.times.steps()), t / path.times.dt(),
                          [&](Eigen::Index k) { return Vector(path.values.row(k).transpose()); });
}

double sample_in_space(const Vector& values, double h, double x) {
    const auto n = values.size();
    const double u = std::clamp(x / h, 0.0, static_cast<double>(n - 1));
    auto i = static_cast<Eigen::Index>(std::floor(u));
    if (i >= n - 1) return values[n - 1];
    const double w = u - static_cast<double>(i);
    if (w == 0.0) return values[i];
    return (1.0 - w) * values[i] + w * values[i + 1];
}

}  // namespace diffsplines

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace diffsplines {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Raised when an integrator or field operation produces NaN/Inf.
/// `time()` is the time at which the offending value appeared.
class NonFiniteError : public Error {
public:
    NonFiniteError(const std::string& what, double time)
        : Error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class SpatialGrid {
public:
    explicit SpatialGrid(std::size_t n = 3);

    std::size_t size() const { return n_; }
    double h() const { return h_; }
    double node(std::size_t i) const;
    Vector nodes() const;

    bool operator==(const SpatialGrid& other) const { return n_ == other.n_; }

private:
    std::size_t n_;
    double h_;
};

class TimeGrid {
public:
    TimeGrid(std::size_t steps = 1, double t_final = 1.0);

    std::size_t steps() const { return m_; }
    std::size_t samples() const { return m_ + 1; }
    double t_final() const { return t_final_; }
    double dt() const { return dt_; }
    double time(std::size_t k) const;

    bool operator==(const TimeGrid& other) const {
        return m_ == other.m_ && t_final_ == other.t_final_;
    }

private:
    std::size_t m_;
    double t_final_;
    double dt_;
};

struct ScalarField {
    SpatialGrid grid;
    Vector values;

    ScalarField() = default;
    ScalarField(const SpatialGrid& g, Vector v);
    explicit ScalarField(const SpatialGrid& g, double fill = 0.0);

    template <class F>
    static ScalarField from_function(const SpatialGrid& g, F&& f) {
        Vector v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.node(i));
        return ScalarField(g, std::move(v));
    }

    std::size_t size() const { return grid.size(); }
    double operator[](std::size_t i) const { return values[static_cast<Eigen::Index>(i)]; }
    double& operator[](std::size_t i) { return values[static_cast<Eigen::Index>(i)]; }
};

struct PathField {
    TimeGrid times;
    SpatialGrid grid;
    RowMatrix values;

    PathField() = default;
    PathField(const TimeGrid& t, const SpatialGrid& g, double fill = 0.0);
    PathField(const TimeGrid& t, const SpatialGrid& g, RowMatrix v);

    template <class F>
    static PathField from_function(const TimeGrid& t, const SpatialGrid& g, F&& f) {
        PathField out(t, g);
        for (std::size_t k = 0; k < t.samples(); ++k)
            for (std::size_t i = 0; i < g.size(); ++i)
                out.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
                    f(t.time(k), g.node(i));
        return out;
    }

    ScalarField slice(std::size_t k) const;
    void set_slice(std::size_t k, const Vector& v);
    double at(std::size_t k, std::size_t i) const {
        return values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    }
};

/// Time series sampled on a TimeGrid (e.g. a probe value along a path).
struct TimeSeries {
    TimeGrid times;
    Vector values;
};

enum class QuadratureRule { trapezoid, simpson };

double trapezoid(const Vector& values, double h);
double simpson(const Vector& values, double h);
Vector cumulative_trapezoid(const Vector& values, double h);
Vector tail_trapezoid(const Vector& values, double h);

double quadrature(const ScalarField& field, QuadratureRule rule = QuadratureRule::trapezoid);
ScalarField cumulative_integral(const ScalarField& field);
ScalarField tail_integral(const ScalarField& field);

/// Double integral over [0,T]x[0,1] with the trapezoid rule in both variables.
double quadrature(const PathField& field);

/// Derivative in x: central differences inside, one-sided second order at the ends.
Vector diff_x(const Vector& values, double h);

enum class OdeMethod { rk4, midpoint };

using OdeRhs = std::function<Vector(double, const Vector&)>;

struct OdeTrajectory {
    TimeGrid times;
    std::vector<Vector> states;
};

Vector ode_step(const OdeRhs& rhs, double t, const Vector& y, double dt, OdeMethod method);

/// Fixed-step explicit integration. Throws NonFiniteError when the state stops being finite.
OdeTrajectory ode_solve(const Vector& state0, const OdeRhs& rhs, const TimeGrid& times,
                        OdeMethod method = OdeMethod::rk4);

/// Time derivative of a sampled path: central inside, one-sided second order at both ends.
PathField finite_diff_time(const PathField& path);
Vector finite_diff_time(const Vector& series, double dt);

/// Cubic Lagrange interpolation of uniformly spaced samples at t in [0, (size-1) dt].
double sample_series(const Vector& series, double dt, double t);

/// Cubic Lagrange interpolation of a path at an arbitrary time in [0, T].
Vector sample_in_time(const PathField& path, double t);

/// Linear interpolation of a field at x in [0,1].
double sample_in_space(const Vector& values, double h, double x);

void require_finite(const Vector& v, const char* what);

}  // namespace diffsplines

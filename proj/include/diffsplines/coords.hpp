#pragma once

#include "diffsplines/numerics.hpp"

#include <Eigen/Dense>

namespace diffsplines {

class ConstraintViolation : public Error {
public:
    using Error::Error;
};

/// q = d/dx log phi_x with its two constraints int q = 0 and int exp(int_0^x q) = 1.
struct QState {
    ScalarField q;
    double tol = 1e-8;

    void validate() const;
};

struct CotangentState {
    QState q;
    ScalarField p;

    void validate() const;
};

struct HilbertMatrix2 {
    static Eigen::Matrix2d matrix();
    static Eigen::Matrix2d inverse();
};

struct ConstraintResiduals {
    double r1 = 0.0;
    double r2 = 0.0;
};

/// Cached eta, phi and the eta-weighted Gram matrix of (1, phi) for one q.
/// On a constrained q the Gram matrix agrees with the Hilbert matrix up to quadrature error;
/// using the discrete one makes both projections exact projections on the grid.
class QGeometry {
public:
    QGeometry(const Vector& q, double h);

    const Vector& eta() const { return eta_; }
    const Vector& phi() const { return phi_; }
    double h() const { return h_; }
    const Eigen::Matrix2d& gram() const { return gram_; }
    const Eigen::Matrix2d& gram_inverse() const { return gram_inv_; }

    double eta_inner(const Vector& a, const Vector& b) const;
    Vector project_tangent(const Vector& f) const;
    Vector project_cotangent(const Vector& p) const;
    /// [1, phi] G^{-1} c
    Vector span_one_phi(const Eigen::Vector2d& c) const;

private:
    double h_;
    Vector eta_;
    Vector phi_;
    Eigen::Matrix2d gram_;
    Eigen::Matrix2d gram_inv_;
};

Vector eta_from_q(const Vector& q, double h);

ScalarField eta_of_q(const ScalarField& q);
ScalarField phi_of_q(const ScalarField& q);
ScalarField q_of_phi(const ScalarField& phi);
ConstraintResiduals check_constraints(const ScalarField& q);
double metric_inner(const ScalarField& q, const ScalarField& x, const ScalarField& y);
ScalarField project_tangent(const ScalarField& q, const ScalarField& f);
ScalarField project_cotangent(const ScalarField& q, const ScalarField& p);
PathField eta_time_derivative(const PathField& q_path, const PathField& qdot_path);

/// Newton steps on (r1, r2) along span{eta, phi eta}.
Vector repair_constraints(const Vector& q, double h, int iterations = 10);
ScalarField repair_constraints(const ScalarField& q, int iterations = 10);

}  // namespace diffsplines

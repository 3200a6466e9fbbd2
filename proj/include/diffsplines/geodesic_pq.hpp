#pragma once

#include "diffsplines/coords.hpp"
#include "diffsplines/numerics.hpp"

#include <vector>

namespace diffsplines {

struct ABCCoefficients {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// a = 1/2 int phi p^2 eta, c = 1/4 int phi^2 p^2 eta, b = 3/2 int eta P^2 with P = int_0^y p eta.
ABCCoefficients abc_coefficients(const ScalarField& p, const ScalarField& q);

struct GeodesicDerivative {
    ScalarField qdot;
    ScalarField pdot;
};

GeodesicDerivative geodesic_rhs(const ScalarField& p, const ScalarField& q);

/// Raw-vector form used by the integrators: returns (qdot, pdot).
std::pair<Vector, Vector> geodesic_rhs(const Vector& p, const Vector& q, double h);

struct ConstraintRecord {
    double t = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double p_one = 0.0;  ///< <p, 1>_eta
    double p_phi = 0.0;  ///< <p, phi>_eta
};

struct PQTrajectory {
    TimeGrid times;
    PathField q_path;
    PathField p_path;
    std::vector<ConstraintRecord> constraints;
};

enum class Reprojection { automatic, on, off };

struct GeodesicOptions {
    Reprojection reprojection = Reprojection::automatic;
    double drift_tol = 1e-3;
};

/// RK4 on (q, p) starting from the canonical representative of p0.
/// With reprojection, p is mapped back by the cotangent projection and q is repaired by a
/// Newton step after every step; without it, drift beyond `drift_tol` throws.
PQTrajectory integrate_geodesic(const ScalarField& p0, const QState& q0, const TimeGrid& times,
                                const GeodesicOptions& options = {});

/// q' = eta(q) * proj_cotangent(p(t)) for a prescribed momentum path.
PathField projected_flow(const PathField& p_path, const QState& q0, bool repair = false);

/// p(0) = v0'' for a clamped initial velocity.
ScalarField initial_p_from_velocity(const ScalarField& v0);

}  // namespace diffsplines

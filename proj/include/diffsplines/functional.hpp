#pragma once

#include "diffsplines/coords.hpp"
#include "diffsplines/fisher_rao.hpp"
#include "diffsplines/geodesic_pq.hpp"
#include "diffsplines/numerics.hpp"

#include <variant>

namespace diffsplines {

struct NoDefect {};

/// Defect measure of a relaxed path: none, a single atom f(t)^2 delta_{x0}, or a density pair
/// (Delta, d/dt Delta).
using Defect = std::variant<NoDefect, AtomicMeasurePath, GridMeasurePair>;

/// U(f, q)(x) = 1/2 int_x^1 eta(q) f dy
ScalarField nonlocal_U(const ScalarField& f, const ScalarField& q);

ScalarField pi1(const ScalarField& p, const ScalarField& q);
ScalarField pi2(const ScalarField& q, const ScalarField& f);

/// eta(q(t,.)) for every time slice.
PathField eta_path(const PathField& q_path);

/// pdot + U(p^2) - pi1 - pi2 per time slice, with pdot by finite differences in time.
PathField covariant_accel_flat(const PQTrajectory& traj);

double acceleration_J0(const PQTrajectory& traj);

struct AccelerationReport {
    double J0 = 0.0;
    double penalty = 0.0;
    double J = 0.0;
    TimeSeries per_time_integrand;
};

AccelerationReport relaxed_J(const PQTrajectory& traj, const ScalarField& p1_target,
                             const ScalarField& q1_target, double sigma1 = 1.0,
                             double sigma2 = 1.0);

/// U(Delta, q) at time sample k.
Vector defect_U(const Defect& defect, std::size_t k, const QGeometry& geo);

/// FR_eta(Delta, d/dt Delta) along the trajectory.
double defect_fisher_rao(const Defect& defect, const PQTrajectory& traj);

struct RelaxedBreakdown {
    double fisher_rao = 0.0;
    double J0 = 0.0;
    double accel_with_defect = 0.0;  ///< int int eta (A + proj_cotangent U(Delta))^2
    double penalty = 0.0;
    double F = 0.0;
    double cross_term() const { return accel_with_defect - J0; }
};

RelaxedBreakdown relaxed_F_terms(const PQTrajectory& traj, const Defect& defect,
                                 double penalty = 0.0);
double relaxed_F(const PQTrajectory& traj, const Defect& defect, double penalty = 0.0);

struct CauchySchwarzReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
    double ratio() const { return rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? 1e300 : 0.0); }
};

/// int |qdot|^2 dt against 4 T^2 J0 for a path starting at rest.
CauchySchwarzReport check_cs_inequality(const PQTrajectory& traj, double tol = 1e-6);

}  // namespace diffsplines

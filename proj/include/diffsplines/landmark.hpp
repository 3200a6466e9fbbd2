#pragma once

#include "diffsplines/kernel.hpp"
#include "diffsplines/landmark_state.hpp"
#include "diffsplines/numerics.hpp"

#include <vector>

namespace diffsplines {

class DegenerateConfiguration : public Error {
public:
    using Error::Error;
};

struct LandmarkOptions {
    double eps_sep = 1e-9;
    double drift_tol = 1e-6;
};

struct LandmarkDerivative {
    std::vector<double> qdot;
    std::vector<double> pdot;
};

LandmarkDerivative landmark_rhs(const KernelModel& model, const LandmarkState& state,
                                double eps_sep = 1e-9);

double landmark_hamiltonian(const KernelModel& model, const LandmarkState& state);

struct LandmarkTrajectory {
    TimeGrid times;
    std::vector<LandmarkState> states;
    double hamiltonian0 = 0.0;
    double max_relative_drift = 0.0;
};

LandmarkTrajectory integrate_landmarks(const KernelModel& model, const LandmarkState& state0,
                                       const TimeGrid& times, const LandmarkOptions& options = {});

struct FlowReconstruction {
    PathField phi;
    double probe = 0.5;
    TimeSeries phix_probe;
};

/// Integrates every grid node along the landmark velocity field, together with the
/// Jacobian at the probe point.
FlowReconstruction reconstruct_flow(const KernelModel& model, const LandmarkTrajectory& traj,
                                    const SpatialGrid& grid, double probe = 0.5);

/// phi_x(t, x_star) from d/dt phi_x = v_x(phi) phi_x.
TimeSeries jacobian_along(const KernelModel& model, const LandmarkTrajectory& traj,
                          double x_star = 0.5);

/// Lagrangian fields of the landmark geodesic at one instant s.
struct LagrangianSample {
    double s = 0.0;
    LandmarkState state;
    Vector phi;
    Vector eta;  ///< phi_x
    Vector q;    ///< d/dx log phi_x
    Vector p;    ///< v_xx(s, phi(s, .)), the momentum in Lagrangian coordinates
    double probe_eta = 1.0;
    double probe_eta_rate = 0.0;  ///< d/ds phi_x(s, probe)
};

/// Integrates the landmark geodesic with its Lagrangian fields and samples them at the
/// given nondecreasing instants, using substeps no longer than `max_step`.
std::vector<LagrangianSample> sample_lagrangian(const KernelModel& model,
                                                const LandmarkState& state0,
                                                const std::vector<double>& instants,
                                                double max_step, const SpatialGrid& grid,
                                                double probe = 0.5,
                                                const LandmarkOptions& options = {});

}  // namespace diffsplines

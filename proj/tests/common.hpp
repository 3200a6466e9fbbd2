#pragma once

#include "diffsplines/experiment.hpp"
#include "diffsplines/functional.hpp"
#include "diffsplines/geodesic_pq.hpp"
#include "diffsplines/kernel.hpp"
#include "diffsplines/landmark.hpp"

#include <cmath>
#include <vector>

namespace testing_support {

using namespace diffsplines;

/// Polynomial with coefficients in increasing degree.
struct Poly {
    std::vector<double> c;

    double operator()(double x) const {
        double v = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
        return v;
    }
    Poly derivative() const {
        Poly d;
        for (std::size_t k = 1; k < c.size(); ++k) d.c.push_back(static_cast<double>(k) * c[k]);
        if (d.c.empty()) d.c.push_back(0.0);
        return d;
    }
    Poly operator*(const Poly& o) const {
        Poly r{std::vector<double>(c.size() + o.c.size() - 1, 0.0)};
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < o.c.size(); ++j) r.c[i + j] += c[i] * o.c[j];
        return r;
    }
};

/// Six polynomials vanishing with their first derivative at both ends.
inline std::vector<Poly> clamped_polynomials() {
    const Poly base = Poly{{0, 0, 1}} * Poly{{1, -2, 1}};  // x^2 (1-x)^2
    return {base,
            base * Poly{{0, 1}},
            base * Poly{{1, -1}},
            base * Poly{{0, 0, 1}},
            base * Poly{{1, 1}},
            base * Poly{{1, -2, 1}}};
}

/// Clamped-beam Green's function in its textbook form, independent of the library's split.
inline double beam_green(double x, double xi) {
    if (x > xi) std::swap(x, xi);
    return x * x * (1 - xi) * (1 - xi) * (3 * xi - x - 2 * x * xi) / 6.0;
}

inline LandmarkState symmetric_pair(double lambda) {
    return LandmarkState{{0.25, 0.75}, {lambda, -lambda}};
}

/// p0 = v0'' for the landmark velocity v0 = sum_j k(., q_j) p_j, sampled on the grid.
inline ScalarField landmark_p0(const LandmarkState& s, const SpatialGrid& grid) {
    const KernelModel model;
    return ScalarField::from_function(grid, [&](double x) { return velocity_field(model, s, x, 2); });
}

/// Path driven by a prescribed raw momentum: q follows the projected flow from q = 0 and the
/// stored momentum is the canonical representative at each q(t).
template <class F>
PQTrajectory path_from_momentum(F&& raw, const SpatialGrid& grid, const TimeGrid& times) {
    const PathField raw_path = PathField::from_function(times, grid, raw);
    PQTrajectory traj{times, projected_flow(raw_path, QState{ScalarField(grid)}, true), PathField(times, grid), {}};
    for (std::size_t k = 0; k < times.samples(); ++k) {
        const QGeometry geo(traj.q_path.values.row(static_cast<Eigen::Index>(k)).transpose(), grid.h());
        traj.p_path.set_slice(k, geo.project_cotangent(raw_path.values.row(static_cast<Eigen::Index>(k)).transpose()));
    }
    return traj;
}

/// Landmark geodesic resampled at alpha(t_k), with p scaled by alpha'(t_k).
template <class A, class DA>
PQTrajectory reparametrized_landmark_path(const LandmarkState& s, A&& alpha, DA&& dalpha,
                                          const SpatialGrid& grid, const TimeGrid& times) {
    std::vector<double> instants;
    for (std::size_t k = 0; k < times.samples(); ++k) instants.push_back(alpha(times.time(k)));
    auto samples = sample_lagrangian(KernelModel{}, s, instants, 1e-3, grid);
    PQTrajectory traj{times, PathField(times, grid), PathField(times, grid), {}};
    for (std::size_t k = 0; k < times.samples(); ++k) {
        traj.q_path.set_slice(k, samples[k].q);
        traj.p_path.set_slice(k, dalpha(times.time(k)) * samples[k].p);
    }
    return traj;
}

/// Smooth clamped bump used for perturbations and random paths.
inline double bump(double x) { return 16.0 * x * x * (1 - x) * (1 - x); }

}  // namespace testing_support

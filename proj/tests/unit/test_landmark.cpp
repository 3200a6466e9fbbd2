#include <doctest.h>

#include "common.hpp"
#include "diffsplines/landmark.hpp"

#include <cmath>

using namespace diffsplines;
using testing_support::symmetric_pair;

TEST_CASE("landmark rhs") {
    const KernelModel m;
    auto still = landmark_rhs(m, LandmarkState{{0.2, 0.7}, {0.0, 0.0}});
    CHECK(still.qdot[0] == 0.0);
    CHECK(still.pdot[1] == 0.0);

    auto sym = landmark_rhs(m, symmetric_pair(15));
    CHECK(std::abs(sym.qdot[0] + sym.qdot[1]) < 1e-14);
    CHECK(std::abs(sym.pdot[0] + sym.pdot[1]) < 1e-12);
    CHECK(sym.qdot[0] > 0.0);

    auto single = landmark_rhs(m, LandmarkState{{0.5}, {1.0}});
    CHECK(single.qdot[0] == doctest::Approx(1.0 / 192.0).epsilon(1e-14));
    CHECK(std::abs(single.pdot[0]) < 1e-16);

    CHECK_THROWS_AS(landmark_rhs(m, LandmarkState{{0.5, 0.5 + 1e-12}, {1.0, 1.0}}),
                    DegenerateConfiguration);
}

TEST_CASE("landmark hamiltonian") {
    const KernelModel m;
    CHECK(landmark_hamiltonian(m, LandmarkState{{0.4}, {0.0}}) == 0.0);
    CHECK(landmark_hamiltonian(m, LandmarkState{{0.5}, {1.0}}) == doctest::Approx(1.0 / 384.0));
    LandmarkState s{{0.2, 0.45, 0.8}, {1.0, -2.0, 0.5}};
    LandmarkState s2{s.q, {2.0, -4.0, 1.0}};
    CHECK(landmark_hamiltonian(m, s2) == doctest::Approx(4.0 * landmark_hamiltonian(m, s)));
}

TEST_CASE("state validation") {
    CHECK_THROWS_AS(LandmarkState({{0.6, 0.3}, {1.0, 1.0}}).validate(), DomainError);
    CHECK_THROWS_AS(LandmarkState({{0.0}, {1.0}}).validate(), DomainError);
    CHECK_THROWS_AS(LandmarkState({{0.5}, {}}).validate(), DomainError);
}

TEST_CASE("stationary trajectory") {
    const KernelModel m;
    auto traj = integrate_landmarks(m, LandmarkState{{0.3, 0.6}, {0.0, 0.0}}, TimeGrid(100, 1.0));
    CHECK(traj.states.back().q[0] == 0.3);
    auto flow = reconstruct_flow(m, traj, SpatialGrid(11));
    for (std::size_t i = 0; i < 11; ++i) CHECK(flow.phi.at(100, i) == doctest::Approx(flow.phi.grid.node(i)));
    auto jac = jacobian_along(m, traj, 0.4);
    CHECK(jac.values.cwiseAbs().maxCoeff() == 1.0);
    CHECK(jac.values.minCoeff() == 1.0);
}

TEST_CASE("symmetric pair over a long horizon") {
    const KernelModel m;
    const TimeGrid times(16000, 16.0);
    auto traj = integrate_landmarks(m, symmetric_pair(15), times);
    CHECK(traj.max_relative_drift <= 1e-8);
    double worst_sym = 0.0;
    for (std::size_t k = 0; k < times.samples(); ++k) {
        const auto& s = traj.states[k];
        worst_sym = std::max({worst_sym, std::abs(s.q[0] + s.q[1] - 1.0), std::abs(s.p[0] + s.p[1])});
        if (k > 0) {
            CHECK(s.q[0] > traj.states[k - 1].q[0]);
            CHECK(s.q[1] < traj.states[k - 1].q[1]);
        }
        CHECK(s.q[0] < 0.5);
    }
    CHECK(worst_sym <= 1e-10);

    auto jac = jacobian_along(m, traj, 0.5);
    for (Eigen::Index k = 1; k < jac.values.size(); ++k) CHECK(jac.values[k] < jac.values[k - 1]);
    CHECK(jac.values.minCoeff() > 0.0);
    CHECK(jac.values[16000] < jac.values[8000]);
    CHECK(jac.values[8000] < 1.0);
}

TEST_CASE("hamiltonian drift shrinks at fourth order") {
    const KernelModel m;
    LandmarkOptions loose;
    loose.drift_tol = 1.0;
    auto drift = [&](std::size_t steps) {
        return integrate_landmarks(m, symmetric_pair(15), TimeGrid(steps, 4.0), loose).max_relative_drift;
    };
    const double ratio = drift(100) / drift(200);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("drift beyond tolerance is an error") {
    LandmarkOptions strict;
    strict.drift_tol = 1e-15;
    CHECK_THROWS_AS(integrate_landmarks(KernelModel{}, symmetric_pair(15), TimeGrid(50, 4.0), strict), Error);
}

TEST_CASE("flow reconstruction") {
    const KernelModel m;
    const TimeGrid times(2000, 2.0);
    const SpatialGrid grid(101);
    auto traj = integrate_landmarks(m, symmetric_pair(15), times);
    auto flow = reconstruct_flow(m, traj, grid);
    double worst_fixed = 0.0, worst_flow = 0.0;
    for (std::size_t k = 0; k < times.samples(); ++k) {
        CHECK(flow.phi.at(k, 0) == 0.0);
        CHECK(flow.phi.at(k, 100) == 1.0);
        worst_fixed = std::max(worst_fixed, std::abs(flow.phi.at(k, 50) - 0.5));
    }
    CHECK(worst_fixed <= 1e-6);

    // d/dt phi against v(t, phi)
    auto dphi = finite_diff_time(flow.phi);
    for (std::size_t k = 1; k < times.steps(); k += 97)
        for (std::size_t i = 0; i < grid.size(); i += 7)
            worst_flow = std::max(worst_flow,
                                  std::abs(dphi.at(k, i) - velocity_field(m, traj.states[k], flow.phi.at(k, i))));
    CHECK(worst_flow < 1e-5);

    // Jacobian against central differences of phi at the probe.
    auto jac = jacobian_along(m, traj, 0.5);
    for (std::size_t k = 0; k < times.samples(); k += 250) {
        const double fd = (flow.phi.at(k, 51) - flow.phi.at(k, 49)) / (2 * grid.h());
        CHECK(std::abs(fd - jac.values[static_cast<Eigen::Index>(k)]) < 1e-3);
        CHECK(flow.phix_probe.values[static_cast<Eigen::Index>(k)] ==
              doctest::Approx(jac.values[static_cast<Eigen::Index>(k)]).epsilon(1e-12));
    }
}

TEST_CASE("lagrangian samples agree with the flow") {
    const KernelModel m;
    const SpatialGrid grid(65);
    const TimeGrid times(1000, 1.0);
    auto traj = integrate_landmarks(m, symmetric_pair(15), times);
    auto flow = reconstruct_flow(m, traj, grid);
    auto samples = sample_lagrangian(m, symmetric_pair(15), {0.0, 0.5, 1.0}, 1e-3, grid);
    REQUIRE(samples.size() == 3);
    CHECK(samples[0].probe_eta == 1.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(std::abs(samples[2].phi[static_cast<Eigen::Index>(i)] - flow.phi.at(1000, i)) < 1e-12);
        CHECK(std::abs(samples[1].phi[static_cast<Eigen::Index>(i)] - flow.phi.at(500, i)) < 1e-12);
    }
    CHECK(samples[2].state.q[0] == doctest::Approx(traj.states.back().q[0]).epsilon(1e-12));
    // q is the log-derivative of eta, up to the differencing error at the kinks
    auto logderiv_error = [&](std::size_t n) {
        const SpatialGrid g(n);
        auto s = sample_lagrangian(m, symmetric_pair(15), {1.0}, 1e-3, g);
        Vector logeta = s[0].eta.array().log();
        return (diff_x(logeta, g.h()) - s[0].q).cwiseAbs().maxCoeff();
    };
    CHECK(logderiv_error(257) < logderiv_error(65) / 3.0);
    CHECK(samples[2].probe_eta_rate < 0.0);
    CHECK_THROWS_AS(sample_lagrangian(m, symmetric_pair(1), {0.5, 0.2}, 1e-2, grid), DomainError);
}

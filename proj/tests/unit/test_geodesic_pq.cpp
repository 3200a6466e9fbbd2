#include <doctest.h>

#include "common.hpp"
#include "diffsplines/geodesic_pq.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace diffsplines;
using testing_support::landmark_p0;
using testing_support::symmetric_pair;

namespace {

constexpr double pi = std::numbers::pi;

ScalarField smooth_q(const SpatialGrid& g, double amp) {
    return repair_constraints(
        ScalarField::from_function(g, [amp](double x) { return amp * std::cos(pi * x) + 0.3 * amp * x; }));
}

// a, b, c evaluated in the Eulerian variable y = phi(x) with phi^{-1} by interpolation.
ABCCoefficients abc_direct(const ScalarField& p, const ScalarField& q, std::size_t ny) {
    const Vector phi = phi_of_q(q).values;
    const double h = q.grid.h();
    const SpatialGrid yg(ny);
    Vector pe(ny), ys = yg.nodes();
    std::size_t j = 0;
    for (std::size_t i = 0; i < ny; ++i) {
        const double y = std::min(ys[static_cast<Eigen::Index>(i)], phi[phi.size() - 1]);
        while (j + 2 < static_cast<std::size_t>(phi.size()) && phi[static_cast<Eigen::Index>(j + 1)] < y) ++j;
        const auto jj = static_cast<Eigen::Index>(j);
        const double w = (y - phi[jj]) / (phi[jj + 1] - phi[jj]);
        const double x = (static_cast<double>(j) + w) * h;
        pe[static_cast<Eigen::Index>(i)] = sample_in_space(p.values, h, std::clamp(x, 0.0, 1.0));
    }
    const Vector big_p = cumulative_trapezoid(pe, yg.h());
    ABCCoefficients out;
    out.a = 0.5 * simpson((ys.array() * pe.array().square()).matrix(), yg.h());
    out.c = 0.25 * simpson((ys.array().square() * pe.array().square()).matrix(), yg.h());
    out.b = 1.5 * simpson(big_p.array().square().matrix(), yg.h());
    return out;
}

}  // namespace

TEST_CASE("abc coefficients") {
    const SpatialGrid g(1001);
    auto zero = abc_coefficients(ScalarField(g), ScalarField(g));
    CHECK(zero.a == 0.0);
    CHECK(zero.b == 0.0);
    CHECK(zero.c == 0.0);
    auto id = abc_coefficients(ScalarField(g, 1.0), ScalarField(g));
    CHECK(id.a == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(id.c == doctest::Approx(1.0 / 12.0).epsilon(1e-6));
    CHECK(id.b == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("abc coefficients against the Eulerian form") {
    const SpatialGrid g(4001);
    auto q = smooth_q(g, 0.7);
    auto p = ScalarField::from_function(g, [](double x) { return std::sin(2 * pi * x) + x; });
    auto sub = abc_coefficients(p, q);
    auto dir = abc_direct(p, q, 4001);
    CHECK(std::abs(sub.a - dir.a) < 1e-6);
    CHECK(std::abs(sub.b - dir.b) < 1e-6);
    CHECK(std::abs(sub.c - dir.c) < 1e-6);
}

TEST_CASE("geodesic right-hand side") {
    const SpatialGrid g(513);
    auto none = geodesic_rhs(ScalarField(g), ScalarField(g));
    CHECK(none.qdot.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(none.pdot.values.cwiseAbs().maxCoeff() == 0.0);

    std::mt19937 rng(41);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 10; ++trial) {
        auto q = smooth_q(g, nd(rng));
        const double a = nd(rng), b = nd(rng);
        auto p = project_cotangent(
            q, ScalarField::from_function(g, [=](double x) { return a * std::cos(3 * x) + b * x * x; }));
        auto d = geodesic_rhs(p, q);
        const QGeometry geo(q.values, g.h());
        const double h = g.h();
        CHECK(std::abs(trapezoid(d.qdot.values, h)) < 1e-10);
        CHECK(std::abs(trapezoid(d.qdot.values.cwiseProduct(geo.phi()), h)) < 1e-10);
        CHECK(std::abs(geo.eta_inner(d.pdot.values, Vector::Ones(g.size()))) < 1e-10);
        // <pdot, phi>_eta equals b; the full derivative of <p, phi>_eta vanishes.
        const double bb = abc_coefficients(p, q).b;
        CHECK(geo.eta_inner(d.pdot.values, geo.phi()) == doctest::Approx(bb).epsilon(1e-9));
        const double dt = 1e-6;
        ScalarField q2(g, Vector(q.values + dt * d.qdot.values));
        ScalarField p2(g, Vector(p.values + dt * d.pdot.values));
        const QGeometry geo2(q2.values, h);
        const double rate = (geo2.eta_inner(p2.values, geo2.phi()) - geo.eta_inner(p.values, geo.phi())) / dt;
        CHECK(std::abs(rate) < 1e-4 * (1 + std::abs(bb)));
    }
}

TEST_CASE("stationary geodesic") {
    const SpatialGrid g(65);
    auto traj = integrate_geodesic(ScalarField(g), QState{ScalarField(g)}, TimeGrid(20, 1.0));
    CHECK(traj.q_path.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(traj.p_path.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("geodesic constraints") {
    const LandmarkState s = symmetric_pair(15);
    const TimeGrid t(1000, 1.0);
    auto worst_residual = [&](std::size_t n, Reprojection mode) {
        const SpatialGrid g(n);
        GeodesicOptions opts;
        opts.reprojection = mode;
        auto traj = integrate_geodesic(landmark_p0(s, g), QState{ScalarField(g)}, t, opts);
        double worst = 0.0;
        for (const auto& r : traj.constraints) worst = std::max({worst, std::abs(r.r1), std::abs(r.r2)});
        return worst;
    };
    CHECK(worst_residual(513, Reprojection::on) <= 1e-6);
    CHECK(worst_residual(1025, Reprojection::automatic) <= 1e-6);
    // the unprojected drift is a second-order spatial error
    CHECK(worst_residual(257, Reprojection::off) / worst_residual(513, Reprojection::off) ==
          doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("geodesic energy") {
    const LandmarkState s = symmetric_pair(15);
    const SpatialGrid g(2049);
    const TimeGrid t(1000, 1.0);
    auto traj = integrate_geodesic(landmark_p0(s, g), QState{ScalarField(g)}, t);
    auto energy = [&](std::size_t k) {
        const Vector p = traj.p_path.values.row(static_cast<Eigen::Index>(k)).transpose();
        const Vector eta = eta_from_q(traj.q_path.values.row(static_cast<Eigen::Index>(k)).transpose(), g.h());
        return trapezoid(eta.cwiseProduct(p.cwiseProduct(p)), g.h());
    };
    const double e0 = energy(0);
    for (std::size_t k = 0; k < t.samples(); k += 50) CHECK(std::abs(energy(k) - e0) <= 1e-6 * e0);
    // the metric speed is twice the landmark Hamiltonian
    CHECK(e0 == doctest::Approx(2.0 * landmark_hamiltonian(KernelModel{}, s)).epsilon(1e-5));
}

TEST_CASE("geodesic momentum matches the landmark Lagrangian momentum") {
    const SpatialGrid g(257);
    const TimeGrid t(500, 0.5);
    const LandmarkState s = symmetric_pair(15);
    auto traj = integrate_geodesic(landmark_p0(s, g), QState{ScalarField(g)}, t);
    auto lag = sample_lagrangian(KernelModel{}, s, {0.5}, 1e-3, g);
    const Vector p = traj.p_path.values.row(500).transpose();
    CHECK((p - lag[0].p).cwiseAbs().maxCoeff() < 2e-2 * lag[0].p.cwiseAbs().maxCoeff());
    const Vector q = traj.q_path.values.row(500).transpose();
    CHECK((q - lag[0].q).cwiseAbs().maxCoeff() < 2e-2 * lag[0].q.cwiseAbs().maxCoeff());
}

TEST_CASE("drift without reprojection is reported") {
    const SpatialGrid g(33);
    GeodesicOptions off;
    off.reprojection = Reprojection::off;
    off.drift_tol = 1e-14;
    CHECK_THROWS_AS(integrate_geodesic(landmark_p0(symmetric_pair(15), g), QState{ScalarField(g)},
                                       TimeGrid(20, 1.0), off),
                    ConstraintViolation);
}

TEST_CASE("projected flow") {
    const SpatialGrid g(257);
    const TimeGrid t(500, 1.0);
    auto still = projected_flow(PathField(t, g), QState{ScalarField(g)});
    CHECK(still.values.cwiseAbs().maxCoeff() == 0.0);

    auto traj = integrate_geodesic(landmark_p0(symmetric_pair(15), g), QState{ScalarField(g)}, t);
    auto q = projected_flow(traj.p_path, QState{ScalarField(g)});
    CHECK((q.values - traj.q_path.values).cwiseAbs().maxCoeff() <= 1e-5);
    auto repaired = projected_flow(traj.p_path, QState{ScalarField(g)}, true);
    for (std::size_t k = 0; k < t.samples(); k += 25) {
        auto r = check_constraints(repaired.slice(k));
        CHECK(std::abs(r.r1) <= 1e-6);
        CHECK(std::abs(r.r2) <= 1e-6);
    }
}

TEST_CASE("initial momentum from a velocity") {
    const SpatialGrid g(201);
    CHECK(initial_p_from_velocity(ScalarField(g)).values.cwiseAbs().maxCoeff() == 0.0);
    auto v = ScalarField::from_function(g, [](double x) { return x * x * (1 - x) * (1 - x); });
    auto p = initial_p_from_velocity(v);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.node(i);
        CHECK(std::abs(p[i] - (2 - 12 * x + 12 * x * x)) < 10 * g.h() * g.h() * 12);
    }
    auto bad = ScalarField::from_function(g, [](double x) { return x; });
    CHECK_THROWS_AS(initial_p_from_velocity(bad), DomainError);

    // landmark velocity: piecewise linear second derivative, kinks at the landmarks
    const SpatialGrid lg(401);
    auto vl = ScalarField::from_function(
        lg, [](double x) { return velocity_field(KernelModel{}, symmetric_pair(15), x); });
    auto pl = initial_p_from_velocity(vl);
    Vector second = Vector::Zero(lg.size());
    for (std::size_t i = 1; i + 1 < lg.size(); ++i)
        second[static_cast<Eigen::Index>(i)] = pl[i + 1] - 2 * pl[i] + pl[i - 1];
    for (std::size_t i = 1; i + 1 < lg.size(); ++i)
        if (std::abs(static_cast<int>(i) - 100) > 1 && std::abs(static_cast<int>(i) - 300) > 1) CHECK(std::abs(second[static_cast<Eigen::Index>(i)]) < 1e-8);
    CHECK(std::abs(second[100]) > 1e-3);
    CHECK(std::abs(second[300]) > 1e-3);
}

TEST_CASE("landmark and pq flows agree at second order") {
    const LandmarkState s = symmetric_pair(15);
    auto sup_error = [&](std::size_t n, std::size_t steps) {
        const SpatialGrid g(n);
        const TimeGrid t(steps, 1.0);
        GeodesicOptions off;
        off.reprojection = Reprojection::off;
        auto traj = integrate_geodesic(landmark_p0(s, g), QState{ScalarField(g)}, t, off);
        auto flow = reconstruct_flow(KernelModel{}, integrate_landmarks(KernelModel{}, s, t), g);
        double worst = 0.0;
        for (std::size_t k = 0; k < t.samples(); ++k)
            worst = std::max(worst, (phi_of_q(traj.q_path.slice(k)).values -
                                     flow.phi.values.row(static_cast<Eigen::Index>(k)).transpose())
                                        .cwiseAbs()
                                        .maxCoeff());
        return worst;
    };
    const double coarse = sup_error(129, 125);
    const double fine = sup_error(257, 250);
    CHECK(coarse / fine >= 3.0);
}

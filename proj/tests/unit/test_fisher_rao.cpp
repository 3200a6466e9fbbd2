#include <doctest.h>

#include "diffsplines/fisher_rao.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace diffsplines;

namespace {

constexpr double pi = std::numbers::pi;

AtomicMeasurePath profile_atom(const TimeGrid& t, double x0, double (*f)(double)) {
    AtomicMeasurePath mu{x0, TimeSeries{t, Vector(t.samples())}};
    for (std::size_t k = 0; k < t.samples(); ++k) mu.f.values[static_cast<Eigen::Index>(k)] = f(t.time(k));
    return mu;
}

double inner(const PathField& a, const PathField& b) {
    PathField prod(a.times, a.grid);
    prod.values = a.values.cwiseProduct(b.values);
    return quadrature(prod);
}

struct SmoothPair {
    PathField mu;
    PathField root_rate_sq;  // (d/dt sqrt(mu))^2
};

// mu = (0.02 + t + b t^2)^2 g(x) with g > 0
SmoothPair smooth_pair(const TimeGrid& t, const SpatialGrid& g, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    const double a = u(rng), b = u(rng), c = u(rng);
    auto gx = [=](double x) { return 1.0 + 0.9 * a * std::cos(pi * x) * (1 + 0.1 * c * x); };
    SmoothPair out{PathField::from_function(t, g, [&](double s, double x) {
                       const double r = 0.02 + s + b * s * s;
                       return r * r * gx(x);
                   }),
                   PathField::from_function(t, g, [&](double s, double x) {
                       const double dr = 1 + 2 * b * s;
                       return dr * dr * gx(x);
                   })};
    return out;
}

}  // namespace

TEST_CASE("r integrand") {
    CHECK(r_integrand(1.0, 2.0) == 1.0);
    CHECK(r_integrand(0.0, 0.0) == 0.0);
    CHECK(std::isinf(r_integrand(0.0, 1.0)));
    CHECK(std::isinf(r_integrand(1e-15, 1.0)));
    CHECK(std::isinf(r_integrand(-1.0, 0.5)));
    CHECK(r_integrand(3.0 * 0.7, 3.0 * -1.3) == doctest::Approx(3.0 * r_integrand(0.7, -1.3)).epsilon(1e-15));
}

TEST_CASE("fr_grid closed forms") {
    const TimeGrid t(1000, 1.0);
    const SpatialGrid g(11);
    const PathField one(t, g, 1.0);
    CHECK(fr_grid(GridMeasurePair{one, PathField(t, g)}) == 0.0);
    CHECK(fr_grid(GridMeasurePair{one, PathField(t, g, 2.0)}) == doctest::Approx(1.0).epsilon(1e-14));
    auto mu = PathField::from_function(t, g, [](double s, double) { return s * s; });
    auto nu = PathField::from_function(t, g, [](double s, double) { return 2 * s; });
    CHECK(std::abs(fr_grid(GridMeasurePair{mu, nu}) - 1.0) < 1e-3);
    CHECK(std::isinf(fr_grid(GridMeasurePair{PathField(t, g), one})));
    CHECK_THROWS_AS(fr_grid(GridMeasurePair{one, one}, PathField(t, g, 0.0)), DomainError);
}

TEST_CASE("fr_atomic closed forms") {
    const TimeGrid t(10000, 1.0);
    const TimeSeries flat{t, Vector::Ones(static_cast<Eigen::Index>(t.samples()))};
    CHECK(std::abs(fr_atomic(profile_atom(t, 0.5, [](double s) { return std::sin(pi * s); }), flat) -
                   pi * pi / 2) < 1e-6);
    CHECK(std::abs(fr_atomic(profile_atom(t, 0.5, [](double) { return 0.7; }), flat)) < 1e-15);
    CHECK(std::abs(fr_atomic(profile_atom(t, 0.5, [](double s) { return std::sin(2 * pi * s); }), flat) -
                   2 * pi * pi) < 1e-5);
    CHECK(fr_atomic(profile_atom(TimeGrid(1000, 1.0), 0.5, [](double s) { return std::sin(pi * s); }),
                    TimeSeries{TimeGrid(1000, 1.0), Vector::Ones(1001)}) == doctest::Approx(pi * pi / 2).epsilon(1e-4));
    const PathField eta(t, SpatialGrid(5), 1.0);
    CHECK(fr_atomic(profile_atom(t, 0.3, [](double s) { return s; }), eta) == doctest::Approx(1.0));
}

TEST_CASE("inequality condition") {
    const TimeGrid t(400, 1.0);
    const SpatialGrid g(41);
    auto mu = PathField::from_function(t, g, [](double s, double) { return s * s; });
    auto tests = default_test_family();
    CHECK(tests.size() == 25);
    auto ok = check_inequality_condition(GridMeasurePair{mu, PathField(t, g, 1.0)}, tests);
    CHECK(ok.worst_margin >= -1e-8);
    auto bad = check_inequality_condition(GridMeasurePair{mu, PathField(t, g, 0.5)}, tests);
    CHECK(bad.worst_margin < 0.0);
    CHECK(bad.margins[0] < 0.0);
    auto empty = check_inequality_condition(GridMeasurePair{PathField(t, g), PathField(t, g, 0.3)}, tests);
    CHECK(empty.worst_margin >= 0.0);
    CHECK_THROWS_AS(check_inequality_condition(GridMeasurePair{mu, mu}, {}), DomainError);
}

TEST_CASE("subgradient certificate") {
    const TimeGrid t(200, 1.0);
    const SpatialGrid g(21);
    std::mt19937 rng(4);
    auto sp = smooth_pair(t, g, rng);
    auto pair = GridMeasurePair::from_density(sp.mu);
    auto weight = PathField::from_function(t, g, [](double s, double x) { return 1.2 + std::sin(s + x); });
    PathField v(t, g), u(t, g);
    v.values = weight.values.cwiseProduct(pair.rho_nu.values).cwiseQuotient(2.0 * pair.rho_mu.values);
    u.values = -(v.values.cwiseQuotient(weight.values)).cwiseAbs2().cwiseProduct(weight.values);
    auto opt = check_subgradient(u, v, pair, weight);
    CHECK(opt.feasible);
    CHECK(std::abs(opt.gap) <= 1e-6);

    PathField arbitrary_v = PathField::from_function(t, g, [](double s, double x) { return s - x; });
    PathField boundary(t, g);
    boundary.values = -(arbitrary_v.values.cwiseQuotient(weight.values)).cwiseAbs2().cwiseProduct(weight.values);
    CHECK(check_subgradient(boundary, arbitrary_v, pair, weight).feasible);
    CHECK_FALSE(check_subgradient(PathField(t, g, 1.0), PathField(t, g), pair, weight).feasible);
}

TEST_CASE("one-homogeneity and subadditivity") {
    const TimeGrid t(100, 1.0);
    const SpatialGrid g(33);
    std::mt19937 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = GridMeasurePair::from_density(smooth_pair(t, g, rng).mu);
        auto b = GridMeasurePair::from_density(smooth_pair(t, g, rng).mu);
        const double lambda = 0.5 + trial;
        GridMeasurePair scaled{a.rho_mu, a.rho_nu};
        scaled.rho_mu.values *= lambda;
        scaled.rho_nu.values *= lambda;
        CHECK(fr_grid(scaled) == doctest::Approx(lambda * fr_grid(a)).epsilon(1e-14));
        GridMeasurePair sum{a.rho_mu, a.rho_nu};
        sum.rho_mu.values += b.rho_mu.values;
        sum.rho_nu.values += b.rho_nu.values;
        CHECK(fr_grid(sum) <= fr_grid(a) + fr_grid(b) + 1e-9);
    }
}

TEST_CASE("the two formulations of the inequality agree") {
    const TimeGrid t(400, 1.0);
    const SpatialGrid g(33);
    const auto tests = default_test_family();
    std::mt19937 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto sp = smooth_pair(t, g, rng);
        const auto flux = GridMeasurePair::from_density(sp.mu);
        PathField nu_ok = sp.root_rate_sq;
        nu_ok.values *= 1.1;
        PathField nu_bad = sp.root_rate_sq;
        nu_bad.values *= 0.5;

        CHECK(check_inequality_condition(GridMeasurePair{sp.mu, nu_ok}, tests).worst_margin >= -1e-8);
        bool short_form_bad = false;
        for (const auto& test : tests) {
            const PathField f = PathField::from_function(t, g, test.value);
            CHECK(fr_grid(flux, f) <= inner(nu_ok, f) + 1e-8);
            short_form_bad = short_form_bad || fr_grid(flux, f) > inner(nu_bad, f) + 1e-8;
        }
        CHECK(short_form_bad);
        CHECK(check_inequality_condition(GridMeasurePair{sp.mu, nu_bad}, tests).worst_margin < -1e-8);
    }
}

TEST_CASE("Cauchy-Schwarz chain") {
    const TimeGrid t(200, 1.0);
    const SpatialGrid g(33);
    std::mt19937 rng(12);
    for (const auto& test : default_test_family()) {
        auto pair = GridMeasurePair::from_density(smooth_pair(t, g, rng).mu);
        const PathField f = PathField::from_function(t, g, test.value);
        const double lhs = std::pow(inner(pair.rho_nu, f), 2);
        CHECK(lhs <= 4 * fr_grid(pair, f) * inner(pair.rho_mu, f) * (1 + 1e-12));
    }
}

TEST_CASE("a mollified atom approaches the atomic formula") {
    const TimeGrid t(400, 1.0);
    const SpatialGrid g(513);
    const double x0 = 0.5, width = 4 * g.h();
    const auto f = [](double s) { return std::sin(pi * s); };
    auto bumpx = [&](double x) {
        const double z = (x - x0) / width;
        return std::abs(z) < 1 ? std::pow(std::cos(pi * z / 2), 2) : 0.0;
    };
    const double mass = quadrature(ScalarField::from_function(g, bumpx));
    auto mu = PathField::from_function(t, g, [&](double s, double x) { return f(s) * f(s) * bumpx(x) / mass; });
    const double grid_value = fr_grid(GridMeasurePair::from_density(mu));
    const TimeSeries flat{t, Vector::Ones(static_cast<Eigen::Index>(t.samples()))};
    const double atomic = fr_atomic(profile_atom(t, x0, [](double s) { return std::sin(pi * s); }), flat);
    CHECK(grid_value / atomic == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("oscillation synthesis") {
    const TimeGrid t(200, 1.0);
    const SpatialGrid g(1025);
    CHECK(synthesize_oscillations(PathField(t, g), PathField(t, g), 8).values.cwiseAbs().maxCoeff() == 0.0);

    auto mu = PathField::from_function(t, g, [](double s, double) { return s * s; });
    auto pn = synthesize_oscillations(mu, PathField(t, g, 1.0), 8);
    double worst = 0.0;
    for (std::size_t k = 0; k < t.samples(); ++k)
        for (std::size_t i = 0; i < g.size(); ++i)
            worst = std::max(worst, std::abs(pn.at(k, i) - std::sqrt(2.0) * t.time(k) *
                                                               std::sin(2 * pi * 8 * g.node(i))));
    CHECK(worst < 1e-12);
    CHECK(pn.values.row(0).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(synthesize_oscillations(mu, PathField(t, g, 0.5), 8), InfeasibleTarget);
    auto late = PathField::from_function(t, g, [](double s, double) { return 1 + s; });
    CHECK_THROWS_AS(synthesize_oscillations(late, PathField(t, g, 1.0), 8), InfeasibleTarget);
}

TEST_CASE("oscillations with rotation reproduce both targets on average") {
    const TimeGrid t(400, 1.0);
    const SpatialGrid g(2049);
    auto mu = PathField::from_function(t, g, [](double s, double x) { return s * s * (1 + 0.5 * x); });
    auto nu = PathField::from_function(t, g, [](double, double x) { return 3.0 * (1 + 0.5 * x); });
    auto pn = synthesize_oscillations(mu, nu, 16);
    auto dpn = finite_diff_time(pn);
    const auto test = PathField::from_function(t, g, [](double s, double x) { return 1 + s * x; });
    PathField sq(t, g), dsq(t, g);
    sq.values = pn.values.cwiseAbs2();
    dsq.values = dpn.values.cwiseAbs2();
    CHECK(inner(sq, test) == doctest::Approx(inner(mu, test)).epsilon(5e-2));
    CHECK(inner(dsq, test) == doctest::Approx(inner(nu, test)).epsilon(5e-2));
}

TEST_CASE("weak limits decay like 1/n") {
    const TimeGrid t(200, 1.0);
    const SpatialGrid g(4097);
    auto mu = PathField::from_function(t, g, [](double s, double) { return s * s; });
    const PathField nu(t, g, 1.0);
    const std::vector<PathField> tests{
        PathField::from_function(t, g, [](double s, double x) { return 1 + s * x; }),
        PathField::from_function(t, g, [](double s, double x) { return std::exp(-s * x) * (1 + x * x); }),
        PathField::from_function(t, g, [](double s, double x) { return std::cos(pi * s) + x * x * x; })};
    for (const auto& test : tests) {
        double c_lin = 0.0, c_sq = 0.0;
        for (int n : {8, 16, 32, 64}) {
            auto pn = synthesize_oscillations(mu, nu, n);
            PathField sq(t, g);
            sq.values = pn.values.cwiseAbs2();
            const double lin = std::abs(inner(pn, test));
            const double quad = std::abs(inner(sq, test) - inner(mu, test));
            if (n == 8) {
                c_lin = 1.1 * 8 * lin;
                c_sq = 1.1 * 8 * quad;
            }
            CHECK(lin <= std::max(c_lin / n, 1e-12));
            CHECK(quad <= std::max(c_sq / n, 1e-12));
        }
    }
}

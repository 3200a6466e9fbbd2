#include "diffsplines/fisher_rao.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace diffsplines {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void same_shape(const PathField& a, const PathField& b, const char* what) {
    if (!(a.grid == b.grid) || !(a.times == b.times))
        throw DomainError(std::string(what) + ": fields live on different grids");
}

double pairing(const PathField& a, const PathField& b) {
    PathField prod(a.times, a.grid);
    prod.values = a.values.cwiseProduct(b.values);
    return quadrature(prod);
}

}  // namespace

double r_integrand(double x, double y) {
    if (x > kFisherRaoFloor) return y * y / (4.0 * x);
    if (y == 0.0 && x >= 0.0) return 0.0;
    return kInf;
}

void GridMeasurePair::validate() const {
    same_shape(rho_mu, rho_nu, "measure pair");
    if (!rho_mu.values.allFinite() || !rho_nu.values.allFinite())
        throw DomainError("measure densities must be finite");
    if (rho_mu.values.minCoeff() < 0.0) throw DomainError("mu density must be nonnegative");
}

GridMeasurePair GridMeasurePair::from_density(const PathField& rho_mu) {
    GridMeasurePair pair{rho_mu, finite_diff_time(rho_mu)};
    // a nonnegative density is stationary where it vanishes
    pair.rho_nu.values = (rho_mu.values.array() <= kFisherRaoFloor).select(0.0, pair.rho_nu.values);
    return pair;
}

void AtomicMeasurePath::validate(bool as_defect) const {
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("atom location outside [0,1]");
    if (static_cast<std::size_t>(f.values.size()) != f.times.samples())
        throw DomainError("atomic profile length does not match its time grid");
    if (!f.values.allFinite()) throw DomainError("atomic profile is not finite");
    if (as_defect && f.values[0] != 0.0)
        throw DomainError("defect measure must vanish at t=0");
}

double fr_grid(const GridMeasurePair& pair, const PathField& weight) {
    pair.validate();
    same_shape(pair.rho_mu, weight, "fisher-rao weight");
    if (!(weight.values.minCoeff() > 0.0)) throw DomainError("fisher-rao weight must be positive");
    PathField integrand(weight.times, weight.grid);
    for (Eigen::Index k = 0; k < integrand.values.rows(); ++k)
        for (Eigen::Index i = 0; i < integrand.values.cols(); ++i) {
            const double r = r_integrand(pair.rho_mu.values(k, i), pair.rho_nu.values(k, i));
            if (std::isinf(r)) return kInf;
            integrand.values(k, i) = r * weight.values(k, i);
        }
    return quadrature(integrand);
}

double fr_grid(const GridMeasurePair& pair) {
    return fr_grid(pair, PathField(pair.rho_mu.times, pair.rho_mu.grid, 1.0));
}

double fr_atomic(const AtomicMeasurePath& delta, const TimeSeries& eta_probe) {
    delta.validate(false);
    if (!(delta.f.times == eta_probe.times))
        throw DomainError("atomic profile and eta probe use different time grids");
    const Vector fdot = finite_diff_time(delta.f.values, delta.f.times.dt());
    return trapezoid(fdot.cwiseProduct(fdot).cwiseProduct(eta_probe.values), delta.f.times.dt());
}

double fr_atomic(const AtomicMeasurePath& delta, const PathField& eta_path) {
    TimeSeries probe{eta_path.times, Vector(eta_path.times.samples())};
    for (Eigen::Index k = 0; k < probe.values.size(); ++k)
        probe.values[k] =
            sample_in_space(eta_path.values.row(k).transpose(), eta_path.grid.h(), delta.x0);
    return fr_atomic(delta, probe);
}

std::vector<TestFunction> default_test_family() {
    std::vector<TestFunction> out;
    out.push_back({"1", [](double, double) { return 1.0; }});
    for (int k = 0; k <= 4; ++k)
        for (int l = 0; l <= 4; ++l) {
            if (k == 0 && l == 0) continue;
            out.push_back({"1.5+cos(" + std::to_string(k) + "pi t)cos(" + std::to_string(l) + "pi x)",
                           [k, l](double t, double x) {
                               return 1.5 + std::cos(k * std::numbers::pi * t) *
                                                std::cos(l * std::numbers::pi * x);
                           }});
        }
    return out;
}

InequalityReport check_inequality_condition(const GridMeasurePair& pair,
                                            const std::vector<TestFunction>& tests) {
    pair.validate();
    if (tests.empty()) throw DomainError("empty test-function family");
    const PathField dmu = finite_diff_time(pair.rho_mu);
    InequalityReport report;
    report.worst_margin = kInf;
    for (const TestFunction& test : tests) {
        const PathField f = PathField::from_function(pair.rho_mu.times, pair.rho_mu.grid, test.value);
        if (!(f.values.minCoeff() > 0.0)) throw DomainError("test function " + test.label + " is not positive");
        const double drift = pairing(dmu, f);
        const double margin = 4.0 * pairing(pair.rho_nu, f) * pairing(pair.rho_mu, f) - drift * drift;
        report.margins.push_back(margin);
        report.worst_margin = std::min(report.worst_margin, margin);
    }
    return report;
}

SubgradientReport check_subgradient(const PathField& u, const PathField& v,
                                    const GridMeasurePair& pair, const PathField& weight,
                                    double tol) {
    same_shape(u, v, "subgradient");
    same_shape(u, weight, "subgradient weight");
    if (!(weight.values.minCoeff() > 0.0)) throw DomainError("fisher-rao weight must be positive");
    SubgradientReport report;
    for (Eigen::Index k = 0; k < u.values.rows(); ++k)
        for (Eigen::Index i = 0; i < u.values.cols(); ++i) {
            const double f = weight.values(k, i);
            const double ratio = v.values(k, i) / f;
            report.worst_violation =
                std::max(report.worst_violation, u.values(k, i) / f + ratio * ratio);
        }
    report.feasible = report.worst_violation <= tol;
    report.gap = fr_grid(pair, weight) - pairing(u, pair.rho_mu) - pairing(v, pair.rho_nu);
    return report;
}

PathField synthesize_oscillations(const PathField& rho_mu, const PathField& rho_nu, int n,
                                  double tol) {
    const GridMeasurePair pair{rho_mu, rho_nu};
    pair.validate();
    if (n < 1) throw DomainError("oscillation frequency must be positive");
    if (rho_mu.values.row(0).cwiseAbs().maxCoeff() > tol)
        throw InfeasibleTarget("target mu must vanish at t=0");
    const TimeGrid& times = rho_mu.times;
    const SpatialGrid& grid = rho_mu.grid;
    const double dt = times.dt();
    PathField root(times, grid);
    root.values = rho_mu.values.cwiseSqrt();
    const PathField droot = finite_diff_time(root);

    PathField rate(times, grid);
    for (Eigen::Index k = 0; k < rate.values.rows(); ++k)
        for (Eigen::Index i = 0; i < rate.values.cols(); ++i) {
            const double mu = rho_mu.values(k, i);
            const double nu = rho_nu.values(k, i);
            const double excess = nu - droot.values(k, i) * droot.values(k, i);
            if (excess < -tol * (1.0 + std::abs(nu)))
                throw InfeasibleTarget("(d/dt sqrt(mu))^2 exceeds nu at t=" +
                                       std::to_string(times.time(static_cast<std::size_t>(k))) +
                                       ", x=" + std::to_string(grid.node(static_cast<std::size_t>(i))));
            rate.values(k, i) = mu > kFisherRaoFloor && excess > tol * (1.0 + std::abs(nu))
                                    ? std::sqrt(excess / mu)
                                    : 0.0;
        }

    PathField out(times, grid);
    const Vector x = grid.nodes();
    const Eigen::ArrayXd s = (2.0 * std::numbers::pi * n * x.array()).sin();
    const Eigen::ArrayXd c = (2.0 * std::numbers::pi * n * x.array()).cos();
    Eigen::ArrayXd theta = Eigen::ArrayXd::Zero(x.size());
    for (Eigen::Index k = 0; k < out.values.rows(); ++k) {
        if (k > 0)
            theta += 0.5 * dt * (rate.values.row(k - 1).transpose().array() +
                                 rate.values.row(k).transpose().array());
        const Eigen::ArrayXd r = root.values.row(k).transpose().array();
        const Eigen::ArrayXd a = std::numbers::sqrt2 * r * theta.cos();
        const Eigen::ArrayXd b = 2.0 * std::numbers::sqrt2 * r * theta.sin();
        out.values.row(k) = ((a + b * c) * s).matrix().transpose();
    }
    return out;
}

}  // namespace diffsplines

#pragma once

#include "diffsplines/numerics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace diffsplines {

class InfeasibleTarget : public Error {
public:
    using Error::Error;
};

constexpr double kFisherRaoFloor = 1e-14;

/// y^2 / (4x) for x > 0, 0 at the origin, +inf otherwise.
double r_integrand(double x, double y);

/// Absolutely continuous pair (mu, nu) with densities on the (t,x) grid.
struct GridMeasurePair {
    PathField rho_mu;
    PathField rho_nu;

    void validate() const;
    /// Pair (mu, d/dt mu) with the time derivative taken by finite differences, zeroed where mu vanishes.
    static GridMeasurePair from_density(const PathField& rho_mu);
};

/// mu(t) = f(t)^2 delta_{x0}. Only f^2 enters, so a signed profile is accepted; this keeps
/// profiles such as sin(2 pi t) smooth for finite differencing.
struct AtomicMeasurePath {
    double x0 = 0.5;
    TimeSeries f;

    void validate(bool as_defect) const;
};

/// int r(rho_mu, rho_nu) * weight over the grid; +inf when nu charges a mu-null cell.
double fr_grid(const GridMeasurePair& pair, const PathField& weight);
double fr_grid(const GridMeasurePair& pair);

/// int f'(t)^2 eta(t, x0) dt.
double fr_atomic(const AtomicMeasurePath& delta, const TimeSeries& eta_probe);
double fr_atomic(const AtomicMeasurePath& delta, const PathField& eta_path);

struct TestFunction {
    std::string label;
    std::function<double(double, double)> value;
};

/// {1} and 1.5 + cos(k pi t) cos(l pi x) for 0 <= k,l <= 4, (k,l) != (0,0).
std::vector<TestFunction> default_test_family();

struct InequalityReport {
    double worst_margin = 0.0;
    std::vector<double> margins;
};

/// 4 <nu,f> <mu,f> - <d/dt mu, f>^2 for each test function.
InequalityReport check_inequality_condition(const GridMeasurePair& pair,
                                            const std::vector<TestFunction>& tests);

struct SubgradientReport {
    bool feasible = false;
    double gap = 0.0;
    double worst_violation = 0.0;
};

SubgradientReport check_subgradient(const PathField& u, const PathField& v,
                                    const GridMeasurePair& pair, const PathField& weight,
                                    double tol = 1e-12);

/// p_n = (a + b cos 2 pi n x) sin 2 pi n x with a = sqrt(2) r cos(theta), b = 2 sqrt(2) r sin(theta),
/// so that p_n^2 averages to r^2 = mu and (d/dt p_n)^2 to (d/dt r)^2 + r^2 theta'^2 = nu.
PathField synthesize_oscillations(const PathField& rho_mu, const PathField& rho_nu, int n,
                                  double tol = 1e-8);

}  // namespace diffsplines

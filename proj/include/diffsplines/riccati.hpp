#pragma once

#include "diffsplines/functional.hpp"
#include "diffsplines/geodesic_pq.hpp"
#include "diffsplines/numerics.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace diffsplines {

/// Boundary data for d/dt g + g^2/eta = m, solved node by node in x.
struct RiccatiBoundary {
    enum class Kind {
        terminal_zero,  ///< g(1, .) = 0, integrated backward
        initial_value,  ///< g(0, .) = g0, integrated forward
        initial_pole    ///< g(0, .) = +inf, i.e. u(0) = 0 in the linear form
    };
    Kind kind = Kind::terminal_zero;
    Vector g0;

    static RiccatiBoundary terminal_zero() { return {Kind::terminal_zero, {}}; }
    static RiccatiBoundary initial_value(Vector g0) { return {Kind::initial_value, std::move(g0)}; }
    static RiccatiBoundary initial_pole() { return {Kind::initial_pole, {}}; }
};

struct RiccatiProblem {
    PathField eta_path;
    PathField rhs;
    RiccatiBoundary boundary;
    /// RK4 substeps per time-grid interval; coefficients are interpolated in time.
    int substeps = 1;

    void validate() const;
};

enum class RiccatiStatus { solved, blowup };

std::string to_string(RiccatiStatus s);

struct RiccatiOutcome {
    RiccatiStatus status = RiccatiStatus::solved;
    /// g on the grid; entries beyond a node's blow-up time are NaN.
    PathField g;
    /// Blow-up time per node, NaN where the node exists on all of [0,1].
    Vector blowup_time_per_x;
    /// Largest |g(t,x_{i+1}) - g(t,x_i)| over nodes that exist on [0,1].
    double max_x_jump = 0.0;
    /// Distance of g from its prescribed boundary value.
    double boundary_residual = 0.0;

    bool node_solved(Eigen::Index i) const { return std::isnan(blowup_time_per_x[i]); }
};

/// RK4 per node with a switch to h = 1/g when |g| > 1; blow-up is a zero of h, located by
/// bisection to 1e-7.
RiccatiOutcome riccati_solve(const RiccatiProblem& problem);

/// Linear route: d/dt u = w/eta, d/dt w = m u, g = w/u = eta u'/u; blow-up is a zero of u.
RiccatiOutcome riccati_via_linear(const RiccatiProblem& problem);

struct SturmReport {
    bool ordering_holds = false;
    bool window_contained = false;
    double min_gap = 0.0;  ///< min of f - g over the common existence window
    RiccatiOutcome small;
    RiccatiOutcome big;
};

/// Solves both forward problems and checks f >= g and that f lives at least as long as g.
SturmReport sturm_margin(const RiccatiProblem& problem_small, const RiccatiProblem& problem_big);

struct BoundCheck {
    double ratio = 0.0;
    bool ok = true;
};

/// sup [rhs]_- / inf eta against pi^2.
BoundCheck sufficient_bound_check(const PathField& eta_path, const PathField& rhs);

/// w = eta int_0^x eta (A + proj_cotangent U(Delta, q)) dy, with A the flat acceleration.
PathField compute_w(const PQTrajectory& traj, const Defect& defect);

enum class Verdict { certified_minimum, not_minimum, inconclusive };

std::string to_string(Verdict v);

struct OptimalityReport {
    PathField w;
    std::vector<double> necessary_margins;
    std::vector<double> candidate_fisher_rao;
    std::vector<double> candidate_pairing;  ///< <mu, -w>
    double equality_gap = 0.0;              ///< FR(Delta) + <Delta, w>
    std::optional<RiccatiOutcome> sufficient_status;
    std::optional<BoundCheck> bound;
    Verdict verdict = Verdict::inconclusive;
};

/// <mu, w> for an atomic candidate.
double atomic_pairing(const AtomicMeasurePath& mu, const PathField& w);

OptimalityReport necessary_condition_test(const PQTrajectory& traj, const Defect& defect,
                                          const std::vector<AtomicMeasurePath>& candidates,
                                          double tol = 1e-9);

OptimalityReport certify_sufficient(const PQTrajectory& traj, const Defect& defect,
                                    double tol = 1e-8);

}  // namespace diffsplines

#include "diffsplines/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace diffsplines {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBisectionTol = 1e-7;

Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

// Time-interpolated coefficients of one spatial node.
struct NodeCoefficients {
    Vector eta;
    Vector m;
    double dt;

    double eta_at(double t) const { return sample_series(eta, dt, t); }
    double m_at(double t) const { return sample_series(m, dt, t); }
};

template <class F>
double rk4_scalar(F&& f, double t, double y, double h) {
    const double k1 = f(t, y);
    const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(t + h, y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Smallest s in (0, span] with sign(step(s)) != sign(y0), given that step(span) already differs.
template <class Step>
double bisect_crossing(Step&& step, double y0, double span) {
    double lo = 0.0, hi = span;
    while (hi - lo > kBisectionTol) {
        const double mid = 0.5 * (lo + hi);
        const double v = step(mid);
        if (v == 0.0 || std::signbit(v) != std::signbit(y0)) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

bool crossed(double before, double after) {
    if (before == 0.0) return false;
    return after == 0.0 || std::signbit(after) != std::signbit(before);
}

struct NodeResult {
    Vector g;
    double blowup_time = kNaN;
};

struct Sweep {
    bool forward;
    std::size_t steps;
    int substeps;
    double dt;
    const TimeGrid* times;

    std::size_t grid_index(std::size_t j) const { return forward ? j : steps - j; }
    double start_time(std::size_t j) const { return times->time(grid_index(j)); }
    double step() const { return (forward ? 1.0 : -1.0) * dt / static_cast<double>(substeps); }
};

// Riccati node solve in the chart g or h = 1/g.
NodeResult solve_node_charts(const NodeCoefficients& c, const RiccatiBoundary& boundary,
                             Eigen::Index node, const Sweep& sweep) {
    NodeResult out{Vector::Constant(idx(sweep.steps + 1), kNaN)};
    bool in_h = false;
    double value = 0.0;
    switch (boundary.kind) {
        case RiccatiBoundary::Kind::terminal_zero: value = 0.0; break;
        case RiccatiBoundary::Kind::initial_value:
            value = boundary.g0[node];
            if (std::abs(value) > 1.0) {
                in_h = true;
                value = 1.0 / value;
            }
            break;
        case RiccatiBoundary::Kind::initial_pole: in_h = true; value = 0.0; break;
    }
    auto current_g = [&]() { return in_h ? (value == 0.0 ? kInf : 1.0 / value) : value; };
    auto fg = [&c](double t, double g) { return c.m_at(t) - g * g / c.eta_at(t); };
    auto fh = [&c](double t, double h) { return 1.0 / c.eta_at(t) - c.m_at(t) * h * h; };

    out.g[idx(sweep.grid_index(0))] = current_g();
    const double tau = sweep.step();
    for (std::size_t j = 0; j < sweep.steps; ++j) {
        for (int s = 0; s < sweep.substeps; ++s) {
            const double t = sweep.start_time(j) + tau * s;
            if (!in_h) {
                double next = rk4_scalar(fg, t, value, tau);
                if ((!std::isfinite(next) || std::abs(next) > 1e3) && std::abs(value) > 1e-3) {
                    in_h = true;
                    value = 1.0 / value;
                } else {
                    value = next;
                    if (std::abs(value) > 1.0) {
                        in_h = true;
                        value = 1.0 / value;
                    }
                    continue;
                }
            }
            const double next = rk4_scalar(fh, t, value, tau);
            if (crossed(value, next)) {
                const double h0 = value;
                const double span = bisect_crossing(
                    [&](double len) { return rk4_scalar(fh, t, h0, std::copysign(len, tau)); }, h0,
                    std::abs(tau));
                out.blowup_time = t + std::copysign(span, tau);
                return out;
            }
            value = next;
            if (std::abs(value) > 1.0) {
                in_h = false;
                value = 1.0 / value;
            }
        }
        out.g[idx(sweep.grid_index(j + 1))] = current_g();
    }
    return out;
}

// Linear route on (u, w = eta u').
NodeResult solve_node_linear(const NodeCoefficients& c, const RiccatiBoundary& boundary,
                             Eigen::Index node, const Sweep& sweep) {
    NodeResult out{Vector::Constant(idx(sweep.steps + 1), kNaN)};
    Eigen::Vector2d y(1.0, 0.0);
    switch (boundary.kind) {
        case RiccatiBoundary::Kind::terminal_zero: break;
        case RiccatiBoundary::Kind::initial_value: y << 1.0, boundary.g0[node]; break;
        case RiccatiBoundary::Kind::initial_pole: y << 0.0, 1.0; break;
    }
    auto f = [&c](double t, const Eigen::Vector2d& s) {
        return Eigen::Vector2d(s[1] / c.eta_at(t), c.m_at(t) * s[0]);
    };
    auto step = [&f](double t, const Eigen::Vector2d& s, double h) {
        const Eigen::Vector2d k1 = f(t, s);
        const Eigen::Vector2d k2 = f(t + 0.5 * h, s + 0.5 * h * k1);
        const Eigen::Vector2d k3 = f(t + 0.5 * h, s + 0.5 * h * k2);
        const Eigen::Vector2d k4 = f(t + h, s + h * k3);
        return Eigen::Vector2d(s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    };
    auto ratio = [](const Eigen::Vector2d& s) { return s[0] == 0.0 ? kInf : s[1] / s[0]; };

    out.g[idx(sweep.grid_index(0))] = ratio(y);
    const double tau = sweep.step();
    for (std::size_t j = 0; j < sweep.steps; ++j) {
        for (int s = 0; s < sweep.substeps; ++s) {
            const double t = sweep.start_time(j) + tau * s;
            const Eigen::Vector2d next = step(t, y, tau);
            if (crossed(y[0], next[0])) {
                const Eigen::Vector2d y0 = y;
                const double span = bisect_crossing(
                    [&](double len) { return step(t, y0, std::copysign(len, tau))[0]; }, y0[0],
                    std::abs(tau));
                out.blowup_time = t + std::copysign(span, tau);
                return out;
            }
            y = next;
            const double scale = y.cwiseAbs().maxCoeff();
            if (scale > 1e100 || (scale < 1e-100 && scale > 0.0)) y /= scale;
        }
        out.g[idx(sweep.grid_index(j + 1))] = ratio(y);
    }
    return out;
}

template <class Solver>
RiccatiOutcome solve_all(const RiccatiProblem& problem, Solver&& solver) {
    problem.validate();
    const TimeGrid& times = problem.eta_path.times;
    const SpatialGrid& grid = problem.eta_path.grid;
    const Sweep sweep{problem.boundary.kind != RiccatiBoundary::Kind::terminal_zero, times.steps(),
                      problem.substeps, times.dt(), &times};
    RiccatiOutcome out;
    out.g = PathField(times, grid);
    out.blowup_time_per_x = Vector::Constant(idx(grid.size()), kNaN);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto ii = idx(i);
        const NodeCoefficients c{problem.eta_path.values.col(ii), problem.rhs.values.col(ii),
                                 times.dt()};
        const NodeResult r = solver(c, problem.boundary, ii, sweep);
        out.g.values.col(ii) = r.g;
        out.blowup_time_per_x[ii] = r.blowup_time;
        if (!std::isnan(r.blowup_time)) out.status = RiccatiStatus::blowup;
    }
    const auto boundary_row = idx(sweep.grid_index(0));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto ii = idx(i);
        const double g = out.g.values(boundary_row, ii);
        switch (problem.boundary.kind) {
            case RiccatiBoundary::Kind::terminal_zero:
                out.boundary_residual = std::max(out.boundary_residual, std::abs(g));
                break;
            case RiccatiBoundary::Kind::initial_value:
                out.boundary_residual =
                    std::max(out.boundary_residual, std::abs(g - problem.boundary.g0[ii]));
                break;
            case RiccatiBoundary::Kind::initial_pole:
                if (!std::isinf(g)) out.boundary_residual = kInf;
                break;
        }
        if (i + 1 < grid.size() && out.node_solved(ii) && out.node_solved(ii + 1)) {
            for (Eigen::Index k = 0; k < out.g.values.rows(); ++k) {
                const double jump = std::abs(out.g.values(k, ii + 1) - out.g.values(k, ii));
                if (std::isfinite(jump)) out.max_x_jump = std::max(out.max_x_jump, jump);
            }
        }
    }
    return out;
}

PathField weighted_cumulative(const PathField& field, const PathField& eta) {
    PathField out(field.times, field.grid);
    const double h = field.grid.h();
    for (Eigen::Index k = 0; k < field.values.rows(); ++k) {
        const Vector e = eta.values.row(k).transpose();
        const Vector inner = cumulative_trapezoid(e.cwiseProduct(field.values.row(k).transpose()), h);
        out.values.row(k) = e.cwiseProduct(inner).transpose();
    }
    return out;
}

double defect_pairing(const Defect& defect, const PathField& w) {
    if (std::holds_alternative<NoDefect>(defect)) return 0.0;
    if (const auto* atom = std::get_if<AtomicMeasurePath>(&defect)) return atomic_pairing(*atom, w);
    const auto& pair = std::get<GridMeasurePair>(defect);
    PathField prod(w.times, w.grid);
    prod.values = pair.rho_mu.values.cwiseProduct(w.values);
    return quadrature(prod);
}

}  // namespace

std::string to_string(RiccatiStatus s) { return s == RiccatiStatus::solved ? "solved" : "blowup"; }

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::certified_minimum: return "certified_minimum";
        case Verdict::not_minimum: return "not_minimum";
        default: return "inconclusive";
    }
}

void RiccatiProblem::validate() const {
    if (!(eta_path.grid == rhs.grid) || !(eta_path.times == rhs.times))
        throw DomainError("Riccati coefficients live on different grids");
    if (!(eta_path.values.minCoeff() > 0.0)) throw DomainError("eta must be strictly positive");
    if (!rhs.values.allFinite() || !eta_path.values.allFinite())
        throw DomainError("Riccati coefficients must be finite");
    if (substeps < 1) throw DomainError("substeps must be positive");
    if (boundary.kind == RiccatiBoundary::Kind::initial_value &&
        static_cast<std::size_t>(boundary.g0.size()) != eta_path.grid.size())
        throw DomainError("initial value has the wrong length");
}

RiccatiOutcome riccati_solve(const RiccatiProblem& problem) {
    return solve_all(problem, solve_node_charts);
}

RiccatiOutcome riccati_via_linear(const RiccatiProblem& problem) {
    return solve_all(problem, solve_node_linear);
}

SturmReport sturm_margin(const RiccatiProblem& small, const RiccatiProblem& big) {
    small.validate();
    big.validate();
    using Kind = RiccatiBoundary::Kind;
    if (small.boundary.kind == Kind::terminal_zero || big.boundary.kind == Kind::terminal_zero)
        throw DomainError("Sturm comparison needs forward (initial-value) problems");
    if (!(small.eta_path.grid == big.eta_path.grid) || !(small.eta_path.times == big.eta_path.times))
        throw DomainError("Sturm comparison needs problems on a common grid");
    if ((small.rhs.values - big.rhs.values).maxCoeff() > 0.0)
        throw DomainError("Sturm comparison needs m <= M pointwise");
    if ((small.eta_path.values - big.eta_path.values).maxCoeff() > 0.0)
        throw DomainError("Sturm comparison needs eta_small <= eta_big pointwise");
    if (small.boundary.kind == Kind::initial_pole && big.boundary.kind != Kind::initial_pole)
        throw DomainError("Sturm comparison needs g(0) <= f(0)");
    if (small.boundary.kind == Kind::initial_value && big.boundary.kind == Kind::initial_value &&
        (small.boundary.g0 - big.boundary.g0).maxCoeff() > 0.0)
        throw DomainError("Sturm comparison needs g(0) <= f(0)");

    SturmReport report;
    report.small = riccati_solve(small);
    report.big = riccati_solve(big);
    report.min_gap = kInf;
    report.window_contained = true;
    const auto n = report.small.g.values.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ts = report.small.blowup_time_per_x[i];
        const double tb = report.big.blowup_time_per_x[i];
        if (!std::isnan(tb) && (std::isnan(ts) || tb < ts - 1e-6)) report.window_contained = false;
        for (Eigen::Index k = 0; k < report.small.g.values.rows(); ++k) {
            const double g = report.small.g.values(k, i);
            const double f = report.big.g.values(k, i);
            if (std::isfinite(g) && std::isfinite(f)) report.min_gap = std::min(report.min_gap, f - g);
        }
    }
    report.ordering_holds = report.min_gap >= -1e-8;
    return report;
}

BoundCheck sufficient_bound_check(const PathField& eta_path, const PathField& rhs) {
    if (!(eta_path.values.minCoeff() > 0.0)) throw DomainError("eta must be strictly positive");
    const double negative_part = std::max(0.0, -rhs.values.minCoeff());
    BoundCheck out;
    out.ratio = negative_part / eta_path.values.minCoeff();
    out.ok = out.ratio < std::numbers::pi * std::numbers::pi;
    return out;
}

PathField compute_w(const PQTrajectory& traj, const Defect& defect) {
    PathField direction = covariant_accel_flat(traj);
    const double h = traj.q_path.grid.h();
    if (!std::holds_alternative<NoDefect>(defect)) {
        for (std::size_t k = 0; k < traj.times.samples(); ++k) {
            const QGeometry geo(traj.q_path.values.row(idx(k)).transpose(), h);
            direction.values.row(idx(k)) +=
                geo.project_cotangent(defect_U(defect, k, geo)).transpose();
        }
    }
    return weighted_cumulative(direction, eta_path(traj.q_path));
}

double atomic_pairing(const AtomicMeasurePath& mu, const PathField& w) {
    mu.validate(false);
    if (!(mu.f.times == w.times)) throw DomainError("candidate and w use different time grids");
    Vector integrand(w.values.rows());
    for (Eigen::Index k = 0; k < integrand.size(); ++k)
        integrand[k] = mu.f.values[k] * mu.f.values[k] *
                       sample_in_space(w.values.row(k).transpose(), w.grid.h(), mu.x0);
    return trapezoid(integrand, w.times.dt());
}

OptimalityReport necessary_condition_test(const PQTrajectory& traj, const Defect& defect,
                                          const std::vector<AtomicMeasurePath>& candidates,
                                          double tol) {
    OptimalityReport report;
    report.w = compute_w(traj, defect);
    const PathField eta = eta_path(traj.q_path);
    bool violated = false;
    for (const AtomicMeasurePath& mu : candidates) {
        mu.validate(true);
        const double fr = fr_atomic(mu, eta);
        const double pairing = -atomic_pairing(mu, report.w);
        report.candidate_fisher_rao.push_back(fr);
        report.candidate_pairing.push_back(pairing);
        report.necessary_margins.push_back(fr - pairing);
        if (fr - pairing < -tol) violated = true;
    }
    report.equality_gap = defect_fisher_rao(defect, traj) + defect_pairing(defect, report.w);
    report.verdict = violated ? Verdict::not_minimum : Verdict::inconclusive;
    return report;
}

OptimalityReport certify_sufficient(const PQTrajectory& traj, const Defect& defect, double tol) {
    OptimalityReport report;
    report.w = compute_w(traj, defect);
    const PathField eta = eta_path(traj.q_path);
    RiccatiProblem problem{eta, report.w, RiccatiBoundary::terminal_zero(), 1};
    report.sufficient_status = riccati_solve(problem);
    report.bound = sufficient_bound_check(eta, report.w);
    report.equality_gap = defect_fisher_rao(defect, traj) + defect_pairing(defect, report.w);
    const bool solved = report.sufficient_status->status == RiccatiStatus::solved &&
                        report.sufficient_status->boundary_residual <= 1e-8;
    report.verdict = solved && std::abs(report.equality_gap) <= tol ? Verdict::certified_minimum
                                                                    : Verdict::inconclusive;
    return report;
}

}  // namespace diffsplines

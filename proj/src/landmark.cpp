#include "diffsplines/landmark.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace diffsplines {

void LandmarkState::validate() const {
    if (q.size() != p.size()) throw DomainError("landmark positions and momenta differ in count");
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!std::isfinite(q[i]) || !std::isfinite(p[i]))
            throw DomainError("landmark state is not finite");
        if (!(q[i] > 0.0 && q[i] < 1.0))
            throw DomainError("landmark position " + std::to_string(q[i]) + " outside (0,1)");
        if (i > 0 && !(q[i] > q[i - 1]))
            throw DomainError("landmark positions must be strictly increasing");
    }
}

LandmarkDerivative landmark_rhs(const KernelModel& model, const LandmarkState& state,
                                double eps_sep) {
    const std::size_t n = state.size();
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(state.q[i] - state.q[i - 1]) < eps_sep)
            throw DegenerateConfiguration("landmarks " + std::to_string(i - 1) + " and " +
                                          std::to_string(i) + " collide");
    LandmarkDerivative d{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            d.qdot[i] += kernel_eval(model, state.q[i], state.q[j], 0) * state.p[j];
            d.pdot[i] -= state.p[i] * kernel_eval(model, state.q[i], state.q[j], 1) * state.p[j];
        }
    }
    return d;
}

double landmark_hamiltonian(const KernelModel& model, const LandmarkState& state) {
    double h = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i)
        for (std::size_t j = 0; j < state.size(); ++j)
            h += state.p[i] * kernel_eval(model, state.q[i], state.q[j], 0) * state.p[j];
    return 0.5 * h;
}

namespace {

// Landmark geodesic augmented with Lagrangian node fields. Layout of the state vector:
// [q (n), p (n), phi (N), eta (N if carried), q-field (N if carried), probe phi, probe eta].
class AugmentedFlow {
public:
    AugmentedFlow(const KernelModel& model, std::size_t landmarks, std::size_t nodes, bool eta,
                  bool qfield, bool probe, double eps_sep)
        : model_(model), n_(landmarks), nodes_(nodes), eta_(eta), qfield_(qfield), probe_(probe),
          eps_sep_(eps_sep) {}

    Eigen::Index size() const {
        return static_cast<Eigen::Index>(2 * n_ + nodes_ * (1 + (eta_ ? 1 : 0) + (qfield_ ? 1 : 0)) +
                                         (probe_ ? 2 : 0));
    }
    Eigen::Index phi_offset() const { return static_cast<Eigen::Index>(2 * n_); }
    Eigen::Index eta_offset() const { return phi_offset() + static_cast<Eigen::Index>(nodes_); }
    Eigen::Index qfield_offset() const {
        return eta_offset() + static_cast<Eigen::Index>(eta_ ? nodes_ : 0);
    }
    Eigen::Index probe_offset() const {
        return qfield_offset() + static_cast<Eigen::Index>(qfield_ ? nodes_ : 0);
    }

    LandmarkState landmarks(const Vector& y) const {
        LandmarkState s;
        s.q.assign(y.data(), y.data() + n_);
        s.p.assign(y.data() + n_, y.data() + 2 * n_);
        return s;
    }

    Vector initial(const LandmarkState& s0, const SpatialGrid* grid, double probe_x) const {
        Vector y = Vector::Zero(size());
        for (std::size_t i = 0; i < n_; ++i) {
            y[static_cast<Eigen::Index>(i)] = s0.q[i];
            y[static_cast<Eigen::Index>(n_ + i)] = s0.p[i];
        }
        if (grid) y.segment(phi_offset(), static_cast<Eigen::Index>(nodes_)) = grid->nodes();
        if (eta_) y.segment(eta_offset(), static_cast<Eigen::Index>(nodes_)).setOnes();
        if (probe_) {
            y[probe_offset()] = probe_x;
            y[probe_offset() + 1] = 1.0;
        }
        return y;
    }

    Vector operator()(double, const Vector& y) const {
        const LandmarkState s = landmarks(y);
        const LandmarkDerivative d = landmark_rhs(model_, s, eps_sep_);
        Vector out = Vector::Zero(y.size());
        for (std::size_t i = 0; i < n_; ++i) {
            out[static_cast<Eigen::Index>(i)] = d.qdot[i];
            out[static_cast<Eigen::Index>(n_ + i)] = d.pdot[i];
        }
        for (std::size_t i = 0; i < nodes_; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const double x = y[phi_offset() + ii];
            out[phi_offset() + ii] = velocity_field(model_, s, x, 0);
            if (!eta_ && !qfield_) continue;
            const double eta = y[eta_offset() + ii];
            if (eta_) out[eta_offset() + ii] = velocity_field(model_, s, x, 1) * eta;
            if (qfield_) out[qfield_offset() + ii] = velocity_field(model_, s, x, 2) * eta;
        }
        if (probe_) {
            const double x = y[probe_offset()];
            out[probe_offset()] = velocity_field(model_, s, x, 0);
            out[probe_offset() + 1] = velocity_field(model_, s, x, 1) * y[probe_offset() + 1];
        }
        return out;
    }

    Vector step(double t, const Vector& y, double dt) const {
        Vector next = ode_step([this](double tt, const Vector& yy) { return (*this)(tt, yy); }, t,
                               y, dt, OdeMethod::rk4);
        if (!next.allFinite())
            throw NonFiniteError("landmark flow produced non-finite values at t=" +
                                     std::to_string(t + dt),
                                 t + dt);
        try {
            landmarks(next).validate();
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " at t=" + std::to_string(t + dt));
        }
        return next;
    }

private:
    KernelModel model_;
    std::size_t n_;
    std::size_t nodes_;
    bool eta_;
    bool qfield_;
    bool probe_;
    double eps_sep_;
};

}  // namespace

LandmarkTrajectory integrate_landmarks(const KernelModel& model, const LandmarkState& state0,
                                       const TimeGrid& times, const LandmarkOptions& options) {
    state0.validate();
    const AugmentedFlow flow(model, state0.size(), 0, false, false, false, options.eps_sep);
    LandmarkTrajectory traj;
    traj.times = times;
    traj.hamiltonian0 = landmark_hamiltonian(model, state0);
    traj.states.reserve(times.samples());
    traj.states.push_back(state0);
    Vector y = flow.initial(state0, nullptr, 0.0);
    const double scale = std::max(std::abs(traj.hamiltonian0), 1e-300);
    for (std::size_t k = 0; k < times.steps(); ++k) {
        y = flow.step(times.time(k), y, times.dt());
        traj.states.push_back(flow.landmarks(y));
        const double drift =
            std::abs(landmark_hamiltonian(model, traj.states.back()) - traj.hamiltonian0) / scale;
        traj.max_relative_drift = std::max(traj.max_relative_drift, drift);
        if (traj.hamiltonian0 != 0.0 && drift > options.drift_tol)
            throw Error("relative Hamiltonian drift " + std::to_string(drift) + " exceeds tolerance at t=" +
                        std::to_string(times.time(k + 1)));
    }
    return traj;
}

FlowReconstruction reconstruct_flow(const KernelModel& model, const LandmarkTrajectory& traj,
                                    const SpatialGrid& grid, double probe) {
    if (traj.states.empty()) throw DomainError("empty landmark trajectory");
    if (!(probe >= 0.0 && probe <= 1.0)) throw DomainError("probe point outside [0,1]");
    const AugmentedFlow flow(model, traj.states.front().size(), grid.size(), false, false, true,
                             LandmarkOptions{}.eps_sep);
    FlowReconstruction out{PathField(traj.times, grid), probe,
                           TimeSeries{traj.times, Vector(traj.times.samples())}};
    Vector y = flow.initial(traj.states.front(), &grid, probe);
    const auto nodes = static_cast<Eigen::Index>(grid.size());
    auto record = [&](std::size_t k) {
        Vector phi = y.segment(flow.phi_offset(), nodes);
        for (Eigen::Index i = 1; i < nodes; ++i)
            if (!(phi[i] > phi[i - 1]))
                throw Error("flow lost monotonicity at t=" + std::to_string(traj.times.time(k)) +
                            "; discretization too coarse");
        out.phi.set_slice(k, phi);
        out.phix_probe.values[static_cast<Eigen::Index>(k)] = y[flow.probe_offset() + 1];
    };
    record(0);
    for (std::size_t k = 0; k < traj.times.steps(); ++k) {
        y = flow.step(traj.times.time(k), y, traj.times.dt());
        record(k + 1);
    }
    return out;
}

TimeSeries jacobian_along(const KernelModel& model, const LandmarkTrajectory& traj,
                          double x_star) {
    if (traj.states.empty()) throw DomainError("empty landmark trajectory");
    if (!(x_star >= 0.0 && x_star <= 1.0)) throw DomainError("probe point outside [0,1]");
    const AugmentedFlow flow(model, traj.states.front().size(), 0, false, false, true,
                             LandmarkOptions{}.eps_sep);
    TimeSeries out{traj.times, Vector(traj.times.samples())};
    Vector y = flow.initial(traj.states.front(), nullptr, x_star);
    out.values[0] = 1.0;
    for (std::size_t k = 0; k < traj.times.steps(); ++k) {
        y = flow.step(traj.times.time(k), y, traj.times.dt());
        out.values[static_cast<Eigen::Index>(k + 1)] = y[flow.probe_offset() + 1];
    }
    return out;
}

std::vector<LagrangianSample> sample_lagrangian(const KernelModel& model,
                                                const LandmarkState& state0,
                                                const std::vector<double>& instants,
                                                double max_step, const SpatialGrid& grid,
                                                double probe, const LandmarkOptions& options) {
    state0.validate();
    if (!(max_step > 0.0)) throw DomainError("max_step must be positive");
    const AugmentedFlow flow(model, state0.size(), grid.size(), true, true, true, options.eps_sep);
    const auto nodes = static_cast<Eigen::Index>(grid.size());
    std::vector<LagrangianSample> out;
    out.reserve(instants.size());
    Vector y = flow.initial(state0, &grid, probe);
    double s = 0.0;
    for (double target : instants) {
        if (!(target >= s)) throw DomainError("sample instants must be nondecreasing from 0");
        const double span = target - s;
        if (span > 0.0) {
            const auto sub = static_cast<std::size_t>(std::ceil(span / max_step - 1e-12));
            const double h = span / static_cast<double>(sub);
            for (std::size_t j = 0; j < sub; ++j) y = flow.step(s + h * static_cast<double>(j), y, h);
            s = target;
        }
        LagrangianSample sample;
        sample.s = s;
        sample.state = flow.landmarks(y);
        sample.phi = y.segment(flow.phi_offset(), nodes);
        sample.eta = y.segment(flow.eta_offset(), nodes);
        sample.q = y.segment(flow.qfield_offset(), nodes);
        sample.p.resize(nodes);
        for (Eigen::Index i = 0; i < nodes; ++i)
            sample.p[i] = velocity_field(model, sample.state, sample.phi[i], 2);
        sample.probe_eta = y[flow.probe_offset() + 1];
        sample.probe_eta_rate =
            velocity_field(model, sample.state, y[flow.probe_offset()], 1) * sample.probe_eta;
        out.push_back(std::move(sample));
    }
    return out;
}

}  // namespace diffsplines

#include "diffsplines/experiment.hpp"

#include "diffsplines/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <numbers>
#include <sstream>
#include <thread>

namespace diffsplines {

namespace {

constexpr double kPi = std::numbers::pi;

double parse_number(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty())
        throw DomainError("config key '" + key + "' expects a number, got '" + value + "'");
    return v;
}

std::string join(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_double(xs[i]);
    return out;
}

std::size_t steps_for(double dt, double horizon) {
    const double m = std::round(horizon / dt);
    if (!(m >= 1.0)) throw DomainError("time step too large for the horizon");
    return static_cast<std::size_t>(m);
}

LandmarkState initial_state(const ExperimentConfig& config) {
    LandmarkState s;
    s.q = config.positions;
    s.p.resize(config.positions.size());
    for (std::size_t i = 0; i < s.p.size(); ++i) s.p[i] = (i % 2 == 0 ? 1.0 : -1.0) * config.lambda;
    return s;
}

}  // namespace

Reparametrization Reparametrization::parse(const std::string& text) {
    if (text == "cubic") return {Kind::cubic, 0.0};
    if (text == "identity") return {Kind::identity, 0.0};
    if (text.rfind("exp:A=", 0) == 0) {
        const double a = parse_number("reparam", text.substr(6));
        if (!(a > 0.0)) throw DomainError("exponential reparametrization needs A > 0");
        return {Kind::exp, a};
    }
    throw DomainError("unknown reparametrization '" + text + "' (cubic, identity, exp:A=<value>)");
}

std::string Reparametrization::label() const {
    switch (kind) {
        case Kind::identity: return "identity";
        case Kind::cubic: return "cubic";
        default: return "exp:A=" + format_double(A);
    }
}

// exp: alpha = t on [0,1/4], then 1/4 + e^{At} - e^{A/4}.
double Reparametrization::value(double t) const {
    switch (kind) {
        case Kind::identity: return t;
        case Kind::cubic: return 2.0 * t * t * t;
        default: return t <= 0.25 ? t : 0.25 + std::exp(A * t) - std::exp(A / 4.0);
    }
}

double Reparametrization::first(double t) const {
    switch (kind) {
        case Kind::identity: return 1.0;
        case Kind::cubic: return 6.0 * t * t;
        default: return t <= 0.25 ? 1.0 : A * std::exp(A * t);
    }
}

double Reparametrization::second(double t) const {
    switch (kind) {
        case Kind::identity: return 0.0;
        case Kind::cubic: return 12.0 * t;
        default: return t <= 0.25 ? 0.0 : A * A * std::exp(A * t);
    }
}

std::vector<Reparametrization::Kink> Reparametrization::kinks() const {
    if (kind != Kind::exp) return {};
    return {{0.25, A * std::exp(A / 4.0) - 1.0}};
}

void ExperimentConfig::apply(const std::string& key, const std::string& value) {
    if (key == "lambda") lambda = parse_number(key, value);
    else if (key == "positions") positions = parse_double_list(value);
    else if (key == "reparam") reparam = Reparametrization::parse(value);
    else if (key == "probe" || key == "x0") probe = parse_number(key, value);
    else if (key == "profile") profile = value;
    else if (key == "nx") nx = static_cast<std::size_t>(parse_number(key, value));
    else if (key == "dt") dt_geodesic = dt_functional = parse_number(key, value);
    else if (key == "dt_geodesic") dt_geodesic = parse_number(key, value);
    else if (key == "dt_functional") dt_functional = parse_number(key, value);
    else if (key == "kernel") kernel = parse_kernel_variant(value);
    else if (key == "symmetry_checks") symmetry_checks = value == "true" || value == "1";
    else throw DomainError("unknown config key '" + key + "'");
}

ExperimentConfig ExperimentConfig::from_key_values(const std::map<std::string, std::string>& kv) {
    ExperimentConfig c;
    for (const auto& [k, v] : kv) c.apply(k, v);
    return c;
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
    return {{"lambda", format_double(lambda)},
            {"positions", join(positions)},
            {"reparam", reparam.label()},
            {"probe", format_double(probe)},
            {"profile", profile},
            {"nx", std::to_string(nx)},
            {"dt_geodesic", format_double(dt_geodesic)},
            {"dt_functional", format_double(dt_functional)},
            {"kernel", to_string(kernel)},
            {"symmetry_checks", symmetry_checks ? "true" : "false"}};
}

void ExperimentConfig::validate() const {
    if (!(lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
    if (positions.empty()) throw DomainError("at least one landmark is required");
    if (!(probe >= 0.0 && probe <= 1.0)) throw DomainError("probe must lie in [0,1]");
    if (nx < 5) throw DomainError("nx must be at least 5");
    if (!(dt_geodesic > 0.0) || !(dt_functional > 0.0)) throw DomainError("time steps must be positive");
    defect_profile(profile, 0.0);
    for (double t : {0.25, 0.5, 0.75, 1.0})
        if (!(reparam.first(t) > 0.0)) throw DomainError("reparametrization must be increasing");
    if (symmetry_checks && positions.size() == 2 &&
        std::abs(positions[0] + positions[1] - 1.0) > 1e-12)
        throw DomainError("symmetry checks need positions symmetric about 1/2");
}

double defect_profile(const std::string& name, double t) {
    if (name == "sin2") return std::sin(2.0 * kPi * t);
    if (name == "sin1") return std::sin(kPi * t);
    throw DomainError("unknown defect profile '" + name + "' (sin1, sin2)");
}

AtomicMeasurePath defect_atom(const ExperimentConfig& config, const TimeGrid& times, double scale) {
    AtomicMeasurePath mu{config.probe, TimeSeries{times, Vector(times.samples())}};
    for (std::size_t k = 0; k < times.samples(); ++k)
        mu.f.values[static_cast<Eigen::Index>(k)] =
            std::sqrt(scale) * defect_profile(config.profile, times.time(k));
    mu.f.values[0] = 0.0;
    return mu;
}

ReparametrizedGeodesic build_reparametrized_geodesic(const ExperimentConfig& config) {
    config.validate();
    const KernelModel model{config.kernel};
    const TimeGrid times(steps_for(config.dt_functional, 1.0), 1.0);
    const SpatialGrid grid(config.nx);

    std::vector<double> instants(times.samples());
    for (std::size_t k = 0; k < times.samples(); ++k) instants[k] = config.reparam.value(times.time(k));
    if (!std::isfinite(instants.back())) throw DomainError("reparametrization horizon is not finite");

    const LandmarkState s0 = initial_state(config);
    const auto samples =
        sample_lagrangian(model, s0, instants, config.dt_geodesic, grid, config.probe);

    ReparametrizedGeodesic out;
    out.hamiltonian = landmark_hamiltonian(model, s0);
    out.traj = PQTrajectory{times, PathField(times, grid), PathField(times, grid), {}};
    out.alpha = TimeSeries{times, Vector(times.samples())};
    out.eta_probe = TimeSeries{times, Vector(times.samples())};
    out.eta_rate_geo = TimeSeries{times, Vector(times.samples())};
    for (std::size_t k = 0; k < times.samples(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const LagrangianSample& s = samples[k];
        if (config.symmetry_checks && config.positions.size() == 2 &&
            std::abs(sample_in_space(s.phi, grid.h(), 0.5) - 0.5) > 1e-6)
            throw Error("symmetric geodesic lost its fixed point at s=" + format_double(s.s));
        out.traj.q_path.set_slice(k, s.q);
        out.traj.p_path.set_slice(k, config.reparam.first(times.time(k)) * s.p);
        out.alpha.values[kk] = s.s;
        out.eta_probe.values[kk] = s.probe_eta;
        out.eta_rate_geo.values[kk] = s.probe_eta_rate;
    }
    return out;
}

double compute_pairing(const ExperimentConfig& config, const ReparametrizedGeodesic& geo) {
    const TimeGrid& times = geo.alpha.times;
    for (Eigen::Index k = 1; k < geo.alpha.values.size(); ++k)
        if (geo.alpha.values[k] < geo.alpha.values[k - 1])
            throw DomainError("reparametrization is not monotone");
    Vector integrand(times.samples());
    for (std::size_t k = 0; k < times.samples(); ++k) {
        const double t = times.time(k);
        const double f = defect_profile(config.profile, t);
        integrand[static_cast<Eigen::Index>(k)] =
            f * f * config.reparam.second(t) * geo.eta_rate_geo.values[static_cast<Eigen::Index>(k)];
    }
    double pairing = -trapezoid(integrand, times.dt());
    for (const auto& kink : config.reparam.kinks()) {
        const double f = defect_profile(config.profile, kink.t);
        pairing -= f * f * kink.jump * sample_series(geo.eta_rate_geo.values, times.dt(), kink.t);
    }
    return pairing;
}

ExperimentRow run_counterexample_variant(const ExperimentConfig& config,
                                   const std::optional<std::filesystem::path>& out_dir) {
    ExperimentRow row;
    row.kernel = config.kernel;
    try {
        const ReparametrizedGeodesic geo = build_reparametrized_geodesic(config);
        const AtomicMeasurePath mu = defect_atom(config, geo.traj.times);
        row.fr = fr_atomic(mu, geo.eta_probe);
        row.pairing = compute_pairing(config, geo);
        row.inequality_holds = row.fr < row.pairing;

        const OptimalityReport necessary = necessary_condition_test(geo.traj, NoDefect{}, {mu});
        row.pairing_via_w = necessary.candidate_pairing.front();
        row.necessary_margin = necessary.necessary_margins.front();
        const OptimalityReport sufficient = certify_sufficient(geo.traj, NoDefect{});
        row.sufficient_status = to_string(sufficient.sufficient_status->status);
        row.bound_ratio = sufficient.bound->ratio;
        if (necessary.verdict == Verdict::not_minimum) row.verdict = Verdict::not_minimum;
        else if (sufficient.verdict == Verdict::certified_minimum) row.verdict = Verdict::certified_minimum;
        else row.verdict = Verdict::inconclusive;

        if (out_dir) {
            const std::string prefix = to_string(config.kernel) + "_";
            const auto& dir = *out_dir;
            auto add = [&](const std::string& name) {
                row.artifacts.push_back((dir / (prefix + name)).string());
                return dir / (prefix + name);
            };
            write_series_csv(add("reparametrization.csv"), geo.alpha);
            write_series_csv(add("eta_probe.csv"), geo.eta_probe);
            const std::size_t t_stride = std::max<std::size_t>(1, geo.traj.times.steps() / 200);
            const std::size_t x_stride = std::max<std::size_t>(1, (config.nx - 1) / 64);
            write_path_csv(add("riccati_rhs.csv"), sufficient.w, t_stride, x_stride);

            // Base geodesic over a long horizon for the snapshot and Jacobian-decay figures.
            const double horizon = 16.0;
            const KernelModel model{config.kernel};
            LandmarkState s0;
            s0.q = config.positions;
            for (std::size_t i = 0; i < s0.q.size(); ++i)
                s0.p.push_back((i % 2 == 0 ? 1.0 : -1.0) * config.lambda);
            const TimeGrid long_times(steps_for(config.dt_geodesic, horizon), horizon);
            const LandmarkTrajectory base = integrate_landmarks(model, s0, long_times);
            const FlowReconstruction flow = reconstruct_flow(model, base, SpatialGrid(129), config.probe);
            write_series_csv(add("jacobian.csv"), flow.phix_probe,
                             std::max<std::size_t>(1, long_times.steps() / 1600));
            write_path_csv(add("diffeomorphism.csv"), flow.phi,
                           std::max<std::size_t>(1, long_times.steps() / 8));
        }
        row.completed = true;
    } catch (const std::exception& e) {
        row.completed = false;
        row.error = e.what();
    }
    return row;
}

unsigned sweep_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("DIFFSPLINES_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) n = static_cast<unsigned>(v);
    }
    return n;
}

ExperimentReport run_counterexample(const ExperimentConfig& config,
                              const std::vector<KernelVariant>& variants,
                              const std::optional<std::filesystem::path>& out_dir) {
    ExperimentReport report{config, {}};
    std::vector<ExperimentConfig> configs;
    for (KernelVariant v : variants) {
        ExperimentConfig c = config;
        c.kernel = v;
        configs.push_back(c);
    }
    const unsigned workers = sweep_threads();
    report.rows.resize(configs.size());
    for (std::size_t start = 0; start < configs.size(); start += workers) {
        const std::size_t end = std::min(configs.size(), start + workers);
        std::vector<std::future<ExperimentRow>> pending;
        for (std::size_t i = start + 1; i < end; ++i)
            pending.push_back(std::async(std::launch::async, run_counterexample_variant, configs[i], out_dir));
        report.rows[start] = run_counterexample_variant(configs[start], out_dir);
        for (std::size_t i = start + 1; i < end; ++i) report.rows[i] = pending[i - start - 1].get();
    }
    return report;
}

}  // namespace diffsplines

#pragma once

#include "diffsplines/geodesic_pq.hpp"
#include "diffsplines/kernel.hpp"
#include "diffsplines/landmark.hpp"
#include "diffsplines/riccati.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace diffsplines {

/// Time change alpha of [0,1] onto [0, alpha(1)].
struct Reparametrization {
    enum class Kind { identity, cubic, exp };
    Kind kind = Kind::cubic;
    double A = 0.0;

    static Reparametrization parse(const std::string& text);
    std::string label() const;

    double value(double t) const;
    double first(double t) const;
    double second(double t) const;
    double horizon() const { return value(1.0); }

    struct Kink {
        double t;
        double jump;  ///< jump of alpha' across t
    };
    /// Points where alpha' jumps; their contribution to int f^2 alpha'' is a point mass.
    std::vector<Kink> kinks() const;
};

struct ExperimentConfig {
    double lambda = 15.0;
    std::vector<double> positions{0.25, 0.75};
    Reparametrization reparam;
    double probe = 0.5;
    std::string profile = "sin2";
    std::size_t nx = 513;
    double dt_geodesic = 1e-3;
    double dt_functional = 1e-3;
    KernelVariant kernel = KernelVariant::clamped;
    bool symmetry_checks = true;

    /// Keys: lambda, positions, reparam, probe, profile, nx, dt, dt_geodesic, dt_functional,
    /// kernel, symmetry_checks.
    void apply(const std::string& key, const std::string& value);
    static ExperimentConfig from_key_values(const std::map<std::string, std::string>& kv);
    std::map<std::string, std::string> echo() const;
    void validate() const;
};

/// Defect profile f(t) by name: sin2 -> sin(2 pi t), sin1 -> sin(pi t).
double defect_profile(const std::string& name, double t);

struct ReparametrizedGeodesic {
    PQTrajectory traj;
    TimeSeries alpha;
    TimeSeries eta_probe;       ///< eta(t, x0) = eta_geo(alpha(t), x0)
    TimeSeries eta_rate_geo;    ///< d/ds eta_geo(s, x0) at s = alpha(t)
    double hamiltonian = 0.0;
};

ReparametrizedGeodesic build_reparametrized_geodesic(const ExperimentConfig& config);

/// -int f^2 alpha'' d/ds eta_geo(alpha(t), x0) dt, plus point masses at kinks of alpha'.
double compute_pairing(const ExperimentConfig& config, const ReparametrizedGeodesic& geo);

AtomicMeasurePath defect_atom(const ExperimentConfig& config, const TimeGrid& times,
                              double scale = 1.0);

struct ExperimentRow {
    KernelVariant kernel = KernelVariant::clamped;
    bool completed = false;
    std::string error;
    double fr = 0.0;
    double pairing = 0.0;
    double pairing_via_w = 0.0;
    bool inequality_holds = false;
    Verdict verdict = Verdict::inconclusive;
    double necessary_margin = 0.0;
    std::string sufficient_status;
    double bound_ratio = 0.0;
    std::vector<std::string> artifacts;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ExperimentRow> rows;
};

/// Runs the counterexample for each kernel variant; writes figure CSVs when `out_dir` is set.
/// Variants run concurrently up to DIFFSPLINES_THREADS workers.
ExperimentReport run_counterexample(const ExperimentConfig& config,
                              const std::vector<KernelVariant>& variants,
                              const std::optional<std::filesystem::path>& out_dir = std::nullopt);

ExperimentRow run_counterexample_variant(const ExperimentConfig& config,
                                   const std::optional<std::filesystem::path>& out_dir);

/// Worker budget from DIFFSPLINES_THREADS (defaults to hardware concurrency, at least 1).
unsigned sweep_threads();

}  // namespace diffsplines

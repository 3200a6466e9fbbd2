// Command-line front end: one subcommand per library stage, CSV for fields, JSON for reports.
#include "diffsplines/experiment.hpp"
#include "diffsplines/fisher_rao.hpp"
#include "diffsplines/functional.hpp"
#include "diffsplines/geodesic_pq.hpp"
#include "diffsplines/io.hpp"
#include "diffsplines/kernel.hpp"
#include "diffsplines/landmark.hpp"
#include "diffsplines/riccati.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace diffsplines;

namespace {

json number(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

json numbers(const std::vector<double>& vs) {
    json out = json::array();
    for (double v : vs) out.push_back(number(v));
    return out;
}

void emit(const json& j, const std::string& out) {
    const std::string text = j.dump(2);
    if (out.empty() || out == "-") {
        std::cout << text << "\n";
        return;
    }
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    std::ofstream f(out);
    if (!f) throw Error("cannot write " + out);
    f << text << "\n";
}

std::size_t auto_stride(std::size_t count, std::size_t target) {
    return std::max<std::size_t>(1, count / target);
}

std::size_t steps_for(double t_final, double dt) {
    if (!(t_final > 0.0) || !(dt > 0.0)) throw DomainError("t-final and dt must be positive");
    return static_cast<std::size_t>(std::llround(t_final / dt));
}

// "0.25,0.75:15,-15"
LandmarkState parse_landmarks(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw DomainError("expected positions:momenta, got '" + text + "'");
    LandmarkState s{parse_double_list(text.substr(0, colon)), parse_double_list(text.substr(colon + 1))};
    s.validate();
    return s;
}

std::map<std::string, std::string> parse_options(const std::string& text) {
    std::map<std::string, std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw DomainError("expected key=value in '" + text + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

// "none" or "atomic:x0=0.5,profile=sin2[,scale=1]"
Defect parse_defect(const std::string& text, const TimeGrid& times) {
    if (text.empty() || text == "none") return NoDefect{};
    if (text.rfind("atomic:", 0) != 0) throw DomainError("unknown defect '" + text + "'");
    auto opts = parse_options(text.substr(7));
    const double x0 = opts.count("x0") ? std::stod(opts["x0"]) : 0.5;
    const double scale = opts.count("scale") ? std::stod(opts["scale"]) : 1.0;
    const std::string profile = opts.count("profile") ? opts["profile"] : "sin2";
    AtomicMeasurePath mu{x0, TimeSeries{times, Vector(times.samples())}};
    for (std::size_t k = 0; k < times.samples(); ++k)
        mu.f.values[static_cast<Eigen::Index>(k)] = std::sqrt(scale) * defect_profile(profile, times.time(k));
    mu.validate(true);
    return mu;
}

PQTrajectory read_trajectory(const fs::path& dir) {
    PQTrajectory traj{TimeGrid(1, 1.0), read_path_csv(dir / "q_path.csv"), read_path_csv(dir / "p_path.csv"), {}};
    if (!(traj.q_path.times == traj.p_path.times) || !(traj.q_path.grid == traj.p_path.grid))
        throw DomainError("q_path.csv and p_path.csv use different grids");
    traj.times = traj.q_path.times;
    return traj;
}

PathField read_field_or_constant(const std::string& source, const PathField& like) {
    if (source.rfind("const:", 0) == 0) return PathField(like.times, like.grid, std::stod(source.substr(6)));
    return read_path_csv(source);
}

json report_json(const OptimalityReport& r) {
    json j{{"verdict", to_string(r.verdict)},
           {"necessary_margins", numbers(r.necessary_margins)},
           {"candidate_fisher_rao", numbers(r.candidate_fisher_rao)},
           {"candidate_pairing", numbers(r.candidate_pairing)},
           {"equality_gap", number(r.equality_gap)}};
    if (r.sufficient_status) {
        const auto& s = *r.sufficient_status;
        j["sufficient_status"] = to_string(s.status);
        j["boundary_residual"] = number(s.boundary_residual);
        std::vector<double> times;
        for (Eigen::Index i = 0; i < s.blowup_time_per_x.size(); ++i)
            if (!s.node_solved(i)) times.push_back(s.blowup_time_per_x[i]);
        j["blowup_times"] = numbers(times);
    }
    if (r.bound) j["bound"] = {{"ratio", number(r.bound->ratio)}, {"ok", r.bound->ok}};
    return j;
}

std::map<std::string, std::string> read_config_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot read " + file.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geodesics, acceleration functionals and optimality tests on Diff([0,1])"};
    app.require_subcommand(1);

    // kernel
    auto* kernel = app.add_subcommand("kernel", "Evaluate the reproducing kernel and its s-derivatives");
    double ks = 0.5, kt = 0.5;
    std::string kvariant = "clamped";
    kernel->add_option("--s", ks)->required();
    kernel->add_option("--t", kt)->required();
    kernel->add_option("--variant", kvariant)->check(CLI::IsMember({"clamped", "affine"}));
    kernel->callback([&] {
        const KernelModel m{parse_kernel_variant(kvariant)};
        emit({{"variant", to_string(m.variant)},
              {"value", kernel_eval(m, ks, kt, 0)},
              {"ds", kernel_eval(m, ks, kt, 1)},
              {"ds2", kernel_eval(m, ks, kt, 2)}},
             "-");
    });

    // geodesic-landmark
    auto* gl = app.add_subcommand("geodesic-landmark", "Shoot a landmark geodesic and reconstruct its flow");
    std::string gl_pos = "0.25,0.75", gl_mom = "15,-15", gl_out, gl_variant = "clamped";
    double gl_tf = 16.0, gl_dt = 1e-3;
    std::size_t gl_nx = 513, gl_rows = 400;
    gl->add_option("--positions", gl_pos);
    gl->add_option("--momenta", gl_mom);
    gl->add_option("--t-final", gl_tf);
    gl->add_option("--dt", gl_dt);
    gl->add_option("--nx", gl_nx);
    gl->add_option("--variant", gl_variant)->check(CLI::IsMember({"clamped", "affine"}));
    gl->add_option("--rows", gl_rows, "time rows kept in flow.csv");
    gl->add_option("--out", gl_out)->required();
    gl->callback([&] {
        const KernelModel m{parse_kernel_variant(gl_variant)};
        LandmarkState s0{parse_double_list(gl_pos), parse_double_list(gl_mom)};
        const TimeGrid times(steps_for(gl_tf, gl_dt), gl_tf);
        auto traj = integrate_landmarks(m, s0, times);
        const fs::path dir(gl_out);
        fs::create_directories(dir);

        std::vector<std::string> header{"t"};
        for (std::size_t j = 0; j < s0.size(); ++j) header.push_back("q" + std::to_string(j + 1));
        for (std::size_t j = 0; j < s0.size(); ++j) header.push_back("p" + std::to_string(j + 1));
        header.push_back("H");
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < times.samples(); ++k) {
            const auto& s = traj.states[k];
            std::vector<double> row{times.time(k)};
            row.insert(row.end(), s.q.begin(), s.q.end());
            row.insert(row.end(), s.p.begin(), s.p.end());
            row.push_back(landmark_hamiltonian(m, s));
            rows.push_back(std::move(row));
        }
        write_table_csv(dir / "trajectory.csv", header, rows);
        auto flow = reconstruct_flow(m, traj, SpatialGrid(gl_nx));
        write_path_csv(dir / "flow.csv", flow.phi, auto_stride(times.steps(), gl_rows), auto_stride(gl_nx - 1, 128));
        write_series_csv(dir / "jacobian.csv", flow.phix_probe);
        emit({{"hamiltonian", traj.hamiltonian0}, {"max_relative_drift", traj.max_relative_drift}}, "-");
    });

    // geodesic-pq
    auto* gp = app.add_subcommand("geodesic-pq", "Integrate the geodesic system in (p,q) coordinates");
    std::string gp_init = "0.25,0.75:15,-15", gp_out, gp_reproj = "auto";
    double gp_tf = 2.0, gp_dt = 1e-3;
    std::size_t gp_nx = 513;
    gp->add_option("--init-from-landmarks", gp_init, "positions:momenta");
    gp->add_option("--t-final", gp_tf);
    gp->add_option("--dt", gp_dt);
    gp->add_option("--nx", gp_nx);
    gp->add_option("--reprojection", gp_reproj)->check(CLI::IsMember({"auto", "on", "off"}));
    gp->add_option("--out", gp_out)->required();
    gp->callback([&] {
        const SpatialGrid grid(gp_nx);
        const LandmarkState s0 = parse_landmarks(gp_init);
        const KernelModel m;
        auto p0 = ScalarField::from_function(grid, [&](double x) { return velocity_field(m, s0, x, 2); });
        GeodesicOptions opts;
        opts.reprojection = gp_reproj == "on" ? Reprojection::on
                            : gp_reproj == "off" ? Reprojection::off
                                                 : Reprojection::automatic;
        auto traj = integrate_geodesic(p0, QState{ScalarField(grid)}, TimeGrid(steps_for(gp_tf, gp_dt), gp_tf), opts);
        const fs::path dir(gp_out);
        fs::create_directories(dir);
        write_path_csv(dir / "q_path.csv", traj.q_path);
        write_path_csv(dir / "p_path.csv", traj.p_path);
        std::vector<std::vector<double>> rows;
        for (const auto& c : traj.constraints) rows.push_back({c.t, c.r1, c.r2, c.p_one, c.p_phi});
        write_table_csv(dir / "constraints.csv", {"t", "r1", "r2", "p_one", "p_phi"}, rows);
        double worst = 0.0;
        for (const auto& c : traj.constraints) worst = std::max({worst, std::abs(c.r1), std::abs(c.r2)});
        emit({{"steps", traj.times.steps()}, {"max_constraint_residual", worst}}, "-");
    });

    // acceleration
    auto* acc = app.add_subcommand("acceleration", "Acceleration functionals of a stored (p,q) path");
    std::string acc_traj, acc_defect = "none", acc_out = "-";
    double acc_penalty = 0.0;
    acc->add_option("--traj", acc_traj, "directory with q_path.csv and p_path.csv")->required();
    acc->add_option("--defect", acc_defect, "none | atomic:x0=0.5,profile=sin2[,scale=1]");
    acc->add_option("--penalty", acc_penalty);
    acc->add_option("--out", acc_out);
    acc->callback([&] {
        auto traj = read_trajectory(acc_traj);
        auto terms = relaxed_F_terms(traj, parse_defect(acc_defect, traj.times), acc_penalty);
        emit({{"J0", terms.J0},
              {"FR", number(terms.fisher_rao)},
              {"cross_term", terms.cross_term()},
              {"F", number(terms.F)},
              {"penalty", terms.penalty}},
             acc_out);
    });

    // fisher-rao
    auto* fr = app.add_subcommand("fisher-rao", "Fisher-Rao functional and inequality margins of gridded densities");
    std::string fr_mu, fr_nu, fr_weight = "const:1", fr_out = "-";
    fr->add_option("--mu", fr_mu)->required();
    fr->add_option("--nu", fr_nu)->required();
    fr->add_option("--weight", fr_weight, "CSV file or const:<value>");
    fr->add_option("--out", fr_out);
    fr->callback([&] {
        const GridMeasurePair pair{read_path_csv(fr_mu), read_path_csv(fr_nu)};
        const PathField weight = read_field_or_constant(fr_weight, pair.rho_mu);
        const double value = fr_grid(pair, weight);
        auto ineq = check_inequality_condition(pair, default_test_family());
        emit({{"value", number(value)},
              {"finite", std::isfinite(value)},
              {"margins", numbers(ineq.margins)},
              {"worst_margin", ineq.worst_margin}},
             fr_out);
    });

    // oscillate
    auto* osc = app.add_subcommand("oscillate", "Oscillating sequence whose weak limits are (mu, nu)");
    std::string osc_mu, osc_nu, osc_out;
    int osc_n = 64;
    osc->add_option("--mu", osc_mu)->required();
    osc->add_option("--nu", osc_nu)->required();
    osc->add_option("--n", osc_n)->check(CLI::PositiveNumber);
    osc->add_option("--out", osc_out)->required();
    osc->callback([&] {
        write_path_csv(osc_out, synthesize_oscillations(read_path_csv(osc_mu), read_path_csv(osc_nu), osc_n));
    });

    // riccati
    auto* ric = app.add_subcommand("riccati", "First-order optimality tests on a stored (p,q) path");
    std::string ric_traj, ric_defect = "none", ric_mode = "both", ric_out = "-";
    std::vector<std::string> ric_candidates{"atomic:x0=0.5,profile=sin2"};
    ric->add_option("--from-traj", ric_traj)->required();
    ric->add_option("--defect", ric_defect);
    ric->add_option("--candidate", ric_candidates, "atomic candidate measures for the necessary test");
    ric->add_option("--mode", ric_mode)->check(CLI::IsMember({"necessary", "sufficient", "both"}));
    ric->add_option("--out", ric_out);
    ric->callback([&] {
        auto traj = read_trajectory(ric_traj);
        const Defect defect = parse_defect(ric_defect, traj.times);
        json j;
        Verdict verdict = Verdict::inconclusive;
        if (ric_mode != "sufficient") {
            std::vector<AtomicMeasurePath> candidates;
            for (const auto& c : ric_candidates)
                candidates.push_back(std::get<AtomicMeasurePath>(parse_defect(c, traj.times)));
            auto r = necessary_condition_test(traj, defect, candidates);
            j["necessary"] = report_json(r);
            verdict = r.verdict;
        }
        if (ric_mode != "necessary") {
            auto r = certify_sufficient(traj, defect);
            j["sufficient"] = report_json(r);
            if (verdict != Verdict::not_minimum) verdict = r.verdict;
        }
        j["verdict"] = to_string(verdict);
        emit(j, ric_out);
    });

    // experiment counterexample
    auto* exp = app.add_subcommand("experiment", "End-to-end experiments");
    exp->require_subcommand(1);
    auto* cx = exp->add_subcommand("counterexample", "Reparametrized symmetric geodesic against an atomic defect");
    std::string cx_config, cx_out = "out", cx_kernel;
    std::map<std::string, std::string> overrides;
    std::optional<double> cx_lambda, cx_dt;
    std::optional<std::size_t> cx_nx;
    std::string cx_reparam;
    cx->add_option("--config", cx_config, "key=value file");
    cx->add_option("--lambda", cx_lambda);
    cx->add_option("--reparam", cx_reparam, "cubic | identity | exp:A=<value>");
    cx->add_option("--kernel", cx_kernel)->check(CLI::IsMember({"clamped", "affine", "both"}));
    cx->add_option("--nx", cx_nx);
    cx->add_option("--dt", cx_dt);
    cx->add_option("--out", cx_out);
    cx->callback([&] {
        auto kv = cx_config.empty() ? std::map<std::string, std::string>{} : read_config_file(cx_config);
        if (cx_lambda) kv["lambda"] = format_double(*cx_lambda);
        if (!cx_reparam.empty()) kv["reparam"] = cx_reparam;
        if (cx_nx) kv["nx"] = std::to_string(*cx_nx);
        if (cx_dt) kv["dt"] = format_double(*cx_dt);
        std::vector<KernelVariant> variants;
        const std::string choice = !cx_kernel.empty() ? cx_kernel : kv.count("kernel") ? kv["kernel"] : "clamped";
        kv.erase("kernel");
        if (choice == "both") variants = {KernelVariant::clamped, KernelVariant::affine};
        else variants = {parse_kernel_variant(choice)};
        const auto config = ExperimentConfig::from_key_values(kv);
        config.validate();

        const fs::path dir(cx_out);
        fs::create_directories(dir);
        auto report = run_counterexample(config, variants, dir);
        json rows = json::array();
        bool any = false;
        for (const auto& r : report.rows) {
            any = any || r.completed;
            json row{{"kernel_variant", to_string(r.kernel)}, {"completed", r.completed}};
            if (r.completed) {
                row.update({{"fr", r.fr},
                            {"pairing", r.pairing},
                            {"pairing_via_w", r.pairing_via_w},
                            {"inequality_holds", r.inequality_holds},
                            {"verdict", to_string(r.verdict)},
                            {"necessary_margin", r.necessary_margin},
                            {"sufficient_status", r.sufficient_status},
                            {"bound_ratio", r.bound_ratio},
                            {"artifacts", r.artifacts}});
            } else {
                row["error"] = r.error;
            }
            rows.push_back(row);
        }
        json echo(config.echo());
        echo["kernel"] = choice == "both" ? "both" : to_string(variants.front());
        json out{{"config_echo", echo}, {"rows", rows}};
        const json& first = rows.front();
        for (const char* key : {"fr", "pairing", "verdict", "kernel_variant"})
            if (first.contains(key)) out[key] = first[key];
        emit(out, (dir / "report.json").string());
        std::cout << out.dump(2) << "\n";
        if (!any) throw Error("no kernel variant completed");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

// placecrb: Cramér-Rao bounds and optimal sensor placement for 2-D source
// localization with hybrid TDOA/AOA/RSS/TOA measurements.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "placecrb/bounds.hpp"
#include "placecrb/constraints.hpp"
#include "placecrb/fim.hpp"
#include "placecrb/model.hpp"
#include "placecrb/optimizer.hpp"
#include "placecrb/scenario_io.hpp"
#include "placecrb/simulate.hpp"
#include "placecrb/version.hpp"

namespace {

using namespace placecrb;

constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitSingularFim = 4;
constexpr int kExitStall = 5;
constexpr int kExitExcluded = 6;

struct RunManifest {
    RunManifest(std::string cmd, std::string scenario, nlohmann::json ovr, std::uint64_t s)
        : command(std::move(cmd)), scenario_path(std::move(scenario)),
          overrides(std::move(ovr)), seed(s) {}

    std::string command;
    std::string scenario_path;
    nlohmann::json overrides;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    /// Written after every listed output exists; acts as the completion marker.
    void write(const std::string& primary_out) const {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        nlohmann::json j{
            {"command", command},
            {"scenario", scenario_path},
            {"seed", seed},
            {"overrides", overrides},
            {"outputs", outputs},
            {"version", kVersion},
            {"duration_seconds", seconds},
        };
        std::ofstream out(primary_out + ".manifest.json");
        out << j.dump(2) << "\n";
    }
};

std::string fmt(double v, const char* format = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

Scenario load_or_exit(const std::string& path) {
    Scenario s;
    try {
        s = load_scenario(path);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        std::exit(kExitParse);
    }
    const ValidationReport report = validate_scenario(s);
    if (!report.ok()) {
        for (const std::string& v : report.violations) {
            std::cerr << "invalid scenario: " << v << "\n";
        }
        std::exit(kExitValidation);
    }
    return s;
}

int env_threads() {
    const char* v = std::getenv("PLACECRB_THREADS");
    if (!v || !*v) return 0;
    return std::atoi(v);
}

std::string bound_label(MeasurementCombo combo) {
    const int idx = bound_index(combo);
    return idx > 0 ? "O" + std::to_string(idx) : "ext";
}

double bound_for(const Scenario& s) {
    return generalized_bound(bound_inputs_for(s.combo, s.noise, s.geometry));
}

/// Prints to stdout and, when --out was given, mirrors the text to the file
/// and drops the run manifest next to it.
void emit(const std::string& text, const std::string& out_path, RunManifest& manifest) {
    std::cout << text;
    if (out_path.empty()) return;
    std::ofstream out(out_path);
    out << text;
    out.close();
    manifest.outputs.push_back(out_path);
    manifest.write(out_path);
}

void print_constraint_table(std::ostream& os, const ConstraintReport& report) {
    os << "constraint               value          scaled         pass\n";
    for (const ConstraintResidual& r : report.residuals) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-24s %-14.6g %-14.6g %s\n", r.name.c_str(),
                      r.value, r.scaled, std::abs(r.scaled) < report.tolerance ? "yes" : "NO");
        os << line;
    }
}

void print_group_uaa(std::ostream& os, const Geometry& geometry, double uaa_tol_deg) {
    const auto groups = distance_groups(geometry);
    if (groups.size() < 2) return;
    os << "distance groups:\n";
    for (const auto& [range, idx] : groups) {
        Geometry sub;
        sub.source = geometry.source;
        for (int i : idx) sub.sensors.push_back(geometry.sensors[static_cast<std::size_t>(i)]);
        os << "  d = " << fmt(range) << " m (" << idx.size() << " sensors): ";
        if (static_cast<int>(idx.size()) >= 3) {
            os << (is_uaa(sub, uaa_tol_deg) ? "UAA yes" : "UAA no");
        } else {
            os << "UAA n/a";
        }
        os << "\n";
    }
}

int run_crb(const std::string& scenario_path, const std::string& out_path,
            const std::string& format, RunManifest manifest) {
    const Scenario s = load_or_exit(scenario_path);

    const Fim direct = assemble_fim_direct(s);
    double tr = 0.0;
    try {
        tr = tr_crb(direct);
    } catch (const SingularFim& e) {
        std::cerr << "singular FIM: " << e.what() << "\n";
        const auto [lo, hi] = direct.eigenvalues();
        std::cerr << "eigenvalues: " << fmt(lo, "%.9g") << " " << fmt(hi, "%.9g") << "\n";
        return kExitSingularFim;
    }
    const double bound = bound_for(s);
    const double gap = (tr - bound) / bound;
    const auto [lo, hi] = direct.eigenvalues();

    std::ostringstream os;
    if (format == "csv") {
        os << "combo,phi11,phi12,phi22,eig_min,eig_max,tr_crb_m2,bound_m2,gap_rel\n"
           << combo_name(s.combo) << "," << fmt(direct.phi11, "%.17g") << ","
           << fmt(direct.phi12, "%.17g") << "," << fmt(direct.phi22, "%.17g") << ","
           << fmt(lo, "%.17g") << "," << fmt(hi, "%.17g") << "," << fmt(tr, "%.17g") << ","
           << fmt(bound, "%.17g") << "," << fmt(gap, "%.17g") << "\n";
    } else {
        os << "scenario: " << scenario_path << "\n"
           << "combo: " << combo_name(s.combo) << " (" << s.geometry.size()
           << " sensors, reference " << s.geometry.reference_index << ")\n"
           << "FIM: phi11 = " << fmt(direct.phi11, "%.9g")
           << "  phi12 = " << fmt(direct.phi12, "%.9g")
           << "  phi22 = " << fmt(direct.phi22, "%.9g") << "\n"
           << "eigenvalues: " << fmt(lo, "%.9g") << "  " << fmt(hi, "%.9g") << "\n"
           << "tr(CRB) = " << fmt(tr, "%.6g") << " m^2\n"
           << "optimal bound (" << bound_label(s.combo) << ") = " << fmt(bound, "%.6g")
           << " m^2\n"
           << "gap = " << fmt(gap, "%.3g") << " (relative)\n";
    }
    emit(os.str(), out_path, manifest);
    return 0;
}

int run_bounds(const std::string& scenario_path, bool extensions, const std::string& format,
               const std::string& out_path, RunManifest manifest) {
    const Scenario s = load_or_exit(scenario_path);
    std::vector<BoundRow> rows = bound_ordering_report(s.noise, s.geometry);
    if (extensions) {
        // Non-TDOA subsets: the same 4/(HN + L sum 1/d^2) pattern, exposed as
        // extensions since only the TDOA-based forms have closed-form optima.
        for (unsigned bits = 1; bits < 16; ++bits) {
            MeasurementCombo combo{bits};
            if (combo.has(Modality::Tdoa) && bound_index(combo) > 0) continue;
            BoundRow row;
            row.combo = combo;
            row.inputs = bound_inputs_for(combo, s.noise, s.geometry);
            row.bound = generalized_bound(row.inputs);
            rows.push_back(row);
        }
        std::stable_sort(rows.begin(), rows.end(),
                         [](const BoundRow& a, const BoundRow& b) { return a.bound < b.bound; });
    }

    std::ostringstream os;
    if (format == "csv") {
        os << "label,combo,h,l,sum_inv_d2,bound_m2\n";
        for (const BoundRow& r : rows) {
            os << bound_label(r.combo) << "," << combo_name(r.combo) << ","
               << fmt(r.inputs.h, "%.17g") << "," << fmt(r.inputs.l, "%.17g") << ","
               << fmt(r.inputs.inv_d2_sum, "%.17g") << "," << fmt(r.bound, "%.17g") << "\n";
        }
    } else {
        char line[160];
        std::snprintf(line, sizeof(line), "%-5s %-22s %-12s %-12s %-12s %s\n", "label",
                      "combo", "H", "L", "sum_inv_d2", "bound_m2");
        os << line;
        for (const BoundRow& r : rows) {
            std::snprintf(line, sizeof(line), "%-5s %-22s %-12.6g %-12.6g %-12.6g %.6g\n",
                          bound_label(r.combo).c_str(), combo_name(r.combo).c_str(),
                          r.inputs.h, r.inputs.l, r.inputs.inv_d2_sum, r.bound);
            os << line;
        }
    }
    emit(os.str(), out_path, manifest);
    return 0;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int n_sensors) {
    std::ofstream out(path);
    out << "step";
    for (int i = 1; i <= n_sensors; ++i) out << ",alpha_" << i << "_deg";
    out << ",tr_crb_m2,residual_inf_norm\n";
    for (const TrajectoryPoint& p : traj.points) {
        out << p.step;
        for (double a : p.alphas) out << "," << fmt(rad2deg(a), "%.17g");
        out << "," << fmt(p.tr_crb, "%.17g") << "," << fmt(p.residual_inf_norm, "%.17g")
            << "\n";
    }
}

int run_optimize(const std::string& scenario_path, const std::string& out_path,
                 const OptimizerConfig& cfg, std::uint64_t seed, double tolerance,
                 RunManifest manifest) {
    const Scenario s = load_or_exit(scenario_path);

    Trajectory traj;
    bool stalled = false;
    try {
        traj = optimize(s, cfg, seed);
    } catch (const StallError& e) {
        traj = e.trajectory; // last good geometry survives
        stalled = true;
    } catch (const SingularFim& e) {
        std::cerr << "singular FIM: " << e.what() << "\n";
        return kExitSingularFim;
    }

    if (!out_path.empty()) {
        write_trajectory_csv(out_path, traj, s.geometry.size());
        manifest.outputs.push_back(out_path);
        manifest.write(out_path);
    }

    Scenario final_scenario = s;
    final_scenario.geometry = traj.final_geometry;
    const double bound = bound_for(final_scenario);
    const ConstraintReport report =
        residuals(traj.final_geometry, active_constraints(s.combo), tolerance);

    std::cout << "steps: " << traj.points.back().step << " (converged: "
              << (traj.converged ? "yes" : "no") << (stalled ? ", stalled" : "") << ")\n";
    std::cout << "final angles (deg):";
    for (const SensorPolar& sp : traj.final_geometry.sensors) {
        std::cout << " " << fmt(rad2deg(sp.alpha), "%.2f");
    }
    std::cout << "\nfinal tr(CRB): " << fmt(traj.final_tr_crb, "%.6g") << " m^2\n"
              << "optimal bound (" << bound_label(s.combo) << "): " << fmt(bound, "%.6g")
              << " m^2  gap: " << fmt((traj.final_tr_crb - bound) / bound, "%.3g") << "\n";
    print_constraint_table(std::cout, report);
    std::cout << "residual inf-norm: " << fmt(report.inf_norm, "%.3g") << " -> "
              << (report.satisfied ? "PASS" : "FAIL") << " (tolerance " << fmt(tolerance, "%.3g")
              << ")\n";
    std::cout << "UAA: " << (is_uaa(traj.final_geometry, 0.5) ? "yes" : "no") << "\n";
    print_group_uaa(std::cout, traj.final_geometry, 1.0);
    if (!out_path.empty()) {
        std::cout << "trajectory: " << out_path << " (" << traj.points.size() << " rows)\n";
    }
    return stalled ? kExitStall : 0;
}

int run_verify(const std::string& scenario_path, double tolerance, double uaa_tol_deg,
               const std::string& format, const std::string& out_path,
               RunManifest manifest) {
    const Scenario s = load_or_exit(scenario_path);
    const ConstraintSet set = active_constraints(s.combo);
    const ConstraintReport report = residuals(s.geometry, set, tolerance);

    std::ostringstream os;
    if (format == "csv") {
        os << "constraint,group,value,scaled,pass\n";
        for (const ConstraintResidual& r : report.residuals) {
            os << r.name << "," << r.group << "," << fmt(r.value, "%.17g") << ","
               << fmt(r.scaled, "%.17g") << ","
               << (std::abs(r.scaled) < tolerance ? "yes" : "no") << "\n";
        }
        emit(os.str(), out_path, manifest);
        return 0;
    }

    os << "active constraints:";
    if (s.combo.has(Modality::Tdoa)) os << " TDOA->G1+G2";
    if (s.combo.has(Modality::Toa)) os << " TOA->G2";
    if (s.combo.has(Modality::Aoa)) os << " AOA->G3";
    if (s.combo.has(Modality::Rss)) os << " RSS->G3";
    os << "\n";
    print_constraint_table(os, report);
    os << "residual inf-norm: " << fmt(report.inf_norm, "%.3g") << " -> "
       << (report.satisfied ? "PASS" : "FAIL") << " (tolerance " << fmt(tolerance, "%.3g")
       << ")\n";
    os << "UAA: " << (is_uaa(s.geometry, uaa_tol_deg) ? "yes" : "no") << " (tolerance "
       << fmt(uaa_tol_deg, "%.3g") << " deg)\n";
    print_group_uaa(os, s.geometry, uaa_tol_deg);
    emit(os.str(), out_path, manifest);
    return 0;
}

int run_sweep(const std::string& scenario_path, const std::string& geometries_path,
              const std::string& out_path, std::vector<double> sigmas, int trials,
              std::uint64_t seed, RunManifest manifest) {
    const Scenario s = load_or_exit(scenario_path);

    std::vector<NamedGeometry> geometries;
    try {
        geometries = load_geometries(geometries_path, s.geometry.source,
                                     s.geometry.reference_index);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    }
    if (geometries.size() < 2) {
        std::cerr << "invalid geometries file: need at least 2 named geometries\n";
        return kExitValidation;
    }
    for (const NamedGeometry& g : geometries) {
        Scenario check = s;
        check.geometry = g.geometry;
        const ValidationReport rep = validate_scenario(check);
        if (!rep.ok()) {
            for (const std::string& v : rep.violations) {
                std::cerr << "invalid geometry '" << g.id << "': " << v << "\n";
            }
            return kExitValidation;
        }
    }

    McConfig cfg;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.sigma_sweep = std::move(sigmas);
    cfg.threads = env_threads();
    const std::vector<SweepRow> rows = mse_sweep(geometries, s.noise, s.combo, cfg);

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << "sigma_m,geometry_id,mse_m2,tr_crb_m2,excluded_trials\n";
        for (const SweepRow& r : rows) {
            out << fmt(r.sigma, "%.17g") << "," << r.geometry_id << "," << fmt(r.mse, "%.17g")
                << "," << fmt(r.tr_crb, "%.17g") << "," << r.excluded << "\n";
        }
        manifest.outputs.push_back(out_path);
        manifest.write(out_path);
    }

    bool too_many_excluded = false;
    for (std::size_t si = 0; si < cfg.sigma_sweep.size(); ++si) {
        const SweepRow* best = nullptr;
        for (const SweepRow& r : rows) {
            if (r.sigma != cfg.sigma_sweep[si]) continue;
            if (r.excluded * 1000 > trials) too_many_excluded = true;
            if (!best || r.mse < best->mse) best = &r;
        }
        if (best) {
            std::cout << "sigma = " << fmt(best->sigma) << " m: best geometry = "
                      << best->geometry_id << " (mse " << fmt(best->mse, "%.6g") << " m^2, crb "
                      << fmt(best->tr_crb, "%.6g") << " m^2)\n";
        }
    }
    if (too_many_excluded) {
        std::cerr << "excluded trials exceed 0.1% in at least one cell\n";
        return kExitExcluded;
    }
    return 0;
}

/// Every explicitly-set flag except --scenario/--out, keyed without dashes.
nlohmann::json collect_overrides(const CLI::App* cmd) {
    nlohmann::json overrides = nlohmann::json::object();
    for (const CLI::Option* opt : cmd->get_options()) {
        if (opt->count() == 0 || opt->get_name().empty()) continue;
        const std::string name = opt->get_name();
        if (name == "--scenario" || name == "--out") continue;
        const auto& results = opt->results();
        if (results.empty()) {
            overrides[name.substr(2)] = true; // bare flag
        } else if (results.size() == 1) {
            overrides[name.substr(2)] = results.front();
        } else {
            overrides[name.substr(2)] = results;
        }
    }
    return overrides;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cramér-Rao bounds and optimal sensor placement for hybrid "
                 "TDOA/AOA/RSS/TOA source localization"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("placecrb ") + kVersion);

    std::string scenario_path, out_path, format = "text", geometries_path;
    std::uint64_t seed = 0;
    double tolerance = 1e-2, uaa_tol_deg = 0.5;
    int steps = 10000, trials = 10000;
    double step_size = 1e-3, grad_tol = 1e-10, fd_epsilon = 1e-6;
    std::string grad_mode = "analytic";
    std::vector<double> sigmas{0.25, 0.5, 1.0, 2.0};
    bool extensions = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--tolerance", tolerance, "Constraint residual tolerance");
        cmd->add_option("--format", format, "Output format")
            ->check(CLI::IsMember({"text", "csv"}));
        cmd->add_option("--out", out_path, "Output file path");
    };

    CLI::App* crb = app.add_subcommand("crb", "FIM, tr(CRB) and the analytic bound");
    add_common(crb);

    CLI::App* bounds = app.add_subcommand("bounds", "Analytic bound per measurement combo");
    add_common(bounds);
    bounds->add_flag("--extensions", extensions, "Also list non-TDOA combos");

    CLI::App* optimize = app.add_subcommand("optimize", "Gradient descent on tr(CRB)");
    add_common(optimize);
    optimize->add_option("--steps", steps, "Max descent steps");
    optimize->add_option("--step-size", step_size, "Initial step, radians");
    optimize->add_option("--grad-tol", grad_tol, "Gradient-norm stop");
    optimize->add_option("--fd-epsilon", fd_epsilon, "FD epsilon, radians");
    optimize->add_option("--gradient", grad_mode, "Gradient mode")
        ->check(CLI::IsMember({"analytic", "fd"}));

    CLI::App* verify = app.add_subcommand("verify", "Optimality-constraint residuals");
    add_common(verify);
    verify->add_option("--uaa-tol-deg", uaa_tol_deg, "UAA gap tolerance, degrees");

    CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo MSE vs tr(CRB) sweep");
    add_common(sweep);
    sweep->add_option("--geometries", geometries_path, "Named geometries file")->required();
    sweep->add_option("--sigmas", sigmas, "Sigma sweep values, meters");
    sweep->add_option("--trials", trials, "Monte Carlo trials per cell");

    CLI11_PARSE(app, argc, argv);

    CLI::App* parsed = app.get_subcommands().front();
    RunManifest manifest(parsed->get_name(), scenario_path, collect_overrides(parsed), seed);

    try {
        if (crb->parsed()) {
            return run_crb(scenario_path, out_path, format, std::move(manifest));
        }
        if (bounds->parsed()) {
            return run_bounds(scenario_path, extensions, format, out_path,
                              std::move(manifest));
        }
        if (optimize->parsed()) {
            OptimizerConfig cfg;
            cfg.max_steps = steps;
            cfg.step_size = step_size;
            cfg.convergence_tol = grad_tol;
            cfg.fd_epsilon = fd_epsilon;
            cfg.gradient_mode = grad_mode == "fd" ? GradientMode::FiniteDifference
                                                  : GradientMode::Analytic;
            return run_optimize(scenario_path, out_path, cfg, seed, tolerance,
                                std::move(manifest));
        }
        if (verify->parsed()) {
            return run_verify(scenario_path, tolerance, uaa_tol_deg, format, out_path,
                              std::move(manifest));
        }
        if (sweep->parsed()) {
            return run_sweep(scenario_path, geometries_path, out_path, sigmas, trials, seed,
                             std::move(manifest));
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

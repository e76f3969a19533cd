// stab: sweep runner, bound calculator and single-run driver.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "stab/bench.hpp"
#include "stab/bounds.hpp"
#include "stab/errors.hpp"
#include "stab/format.hpp"
#include "stab/rng.hpp"

namespace fs = std::filesystem;
using namespace stab;

namespace {

int cmd_run(const std::string& config, const std::string& out_override) {
    auto spec = load_experiment_spec(config);
    if (!out_override.empty()) spec.output_dir = out_override;
    const auto ctx = prepare_context(spec);
    std::fprintf(stderr, "stab run: %zu cells x %d runs, %d worker(s)\n",
                 spec.methods.size() * spec.deltas.size() * spec.e_bars.size() * spec.q_bars.size(), spec.n_runs,
                 resolve_threads(spec));
    const auto stats = run_sweep(spec, ctx);
    const fs::path dir = spec.output_dir;
    emit_tables(stats, dir);
    emit_timeseries(stats, dir);
    emit_metadata(spec, ctx, dir);
    const auto timing = timing_report(stats);
    emit_timing(timing, dir);

    int failures = 0;
    for (const auto& b : stats) {
        failures += b.failures;
        for (const auto& msg : b.failure_log)
            std::fprintf(stderr, "  %s d=%s e=%s q=%s %s\n", std::string(to_string(b.method)).c_str(),
                         compact(b.delta).c_str(), compact(b.e_bar).c_str(), compact(b.q_bar).c_str(), msg.c_str());
    }
    std::printf("%-6s %-6s %-6s %-6s %12s %12s\n", "method", "delta", "e_bar", "q_bar", "mean", "std");
    for (const auto& b : stats)
        std::printf("%-6s %-6s %-6s %-6s %12s %12s\n", std::string(to_string(b.method)).c_str(),
                    compact(b.delta).c_str(), compact(b.e_bar).c_str(), compact(b.q_bar).c_str(),
                    fixed6(b.mean).c_str(), fixed6(b.stddev).c_str());
    for (const auto& [d, fastest] : timing.obc_fastest)
        std::printf("delta=%s obc_fastest=%s\n", compact(d).c_str(), fastest ? "true" : "false");
    if (failures > 0) std::fprintf(stderr, "stab run: %d run(s) failed; entries are nan\n", failures);
    std::printf("outputs written to %s\n", dir.string().c_str());
    return 0;
}

int cmd_bounds(const std::string& config, const std::string& out_override) {
    auto spec = load_experiment_spec(config);
    if (!out_override.empty()) spec.output_dir = out_override;
    const auto ctx = prepare_context(spec);
    const ControlGrid grid(ctx.sys.input_box, spec.points_per_axis);
    BallRadii region = ctx.radii;
    if (spec.bounds_radius > 0.0) {
        if (!(spec.bounds_radius > ctx.radii.s_star))
            throw ConfigError("bounds.region_radius must exceed s_star = " + compact(ctx.radii.s_star));
        region.S_star = spec.bounds_radius;
        region.L_hat_star = sampled_sup(ctx.clf, region.S_star, spec.estimation.sup_samples, spec.estimation.seed + 1);
        std::printf("bounds region restricted to |x| <= %s (S_star = %s); not a certificate for runs from S\n",
                    compact(region.S_star).c_str(), compact(ctx.radii.S_star).c_str());
    }
    const auto constants = estimate_regularity(ctx.clf, ctx.sys, region, grid, spec.regularity);

    const fs::path dir = spec.output_dir;
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "constants.csv");
        os << "key,value\n";
        for (const auto& [k, v] : to_report(region)) os << "radii." << k << ',' << fixed6(v) << '\n';
        for (const auto& [k, v] : to_report(constants)) os << k << ',' << fixed6(v) << '\n';
    }
    std::printf("constants:");
    for (const auto& [k, v] : to_report(constants)) std::printf(" %s=%s", k.c_str(), compact(v).c_str());
    std::printf("\n");

    std::ofstream csv(dir / "bounds.csv");
    csv << "method,delta,e_max,q_max,delta_bar,r_bar,coupled,structural,empty\n";
    std::printf("%-6s %-6s %12s %12s %12s %12s  %s\n", "method", "delta", "e_max", "q_max", "delta_bar", "r_bar",
                "note");
    for (double delta : spec.deltas) {
        auto in = default_bound_inputs(constants, region, delta, spec.dia.r, spec.infc.alpha);
        in.c1 = spec.c1;
        in.c2 = spec.c2;
        const auto dia = dia_sampling_bounds(in);
        for (Method m : spec.methods) {
            const auto env = table1_envelope(m, in, 0.0);
            const double dbar = m == Method::Dia ? dia.delta_bar : std::numeric_limits<double>::quiet_NaN();
            const double rbar = m == Method::Dia ? dia.r_bar : std::numeric_limits<double>::quiet_NaN();
            std::string note;
            if (env.coupled) note = "e_max at q_bar=0; coupled with q_bar";
            if (env.structural) note = "q_max structural (c1, c2 uncertified)";
            std::printf("%-6s %-6s %12s %12s %12s %12s  %s\n", std::string(to_string(m)).c_str(),
                        compact(delta).c_str(), fixed6(env.e_max).c_str(), fixed6(env.q_max).c_str(),
                        fixed6(dbar).c_str(), fixed6(rbar).c_str(), note.c_str());
            csv << to_string(m) << ',' << compact(delta) << ',' << fixed6(env.e_max) << ',' << fixed6(env.q_max)
                << ',' << fixed6(dbar) << ',' << fixed6(rbar) << ',' << env.coupled << ',' << env.structural << ','
                << env.empty << '\n';
        }
        std::printf("delta=%s obc/infc matching q_bar=%s\n", compact(delta).c_str(),
                    fixed6(obc_infc_matching_q(in)).c_str());
    }
    std::printf("outputs written to %s\n", dir.string().c_str());
    return 0;
}

struct SingleArgs {
    std::string method = "obc";
    double delta = 0.25;
    double e_bar = 0.0;
    double q_bar = 0.0;
    std::uint64_t seed = 1;
    std::uint64_t run_index = 0;
    double t_end = 20.0;
    std::string config;
    std::string out = "stab_single";
};

int cmd_single(const SingleArgs& a) {
    ExperimentSpec spec = a.config.empty() ? ExperimentSpec{} : load_experiment_spec(a.config);
    spec.methods = {parse_method(a.method)};
    spec.deltas = {a.delta};
    spec.e_bars = {a.e_bar};
    spec.q_bars = {a.q_bar};
    spec.seed = a.seed;
    spec.t_end = a.t_end;
    spec.validate();
    const auto ctx = prepare_context(spec);

    StabilizerConfig sc;
    sc.method = spec.methods.front();
    sc.delta = a.delta;
    sc.dia = spec.dia;
    sc.infc = spec.infc;
    sc.points_per_axis = spec.points_per_axis;
    const auto controller = make_controller(sc, ctx.sys, ctx.clf);

    const auto x0 = generate_initials(static_cast<int>(a.run_index) + 1, spec.S, ctx.sys.n, spec.seed).back();
    SimConfig cfg;
    cfg.delta = a.delta;
    cfg.t_end = spec.t_end;
    cfg.substeps = spec.substeps;
    cfg.noise.e_bar = a.e_bar;
    cfg.noise.q_bar = a.q_bar;
    cfg.noise.mode = spec.noise_mode;
    cfg.seed = spec.seed;
    cfg.run_index = a.run_index;
    cfg.disturbance_per_substep = spec.disturbance_per_substep;
    const auto res = run_closed_loop(ctx.sys, ctx.clf, controller, x0, cfg, ctx.radii);

    fs::create_directories(a.out);
    const fs::path traj = fs::path(a.out) / trajectory_filename(sc.method, a.delta, a.e_bar, a.q_bar, a.run_index);
    write_trajectory_csv(res.record, traj.string());
    {
        std::ofstream os(fs::path(a.out) / "summary.csv");
        os << "key,value\n";
        os << "method," << to_string(sc.method) << "\ndelta," << compact(a.delta) << "\ne_bar," << compact(a.e_bar)
           << "\nq_bar," << compact(a.q_bar) << "\nseed," << spec.seed << "\nrun_index," << a.run_index << '\n';
        os << "tail_average_norm," << fixed6(tail_average_norm(res.record, spec.t_end, spec.tail_fraction)) << '\n';
        os << "final_norm," << fixed6(res.report.final_norm) << "\nmax_norm," << fixed6(res.report.max_norm) << '\n';
        os << "entered_target," << res.report.entered_target << "\nstayed," << res.report.stayed << '\n';
        os << "T_reach," << (res.report.T_reach ? fixed6(*res.report.T_reach) : std::string("nan")) << '\n';
        os << "overshoot_ok," << res.report.overshoot_ok << '\n';
    }
    std::printf("final |x| = %s, max |x| = %s, stayed in target: %s\n", fixed6(res.report.final_norm).c_str(),
                fixed6(res.report.max_norm).c_str(), res.report.stayed ? "yes" : "no");
    std::printf("trajectory written to %s\n", traj.string().c_str());
    if (res.failure) {
        std::fprintf(stderr, "stab single: controller failed: %s\n", res.failure->c_str());
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sample-and-hold stabilization with nonsmooth control Lyapunov functions"};
    app.require_subcommand(1);

    std::string run_config, run_out;
    auto* run = app.add_subcommand("run", "Run a method x delta x e_bar x q_bar sweep");
    run->add_option("--config", run_config, "JSON experiment config")->required();
    run->add_option("--out", run_out, "Override output_dir");

    std::string bounds_config, bounds_out;
    auto* bounds = app.add_subcommand("bounds", "Estimate constants and print robustness bounds");
    bounds->add_option("--config", bounds_config, "JSON experiment config")->required();
    bounds->add_option("--out", bounds_out, "Override output_dir");

    SingleArgs single_args;
    auto* single = app.add_subcommand("single", "Simulate one closed-loop run");
    single->add_option("--method", single_args.method, "dia | obc | infc")->capture_default_str();
    single->add_option("--delta", single_args.delta, "Sampling period")->capture_default_str();
    single->add_option("--ebar", single_args.e_bar, "Measurement error bound")->capture_default_str();
    single->add_option("--qbar", single_args.q_bar, "Disturbance bound")->capture_default_str();
    single->add_option("--seed", single_args.seed, "Master seed")->capture_default_str();
    single->add_option("--run-index", single_args.run_index, "Initial state / noise stream index")
        ->capture_default_str();
    single->add_option("--t-end", single_args.t_end, "Horizon")->capture_default_str();
    single->add_option("--config", single_args.config, "Optional JSON config for the remaining settings");
    single->add_option("--out", single_args.out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(run_config, run_out);
        if (*bounds) return cmd_bounds(bounds_config, bounds_out);
        return cmd_single(single_args);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "stab/bench.hpp"
#include "stab/bounds.hpp"
#include "stab/errors.hpp"
#include "stab/format.hpp"
#include "stab/rng.hpp"

using namespace stab;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
    std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(double v) { return compact(v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const BatchStats& cell(const std::vector<BatchStats>& stats, Method m, double d, double e, double q) {
    for (const auto& b : stats)
        if (b.method == m && b.delta == d && b.e_bar == e && b.q_bar == q) return b;
    throw std::runtime_error("missing sweep cell");
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    InfcParams p;
    StateVec x(1);
    x << 1.0;
    const ClfModel sq("sq", 1, [](const StateVec& y) { return y[0] * y[0]; });
    const ClfModel ab("abs", 1, [](const StateVec& y) { return std::abs(y[0]); });
    const auto a = infc_prox(sq, x, p, 0);
    const auto b = infc_prox(ab, x, p, 0);
    const double t = seconds_since(t0);
    const double err = std::max({std::abs(a.y_alpha[0] - 0.980392), std::abs(a.zeta_alpha[0] - 1.960784),
                                 std::abs(b.y_alpha[0] - 0.99), std::abs(b.zeta_alpha[0] - 1.0)});
    report(1, "analytic prox oracle", err <= 1e-6 && t < 1.0,
           "y=" + fixed6(a.y_alpha[0]) + " zeta=" + fixed6(a.zeta_alpha[0]) + " | y=" + fixed6(b.y_alpha[0]) +
               " zeta=" + fixed6(b.zeta_alpha[0]) + " max err " + fmt(err) + ", " + fmt(t) + " s");
}

void criterion2() {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        auto eng = make_engine(derive_key(2, Stream::Sampling, static_cast<std::uint64_t>(i)));
        const StateVec p = random_in_ball(eng, 3, 2.0);
        const double lam = std::uniform_real_distribution<double>(0.0, 2 * std::numbers::pi)(eng);
        const Phi phi{p[0], p[1], p[2]};
        std::array<double, 3> g{};
        const double h = 1e-5;
        for (int j = 0; j < 3; ++j) {
            Phi hi = phi, lo = phi;
            hi[j] += h;
            lo[j] -= h;
            g[j] = (f_tilde(hi, lam) - f_tilde(lo, lam)) / (2 * h);
        }
        // kappa = -(<grad, g1>, <grad, g2>), g1 = (1, 0, -phi2), g2 = (0, 1, phi1)
        const double k1 = -(g[0] - phi[1] * g[2]);
        const double k2 = -(g[1] + phi[0] * g[2]);
        const auto k = kappa_lambda(phi, lam);
        const double scale = std::max({std::abs(k[0]), std::abs(k[1]), 1e-3});
        worst = std::max({worst, std::abs(k[0] - k1) / scale, std::abs(k[1] - k2) / scale});
    }
    report(2, "kappa gradient check", worst <= 1e-6, "max relative error " + fmt(worst) + " over 100 draws");
}

void criterion3() {
    const LambdaClf cfg;
    double worst_reduced = 0.0;
    for (int i = 0; i < 100; ++i) {
        auto eng = make_engine(derive_key(3, Stream::Sampling, static_cast<std::uint64_t>(i)));
        const StateVec p = random_in_ball(eng, 3, 2.0);
        const Phi phi{p[0], p[1], p[2]};
        worst_reduced = std::max(worst_reduced, std::abs(min_f_tilde(phi, cfg).value - ni_clf_reduced(phi)));
    }
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 50; ++i) {
        auto eng = make_engine(derive_key(3, Stream::Sampling, static_cast<std::uint64_t>(i), 1));
        const StateVec x = random_in_ball(eng, 5, 2.0);
        double brute = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 10000; ++j) brute = std::min(brute, endi_clf_objective(x, 2 * std::numbers::pi * j / 10000));
        worst_excess = std::max(worst_excess, endi_clf(x, cfg).value - brute);
    }
    report(3, "CLF consistency", worst_reduced <= 1e-8 && worst_excess <= 1e-6,
           "max |min F - reduced| " + fmt(worst_reduced) + ", max (L - sweep) " + fmt(worst_excess));
}

void criterion4() {
    const KInftyEnvelope env([](double r) { return r * r; }, [](double r) { return r * r; });
    const ClfModel sq("sq", 2, [](const StateVec& x) { return x.squaredNorm(); });
    const auto r = compute_ball_radii(env, sq, 0.5, 1.0, 0.125);
    const bool ok = r.s_hat == 0.375 && r.ell_hat == 0.140625 && std::abs(r.s_star - 0.1875) <= 1e-10;
    report(4, "ball-radii arithmetic", ok,
           "s_hat=" + fmt(r.s_hat) + " ell_hat=" + fmt(r.ell_hat) + " s_star=" + fmt(r.s_star));
}

void criterion5() {
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> pos(0.01, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        BoundInputs in;
        in.delta = pos(eng);
        in.constants = {pos(eng), pos(eng), pos(eng), 1.0};
        in.alpha = pos(eng) / 10.0;
        in.c1 = pos(eng);
        in.c2 = pos(eng);
        const double q = pos(eng) / 10.0;
        const double d = in.delta, L = in.constants.lip_L, F = in.constants.lip_f, w = in.constants.w_bar;
        const double dia = (d * w - 4.0 * L * d * q) / (4.0 * L * (2.0 + d * F));
        const double obc = d * w / (4.0 * L + 4.0 * L * d * F);
        const double infc = d * w / L / 16.0;
        worst = std::max(worst, std::abs(table1_envelope(Method::Dia, in, q).e_max - dia));
        worst = std::max(worst, std::abs(table1_envelope(Method::Obc, in, q).e_max - obc));
        worst = std::max(worst, std::abs(table1_envelope(Method::Obc, in, q).q_max - w / L / 4.0));
        worst = std::max(worst, std::abs(table1_envelope(Method::Infc, in, q).e_max - infc));
        worst = std::max(worst, std::abs(table1_envelope(Method::Infc, in, q).q_max -
                                         (in.c1 * in.alpha * w + F * in.c2)));
    }
    BoundInputs ex;
    ex.constants = {1.0, 1.0, 4.0, 1.0};
    ex.c = 2.0;
    ex.r = 1.0;
    ex.geometry = {0.0, 10.0, 10.0, 10.0, 10.0};
    const auto b = dia_sampling_bounds(ex);
    const double quad_err = std::abs(b.quadratic_term - (std::sqrt(44.0) - 6.0) / 8.0);
    const double rbar_err = std::abs(b.r_bar - 2.0);
    report(5, "bound formulas", worst <= 1e-12 && quad_err <= 1e-10 && rbar_err <= 1e-10,
           "table max abs diff " + fmt(worst) + ", quadratic term err " + fmt(quad_err) + ", r_bar=" + fmt(b.r_bar));
}

void criterion6(const ExperimentSpec& spec, const SweepContext& ctx, const std::vector<BatchStats>& sweep) {
    const auto t0 = std::chrono::steady_clock::now();
    int runs = 0, overshoot_ok = 0;
    for (Method m : spec.methods) {
        for (const auto& res : cell(sweep, m, 0.25, 0.0, 0.0).runs) {
            ++runs;
            overshoot_ok += res.record.max_norm <= ctx.radii.S_star;
        }
    }
    std::string overshoot = "overshoot " + std::to_string(overshoot_ok) + "/" + std::to_string(runs) +
                            " within S_star=" + fmt(ctx.radii.S_star);
    const ControlGrid grid(ctx.sys.input_box, spec.points_per_axis);
    double w_bar = 0.0;
    try {
        w_bar = estimate_regularity(ctx.clf, ctx.sys, ctx.radii, grid, spec.regularity).w_bar;
    } catch (const DecayConditionError& e) {
        report(6, "decay invariant", false,
               std::string("w_bar not positive on the annulus s*/2..S*: ") + e.what() + "; " + overshoot);
        return;
    }
    std::string detail;
    bool ok = overshoot_ok == runs;
    for (Method m : spec.methods) {
        int eligible = 0;
        double hits = 0.0;
        for (const auto& res : cell(sweep, m, 0.25, 0.0, 0.0).runs) {
            const double f = check_decay(res.record, ctx.radii, w_bar, 0.125);
            int n = 0;
            for (std::size_t k = 0; k + 1 < res.record.states.size(); ++k) n += res.record.states[k].norm() > ctx.radii.s_star;
            eligible += n;
            hits += f * n;
        }
        const double frac = eligible > 0 ? hits / eligible : 1.0;
        ok = ok && frac >= 0.95;
        detail += std::string(to_string(m)) + "=" + fixed6(frac) + " ";
    }
    report(6, "decay invariant", ok && seconds_since(t0) <= 300.0,
           "w_bar=" + fmt(w_bar) + " decay fractions " + detail + overshoot);
}

void criterion7() {
    std::string detail;
    bool ok = true;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        ExperimentSpec a;
        a.deltas = {0.5};
        a.e_bars = {1.0};
        a.q_bars = {1.0};
        a.seed = seed;
        ExperimentSpec b = a;
        b.methods = {Method::Obc, Method::Infc};
        b.e_bars = {0.01};
        b.q_bars = {0.0, 0.01, 0.1};
        const auto ctx = prepare_context(a);
        const auto sa = run_sweep(a, ctx);
        const auto sb = run_sweep(b, ctx);
        const double obc = cell(sa, Method::Obc, 0.5, 1, 1).mean;
        const double dia = cell(sa, Method::Dia, 0.5, 1, 1).mean;
        const double infc = cell(sa, Method::Infc, 0.5, 1, 1).mean;
        bool seed_ok = obc < dia && obc < infc;
        detail += "seed " + std::to_string(seed) + ": e=q=1 obc/dia/infc " + fixed6(obc) + "/" + fixed6(dia) + "/" +
                  fixed6(infc) + ", e=0.01 obc<infc at q=";
        for (double q : {0.0, 0.01, 0.1}) {
            const double o = cell(sb, Method::Obc, 0.5, 0.01, q).mean;
            const double i = cell(sb, Method::Infc, 0.5, 0.01, q).mean;
            seed_ok = seed_ok && o < i;
            detail += fmt(q) + "(" + fixed6(o) + "<" + fixed6(i) + ") ";
        }
        ok = ok && seed_ok;
        detail += "; ";
    }
    report(7, "qualitative ordering at delta=0.5", ok, detail);
}

void criterion8(const std::vector<BatchStats>& first, const std::vector<BatchStats>& second, const ExperimentSpec& spec) {
    bool across_q = true, across_e = true, across_runs = true;
    std::string detail;
    for (Method m : {Method::Dia, Method::Infc}) {
        const double ref = cell(first, m, 0.25, 0.0, 0.0).mean;
        for (double q : spec.q_bars) across_q = across_q && cell(first, m, 0.25, 0.0, q).mean == ref;
        for (double e : spec.e_bars) across_e = across_e && cell(first, m, 0.25, e, 0.0).mean == ref;
        for (double e : spec.e_bars)
            for (double q : spec.q_bars)
                across_runs = across_runs && cell(first, m, 0.25, e, q).mean == cell(second, m, 0.25, e, q).mean;
        detail += std::string(to_string(m)) + " e=0 row:";
        for (double q : spec.q_bars) detail += " " + fixed6(cell(first, m, 0.25, 0.0, q).mean);
        detail += " q=0 column:";
        for (double e : spec.e_bars) detail += " " + fixed6(cell(first, m, 0.25, e, 0.0).mean);
        detail += "; ";
    }
    detail += std::string("constant across q: ") + (across_q ? "yes" : "no") +
              ", across e: " + (across_e ? "yes" : "no") + ", identical across sweeps: " + (across_runs ? "yes" : "no");
    report(8, "nominal-column constancy", across_q && across_e && across_runs, detail);
}

void criterion9(const std::vector<BatchStats>& sweep) {
    const double dia = cell(sweep, Method::Dia, 0.25, 0.0, 0.0).mean;
    const double obc = cell(sweep, Method::Obc, 0.25, 0.0, 0.0).mean;
    report(9, "nominal bands at delta=0.25", dia >= 0.1 && dia <= 0.8 && obc <= 0.5,
           "DiA " + fixed6(dia) + " in [0.1, 0.8], OBC " + fixed6(obc) + " <= 0.5");
}

void criterion10(const fs::path& a, const fs::path& b) {
    const auto x = slurp(a / "sweep_long.csv");
    const auto y = slurp(b / "sweep_long.csv");
    report(10, "sweep determinism", !x.empty() && x == y,
           std::to_string(x.size()) + " bytes vs " + std::to_string(y.size()) + " bytes, " +
               (x == y ? "identical" : "different"));
}

void criterion11(const std::vector<BatchStats>& serial_sweep) {
    const auto rep = timing_report(serial_sweep);
    std::string detail;
    double obc = 0, dia = 0, infc = 0;
    for (const auto& r : rep.rows) {
        if (r.method == Method::Obc) obc = r.mean_wall;
        if (r.method == Method::Dia) dia = r.mean_wall;
        if (r.method == Method::Infc) infc = r.mean_wall;
    }
    report(11, "timing order (serial)", obc < dia && obc < infc,
           "mean s/run obc " + fixed6(obc) + ", dia " + fixed6(dia) + ", infc " + fixed6(infc));
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "stab_acceptance";
    fs::remove_all(work);

    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();

    try {
        // Full delta = 0.25 sweep, run twice: serially for timing, then on the worker pool.
        ExperimentSpec spec;
        spec.deltas = {0.25};
        spec.keep_records = true;
        spec.serial_timing = true;
        const auto ctx = prepare_context(spec);
        const auto t0 = std::chrono::steady_clock::now();
        const auto first = run_sweep(spec, ctx);
        std::fprintf(stderr, "delta=0.25 sweep: %.1f s\n", seconds_since(t0));
        emit_tables(first, work / "a");

        ExperimentSpec again = spec;
        again.serial_timing = false;
        again.keep_records = false;
        again.threads = 2;
        const auto second = run_sweep(again, prepare_context(again));
        emit_tables(second, work / "b");

        criterion6(spec, ctx, first);
        criterion7();
        criterion8(first, second, spec);
        criterion9(first);
        criterion10(work / "a", work / "b");
        criterion11(first);
    } catch (const std::exception& e) {
        std::printf("FAIL sweep-based criteria aborted: %s\n", e.what());
        ++failures;
    }

    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}

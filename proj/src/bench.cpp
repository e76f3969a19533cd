#include "stab/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "stab/errors.hpp"
#include "stab/format.hpp"
#include "stab/rng.hpp"

namespace stab {

namespace fs = std::filesystem;

std::string_view to_string(Metric m) { return m == Metric::TailAverage ? "tail-average-norm" : "terminal-norm"; }

Metric parse_metric(std::string_view name) {
    if (name == "tail-average-norm") return Metric::TailAverage;
    if (name == "terminal-norm") return Metric::Terminal;
    throw ConfigError("unknown metric '" + std::string(name) + "'");
}

std::string_view to_string(NoiseMode m) {
    return m == NoiseMode::WorstCaseSphere ? "worst-case-sphere" : "uniform-ball";
}

NoiseMode parse_noise_mode(std::string_view name) {
    if (name == "worst-case-sphere") return NoiseMode::WorstCaseSphere;
    if (name == "uniform-ball") return NoiseMode::UniformBall;
    throw ConfigError("unknown noise mode '" + std::string(name) + "'");
}

void ExperimentSpec::validate() const {
    if (n_runs < 1) throw ConfigError("n_runs must be at least 1");
    if (methods.empty() || deltas.empty() || e_bars.empty() || q_bars.empty())
        throw ConfigError("methods, deltas, e_bars and q_bars must be non-empty");
    for (double d : deltas)
        if (!(d > 0.0) || !(t_end >= d)) throw ConfigError("every delta must satisfy 0 < delta <= t_end");
    for (double e : e_bars)
        if (!(e >= 0.0)) throw ConfigError("e_bars must be non-negative");
    for (double q : q_bars)
        if (!(q >= 0.0)) throw ConfigError("q_bars must be non-negative");
    if (!(s > 0.0 && s < S)) throw ConfigError("need 0 < s < S");
    if (substeps < 4) throw ConfigError("substeps must be at least 4");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw ConfigError("tail_fraction must lie in (0, 1]");
    if (points_per_axis < 2) throw ConfigError("grid.points_per_axis must be at least 2");
    if (!(dia.r > 0.0)) throw ConfigError("dia.r must be positive");
    if (!(infc.alpha > 0.0 && infc.alpha < 1.0)) throw ConfigError("infc.alpha must lie in (0, 1)");
}

KInftyEnvelope fit_envelope_for(const ClfModel& clf, double S, const EstimationSettings& est) {
    const double r_lo = 0.01;
    const double r_hi = 4.0 * S;
    std::vector<double> shells;
    const int k = std::max(est.envelope_shells, 2);
    for (int i = 0; i < k; ++i) shells.push_back(r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (k - 1)));
    return fit_kinfty_envelope(clf, shells, est.samples_per_shell, est.seed);
}

SweepContext prepare_context(const ExperimentSpec& spec) {
    spec.validate();
    auto sys = make_system(spec.system, spec.input_bound);
    auto clf = make_clf(spec.clf);
    if (clf.dim() != sys.n) throw ConfigError("CLF dimension does not match the system");
    const auto env = fit_envelope_for(clf, spec.S, spec.estimation);
    auto radii = compute_ball_radii(env, clf, spec.s, spec.S, spec.estimation.apriori_fraction,
                                    spec.estimation.sup_samples, spec.estimation.seed);
    return SweepContext{std::move(sys), std::move(clf), radii};
}

std::vector<StateVec> generate_initials(int n, double S, int dim, std::uint64_t seed) {
    if (n < 1 || !(S > 0.0)) throw ConfigError("initials: need n >= 1 and S > 0");
    std::vector<StateVec> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto eng = make_engine(derive_key(seed, Stream::Initials, static_cast<std::uint64_t>(i)));
        out.push_back(random_unit_vector(eng, dim) * S);
    }
    return out;
}

int resolve_threads(const ExperimentSpec& spec) {
    if (spec.serial_timing) return 1;
    int threads = spec.threads > 0 ? spec.threads : static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("STAB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) threads = std::min(threads, cap);
    }
    return std::max(threads, 1);
}

double tail_average_norm(const TrajectoryRecord& rec, double t_end, double tail_fraction) {
    const double t0 = (1.0 - tail_fraction) * t_end - 1e-9;
    double sum = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < rec.size(); ++k) {
        if (rec.times[k] >= t0) {
            sum += rec.states[k].norm();
            ++count;
        }
    }
    return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

namespace {

struct Cell {
    Method method;
    double delta, e_bar, q_bar;
};

struct RunOutcome {
    double tail = 0.0;
    double terminal = 0.0;
    double wall = 0.0;
    std::vector<double> norms;
    bool overshoot_ok = true;
    bool stayed = false;
    std::optional<std::string> failure;
    std::optional<SimResult> result;
};

std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    // Shifted by the first sample so identical inputs give exactly zero spread.
    const double x0 = v.front();
    double sum = 0.0;
    for (double x : v) sum += x - x0;
    const double shift = sum / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - x0 - shift) * (x - x0 - shift);
    var /= static_cast<double>(v.size());
    return {x0 + shift, std::sqrt(var)};
}

}  // namespace

std::vector<BatchStats> run_sweep(const ExperimentSpec& spec) { return run_sweep(spec, prepare_context(spec)); }

std::vector<BatchStats> run_sweep(const ExperimentSpec& spec, const SweepContext& ctx) {
    spec.validate();
    std::vector<Cell> cells;
    for (Method m : spec.methods)
        for (double d : spec.deltas)
            for (double e : spec.e_bars)
                for (double q : spec.q_bars) cells.push_back({m, d, e, q});

    auto initials = generate_initials(spec.n_runs, spec.S, ctx.sys.n, spec.seed);
    if (spec.shared_initial) std::fill(initials.begin(), initials.end(), initials.front());

    std::vector<Controller> controllers;
    for (const auto& c : cells) {
        StabilizerConfig sc;
        sc.method = c.method;
        sc.delta = c.delta;
        sc.dia = spec.dia;
        sc.infc = spec.infc;
        sc.points_per_axis = spec.points_per_axis;
        controllers.push_back(make_controller(sc, ctx.sys, ctx.clf));
    }

    const std::size_t runs = static_cast<std::size_t>(spec.n_runs);
    std::vector<RunOutcome> outcomes(cells.size() * runs);
    if (spec.write_trajectories) fs::create_directories(fs::path(spec.output_dir) / "trajectories");

    auto run_task = [&](std::size_t task) {
        const std::size_t ci = task / runs;
        const std::size_t ri = task % runs;
        const Cell& c = cells[ci];
        SimConfig cfg;
        cfg.delta = c.delta;
        cfg.t_end = spec.t_end;
        cfg.substeps = spec.substeps;
        cfg.noise.e_bar = c.e_bar;
        cfg.noise.q_bar = c.q_bar;
        cfg.noise.mode = spec.noise_mode;
        cfg.seed = spec.seed;
        cfg.run_index = ri;
        cfg.disturbance_per_substep = spec.disturbance_per_substep;

        RunOutcome& out = outcomes[task];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            auto res = run_closed_loop(ctx.sys, ctx.clf, controllers[ci], initials[ri], cfg, ctx.radii);
            out.failure = res.failure;
            out.tail = tail_average_norm(res.record, spec.t_end, spec.tail_fraction);
            out.terminal = res.record.states.back().norm();
            for (const auto& x : res.record.states) out.norms.push_back(x.norm());
            out.overshoot_ok = res.report.overshoot_ok;
            out.stayed = res.report.stayed;
            if (spec.write_trajectories)
                write_trajectory_csv(res.record, (fs::path(spec.output_dir) / "trajectories" /
                                                  trajectory_filename(c.method, c.delta, c.e_bar, c.q_bar, ri))
                                                     .string());
            if (spec.keep_records) out.result = std::move(res);
        } catch (const NumericError& ex) {
            out.failure = ex.what();
        }
        out.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    const int threads = resolve_threads(spec);
    if (threads <= 1) {
        for (std::size_t t = 0; t < outcomes.size(); ++t) run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < outcomes.size(); t = next++) run_task(t);
            });
        }
    }

    std::vector<BatchStats> stats;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const Cell& c = cells[ci];
        BatchStats b;
        b.method = c.method;
        b.delta = c.delta;
        b.e_bar = c.e_bar;
        b.q_bar = c.q_bar;
        b.metric = spec.metric;
        b.n_runs = spec.n_runs;
        const std::size_t steps = static_cast<std::size_t>(std::floor(spec.t_end / c.delta + 1e-9)) + 1;
        for (std::size_t k = 0; k < steps; ++k) b.times.push_back(static_cast<double>(k) * c.delta);

        std::vector<double> tails, terminals;
        std::vector<std::vector<double>> norms_at(steps);
        double wall = 0.0;
        for (std::size_t ri = 0; ri < runs; ++ri) {
            RunOutcome& o = outcomes[ci * runs + ri];
            wall += o.wall;
            if (o.failure) {
                ++b.failures;
                b.failure_log.push_back("run " + std::to_string(ri) + ": " + *o.failure);
            }
            if (!o.overshoot_ok) ++b.overshoot_violations;
            if (o.stayed) ++b.stayed;
            tails.push_back(o.failure ? std::numeric_limits<double>::quiet_NaN() : o.tail);
            terminals.push_back(o.failure ? std::numeric_limits<double>::quiet_NaN() : o.terminal);
            for (std::size_t k = 0; k < steps; ++k)
                norms_at[k].push_back(k < o.norms.size() ? o.norms[k] : std::numeric_limits<double>::quiet_NaN());
            if (o.result) b.runs.push_back(std::move(*o.result));
        }
        b.wall_time = wall / static_cast<double>(runs);
        std::tie(b.mean_tail, b.std_tail) = mean_std(tails);
        std::tie(b.mean_terminal, b.std_terminal) = mean_std(terminals);
        b.run_metric = spec.metric == Metric::TailAverage ? tails : terminals;
        std::tie(b.mean, b.stddev) = spec.metric == Metric::TailAverage ? std::pair{b.mean_tail, b.std_tail}
                                                                        : std::pair{b.mean_terminal, b.std_terminal};
        for (const auto& col : norms_at) {
            const auto [m, s] = mean_std(col);
            b.mean_norm.push_back(m);
            b.std_norm.push_back(s);
        }
        stats.push_back(std::move(b));
    }
    return stats;
}

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw StabError("cannot write '" + p.string() + "'");
    return os;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw StabError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string cell_tag(const BatchStats& b) {
    return std::string(to_string(b.method)) + "_d" + compact(b.delta) + "_e" + compact(b.e_bar) + "_q" +
           compact(b.q_bar);
}

}  // namespace

std::vector<fs::path> emit_tables(const std::vector<BatchStats>& stats, const fs::path& dir) {
    ensure_dir(dir);
    std::vector<fs::path> written;

    // Method/delta pairs in first-seen order.
    std::vector<std::pair<Method, double>> groups;
    for (const auto& b : stats) {
        const std::pair g{b.method, b.delta};
        if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
    }
    for (const auto& [method, delta] : groups) {
        std::set<double, std::greater<>> es, qs;
        for (const auto& b : stats)
            if (b.method == method && b.delta == delta) {
                es.insert(b.e_bar);
                qs.insert(b.q_bar);
            }
        for (const char* which : {"M", "D"}) {
            const fs::path p = dir / ("table_" + std::string(to_string(method)) + "_d" + compact(delta) + "_" +
                                      which + ".csv");
            auto os = open_out(p);
            os << "e_bar\\q_bar";
            for (double q : qs) os << ',' << compact(q);
            os << '\n';
            for (double e : es) {
                os << compact(e);
                for (double q : qs) {
                    os << ',';
                    for (const auto& b : stats)
                        if (b.method == method && b.delta == delta && b.e_bar == e && b.q_bar == q)
                            os << fixed6(which[0] == 'M' ? b.mean : b.stddev);
                }
                os << '\n';
            }
            written.push_back(p);
        }
    }

    const fs::path longp = dir / "sweep_long.csv";
    auto os = open_out(longp);
    os << "method,delta,e_bar,q_bar,metric,mean,std,mean_tail,std_tail,mean_terminal,std_terminal,failures\n";
    for (const auto& b : stats) {
        os << to_string(b.method) << ',' << compact(b.delta) << ',' << compact(b.e_bar) << ',' << compact(b.q_bar)
           << ',' << to_string(b.metric) << ',' << fixed6(b.mean) << ',' << fixed6(b.stddev) << ','
           << fixed6(b.mean_tail) << ',' << fixed6(b.std_tail) << ',' << fixed6(b.mean_terminal) << ','
           << fixed6(b.std_terminal) << ',' << b.failures << '\n';
    }
    written.push_back(longp);
    return written;
}

std::vector<LongRow> read_long_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw StabError("cannot read '" + path.string() + "'");
    std::string line;
    std::getline(is, line);
    std::vector<LongRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string tok; std::getline(ss, tok, ',');) f.push_back(tok);
        if (f.size() != 12) throw StabError("malformed long-format row: " + line);
        auto num = [](const std::string& s) { return std::stod(s); };
        rows.push_back({f[0], num(f[1]), num(f[2]), num(f[3]), f[4], num(f[5]), num(f[6]), num(f[7]), num(f[8]),
                        num(f[9]), num(f[10]), std::stoi(f[11])});
    }
    return rows;
}

std::vector<fs::path> emit_timeseries(const std::vector<BatchStats>& stats, const fs::path& dir) {
    ensure_dir(dir);
    std::vector<fs::path> written;
    for (const auto& b : stats) {
        const fs::path p = dir / ("ts_" + cell_tag(b) + ".csv");
        auto os = open_out(p);
        os << "t,mean_norm,lower,upper\n";
        for (std::size_t k = 0; k < b.times.size(); ++k) {
            os << fixed6(b.times[k]) << ',' << fixed6(b.mean_norm[k]) << ',' << fixed6(b.mean_norm[k] - b.std_norm[k])
               << ',' << fixed6(b.mean_norm[k] + b.std_norm[k]) << '\n';
        }
        written.push_back(p);
    }

    // One gnuplot script per delta: a grid of panels (rows e_bar, columns q_bar), one curve per method.
    std::set<double> deltas;
    for (const auto& b : stats) deltas.insert(b.delta);
    for (double d : deltas) {
        std::set<double, std::greater<>> es, qs;
        std::vector<Method> methods;
        for (const auto& b : stats) {
            if (b.delta != d) continue;
            es.insert(b.e_bar);
            qs.insert(b.q_bar);
            if (std::find(methods.begin(), methods.end(), b.method) == methods.end()) methods.push_back(b.method);
        }
        const fs::path p = dir / ("fig_d" + compact(d) + ".gp");
        auto os = open_out(p);
        os << "# Mean (line) and mean +- std (band) of |x(t)| across runs, delta = " << compact(d) << "\n";
        os << "set datafile separator ','\n";
        os << "set terminal pngcairo size " << 300 * qs.size() << ',' << 220 * es.size() << "\n";
        os << "set output 'fig_d" << compact(d) << ".png'\n";
        os << "set multiplot layout " << es.size() << ',' << qs.size() << "\n";
        for (double e : es) {
            for (double q : qs) {
                os << "set title 'e=" << compact(e) << ", q=" << compact(q) << "'\n";
                os << "plot ";
                bool first = true;
                for (Method m : methods) {
                    BatchStats probe;
                    probe.method = m;
                    probe.delta = d;
                    probe.e_bar = e;
                    probe.q_bar = q;
                    const std::string file = "ts_" + cell_tag(probe) + ".csv";
                    if (!first) os << ", \\\n     ";
                    first = false;
                    os << "'" << file << "' every ::1 using 1:3:4 with filledcurves fs transparent solid 0.3 notitle, "
                       << "'" << file << "' every ::1 using 1:2 with lines title '" << to_string(m) << "'";
                }
                os << "\n";
            }
        }
        os << "unset multiplot\n";
        written.push_back(p);
    }
    return written;
}

fs::path emit_metadata(const ExperimentSpec& spec, const SweepContext& ctx, const fs::path& dir) {
    ensure_dir(dir);
    const fs::path p = dir / "metadata.csv";
    auto os = open_out(p);
    os << "key,value\n";
    os << "system," << spec.system << "\nclf," << spec.clf << "\n";
    os << "metric," << to_string(spec.metric) << "\n";
    os << "metric_note,tables aggregate the configured metric; both tail-average and terminal norms are in "
          "sweep_long.csv\n";
    os << "tail_fraction," << compact(spec.tail_fraction) << "\n";
    os << "t_end," << compact(spec.t_end) << "\nintegrator,rk4\nsubsteps," << spec.substeps << "\n";
    os << "noise_mode," << to_string(spec.noise_mode) << "\n";
    os << "n_runs," << spec.n_runs << "\nseed," << spec.seed << "\n";
    os << "S," << fixed6(spec.S) << "\ns," << fixed6(spec.s) << "\n";
    os << "dia.r," << compact(spec.dia.r) << "\ninfc.alpha," << compact(spec.infc.alpha) << "\n";
    os << "grid.points_per_axis," << spec.points_per_axis << "\n";
    for (const auto& [k, v] : to_report(ctx.radii)) os << "radii." << k << ',' << fixed6(v) << "\n";
    return p;
}

TimingReport timing_report(const std::vector<BatchStats>& stats) {
    TimingReport rep;
    for (const auto& b : stats) {
        auto it = std::find_if(rep.rows.begin(), rep.rows.end(),
                               [&](const TimingRow& r) { return r.method == b.method && r.delta == b.delta; });
        if (it == rep.rows.end()) {
            rep.rows.push_back({b.method, b.delta, 0.0, 0});
            it = rep.rows.end() - 1;
        }
        it->mean_wall += b.wall_time * b.n_runs;
        it->runs += b.n_runs;
    }
    for (auto& r : rep.rows) r.mean_wall /= std::max(r.runs, 1);
    for (const auto& r : rep.rows) {
        if (rep.obc_fastest.count(r.delta)) continue;
        const TimingRow* obc = nullptr;
        for (const auto& o : rep.rows)
            if (o.delta == r.delta && o.method == Method::Obc) obc = &o;
        bool fastest = obc != nullptr;
        for (const auto& o : rep.rows)
            if (obc && o.delta == r.delta && o.method != Method::Obc && !(obc->mean_wall < o.mean_wall))
                fastest = false;
        rep.obc_fastest[r.delta] = fastest;
    }
    return rep;
}

fs::path emit_timing(const TimingReport& report, const fs::path& dir) {
    ensure_dir(dir);
    const fs::path p = dir / "timing.csv";
    auto os = open_out(p);
    os << "method,delta,mean_wall_seconds,runs,obc_fastest\n";
    for (const auto& r : report.rows)
        os << to_string(r.method) << ',' << compact(r.delta) << ',' << fixed6(r.mean_wall) << ',' << r.runs << ','
           << (report.obc_fastest.at(r.delta) ? "true" : "false") << '\n';
    return p;
}

}  // namespace stab

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stab/clf.hpp"
#include "stab/controllers.hpp"
#include "stab/sim.hpp"
#include "stab/systems.hpp"

namespace stab {

enum class Metric { TailAverage, Terminal };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view name);
std::string_view to_string(NoiseMode m);
NoiseMode parse_noise_mode(std::string_view name);

// Settings for the CLF envelope and ball-radius estimation of a sweep.
struct EstimationSettings {
    double apriori_fraction = 0.125;
    int envelope_shells = 48;
    int samples_per_shell = 400;
    int sup_samples = 4000;
    std::uint64_t seed = 0;
};

struct ExperimentSpec {
    std::string system = "endi";
    std::string clf = "endi-clf";
    std::vector<Method> methods{Method::Dia, Method::Obc, Method::Infc};
    std::vector<double> deltas{0.25, 0.5};
    std::vector<double> e_bars{0.0, 0.01, 0.1, 1.0};
    std::vector<double> q_bars{0.0, 0.01, 0.1, 1.0};
    int n_runs = 20;
    double S = std::sqrt(1.31);  // norm of (-1, 0.5, 0.2, 0.1, 0.1)
    double s = 0.5;
    std::uint64_t seed = 1;
    double t_end = 20.0;
    int substeps = 20;
    NoiseMode noise_mode = NoiseMode::WorstCaseSphere;
    bool disturbance_per_substep = false;
    Metric metric = Metric::TailAverage;
    double tail_fraction = 0.25;
    DiaParams dia;
    InfcParams infc;
    int points_per_axis = 21;
    double input_bound = 1.0;
    double c1 = 1.0;  // symbolic InfC disturbance constants (bounds only)
    double c2 = 1.0;
    EstimationSettings estimation;
    RegularityOptions regularity;  // constants for the bounds report
    // Outer radius of the region used for the bounds report; 0 means S_star.
    double bounds_radius = 0.0;
    std::string output_dir = "stab_out";
    int threads = 0;  // 0: hardware concurrency; STAB_THREADS caps it
    bool serial_timing = false;
    bool write_trajectories = false;
    bool keep_records = false;
    // Use the same initial state for every run (zero-variance check).
    bool shared_initial = false;

    void validate() const;
};

struct BatchStats {
    Method method = Method::Obc;
    double delta = 0.0;
    double e_bar = 0.0;
    double q_bar = 0.0;
    Metric metric = Metric::TailAverage;
    double mean = 0.0;  // of the configured metric
    double stddev = 0.0;  // population standard deviation over runs
    double mean_tail = 0.0;
    double std_tail = 0.0;
    double mean_terminal = 0.0;
    double std_terminal = 0.0;
    std::vector<double> run_metric;  // configured metric per run
    std::vector<double> times;
    std::vector<double> mean_norm;
    std::vector<double> std_norm;
    double wall_time = 0.0;  // mean seconds per run
    int n_runs = 0;
    int failures = 0;
    int overshoot_violations = 0;
    int stayed = 0;
    std::vector<std::string> failure_log;
    std::vector<SimResult> runs;  // only with keep_records
};

// Everything a sweep needs that does not depend on the cell.
struct SweepContext {
    ControlledSystem sys;
    ClfModel clf;
    BallRadii radii;
};

SweepContext prepare_context(const ExperimentSpec& spec);
KInftyEnvelope fit_envelope_for(const ClfModel& clf, double S, const EstimationSettings& est);

// n points on the radius-S sphere (normalised Gaussian draws).
std::vector<StateVec> generate_initials(int n, double S, int dim, std::uint64_t seed);

int resolve_threads(const ExperimentSpec& spec);

std::vector<BatchStats> run_sweep(const ExperimentSpec& spec);
std::vector<BatchStats> run_sweep(const ExperimentSpec& spec, const SweepContext& ctx);

// Tail-average and terminal norms of one record.
double tail_average_norm(const TrajectoryRecord& rec, double t_end, double tail_fraction);

std::vector<std::filesystem::path> emit_tables(const std::vector<BatchStats>& stats, const std::filesystem::path& dir);
std::vector<std::filesystem::path> emit_timeseries(const std::vector<BatchStats>& stats,
                                                   const std::filesystem::path& dir);
std::filesystem::path emit_metadata(const ExperimentSpec& spec, const SweepContext& ctx,
                                    const std::filesystem::path& dir);

struct LongRow {
    std::string method;
    double delta, e_bar, q_bar;
    std::string metric;
    double mean, stddev, mean_tail, std_tail, mean_terminal, std_terminal;
    int failures;
};
std::vector<LongRow> read_long_csv(const std::filesystem::path& path);

struct TimingRow {
    Method method;
    double delta;
    double mean_wall;  // seconds per run
    int runs;
};
struct TimingReport {
    std::vector<TimingRow> rows;
    std::map<double, bool> obc_fastest;  // per delta
};
TimingReport timing_report(const std::vector<BatchStats>& stats);
std::filesystem::path emit_timing(const TimingReport& report, const std::filesystem::path& dir);

// JSON configuration mirroring ExperimentSpec; throws ConfigError.
ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

}  // namespace stab

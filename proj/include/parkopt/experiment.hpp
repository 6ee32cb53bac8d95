#pragma once

// Experiment orchestration: resolve scenario/config references, run the
// online horizon, attach the offline bound check, and emit flat-file
// reports (trajectory, iteration CDF, cost table, manifest).

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parkopt/dual.hpp"
#include "parkopt/park.hpp"

namespace parkopt {

struct SweepSpec {
    std::string parameter; // "spread" | "sigma" | "tol"
    std::vector<double> values;
};

struct Experiment {
    std::string name;
    std::string scenario_path; // CSV table or iid generator spec (JSON)
    std::string config_path;
    Mode mode = Mode::Fast;
    Ablation ablation = Ablation::Full;
    std::optional<double> rho; // empty = step-size rule ("auto")
    double sigma = 0.2;
    double tol = 0.01;
    int minislot_cap = 200;
    std::uint64_t seed = 1;
    // Derived by sweep expansion: overrides the price spread
    // p_e_cap - p_o_floor, shifting the sale-price band with it.
    std::optional<double> spread;
    // Offline relaxed bound + drift gap, checked against the online
    // time-average. Skipped for ablated runs (the inequality is a claim
    // about the full method).
    bool with_bound = true;
    std::optional<SweepSpec> sweep;
};

struct BoundCheck {
    bool checked = false;
    double online_average = 0.0; // cost per slot
    double lower_bound = 0.0;    // relaxed-program optimum, per slot
    double gap_bound = 0.0;      // drift constant, scales with rho
    double standard_error = 0.0; // SE of the mean slot cost
    double margin = 0.0;         // bound + gap + 3*SE - online; >= 0 passes
    bool pass = false;
};

struct Report {
    std::string name;
    double total_cost = 0.0;
    std::vector<double> slot_cost;
    std::vector<int> iterations;
    // (iteration count, fraction of slots converging within it);
    // nondecreasing, last fraction = 1.
    std::vector<std::pair<int, double>> cdf;
    std::int64_t lemma2_violations = 0;
    std::int64_t soc_violations = 0;
    std::int64_t threshold_violations = 0;
    std::int64_t feasibility_failures = 0;
    std::int64_t flagged_slots = 0;
    double mean_iterations = 0.0;
    BoundCheck bound;
    std::vector<TrajectoryRow> rows;
    // Manifest echo.
    std::string scenario_path, config_path;
    Mode mode = Mode::Fast;
    Ablation ablation = Ablation::Full;
    std::optional<double> rho;
    double sigma = 0.2, tol = 0.01;
    std::uint64_t seed = 1;

    bool violations() const {
        return lemma2_violations + soc_violations + feasibility_failures > 0;
    }
};

const char* mode_name(Mode m);
const char* ablation_name(Ablation a);
Mode parse_mode(const std::string& s);         // throws InvalidConfig
Ablation parse_ablation(const std::string& s); // throws InvalidConfig

// Monotone CDF over iteration counts; one point per distinct count.
std::vector<std::pair<int, double>> iteration_cdf(
    const std::vector<int>& iterations);

// One variant per sweep value (base experiment when no sweep is set).
std::vector<Experiment> expand_sweep(const Experiment& base);

Report run_experiment(const Experiment& e);

// Runs experiments concurrently (PARKOPT_THREADS workers); results keep
// input order regardless of scheduling.
std::vector<Report> run_experiments(const std::vector<Experiment>& list);

enum class ReportFormat { Csv, Json };

// Writes <name>_trajectory, <name>_cdf, <name>_summary.json per report,
// a costs table, and manifest.json. Byte-stable for identical reports.
void emit_report(const std::vector<Report>& reports,
                 const std::string& out_dir, ReportFormat format);

} // namespace parkopt

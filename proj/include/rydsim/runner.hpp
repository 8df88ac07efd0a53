// Scenario engine and CLI: named figure reproductions, free-form parameter
// scans, and deterministic CSV/JSON emission.
#pragma once

#include "rydsim/metrics.hpp"

#include <string>
#include <vector>

namespace rydsim::runner {

enum class Scenario { Fig2, Fig3, Fig4Ghz, Fig4Gate, Fig5Ghz, Fig5Gate, Custom };
enum class ModelKind { Full, Eliminated, Ladder, Effective };
enum class Metric { Ghz, Gate };
enum class UMode { Resonant, Explicit };

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);
std::vector<std::string> scenario_names();

/// One simulation request. All frequencies are in units of the two-photon
/// Rabi frequency Omega, times in 1/Omega. Fields left at their sentinel
/// (t_max <= 0) are resolved from the scheme timing rules at run time.
struct ScenarioConfig {
    Scenario scenario = Scenario::Custom;
    ModelKind model = ModelKind::Eliminated;
    int n_atoms = 3;
    double delta_over_omega = 20.0;
    UMode u_mode = UMode::Resonant;
    double u_over_omega = 0.0;  // read only when u_mode == Explicit
    double gamma_over_omega = 0.0;
    double t_max_over_inv_omega = 0.0;  // <= 0: scenario default
    int n_points = 801;
    Metric metric = Metric::Ghz;
    std::vector<double> scan_delta;  // scan grids (fig4_*/custom scans)
    std::vector<double> scan_gamma;
    bool peak_search = false;  // scans: search the whole curve instead of the
                               // scheme-prescribed time
    std::string output_dir = ".";
    // Laser parameters of the full four-level model.
    double omega_r_over_omega = 10.0;
    double omega_b_over_omega = 120.0;
    double delta_big_over_omega = 1200.0;

    /// Interaction actually used: resonant rule or the explicit override.
    double u_value() const;
    /// Throws ConfigError on any field combination run_scenario rejects.
    void validate_for_run() const;
    /// Same for run_scan.
    void validate_for_scan() const;
};

/// Baseline config for a named scenario; explicit config keys override it.
ScenarioConfig scenario_defaults(Scenario s);

/// Parses flat "key = value" text ('#' comments, blank lines allowed).
/// Unknown or duplicate keys are ConfigErrors naming the offending key.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Time-series product of run_scenario before serialization.
struct ScenarioResult {
    metrics::FidelityCurve curve;    // f_metric samples
    std::vector<double> pop_ones;    // population of |1...1>
    std::vector<double> pop_rs;      // population of |r...r>
    double peak_value = 0.0;
    double peak_time = 0.0;
    double t_max = 0.0;              // resolved horizon
};

ScenarioResult run_scenario(const ScenarioConfig& config);

/// Long-format scan product: values[i * |gamma| + j] pairs with
/// (delta_grid[i], gamma_grid[j]).
struct ScanResult {
    std::vector<double> delta_grid;
    std::vector<double> gamma_grid;
    std::vector<double> values;
    Metric metric = Metric::Ghz;
};

/// workers <= 1 runs serially; otherwise grid points are evaluated
/// concurrently and merged by grid index, so the output order is
/// deterministic either way.
ScanResult run_scan(const ScenarioConfig& config, int workers = 1);

/// Write timeseries.csv + summary.json (run_scenario) or scan.csv (run_scan)
/// under out_dir, creating it if needed.
void write_scenario_outputs(const ScenarioResult& result, const ScenarioConfig& config,
                            const std::string& out_dir);
void write_scan_outputs(const ScanResult& result, const ScenarioConfig& config,
                        const std::string& out_dir);

/// Full CLI entry point: subcommands run / scan / list-scenarios. Returns the
/// process exit code (0 success, 2 config error, 3 numeric failure).
int run_cli(int argc, const char* const* argv);

}  // namespace rydsim::runner

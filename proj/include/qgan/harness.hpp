// harness.hpp
// Experiment configuration, result documents, CSV emission and the batch
// runner behind the qgan_sim command-line tool.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qgan/engine.hpp"

namespace qgan {

using Json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

/// CSV layouts are pinned per version; bump when a header changes.
inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kResultSchema = "qgan-sim/result/v1";
inline constexpr const char* kSummarySchema = "qgan-sim/summary/v1";

inline constexpr const char* kTrajectoryHeader =
    "step,round,turn,r,theta,phi,beta,gamma,p_rho_hat,p_sigma_hat,d_hat,fidelity";
inline constexpr const char* kTrackingHeader = "step,p_sigma_hat,p_rho_hat,d_hat,fidelity";
inline constexpr const char* kSnapshotHeader = "step,rho_x,rho_y,rho_z,sigma_x,sigma_y,sigma_z,m_x,m_y,m_z";
inline constexpr const char* kCdfHeader = "value,cumulative_probability";

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    GameConfig game;
    TrueStateSpec sigma;
    bool seed_specified = false;
    bool operator==(const ExperimentConfig&) const = default;
};

/// Strict parse: unknown fields and out-of-range values raise ConfigError
/// naming the field.  c_limit defaults to 500 for pure-ground and 300 otherwise.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// --seed flag, then the config's own seed, then QGAN_SIM_SEED, then 0.
std::uint64_t resolve_seed(const ExperimentConfig& config, std::optional<std::uint64_t> flag);

Json config_to_json(const GameConfig& config);
Json sigma_spec_to_json(const TrueStateSpec& spec);
Json trace_to_json(const GameTrace& trace);
GameTrace trace_from_json(const Json& doc);

/// "%.9g" with '.' decimal separator.
std::string format_real(double value);

void write_trajectory_csv(const GameTrace& trace, std::ostream& out);
void write_tracking_csv(const GameTrace& trace, std::ostream& out);
/// Step 0 is the initial state.  Unknown step indices raise ConfigError.
void write_snapshot_csv(const GameTrace& trace, std::span<const int> steps, std::ostream& out);

struct CdfPoint {
    double value = 0.0;
    double cumulative = 0.0;
    bool operator==(const CdfPoint&) const = default;
};

/// Empirical CDF: one point per sample, sorted, ending at 1.
std::vector<CdfPoint> empirical_cdf(std::vector<double> samples);
void write_cdf_csv(std::span<const CdfPoint> cdf, std::ostream& out);

struct GameOutcome {
    std::uint64_t seed = 0;
    int c_step = 0;
    double final_fidelity = 0.0;
    Termination termination = Termination::kBudgetExhausted;
    bool operator==(const GameOutcome&) const = default;
};

struct BatchSummary {
    int games = 0;
    double mean_c_step = 0.0;
    double mean_fidelity = 0.0;
    std::vector<CdfPoint> cdf_c_step;
    std::vector<CdfPoint> cdf_fidelity;
    std::map<std::string, int> termination_counts;
    Json config_echo;
    std::vector<GameOutcome> per_game;
    bool operator==(const BatchSummary&) const = default;
};

/// Game k runs with seed + k against one shared sigma.  Results are ordered
/// by k whatever the number of worker threads.
std::vector<GameTrace> run_batch_games(const ExperimentConfig& config, int count, int jobs);
BatchSummary summarize(std::span<const GameTrace> traces, const ExperimentConfig& config);

Json summary_to_json(const BatchSummary& summary);
BatchSummary summary_from_json(const Json& doc);

std::string termination_name(Termination t);

// Command entry points; each returns a process exit status and reports
// errors on `err`.

struct RunOptions {
    std::filesystem::path config;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
};

struct BatchOptions {
    std::filesystem::path config;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
    int count = 100;
    int jobs = 1;
    bool emit_traces = false;
};

struct PlotOptions {
    std::string kind;
    std::filesystem::path in;
    std::filesystem::path out;
    std::vector<int> steps;
    std::string metric = "c_step";
};

int run_single(const RunOptions& options, std::ostream& out, std::ostream& err);
int run_batch(const BatchOptions& options, std::ostream& out, std::ostream& err);
int emit_plot_data(const PlotOptions& options, std::ostream& err);

}  // namespace qgan

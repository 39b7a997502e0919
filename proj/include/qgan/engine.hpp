// engine.hpp
// The alternating adversarial game.  D moves the measurement axis to
// maximize d = p_rho - p_sigma; G moves the generated state to minimize it.
// Gradients are forward differences of shot-limited estimates of d.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qgan/bloch.hpp"
#include "qgan/noise.hpp"
#include "qgan/sampler.hpp"

namespace qgan {

/// Validation failure tied to a named configuration field.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class Turn { kDiscriminator, kGenerator };
enum class Termination { kEquilibrium, kBudgetExhausted };
enum class Param { kR, kTheta, kPhi, kBeta, kGamma };

enum class UpdateRule {
    /// Partials are mapped to a Bloch-space gradient through the player's own
    /// parameterization; G steps straight through the Bloch ball, D rotates
    /// its axis along a great circle.  Step lengths are capped.
    kGeometric,
    /// xi <- xi +/- eta * s_xi * dd/dxi with s_r = 0.25 and s_angle = 1.
    kPlain,
};

enum class StepCounting {
    kPerParameter,  // one step per scalar partial derivative
    kPerUpdate,     // one step per full gradient vector
};

/// G's turn threshold R_j = max(start - slope * j, floor).
struct ThresholdSchedule {
    double start = 0.055;
    double slope = 0.01;
    double floor = 0.02;

    double operator()(int round) const;
    bool operator==(const ThresholdSchedule&) const = default;
};

struct GameState {
    GeneratorParams gen;
    MeasurementParams meas;
    bool operator==(const GameState&) const = default;
};

struct GameConfig {
    std::int64_t shots = 5000;
    bool exact_mode = false;
    double fd_delta_angle = 0.1;
    double fd_delta_r = 0.05;
    double learning_rate = 0.1;        // G; both players under kPlain
    double disc_learning_rate = 10.0;  // D under kGeometric
    double max_gen_step = 0.05;        // Bloch-ball length
    double max_disc_rotation = 0.2;    // radians
    UpdateRule update_rule = UpdateRule::kGeometric;
    StepCounting step_counting = StepCounting::kPerParameter;
    SamplingMode sampling = SamplingMode::kWholeState;
    bool axis_relabel = true;
    int c_limit = 500;
    double d_bound = 0.02;
    int stall_window = 3;
    double stall_tol = 0.02;
    ThresholdSchedule g_thresholds{};
    int per_turn_cap = 50;
    NoiseSettings noise{};
    std::uint64_t seed = 0;
    /// Fixed starting strategies; drawn from the game stream when absent.
    std::optional<GameState> initial;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
    std::int64_t effective_shots() const { return exact_mode ? kExactShots : shots; }
    bool operator==(const GameConfig&) const = default;
};

struct StepRecord {
    int step_index = 0;  // cumulative step count after this update
    int round_index = 0;
    Turn turn = Turn::kDiscriminator;
    GameState params_after;
    OutcomeEstimate estimate;
    double fidelity_ideal = 0.0;
    bool operator==(const StepRecord&) const = default;
};

struct GameTrace {
    GameConfig config;
    DensityMatrix sigma = DensityMatrix::ground();
    GameState initial;
    std::vector<StepRecord> steps;
    Termination termination = Termination::kBudgetExhausted;
    int c_step_total = 0;
    double final_fidelity = 0.0;
    bool operator==(const GameTrace&) const = default;
};

struct TurnInput {
    Turn turn = Turn::kDiscriminator;
    int round = 1;
    GameState state;
    int steps_before = 0;
    /// G only: the d estimate the turn starts from.  Measured (without
    /// charging a step) when absent.
    std::optional<double> entry_d;
};

struct TurnResult {
    GameState state;
    std::vector<StepRecord> records;
    int steps_after = 0;
    bool budget_exhausted = false;
    std::optional<double> last_d;
};

/// Steps charged for one update of the given player.
int step_cost(Turn turn, const GameConfig& config);

/// Forward difference (d(xi + delta) - d(xi)) / delta from two fresh
/// estimates.  For r within delta of 1 the offset is applied backwards.
double finite_diff_gradient(Param param, const GameState& state, const DensityMatrix& sigma,
                            const GameConfig& config, Rng& rng);

/// One player's turn: repeated gradient estimation and update until the
/// turn's stop rule, the per-turn cap, or the global budget.
TurnResult run_turn(const TurnInput& input, const DensityMatrix& sigma, const GameConfig& config, Rng& rng);

/// Full game from random (or configured) initial strategies, D first.
GameTrace run_game(const DensityMatrix& sigma, const GameConfig& config);

/// (step_index, fidelity_ideal) for every recorded step.  Rejects empty traces.
std::vector<std::pair<int, double>> fidelity_trajectory(const GameTrace& trace);

/// Total single-state shots spent by the trace: per update, two estimates per
/// partial plus the post-update estimate, each on rho and sigma.
std::int64_t shots_consumed(const GameTrace& trace);

}  // namespace qgan

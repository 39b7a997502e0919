#include "qgan/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

namespace qgan {

namespace {

constexpr double kSingular = 1e-9;
constexpr std::array<Param, 3> kGeneratorParams{Param::kR, Param::kTheta, Param::kPhi};
constexpr std::array<Param, 2> kDiscriminatorParams{Param::kBeta, Param::kGamma};

double& component(GameState& s, Param p) {
    switch (p) {
        case Param::kR: return s.gen.r;
        case Param::kTheta: return s.gen.theta;
        case Param::kPhi: return s.gen.phi;
        case Param::kBeta: return s.meas.beta;
        case Param::kGamma: return s.meas.gamma;
    }
    return s.gen.r;
}

double measure_d(const GameState& s, const DensityMatrix& sigma, const GameConfig& config, Rng& rng) {
    return estimate_d(s.gen, s.meas, sigma, config.effective_shots(), config.noise, rng, config.sampling).d_hat;
}

double ideal_fidelity(const GameState& s, const DensityMatrix& sigma) {
    return fidelity(sigma, DensityMatrix::from_bloch(state_bloch(s.gen)));
}

template <std::size_t N>
std::array<double, N> gradient(const std::array<Param, N>& params, const GameState& s, const DensityMatrix& sigma,
                               const GameConfig& config, Rng& rng) {
    std::array<double, N> g{};
    for (std::size_t i = 0; i < N; ++i) g[i] = finite_diff_gradient(params[i], s, sigma, config, rng);
    return g;
}

GeneratorParams descend_generator(const GeneratorParams& gen, std::span<const double, 3> grad,
                                  const GameConfig& config) {
    if (config.update_rule == UpdateRule::kPlain) {
        GeneratorParams out = gen;
        out.r = std::clamp(gen.r - config.learning_rate * 0.25 * grad[0], 0.0, 1.0);
        out.theta = gen.theta - config.learning_rate * grad[1];
        out.phi = gen.phi - config.learning_rate * grad[2];
        return out;
    }

    // dv/dr = 2n, dv/dtheta = a e_theta, dv/dphi = a sin(theta) e_phi with
    // a = 2r - 1; the columns are orthogonal so the inverse is diagonal.
    const double a = 2.0 * gen.r - 1.0;
    const BlochVector n = unit_direction(gen.theta, gen.phi);
    BlochVector g = n * (0.5 * grad[0]);
    if (std::abs(a) > kSingular) g = g + polar_tangent(gen.theta, gen.phi) * (grad[1] / a);
    const double a_sin = a * std::sin(gen.theta);
    if (std::abs(a_sin) > kSingular) g = g + azimuthal_tangent(gen.phi) * (grad[2] / a_sin);

    BlochVector step = g * (-config.learning_rate);
    const double length = step.norm();
    if (length > config.max_gen_step) step = step * (config.max_gen_step / length);

    BlochVector v = n * a + step;
    const double len = v.norm();
    if (len > 1.0) v = v * (1.0 / len);
    return generator_params_near(v, gen);
}

MeasurementParams ascend_discriminator(const MeasurementParams& meas, std::span<const double, 2> grad,
                                       const GameConfig& config) {
    if (config.update_rule == UpdateRule::kPlain) {
        return {meas.beta + config.learning_rate * grad[0], meas.gamma + config.learning_rate * grad[1]};
    }

    BlochVector tangent = polar_tangent(meas.beta, meas.gamma) * grad[0];
    const double s = std::sin(meas.beta);
    if (std::abs(s) > kSingular) tangent = tangent + azimuthal_tangent(meas.gamma) * (grad[1] / s);
    tangent = tangent * config.disc_learning_rate;

    double angle = tangent.norm();
    if (angle == 0.0) return meas;
    const BlochVector dir = tangent * (1.0 / angle);
    angle = std::min(angle, config.max_disc_rotation);
    const BlochVector m = unit_direction(meas.beta, meas.gamma);
    return measurement_params_near(m * std::cos(angle) + dir * std::sin(angle), meas);
}

// M -> I - M: the axis flips and every outcome is relabelled.
MeasurementParams complementary(const MeasurementParams& meas) { return {kPi - meas.beta, meas.gamma + kPi}; }

bool stalled(const std::vector<double>& history, const GameConfig& config) {
    const auto window = static_cast<std::size_t>(config.stall_window);
    if (history.size() < window) return false;
    const auto [lo, hi] = std::minmax_element(history.end() - static_cast<std::ptrdiff_t>(window), history.end());
    return *hi - *lo < config.stall_tol;
}

}  // namespace

double ThresholdSchedule::operator()(int round) const { return std::max(start - slope * round, floor); }

void GameConfig::validate() const {
    if (!exact_mode && shots < 1) throw ConfigError("shots", "must be a positive integer");
    if (!(fd_delta_angle > 0.0) || !std::isfinite(fd_delta_angle))
        throw ConfigError("fd_delta_angle", "must be positive");
    if (!(fd_delta_r > 0.0) || fd_delta_r >= 1.0) throw ConfigError("fd_delta_r", "must lie in (0,1)");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate", "must be positive");
    if (!(disc_learning_rate > 0.0) || !std::isfinite(disc_learning_rate))
        throw ConfigError("disc_learning_rate", "must be positive");
    if (!(max_gen_step > 0.0)) throw ConfigError("max_gen_step", "must be positive");
    if (!(max_disc_rotation > 0.0)) throw ConfigError("max_disc_rotation", "must be positive");
    if (c_limit < 1) throw ConfigError("c_limit", "must be a positive integer");
    if (!(d_bound > 0.0 && d_bound < 1.0)) throw ConfigError("d_bound", "must lie in (0,1)");
    if (stall_window < 2) throw ConfigError("stall_window", "must be at least 2");
    if (!(stall_tol > 0.0)) throw ConfigError("stall_tol", "must be positive");
    if (!(g_thresholds.floor > 0.0)) throw ConfigError("g_thresholds.floor", "must be positive");
    if (!(g_thresholds.start >= g_thresholds.floor)) throw ConfigError("g_thresholds.start", "must be >= floor");
    if (!(g_thresholds.slope >= 0.0)) throw ConfigError("g_thresholds.slope", "must be non-negative");
    if (per_turn_cap < 1) throw ConfigError("per_turn_cap", "must be a positive integer");
    try {
        noise.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("noise", e.what());
    }
    if (initial) {
        try {
            initial->gen.validate();
            initial->meas.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("initial", e.what());
        }
    }
}

int step_cost(Turn turn, const GameConfig& config) {
    if (config.step_counting == StepCounting::kPerUpdate) return 1;
    return turn == Turn::kDiscriminator ? static_cast<int>(kDiscriminatorParams.size())
                                        : static_cast<int>(kGeneratorParams.size());
}

double finite_diff_gradient(Param param, const GameState& state, const DensityMatrix& sigma,
                            const GameConfig& config, Rng& rng) {
    const double delta = param == Param::kR ? config.fd_delta_r : config.fd_delta_angle;
    GameState shifted = state;
    if (param == Param::kR && state.gen.r + delta > 1.0) {
        component(shifted, param) -= delta;
        const double base = measure_d(state, sigma, config, rng);
        const double back = measure_d(shifted, sigma, config, rng);
        return (base - back) / delta;
    }
    component(shifted, param) += delta;
    const double forward = measure_d(shifted, sigma, config, rng);
    const double base = measure_d(state, sigma, config, rng);
    return (forward - base) / delta;
}

TurnResult run_turn(const TurnInput& input, const DensityMatrix& sigma, const GameConfig& config, Rng& rng) {
    TurnResult out;
    out.state = input.state;
    out.steps_after = input.steps_before;
    const int cost = step_cost(input.turn, config);
    const bool is_d = input.turn == Turn::kDiscriminator;

    double threshold = 0.0;
    if (!is_d) {
        threshold = config.g_thresholds(input.round);
        out.last_d = input.entry_d ? *input.entry_d : measure_d(out.state, sigma, config, rng);
    }

    std::vector<double> history;
    for (int k = 0; k < config.per_turn_cap; ++k) {
        if (!is_d && *out.last_d < threshold) break;
        if (out.steps_after >= config.c_limit) {
            out.budget_exhausted = true;
            break;
        }

        if (is_d) {
            const auto g = gradient(kDiscriminatorParams, out.state, sigma, config, rng);
            out.state.meas = ascend_discriminator(out.state.meas, g, config);
        } else {
            const auto g = gradient(kGeneratorParams, out.state, sigma, config, rng);
            out.state.gen = descend_generator(out.state.gen, g, config);
        }
        out.steps_after += cost;

        OutcomeEstimate est = estimate_d(out.state.gen, out.state.meas, sigma, config.effective_shots(),
                                         config.noise, rng, config.sampling);
        if (is_d && config.axis_relabel && est.d_hat < 0.0) {
            out.state.meas = complementary(out.state.meas);
            est = est.complement();
        }

        out.records.push_back(StepRecord{out.steps_after, input.round, input.turn, out.state, est,
                                         ideal_fidelity(out.state, sigma)});
        out.last_d = est.d_hat;

        if (is_d) {
            history.push_back(est.d_hat);
            if (stalled(history, config)) break;
        }
    }
    return out;
}

GameTrace run_game(const DensityMatrix& sigma, const GameConfig& config) {
    config.validate();
    Rng rng(config.seed);

    GameTrace trace;
    trace.config = config;
    trace.sigma = sigma;
    trace.initial = config.initial ? *config.initial : [&] {
        auto [gen, meas] = random_initial_params(rng);
        return GameState{gen, meas};
    }();

    GameState state = trace.initial;
    int steps = 0;
    auto absorb = [&](TurnResult&& turn) {
        state = turn.state;
        steps = turn.steps_after;
        trace.steps.insert(trace.steps.end(), std::make_move_iterator(turn.records.begin()),
                           std::make_move_iterator(turn.records.end()));
    };

    for (int round = 1;; ++round) {
        TurnResult d_turn = run_turn({Turn::kDiscriminator, round, state, steps, std::nullopt}, sigma, config, rng);
        const bool d_budget = d_turn.budget_exhausted;
        const std::optional<double> optimized = d_turn.last_d;
        absorb(std::move(d_turn));
        if (d_budget || !optimized) {
            trace.termination = Termination::kBudgetExhausted;
            break;
        }
        if (*optimized < config.d_bound) {
            trace.termination = Termination::kEquilibrium;
            break;
        }
        if (steps >= config.c_limit) {
            trace.termination = Termination::kBudgetExhausted;
            break;
        }

        TurnResult g_turn = run_turn({Turn::kGenerator, round, state, steps, optimized}, sigma, config, rng);
        const bool g_budget = g_turn.budget_exhausted;
        absorb(std::move(g_turn));
        if (g_budget || steps >= config.c_limit) {
            trace.termination = Termination::kBudgetExhausted;
            break;
        }
    }

    trace.c_step_total = steps;
    trace.final_fidelity = ideal_fidelity(state, sigma);
    return trace;
}

std::vector<std::pair<int, double>> fidelity_trajectory(const GameTrace& trace) {
    if (trace.steps.empty()) throw std::invalid_argument("fidelity_trajectory: trace has no steps");
    std::vector<std::pair<int, double>> out;
    out.reserve(trace.steps.size());
    for (const auto& s : trace.steps) out.emplace_back(s.step_index, s.fidelity_ideal);
    return out;
}

std::int64_t shots_consumed(const GameTrace& trace) {
    if (trace.config.exact_mode) return 0;
    std::int64_t total = 0;
    for (const auto& s : trace.steps) {
        const std::int64_t partials = s.turn == Turn::kDiscriminator ? 2 : 3;
        total += (2 * partials + 1) * 2 * trace.config.shots;
    }
    return total;
}

}  // namespace qgan

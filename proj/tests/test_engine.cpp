#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "qgan/engine.hpp"

using namespace qgan;

namespace {

GameConfig exact_config(std::uint64_t seed = 0) {
    GameConfig c;
    c.exact_mode = true;
    c.seed = seed;
    return c;
}

// Analytic d(beta) for gen (1, pi/2, 0) against |g>, measured at (beta, 0):
// m.(v_rho - v_sigma)/2 with v_rho = (0,1,0).
double d_of_beta(double beta) { return 0.5 * (std::sin(beta) - std::cos(beta)); }

std::map<int, double> trace_distance_after_rounds(const GameTrace& t) {
    std::map<int, double> td;
    const BlochVector vs = t.sigma.to_bloch();
    for (const auto& s : t.steps) td[s.round_index] = 0.5 * (state_bloch(s.params_after.gen) - vs).norm();
    return td;
}

}  // namespace

TEST(ThresholdSchedule, MatchesRoundSchedule) {
    const ThresholdSchedule r;
    EXPECT_NEAR(r(1), 0.045, 1e-15);
    EXPECT_NEAR(r(2), 0.035, 1e-15);
    EXPECT_NEAR(r(3), 0.025, 1e-15);
    EXPECT_EQ(r(4), 0.02);
    EXPECT_EQ(r(40), 0.02);
}

TEST(GameConfig, ValidationNamesTheField) {
    auto field_of = [](GameConfig c) {
        try {
            c.validate();
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("<valid>");
    };
    EXPECT_EQ(field_of(GameConfig{}), "<valid>");
    GameConfig c;
    c.shots = 0;
    EXPECT_EQ(field_of(c), "shots");
    c = {};
    c.stall_window = 1;
    EXPECT_EQ(field_of(c), "stall_window");
    c = {};
    c.d_bound = 1.0;
    EXPECT_EQ(field_of(c), "d_bound");
    c = {};
    c.initial = GameState{{1.2, 0, 0}, {0, 0}};
    EXPECT_EQ(field_of(c), "initial");
    c = {};
    c.noise.depolarizing_eps = 2;
    EXPECT_EQ(field_of(c), "noise");
}

TEST(FiniteDiff, VanishesWhenStatesCoincide) {
    Rng rng(1);
    const GameState s{{1, 0, 0}, {0, 0}};
    EXPECT_NEAR(finite_diff_gradient(Param::kBeta, s, DensityMatrix::ground(), exact_config(), rng), 0.0, 1e-12);
}

TEST(FiniteDiff, ConvergesToAnalyticDerivative) {
    Rng rng(2);
    GameConfig c = exact_config();
    c.fd_delta_angle = 1e-6;
    const GameState s{{1, kPi / 2, 0}, {0, 0}};
    const double g = finite_diff_gradient(Param::kBeta, s, DensityMatrix::ground(), c, rng);
    EXPECT_NEAR(g, 0.5, 1e-4);
}

TEST(FiniteDiff, ShotModeMeanAndSpread) {
    Rng rng(3);
    GameConfig c;
    const GameState s{{1, kPi / 2, 0}, {0, 0}};
    const double delta = c.fd_delta_angle;
    constexpr int kReps = 1000;
    std::vector<double> gs;
    for (int i = 0; i < kReps; ++i) gs.push_back(finite_diff_gradient(Param::kBeta, s, DensityMatrix::ground(), c, rng));
    double mean = 0.0;
    for (double g : gs) mean += g;
    mean /= kReps;
    double var = 0.0;
    for (double g : gs) var += (g - mean) * (g - mean);
    const double sd = std::sqrt(var / (kReps - 1));

    // Spread: two independent estimates, each with the formula sd.
    auto p_rho = [](double beta) { return 0.5 * (1.0 + std::sin(beta)); };
    auto p_sigma = [](double beta) { return 0.5 * (1.0 + std::cos(beta)); };
    const double sd_base = d_standard_deviation(p_rho(0), p_sigma(0), c.shots);
    const double sd_fwd = d_standard_deviation(p_rho(delta), p_sigma(delta), c.shots);
    const double expected_sd = std::hypot(sd_base, sd_fwd) / delta;
    EXPECT_NEAR(sd, expected_sd, 0.1 * expected_sd);
    EXPECT_NEAR(expected_sd, std::sqrt(2.0) * 0.00707 / delta, 0.1 * expected_sd);

    // Mean: unbiased for the forward difference, which sits O(delta) from the
    // analytic derivative.
    const double forward = (d_of_beta(delta) - d_of_beta(0.0)) / delta;
    EXPECT_NEAR(mean, forward, 3.0 * sd / std::sqrt(double(kReps)));
    EXPECT_NEAR(forward, 0.5, 0.6 * delta * 0.5 * std::sqrt(2.0));
}

TEST(FiniteDiff, BackwardOffsetNearUpperEdgeOfR) {
    Rng rng(4);
    const GameConfig c = exact_config();
    const GameState s{{0.98, 0.4, 0.2}, {0.3, 0.1}};
    const DensityMatrix sigma = DensityMatrix::from_bloch({0.1, 0.2, 0.3});
    const double g = finite_diff_gradient(Param::kR, s, sigma, c, rng);
    const double analytic = oracle::objective(0.98, 0.4, 0.2, 0.3, 0.1, oracle::to_eigen(sigma)) -
                            oracle::objective(0.98 - c.fd_delta_r, 0.4, 0.2, 0.3, 0.1, oracle::to_eigen(sigma));
    EXPECT_NEAR(g, analytic / c.fd_delta_r, 1e-12);
}

TEST(FiniteDiff, ExactModeAgreesWithMatrixOracle) {
    Rng rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const GameConfig c = exact_config();
    for (int i = 0; i < 200; ++i) {
        const GameState s{{0.9 * unit(rng), kPi * unit(rng), kTwoPi * unit(rng)}, {kPi * unit(rng), kTwoPi * unit(rng)}};
        const DensityMatrix sigma = random_true_state(TrueStateKind::kBlochBall, rng);
        const auto sig = oracle::to_eigen(sigma);
        const auto d = [&](double r, double t, double p, double b, double g) { return oracle::objective(r, t, p, b, g, sig); };
        const double base = d(s.gen.r, s.gen.theta, s.gen.phi, s.meas.beta, s.meas.gamma);
        const double h = c.fd_delta_angle;
        EXPECT_NEAR(finite_diff_gradient(Param::kR, s, sigma, c, rng),
                    (d(s.gen.r + c.fd_delta_r, s.gen.theta, s.gen.phi, s.meas.beta, s.meas.gamma) - base) / c.fd_delta_r, 1e-10);
        EXPECT_NEAR(finite_diff_gradient(Param::kTheta, s, sigma, c, rng),
                    (d(s.gen.r, s.gen.theta + h, s.gen.phi, s.meas.beta, s.meas.gamma) - base) / h, 1e-10);
        EXPECT_NEAR(finite_diff_gradient(Param::kPhi, s, sigma, c, rng),
                    (d(s.gen.r, s.gen.theta, s.gen.phi + h, s.meas.beta, s.meas.gamma) - base) / h, 1e-10);
        EXPECT_NEAR(finite_diff_gradient(Param::kBeta, s, sigma, c, rng),
                    (d(s.gen.r, s.gen.theta, s.gen.phi, s.meas.beta + h, s.meas.gamma) - base) / h, 1e-10);
        EXPECT_NEAR(finite_diff_gradient(Param::kGamma, s, sigma, c, rng),
                    (d(s.gen.r, s.gen.theta, s.gen.phi, s.meas.beta, s.meas.gamma + h) - base) / h, 1e-10);
    }
}

TEST(RunTurn, DiscriminatorStallsWhenStatesCoincide) {
    Rng rng(6);
    const GameConfig c = exact_config();
    const GameState s{{1, 0, 0}, {0.7, 1.3}};
    const TurnResult t = run_turn({Turn::kDiscriminator, 1, s, 0, std::nullopt}, DensityMatrix::ground(), c, rng);
    ASSERT_EQ(t.records.size(), static_cast<std::size_t>(c.stall_window));
    for (const auto& r : t.records) EXPECT_LT(std::abs(r.estimate.d_hat), 1e-9);
    EXPECT_EQ(t.state, s);
    EXPECT_FALSE(t.budget_exhausted);
}

TEST(RunTurn, DiscriminatorFindsTraceDistance) {
    const DensityMatrix sigma = DensityMatrix::ground();
    const double td = trace_distance(sigma, DensityMatrix::maximally_mixed());
    for (const MeasurementParams start : {MeasurementParams{2.0, 1.0}, MeasurementParams{0.3, 4.0},
                                          MeasurementParams{1.5707, 0.0}, MeasurementParams{3.0, 2.0}}) {
        Rng rng(7);
        const TurnResult t =
            run_turn({Turn::kDiscriminator, 1, {{0.5, 1.1, 0.4}, start}, 0, std::nullopt}, sigma, exact_config(), rng);
        ASSERT_TRUE(t.last_d);
        EXPECT_NEAR(*t.last_d, 0.5, 0.02) << start.beta;
        EXPECT_NEAR(*t.last_d, td, 0.02);
    }
}

TEST(RunTurn, GeneratorEnteringBelowThresholdDoesNothing) {
    Rng rng(8);
    const GameState s{{1, kPi / 2, 0}, {0, 0}};
    const TurnResult t = run_turn({Turn::kGenerator, 1, s, 10, std::nullopt}, DensityMatrix::ground(), exact_config(), rng);
    ASSERT_TRUE(t.last_d);
    EXPECT_LT(*t.last_d, 0.045);
    EXPECT_TRUE(t.records.empty());
    EXPECT_EQ(t.steps_after, 10);
}

TEST(RunTurn, GeneratorDescendsBelowRoundThreshold) {
    Rng rng(9);
    const GameState s{{1, kPi / 2, 0}, {kPi, 0}};  // D looks along -z; d starts at 0.5
    const TurnResult t = run_turn({Turn::kGenerator, 1, s, 0, std::nullopt}, DensityMatrix::ground(), exact_config(), rng);
    ASSERT_TRUE(t.last_d);
    EXPECT_LT(*t.last_d, 0.045);
    EXPECT_FALSE(t.records.empty());
    EXPECT_LT(t.records.size(), 50u);
    for (std::size_t i = 1; i < t.records.size(); ++i)
        EXPECT_LE(t.records[i].estimate.d_hat, t.records[i - 1].estimate.d_hat + 1e-9);
}

TEST(RunTurn, StopsAtPerTurnCap) {
    Rng rng(10);
    GameConfig c;
    c.per_turn_cap = 4;
    c.stall_tol = 1e-6;  // never stalls under shot noise
    const TurnResult t = run_turn({Turn::kDiscriminator, 1, {{0.5, 1, 1}, {1, 1}}, 0, std::nullopt},
                                  DensityMatrix::ground(), c, rng);
    EXPECT_EQ(t.records.size(), 4u);
    EXPECT_EQ(t.steps_after, 4 * step_cost(Turn::kDiscriminator, c));
}

TEST(RunTurn, StopsAtGlobalBudget) {
    Rng rng(11);
    GameConfig c;
    c.c_limit = 5;
    c.stall_tol = 1e-6;
    const TurnResult t = run_turn({Turn::kDiscriminator, 1, {{0.5, 1, 1}, {1, 1}}, 0, std::nullopt},
                                  DensityMatrix::ground(), c, rng);
    EXPECT_TRUE(t.budget_exhausted);
    EXPECT_EQ(t.steps_after, 6);
}

TEST(RunGame, NoiselessPureGameConverges) {
    const GameTrace t = run_game(DensityMatrix::ground(), exact_config(7));
    EXPECT_EQ(t.termination, Termination::kEquilibrium);
    EXPECT_GE(t.final_fidelity, 0.995);
    ASSERT_FALSE(t.steps.empty());
    EXPECT_EQ(t.steps.back().turn, Turn::kDiscriminator);
    EXPECT_LT(t.steps.back().estimate.d_hat, 0.02);

    const auto traj = fidelity_trajectory(t);
    ASSERT_EQ(traj.size(), t.steps.size());
    EXPECT_EQ(traj.back().second, t.final_fidelity);
    EXPECT_GE(traj.back().second, 0.995);
    for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_GT(traj[i].first, traj[i - 1].first);
}

TEST(RunGame, TraceInvariants) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        GameConfig c;
        c.seed = seed;
        c.c_limit = seed % 2 ? 300 : 500;
        const DensityMatrix sigma =
            seed % 2 ? make_true_state({TrueStateKind::kBlochBall, {}, seed}) : DensityMatrix::ground();
        const GameTrace t = run_game(sigma, c);

        int expected_steps = 0;
        for (std::size_t i = 0; i < t.steps.size(); ++i) {
            const auto& s = t.steps[i];
            expected_steps += step_cost(s.turn, c);
            EXPECT_EQ(s.step_index, expected_steps);
            EXPECT_GE(s.fidelity_ideal, 0.0);
            EXPECT_LE(s.fidelity_ideal, 1.0);
            EXPECT_EQ(s.estimate.d_hat, s.estimate.p_rho_hat - s.estimate.p_sigma_hat);
        }
        EXPECT_EQ(t.c_step_total, expected_steps);
        EXPECT_LE(t.c_step_total, c.c_limit + step_cost(Turn::kGenerator, c));
        if (t.termination == Termination::kEquilibrium) {
            EXPECT_EQ(t.steps.back().turn, Turn::kDiscriminator);
            EXPECT_LT(t.steps.back().estimate.d_hat, c.d_bound);
        } else {
            EXPECT_GE(t.c_step_total, c.c_limit);
        }

        std::int64_t shots = 0;
        for (const auto& s : t.steps) shots += (s.turn == Turn::kDiscriminator ? 5 : 7) * 2 * c.shots;
        EXPECT_EQ(shots_consumed(t), shots);
    }
}

TEST(RunGame, PerUpdateCountingChargesOnePerIteration) {
    GameConfig c;
    c.seed = 3;
    c.step_counting = StepCounting::kPerUpdate;
    const GameTrace t = run_game(DensityMatrix::ground(), c);
    for (std::size_t i = 0; i < t.steps.size(); ++i) EXPECT_EQ(t.steps[i].step_index, static_cast<int>(i + 1));
    EXPECT_EQ(t.c_step_total, static_cast<int>(t.steps.size()));
}

TEST(RunGame, BudgetExhaustion) {
    GameConfig c;
    c.seed = 5;
    c.c_limit = 20;
    const GameTrace t = run_game(DensityMatrix::ground(), c);
    EXPECT_EQ(t.termination, Termination::kBudgetExhausted);
    EXPECT_GE(t.c_step_total, 20);
    EXPECT_LE(t.c_step_total, 20 + 3);
}

TEST(RunGame, ExactModeSpendsNoShots) {
    const GameTrace t = run_game(DensityMatrix::ground(), exact_config(2));
    EXPECT_EQ(shots_consumed(t), 0);
    for (const auto& s : t.steps) EXPECT_TRUE(s.estimate.is_exact());
}

TEST(RunGame, Deterministic) {
    for (bool exact : {false, true}) {
        GameConfig c;
        c.seed = 1234;
        c.exact_mode = exact;
        c.noise = NoiseSettings::decoherence_preset();
        const DensityMatrix sigma = DensityMatrix::from_bloch({0.3, -0.2, 0.5});
        EXPECT_EQ(run_game(sigma, c), run_game(sigma, c));
    }
}

TEST(RunGame, ConfiguredInitialStateIsUsed) {
    GameConfig c = exact_config(1);
    c.initial = GameState{{0.2, 1.0, 2.0}, {0.5, 0.5}};
    const GameTrace t = run_game(DensityMatrix::ground(), c);
    EXPECT_EQ(t.initial, *c.initial);
    EXPECT_EQ(t.termination, Termination::kEquilibrium);
}

TEST(RunGame, PlainRuleStillRuns) {
    GameConfig c = exact_config(4);
    c.update_rule = UpdateRule::kPlain;
    c.learning_rate = 0.2;
    const GameTrace t = run_game(DensityMatrix::ground(), c);
    EXPECT_FALSE(t.steps.empty());
    EXPECT_GE(t.final_fidelity, 0.0);
}

// Small eta: no overshoot, so D's exact objective only climbs.  The forward
// difference is biased by O(delta) at the optimum, which would push D off it
// by eta * bias per step; a fine delta keeps that loss below the slack.
TEST(Properties, DiscriminatorTurnIsMonotoneInExactMode) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        GameConfig c = exact_config(seed);
        c.disc_learning_rate = 1.0;
        c.fd_delta_angle = 1e-5;
        const DensityMatrix sigma = seed % 2 ? DensityMatrix::ground() : make_true_state({TrueStateKind::kBlochBall, {}, seed});
        const GameTrace t = run_game(sigma, c);
        for (std::size_t i = 1; i < t.steps.size(); ++i) {
            const auto& a = t.steps[i - 1];
            const auto& b = t.steps[i];
            if (a.turn == Turn::kDiscriminator && b.turn == Turn::kDiscriminator && a.round_index == b.round_index) {
                EXPECT_GE(b.estimate.d_hat, a.estimate.d_hat - 1e-9) << "seed " << seed << " step " << b.step_index;
            }
        }
    }
}

TEST(Properties, TraceDistanceContractsEachRound) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        GameConfig c = exact_config(seed);
        const DensityMatrix sigma = seed % 2 ? DensityMatrix::ground() : make_true_state({TrueStateKind::kBlochBall, {}, seed});
        if (!(seed % 2)) c.c_limit = 300;
        const GameTrace t = run_game(sigma, c);
        double prev = 0.5 * (state_bloch(t.initial.gen) - sigma.to_bloch()).norm();
        for (const auto& [round, td] : trace_distance_after_rounds(t)) {
            EXPECT_LE(td, prev + 1e-9) << "seed " << seed << " round " << round;
            prev = td;
        }
    }
}

TEST(Properties, ExactEquilibriumIsIndistinguishable) {
    // At equilibrium D can no longer tell the states apart: p_rho and p_sigma
    // agree to well inside 5 sd of a 5000-shot estimate.  They equal 1/2 only
    // when the converged axis lies on the equator; a radial residual (rho a
    // slightly mixed |g>) puts the optimal axis at -z instead.
    const double tol = 5.0 * d_standard_deviation(0.5, 0.5, 5000) / std::sqrt(2.0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const GameTrace t = run_game(DensityMatrix::ground(), exact_config(seed));
        ASSERT_EQ(t.termination, Termination::kEquilibrium);
        const auto& last = t.steps.back();
        EXPECT_NEAR(last.estimate.p_rho_hat, last.estimate.p_sigma_hat, tol) << "seed " << seed;
    }

    // Tangential residual: pure rho tilted 0.03 rad off |g>.  D converges to
    // an equatorial axis and both probabilities land on 1/2.
    // The stall rule is switched off so the axis actually converges.
    Rng rng(1);
    GameConfig c = exact_config();
    c.stall_tol = 1e-12;
    const TurnResult d = run_turn({Turn::kDiscriminator, 1, {{1.0, 0.03, 0.0}, {1.0, 0.5}}, 0, std::nullopt},
                                  DensityMatrix::ground(), c, rng);
    ASSERT_FALSE(d.records.empty());
    const auto& est = d.records.back().estimate;
    EXPECT_NEAR(est.p_rho_hat, 0.5, tol);
    EXPECT_NEAR(est.p_sigma_hat, 0.5, tol);
}

TEST(FidelityTrajectory, RejectsEmptyAndHandlesSingleStep) {
    GameTrace t;
    EXPECT_THROW(fidelity_trajectory(t), std::invalid_argument);
    StepRecord r;
    r.step_index = 2;
    r.fidelity_ideal = 0.75;
    t.steps.push_back(r);
    const auto traj = fidelity_trajectory(t);
    ASSERT_EQ(traj.size(), 1u);
    EXPECT_EQ(traj[0], (std::pair<int, double>{2, 0.75}));
}

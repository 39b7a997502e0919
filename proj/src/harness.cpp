#include "qgan/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace qgan {

namespace fs = std::filesystem;

namespace {

// Reads typed members of one JSON object and rejects anything it did not
// consume.
class FieldReader {
public:
    FieldReader(const Json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
        if (!obj_.is_object()) throw ConfigError(prefix_.empty() ? "config" : prefix_, "expected a JSON object");
    }

    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    const Json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void real(const std::string& key, double& target) {
        if (const Json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(path(key), "expected a number");
            target = v->get<double>();
            if (!std::isfinite(target)) throw ConfigError(path(key), "must be finite");
        }
    }

    template <typename Int>
    void integer(const std::string& key, Int& target) {
        if (const Json* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(path(key), "expected an integer");
            if constexpr (std::is_unsigned_v<Int>) {
                if (!v->is_number_unsigned()) throw ConfigError(path(key), "must be non-negative");
            }
            target = v->get<Int>();
        }
    }

    void boolean(const std::string& key, bool& target) {
        if (const Json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
            target = v->get<bool>();
        }
    }

    std::optional<std::string> string(const std::string& key) {
        if (const Json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(path(key), "expected a string");
            return v->get<std::string>();
        }
        return std::nullopt;
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            (void)value;
            if (!seen_.contains(key)) throw ConfigError(path(key), "unknown field");
        }
    }

private:
    const Json& obj_;
    std::string prefix_;
    std::set<std::string> seen_;
};

BlochVector parse_vector(const Json& v, const std::string& field) {
    if (!v.is_array() || v.size() != 3) throw ConfigError(field, "expected [x, y, z]");
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(field, "expected [x, y, z]");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

TrueStateKind parse_sigma_kind(const std::string& name) {
    if (name == "pure-ground") return TrueStateKind::kPureGround;
    if (name == "bloch-ball") return TrueStateKind::kBlochBall;
    if (name == "hilbert-schmidt") return TrueStateKind::kHilbertSchmidt;
    if (name == "fixed") return TrueStateKind::kFixed;
    throw ConfigError("sigma.kind", "unknown kind '" + name + "'");
}

std::string sigma_kind_name(TrueStateKind kind) {
    switch (kind) {
        case TrueStateKind::kPureGround: return "pure-ground";
        case TrueStateKind::kBlochBall: return "bloch-ball";
        case TrueStateKind::kHilbertSchmidt: return "hilbert-schmidt";
        case TrueStateKind::kFixed: return "fixed";
    }
    return "pure-ground";
}

TrueStateSpec parse_sigma(const Json& v) {
    TrueStateSpec spec;
    if (v.is_string()) {
        const auto text = v.get<std::string>();
        constexpr std::string_view kFixedPrefix = "fixed:";
        if (text.starts_with(kFixedPrefix)) {
            Json arr;
            try {
                arr = Json::parse(text.substr(kFixedPrefix.size()));
            } catch (const Json::exception&) {
                throw ConfigError("sigma", "expected fixed:[x,y,z]");
            }
            spec.kind = TrueStateKind::kFixed;
            spec.fixed = parse_vector(arr, "sigma");
        } else {
            spec.kind = parse_sigma_kind(text);
            if (spec.kind == TrueStateKind::kFixed) throw ConfigError("sigma", "fixed needs a Bloch vector");
        }
    } else {
        FieldReader reader(v, "sigma");
        const auto kind = reader.string("kind");
        if (!kind) throw ConfigError("sigma.kind", "missing");
        spec.kind = parse_sigma_kind(*kind);
        if (const Json* b = reader.find("bloch")) spec.fixed = parse_vector(*b, "sigma.bloch");
        else if (spec.kind == TrueStateKind::kFixed) throw ConfigError("sigma.bloch", "missing");
        reader.integer("seed", spec.seed);
        reader.finish();
    }
    if (spec.kind == TrueStateKind::kFixed && spec.fixed.dot(spec.fixed) > 1.0 + 1e-12) {
        throw ConfigError("sigma.bloch", "Bloch vector lies outside the unit ball");
    }
    return spec;
}

NoiseSettings parse_noise(const Json& v) {
    FieldReader reader(v, "noise");
    NoiseSettings noise;
    if (const auto preset = reader.string("preset")) {
        if (*preset != "decoherence") throw ConfigError("noise.preset", "unknown preset '" + *preset + "'");
        noise = NoiseSettings::decoherence_preset();
    }
    reader.real("depolarizing_eps", noise.depolarizing_eps);
    reader.real("amplitude_damping_gamma", noise.amplitude_damping_gamma);
    if (const auto target = reader.string("apply_to")) {
        if (*target == "both") noise.apply_to = NoiseTarget::kBoth;
        else if (*target == "generated-only") noise.apply_to = NoiseTarget::kGeneratedOnly;
        else throw ConfigError("noise.apply_to", "expected 'both' or 'generated-only'");
    }
    reader.finish();
    if (!(noise.depolarizing_eps >= 0.0 && noise.depolarizing_eps <= 1.0))
        throw ConfigError("noise.depolarizing_eps", "must lie in [0,1]");
    if (!(noise.amplitude_damping_gamma >= 0.0 && noise.amplitude_damping_gamma <= 1.0))
        throw ConfigError("noise.amplitude_damping_gamma", "must lie in [0,1]");
    return noise;
}

GameState parse_initial(const Json& v) {
    FieldReader reader(v, "initial");
    GameState s;
    const Json* gen = reader.find("generator");
    const Json* meas = reader.find("measurement");
    if (!gen) throw ConfigError("initial.generator", "missing");
    if (!meas) throw ConfigError("initial.measurement", "missing");
    reader.finish();

    FieldReader g(*gen, "initial.generator");
    g.real("r", s.gen.r);
    g.real("theta", s.gen.theta);
    g.real("phi", s.gen.phi);
    g.finish();
    if (!(s.gen.r >= 0.0 && s.gen.r <= 1.0)) throw ConfigError("initial.generator.r", "must lie in [0,1]");

    FieldReader m(*meas, "initial.measurement");
    m.real("beta", s.meas.beta);
    m.real("gamma", s.meas.gamma);
    m.finish();
    return s;
}

Json state_to_json(const GameState& s) {
    return {{"generator", {{"r", s.gen.r}, {"theta", s.gen.theta}, {"phi", s.gen.phi}}},
            {"measurement", {{"beta", s.meas.beta}, {"gamma", s.meas.gamma}}}};
}

Json vector_to_json(const BlochVector& v) { return Json::array({v.x, v.y, v.z}); }

Json matrix_to_json(const DensityMatrix& m) {
    Json arr = Json::array();
    for (const Complex& e : m.entries()) arr.push_back(Json::array({e.real(), e.imag()}));
    return arr;
}

DensityMatrix matrix_from_json(const Json& arr) {
    if (!arr.is_array() || arr.size() != 4) throw ConfigError("sigma.matrix", "expected four [re, im] pairs");
    std::array<Complex, 4> e{};
    for (std::size_t i = 0; i < 4; ++i) e[i] = Complex(arr[i].at(0).get<double>(), arr[i].at(1).get<double>());
    return DensityMatrix::from_entries(e[0], e[1], e[2], e[3]);
}

Termination parse_termination(const std::string& name) {
    if (name == "equilibrium") return Termination::kEquilibrium;
    if (name == "budget-exhausted") return Termination::kBudgetExhausted;
    throw ConfigError("termination", "unknown value '" + name + "'");
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void write_json(const Json& doc, const fs::path& path) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
    auto out = open_output(path);
    writer(out);
    if (!out) throw IoError("write failed: " + path.string());
}

Json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string(), std::string("malformed JSON: ") + e.what());
    }
}

ExperimentConfig resolved(const RunOptions& options) {
    ExperimentConfig config = load_config(options.config);
    config.game.seed = resolve_seed(config, options.seed);
    config.seed_specified = true;
    return config;
}

std::string turn_name(Turn t) { return t == Turn::kDiscriminator ? "D" : "G"; }

void write_vector_cells(const BlochVector& v, std::ostream& out) {
    out << ',' << format_real(v.x) << ',' << format_real(v.y) << ',' << format_real(v.z);
}

}  // namespace

ExperimentConfig parse_config(const Json& doc) {
    ExperimentConfig config;
    GameConfig& g = config.game;
    FieldReader reader(doc, "");

    if (const Json* s = reader.find("sigma")) config.sigma = parse_sigma(*s);
    g.c_limit = config.sigma.kind == TrueStateKind::kPureGround ? 500 : 300;

    reader.integer("shots", g.shots);
    reader.boolean("exact_mode", g.exact_mode);
    reader.real("fd_delta_angle", g.fd_delta_angle);
    reader.real("fd_delta_r", g.fd_delta_r);
    reader.real("learning_rate", g.learning_rate);
    reader.real("disc_learning_rate", g.disc_learning_rate);
    reader.real("max_gen_step", g.max_gen_step);
    reader.real("max_disc_rotation", g.max_disc_rotation);
    if (const auto rule = reader.string("update_rule")) {
        if (*rule == "geometric") g.update_rule = UpdateRule::kGeometric;
        else if (*rule == "plain") g.update_rule = UpdateRule::kPlain;
        else throw ConfigError("update_rule", "expected 'geometric' or 'plain'");
    }
    if (const auto counting = reader.string("step_counting")) {
        if (*counting == "per-parameter") g.step_counting = StepCounting::kPerParameter;
        else if (*counting == "per-update") g.step_counting = StepCounting::kPerUpdate;
        else throw ConfigError("step_counting", "expected 'per-parameter' or 'per-update'");
    }
    if (const auto sampling = reader.string("sampling")) {
        if (*sampling == "whole-state") g.sampling = SamplingMode::kWholeState;
        else if (*sampling == "branchwise") g.sampling = SamplingMode::kBranchwise;
        else throw ConfigError("sampling", "expected 'whole-state' or 'branchwise'");
    }
    reader.boolean("axis_relabel", g.axis_relabel);
    reader.integer("c_limit", g.c_limit);
    reader.real("d_bound", g.d_bound);
    reader.integer("stall_window", g.stall_window);
    reader.real("stall_tol", g.stall_tol);
    if (const Json* th = reader.find("g_thresholds")) {
        FieldReader t(*th, "g_thresholds");
        t.real("start", g.g_thresholds.start);
        t.real("slope", g.g_thresholds.slope);
        t.real("floor", g.g_thresholds.floor);
        t.finish();
    }
    reader.integer("per_turn_cap", g.per_turn_cap);
    if (const Json* n = reader.find("noise")) g.noise = parse_noise(*n);
    if (const Json* seed = reader.find("seed")) {
        if (!seed->is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
        g.seed = seed->get<std::uint64_t>();
        config.seed_specified = true;
    }
    if (const Json* init = reader.find("initial")) g.initial = parse_initial(*init);
    reader.finish();

    g.validate();
    return config;
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(read_json(path)); }

std::uint64_t resolve_seed(const ExperimentConfig& config, std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    if (config.seed_specified) return config.game.seed;
    if (const char* env = std::getenv("QGAN_SIM_SEED"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long long value = std::strtoull(env, &end, 10);
        if (end == nullptr || *end != '\0') throw ConfigError("QGAN_SIM_SEED", "expected a non-negative integer");
        return value;
    }
    return 0;
}

Json config_to_json(const GameConfig& g) {
    Json doc = {
        {"shots", g.shots},
        {"exact_mode", g.exact_mode},
        {"fd_delta_angle", g.fd_delta_angle},
        {"fd_delta_r", g.fd_delta_r},
        {"learning_rate", g.learning_rate},
        {"disc_learning_rate", g.disc_learning_rate},
        {"max_gen_step", g.max_gen_step},
        {"max_disc_rotation", g.max_disc_rotation},
        {"update_rule", g.update_rule == UpdateRule::kGeometric ? "geometric" : "plain"},
        {"step_counting", g.step_counting == StepCounting::kPerParameter ? "per-parameter" : "per-update"},
        {"sampling", g.sampling == SamplingMode::kWholeState ? "whole-state" : "branchwise"},
        {"axis_relabel", g.axis_relabel},
        {"c_limit", g.c_limit},
        {"d_bound", g.d_bound},
        {"stall_window", g.stall_window},
        {"stall_tol", g.stall_tol},
        {"g_thresholds", {{"start", g.g_thresholds.start}, {"slope", g.g_thresholds.slope}, {"floor", g.g_thresholds.floor}}},
        {"per_turn_cap", g.per_turn_cap},
        {"noise",
         {{"depolarizing_eps", g.noise.depolarizing_eps},
          {"amplitude_damping_gamma", g.noise.amplitude_damping_gamma},
          {"apply_to", g.noise.apply_to == NoiseTarget::kBoth ? "both" : "generated-only"}}},
        {"seed", g.seed},
    };
    if (g.initial) doc["initial"] = state_to_json(*g.initial);
    return doc;
}

Json sigma_spec_to_json(const TrueStateSpec& spec) {
    Json doc = {{"kind", sigma_kind_name(spec.kind)}};
    if (spec.kind == TrueStateKind::kFixed) doc["bloch"] = vector_to_json(spec.fixed);
    if (spec.kind == TrueStateKind::kBlochBall || spec.kind == TrueStateKind::kHilbertSchmidt)
        doc["seed"] = spec.seed;
    return doc;
}

Json trace_to_json(const GameTrace& trace) {
    Json steps = Json::array();
    for (const StepRecord& s : trace.steps) {
        steps.push_back({{"step", s.step_index},
                         {"round", s.round_index},
                         {"turn", turn_name(s.turn)},
                         {"r", s.params_after.gen.r},
                         {"theta", s.params_after.gen.theta},
                         {"phi", s.params_after.gen.phi},
                         {"beta", s.params_after.meas.beta},
                         {"gamma", s.params_after.meas.gamma},
                         {"p_rho_hat", s.estimate.p_rho_hat},
                         {"p_sigma_hat", s.estimate.p_sigma_hat},
                         {"d_hat", s.estimate.d_hat},
                         {"shots", s.estimate.shots},
                         {"fidelity", s.fidelity_ideal}});
    }
    return {{"schema", kResultSchema},
            {"csv_schema", kCsvSchemaVersion},
            {"config", config_to_json(trace.config)},
            {"sigma", {{"bloch", vector_to_json(trace.sigma.to_bloch())}, {"matrix", matrix_to_json(trace.sigma)}}},
            {"initial", state_to_json(trace.initial)},
            {"termination", termination_name(trace.termination)},
            {"c_step_total", trace.c_step_total},
            {"final_fidelity", trace.final_fidelity},
            {"steps", std::move(steps)}};
}

GameTrace trace_from_json(const Json& doc) {
    if (!doc.is_object() || doc.value("schema", "") != kResultSchema) {
        throw ConfigError("schema", std::string("expected ") + kResultSchema);
    }
    try {
        GameTrace trace;
        trace.config = parse_config(doc.at("config")).game;
        trace.sigma = matrix_from_json(doc.at("sigma").at("matrix"));
        trace.initial = parse_initial(doc.at("initial"));
        trace.termination = parse_termination(doc.at("termination").get<std::string>());
        trace.c_step_total = doc.at("c_step_total").get<int>();
        trace.final_fidelity = doc.at("final_fidelity").get<double>();
        for (const Json& s : doc.at("steps")) {
            StepRecord rec;
            rec.step_index = s.at("step").get<int>();
            rec.round_index = s.at("round").get<int>();
            rec.turn = s.at("turn").get<std::string>() == "D" ? Turn::kDiscriminator : Turn::kGenerator;
            rec.params_after.gen = {s.at("r").get<double>(), s.at("theta").get<double>(), s.at("phi").get<double>()};
            rec.params_after.meas = {s.at("beta").get<double>(), s.at("gamma").get<double>()};
            rec.estimate.p_rho_hat = s.at("p_rho_hat").get<double>();
            rec.estimate.p_sigma_hat = s.at("p_sigma_hat").get<double>();
            rec.estimate.d_hat = s.at("d_hat").get<double>();
            rec.estimate.shots = s.at("shots").get<std::int64_t>();
            rec.fidelity_ideal = s.at("fidelity").get<double>();
            trace.steps.push_back(rec);
        }
        return trace;
    } catch (const Json::exception& e) {
        throw ConfigError("result", std::string("malformed result document: ") + e.what());
    }
}

std::string format_real(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

void write_trajectory_csv(const GameTrace& trace, std::ostream& out) {
    out << kTrajectoryHeader << '\n';
    for (const StepRecord& s : trace.steps) {
        const auto& p = s.params_after;
        out << s.step_index << ',' << s.round_index << ',' << turn_name(s.turn) << ',' << format_real(p.gen.r) << ','
            << format_real(p.gen.theta) << ',' << format_real(p.gen.phi) << ',' << format_real(p.meas.beta) << ','
            << format_real(p.meas.gamma) << ',' << format_real(s.estimate.p_rho_hat) << ','
            << format_real(s.estimate.p_sigma_hat) << ',' << format_real(s.estimate.d_hat) << ','
            << format_real(s.fidelity_ideal) << '\n';
    }
}

void write_tracking_csv(const GameTrace& trace, std::ostream& out) {
    out << kTrackingHeader << '\n';
    for (const StepRecord& s : trace.steps) {
        out << s.step_index << ',' << format_real(s.estimate.p_sigma_hat) << ',' << format_real(s.estimate.p_rho_hat)
            << ',' << format_real(s.estimate.d_hat) << ',' << format_real(s.fidelity_ideal) << '\n';
    }
}

void write_snapshot_csv(const GameTrace& trace, std::span<const int> steps, std::ostream& out) {
    const BlochVector v_sigma = trace.sigma.to_bloch();
    out << kSnapshotHeader << '\n';
    for (const int step : steps) {
        const GameState* state = nullptr;
        if (step == 0) {
            state = &trace.initial;
        } else {
            const auto it = std::find_if(trace.steps.begin(), trace.steps.end(),
                                         [step](const StepRecord& s) { return s.step_index == step; });
            if (it == trace.steps.end()) {
                throw ConfigError("steps", "trace has no step " + std::to_string(step));
            }
            state = &it->params_after;
        }
        out << step;
        write_vector_cells(state_bloch(state->gen), out);
        write_vector_cells(v_sigma, out);
        write_vector_cells(measurement_axis(state->meas), out);
        out << '\n';
    }
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    std::vector<CdfPoint> cdf;
    cdf.reserve(samples.size());
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        cdf.push_back({samples[i], static_cast<double>(i + 1) / n});
    }
    return cdf;
}

void write_cdf_csv(std::span<const CdfPoint> cdf, std::ostream& out) {
    out << kCdfHeader << '\n';
    for (const CdfPoint& p : cdf) out << format_real(p.value) << ',' << format_real(p.cumulative) << '\n';
}

std::string termination_name(Termination t) {
    return t == Termination::kEquilibrium ? "equilibrium" : "budget-exhausted";
}

std::vector<GameTrace> run_batch_games(const ExperimentConfig& config, int count, int jobs) {
    if (count < 1) throw ConfigError("n", "must be at least 1");
    if (jobs < 1) throw ConfigError("jobs", "must be at least 1");
    config.game.validate();

    const DensityMatrix sigma = make_true_state(config.sigma);
    std::vector<GameTrace> traces(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (int k = next++; k < count; k = next++) {
            try {
                GameConfig game = config.game;
                game.seed = config.game.seed + static_cast<std::uint64_t>(k);
                traces[static_cast<std::size_t>(k)] = run_game(sigma, game);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    const int threads = std::min(jobs, count);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return traces;
}

BatchSummary summarize(std::span<const GameTrace> traces, const ExperimentConfig& config) {
    if (traces.empty()) throw std::invalid_argument("summarize: no games");
    BatchSummary s;
    s.games = static_cast<int>(traces.size());
    s.termination_counts = {{"equilibrium", 0}, {"budget-exhausted", 0}};
    std::vector<double> steps;
    std::vector<double> fids;
    for (const GameTrace& t : traces) {
        steps.push_back(t.c_step_total);
        fids.push_back(t.final_fidelity);
        ++s.termination_counts[termination_name(t.termination)];
        s.per_game.push_back({t.config.seed, t.c_step_total, t.final_fidelity, t.termination});
    }
    s.mean_c_step = std::accumulate(steps.begin(), steps.end(), 0.0) / static_cast<double>(steps.size());
    s.mean_fidelity = std::accumulate(fids.begin(), fids.end(), 0.0) / static_cast<double>(fids.size());
    s.cdf_c_step = empirical_cdf(std::move(steps));
    s.cdf_fidelity = empirical_cdf(std::move(fids));
    s.config_echo = config_to_json(config.game);
    s.config_echo["sigma"] = sigma_spec_to_json(config.sigma);
    return s;
}

Json summary_to_json(const BatchSummary& s) {
    auto cdf_json = [](const std::vector<CdfPoint>& cdf) {
        Json arr = Json::array();
        for (const CdfPoint& p : cdf) arr.push_back(Json::array({p.value, p.cumulative}));
        return arr;
    };
    Json games = Json::array();
    for (const GameOutcome& g : s.per_game) {
        games.push_back({{"seed", g.seed},
                         {"c_step", g.c_step},
                         {"final_fidelity", g.final_fidelity},
                         {"termination", termination_name(g.termination)}});
    }
    return {{"schema", kSummarySchema},
            {"games", s.games},
            {"mean_c_step", s.mean_c_step},
            {"mean_fidelity", s.mean_fidelity},
            {"cdf_c_step", cdf_json(s.cdf_c_step)},
            {"cdf_fidelity", cdf_json(s.cdf_fidelity)},
            {"termination_counts", s.termination_counts},
            {"config_echo", s.config_echo},
            {"per_game", std::move(games)}};
}

BatchSummary summary_from_json(const Json& doc) {
    if (!doc.is_object() || doc.value("schema", "") != kSummarySchema) {
        throw ConfigError("schema", std::string("expected ") + kSummarySchema);
    }
    try {
        auto cdf_from = [](const Json& arr) {
            std::vector<CdfPoint> cdf;
            for (const Json& p : arr) cdf.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            return cdf;
        };
        BatchSummary s;
        s.games = doc.at("games").get<int>();
        s.mean_c_step = doc.at("mean_c_step").get<double>();
        s.mean_fidelity = doc.at("mean_fidelity").get<double>();
        s.cdf_c_step = cdf_from(doc.at("cdf_c_step"));
        s.cdf_fidelity = cdf_from(doc.at("cdf_fidelity"));
        s.termination_counts = doc.at("termination_counts").get<std::map<std::string, int>>();
        s.config_echo = doc.at("config_echo");
        for (const Json& g : doc.at("per_game")) {
            s.per_game.push_back({g.at("seed").get<std::uint64_t>(), g.at("c_step").get<int>(),
                                  g.at("final_fidelity").get<double>(),
                                  parse_termination(g.at("termination").get<std::string>())});
        }
        return s;
    } catch (const Json::exception& e) {
        throw ConfigError("summary", std::string("malformed summary document: ") + e.what());
    }
}

int run_single(const RunOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const ExperimentConfig config = resolved(options);
        const GameTrace trace = run_game(make_true_state(config.sigma), config.game);
        ensure_directory(options.out_dir);
        write_json(trace_to_json(trace), options.out_dir / "result.json");
        write_file(options.out_dir / "trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(trace, o); });
        out << "c_step=" << trace.c_step_total << " F=" << format_real(trace.final_fidelity)
            << " termination=" << termination_name(trace.termination) << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitIo;
    }
}

int run_batch(const BatchOptions& options, std::ostream& out, std::ostream& err) {
    try {
        ExperimentConfig config = resolved({options.config, options.out_dir, options.seed});
        const auto traces = run_batch_games(config, options.count, options.jobs);
        const BatchSummary summary = summarize(traces, config);

        ensure_directory(options.out_dir);
        write_json(summary_to_json(summary), options.out_dir / "summary.json");
        write_file(options.out_dir / "cdf_c_step.csv", [&](std::ostream& o) { write_cdf_csv(summary.cdf_c_step, o); });
        write_file(options.out_dir / "cdf_fidelity.csv",
                   [&](std::ostream& o) { write_cdf_csv(summary.cdf_fidelity, o); });
        if (options.emit_traces) {
            const fs::path dir = options.out_dir / "traces";
            ensure_directory(dir);
            for (std::size_t k = 0; k < traces.size(); ++k) {
                std::ostringstream stem;
                stem << "game_" << std::setw(4) << std::setfill('0') << k;
                write_json(trace_to_json(traces[k]), dir / (stem.str() + ".json"));
                write_file(dir / (stem.str() + ".csv"), [&](std::ostream& o) { write_trajectory_csv(traces[k], o); });
            }
        }
        out << "games=" << summary.games << " mean_c_step=" << format_real(summary.mean_c_step)
            << " mean_F=" << format_real(summary.mean_fidelity)
            << " equilibrium=" << summary.termination_counts.at("equilibrium") << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitIo;
    }
}

int emit_plot_data(const PlotOptions& options, std::ostream& err) {
    try {
        if (options.kind != "tracking" && options.kind != "bloch-snapshots" && options.kind != "cdf") {
            throw ConfigError("kind", "expected tracking, bloch-snapshots or cdf, got '" + options.kind + "'");
        }
        const Json doc = read_json(options.in);
        if (options.kind == "cdf") {
            const BatchSummary summary = summary_from_json(doc);
            const std::vector<CdfPoint>* cdf = nullptr;
            if (options.metric == "c_step") cdf = &summary.cdf_c_step;
            else if (options.metric == "fidelity") cdf = &summary.cdf_fidelity;
            else throw ConfigError("metric", "expected c_step or fidelity");
            write_file(options.out, [&](std::ostream& o) { write_cdf_csv(*cdf, o); });
        } else {
            const GameTrace trace = trace_from_json(doc);
            if (options.kind == "tracking") {
                write_file(options.out, [&](std::ostream& o) { write_tracking_csv(trace, o); });
            } else {
                std::vector<int> steps = options.steps;
                if (steps.empty()) {
                    steps.push_back(0);
                    for (const StepRecord& s : trace.steps) steps.push_back(s.step_index);
                }
                std::ostringstream buffer;
                write_snapshot_csv(trace, steps, buffer);
                write_file(options.out, [&](std::ostream& o) { o << buffer.str(); });
            }
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitIo;
    }
}

}  // namespace qgan

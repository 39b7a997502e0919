// qgan_sim: run single games, batches, and emit plot-ready CSV.

#include <iostream>

#include "CLI11.hpp"
#include "qgan/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Single-qubit adversarial learning simulator"};
    app.require_subcommand(1);

    qgan::RunOptions run;
    std::uint64_t run_seed = 0;
    auto* run_cmd = app.add_subcommand("run", "Play one game and write result.json and trajectory.csv");
    run_cmd->add_option("--config", run.config, "JSON configuration file")->required();
    run_cmd->add_option("--out", run.out_dir, "Output directory")->required();
    auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Overrides the config and QGAN_SIM_SEED");

    qgan::BatchOptions batch;
    std::uint64_t batch_seed = 0;
    auto* batch_cmd = app.add_subcommand("batch", "Play independent games against one true state");
    batch_cmd->add_option("--config", batch.config, "JSON configuration file")->required();
    batch_cmd->add_option("--out", batch.out_dir, "Output directory")->required();
    auto* batch_seed_opt = batch_cmd->add_option("--seed", batch_seed, "Base seed; game k uses seed + k");
    batch_cmd->add_option("--n", batch.count, "Number of games")->capture_default_str();
    batch_cmd->add_option("--jobs", batch.jobs, "Worker threads")->capture_default_str();
    batch_cmd->add_flag("--emit-traces", batch.emit_traces, "Also write every game's trace");

    qgan::PlotOptions plot;
    auto* plot_cmd = app.add_subcommand("plot-data", "Turn a result or summary into plot CSV");
    plot_cmd->add_option("--kind", plot.kind, "tracking | bloch-snapshots | cdf")->required();
    plot_cmd->add_option("--in", plot.in, "result.json or summary.json")->required();
    plot_cmd->add_option("--out", plot.out, "CSV file to write")->required();
    plot_cmd->add_option("--steps", plot.steps, "Snapshot step indices (0 = initial)")->delimiter(',');
    plot_cmd->add_option("--metric", plot.metric, "cdf metric: c_step | fidelity")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qgan::kExitConfig;
    }

    if (*run_cmd) {
        if (*run_seed_opt) run.seed = run_seed;
        return qgan::run_single(run, std::cout, std::cerr);
    }
    if (*batch_cmd) {
        if (*batch_seed_opt) batch.seed = batch_seed;
        return qgan::run_batch(batch, std::cout, std::cerr);
    }
    return qgan::emit_plot_data(plot, std::cerr);
}

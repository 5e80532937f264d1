#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aslsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace aslsim;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> repeats;
    std::optional<double> duration_ms;
    std::optional<std::string> protocol;
    std::optional<std::string> qtable;
    std::string out_dir = "out";
    bool full_paper_scale = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "scenario config file (JSON)");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--repeats", flags.repeats, "independent repeats with derived seeds");
    cmd->add_option("--duration-ms", flags.duration_ms, "virtual run time in milliseconds");
    cmd->add_option("--protocol", flags.protocol,
                    "orchestra|orchestra-lb|prilm|rl-asl|rl-asl-lb");
    cmd->add_option("--qtable", flags.qtable, "policy table file");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_flag("--full-paper-scale", flags.full_paper_scale,
                  "use the full 1e8 ms training horizon");
}

ScenarioConfig make_config(const CommonFlags& flags, const std::string& mode) {
    ScenarioConfig cfg;
    if (!flags.config_path.empty()) cfg = load_scenario(flags.config_path);
    cfg.mode = mode;
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.repeats) cfg.repeats = *flags.repeats;
    if (flags.protocol) cfg.protocol = protocol_from_string(*flags.protocol);
    if (flags.qtable) cfg.qtable_path = *flags.qtable;
    if (flags.duration_ms) {
        cfg.duration_ms = *flags.duration_ms;
    } else if (mode == "train") {
        cfg.duration_ms = flags.full_paper_scale ? 1e8 : 1e7;
    }
    return cfg;
}

int cmd_train(const CommonFlags& flags) {
    ScenarioConfig cfg = make_config(flags, "train");
    fs::create_directories(flags.out_dir);
    TrainResult result = run_training(cfg);
    if (result.total_episodes == 0)
        std::cerr << "warning: duration shorter than one episode, model has 0 episodes\n";

    const fs::path model_path = fs::path(flags.out_dir) / (result.model.label + ".qtbl");
    save_table(result.model, model_path);
    write_convergence_csv(result, fs::path(flags.out_dir) / "convergence.csv");
    std::cout << "trained " << result.total_episodes << " episodes (" << to_string(cfg.protocol)
              << ", pattern " << cfg.pattern << ")\n";
    std::cout << "model: " << model_path.string() << "\n";
    return 0;
}

int cmd_fedavg(const std::vector<std::string>& model_paths, const std::string& out_path,
               const std::string& export_csv, const std::string& quantized_out, int scale) {
    std::vector<TrainedModel> models;
    for (const std::string& p : model_paths) models.push_back(load_table(p));
    FedavgResult merged = fedavg(models);
    for (std::size_t i = 0; i < models.size(); ++i)
        std::printf("weight %-24s %.6f (%llu episodes)\n", models[i].label.c_str(), merged.weights[i],
                    static_cast<unsigned long long>(models[i].episodes));

    TrainedModel global{std::move(merged.table), 0, "global", models.front().fingerprint};
    global.episodes = global.table.episodes_trained();
    save_table(global, out_path);
    std::cout << "global table: " << out_path << "\n";
    if (!quantized_out.empty()) {
        const QuantizeResult qr = quantize(global.table, scale);
        save_table_quantized(global, scale, quantized_out);
        std::cout << "quantized table (scale " << scale << "): " << quantized_out << "\n";
        if (qr.argmax_flips > 0)
            std::cerr << "warning: quantization flips the greedy action in " << qr.argmax_flips
                      << " states\n";
    }
    if (!export_csv.empty()) {
        AgentConfig defaults;
        export_table_csv(global.table, defaults.bins, export_csv);
        std::cout << "export: " << export_csv << "\n";
    }
    return 0;
}

int cmd_eval(const CommonFlags& flags) {
    ScenarioConfig cfg = make_config(flags, "eval");
    EvalSummary summary = run_eval(cfg, flags.out_dir);
    std::printf("%-20s %14s %14s\n", "metric", "mean", "ci95_half");
    for (const auto& [name, st] : summary.metrics)
        std::printf("%-20s %14.6g %14.6g\n", name.c_str(), st.mean, st.ci95_half);
    return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& param, const std::vector<double>& values,
              bool no_retrain) {
    ScenarioConfig cfg = make_config(flags, "eval");
    const bool retrain = !no_retrain && protocol_uses_agent(cfg.protocol);
    std::vector<SweepPoint> points = run_sweep(cfg, param, values, retrain);
    fs::create_directories(flags.out_dir);
    write_sweep_csv(param, points, fs::path(flags.out_dir) / "sweep.csv");
    std::printf("%-12s %12s %10s %10s\n", param.c_str(), "latency_ms", "pdr", "rdc");
    for (const SweepPoint& p : points)
        std::printf("%-12g %12.2f %10.4f %10.4f\n", p.value, p.latency_mean_ms, p.pdr, p.rdc);
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_dir) {
    std::vector<ProtocolRow> rows;
    for (const std::string& p : inputs) rows.push_back(report_row_from_json(p));
    write_comparison_files(rows, out_dir);
    std::printf("%-14s %8s %14s %12s %12s\n", "protocol", "pdr", "latency_ms", "total_mw", "rdc");
    for (const ProtocolRow& r : rows)
        std::printf("%-14s %8.4f %14.2f %12.4f %12.4f\n", r.protocol.c_str(), r.pdr,
                    r.latency_mean_ms, r.total_mw, r.rdc);
    std::cout << "comparison files in " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic TSCH unicast simulator with adaptive listening policies"};
    app.require_subcommand(1);

    CommonFlags train_flags, eval_flags, sweep_flags;

    CLI::App* train = app.add_subcommand("train", "train a listening policy and write the model");
    add_common(train, train_flags);

    CLI::App* fed = app.add_subcommand("fedavg", "merge trained models into one global table");
    std::vector<std::string> fed_models;
    std::string fed_out = "global.qtbl";
    std::string fed_export;
    std::string fed_quant;
    int fed_scale = 10;
    fed->add_option("models", fed_models, "trained model files")->required()->expected(-1);
    fed->add_option("--out", fed_out, "output table path");
    fed->add_option("--export-csv", fed_export, "also write a human-readable table dump");
    fed->add_option("--quantized-out", fed_quant, "also write a 16-bit fixed-point table");
    fed->add_option("--scale", fed_scale, "fixed-point scale for --quantized-out");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a protocol and emit trace + metrics");
    add_common(eval, eval_flags);

    CLI::App* sweep = app.add_subcommand("sweep", "retrain/evaluate across parameter values");
    add_common(sweep, sweep_flags);
    std::string sweep_param = "rewards.r_skip";
    std::vector<double> sweep_values;
    bool sweep_no_retrain = false;
    sweep->add_option("--param", sweep_param, "agent parameter path, e.g. rewards.r_skip");
    sweep->add_option("--values", sweep_values, "values to sweep")->required()->expected(-1);
    sweep->add_flag("--no-retrain", sweep_no_retrain, "evaluate the existing table instead of retraining");

    CLI::App* report = app.add_subcommand("report", "cross-protocol comparison from metrics files");
    std::vector<std::string> report_inputs;
    std::string report_out = "report";
    report->add_option("inputs", report_inputs, "metrics.json files")->required()->expected(-1);
    report->add_option("--out", report_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(train_flags);
        if (fed->parsed()) return cmd_fedavg(fed_models, fed_out, fed_export, fed_quant, fed_scale);
        if (eval->parsed()) return cmd_eval(eval_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_flags, sweep_param, sweep_values, sweep_no_retrain);
        if (report->parsed()) return cmd_report(report_inputs, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

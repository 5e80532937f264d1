#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "aslsim/engine.hpp"
#include "aslsim/federate.hpp"
#include "aslsim/metrics.hpp"
#include "aslsim/net_model.hpp"

#include "json.hpp"

namespace aslsim {

// One simulation scenario: topology + traffic + protocol + run parameters.
struct ScenarioConfig {
    std::string topology_name = "simple5";  // empty when inline_nodes is used
    std::vector<NodeSpec> inline_nodes;
    double d_max = 60.0;
    std::string pattern = "periodic";  // high|heterogeneous|sparse|periodic|custom
    std::map<int, TrafficProfile> custom_traffic;
    Protocol protocol = Protocol::orchestra;
    std::string mode = "eval";  // train|eval
    SlotframeConfig slotframe;
    AgentConfig agent;
    double link_success_prob = 1.0;
    std::vector<std::tuple<int, int, double>> link_overrides;  // src, dst, prob
    double duration_ms = 3.6e6;
    std::uint64_t seed = 1;
    std::string qtable_path;
    double warmup_fraction = 0.05;
    int repeats = 1;
};

nlohmann::ordered_json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Throws std::invalid_argument on refused combinations (e.g. prilm with a
// jittered pattern, or an rl protocol evaluated without a table).
void validate_scenario(const ScenarioConfig& cfg);

Topology scenario_topology(const ScenarioConfig& cfg);
std::map<int, TrafficProfile> scenario_traffic(const ScenarioConfig& cfg, const Topology& topo);

nlohmann::ordered_json agent_to_json(const AgentConfig& cfg);
void agent_apply_json(AgentConfig& cfg, const nlohmann::json& j);
void set_agent_param(AgentConfig& cfg, const std::string& path, double value);

// --- training --------------------------------------------------------------

struct TrainResult {
    TrainedModel model;
    // (node, record) sorted by node then episode
    std::vector<std::pair<int, Agent::EpisodeRecord>> convergence;
    std::uint64_t total_episodes = 0;
};

TrainResult run_training(const ScenarioConfig& cfg);
void write_convergence_csv(const TrainResult& result, const std::filesystem::path& path);

// --- evaluation ------------------------------------------------------------

struct EvalResult {
    SlotTrace trace;
    std::map<int, EnergyLedger> ledgers;
    MetricsReport report;
};

// table_override bypasses qtable_path (used by sweeps and tests).
EvalResult run_eval_once(const ScenarioConfig& cfg, std::uint64_t seed,
                         const QTable* table_override = nullptr);

struct SummaryStat {
    double mean = 0.0;
    double ci95_half = 0.0;
};

struct EvalSummary {
    int repeats = 1;
    // insertion-ordered metric name -> stat
    std::vector<std::pair<std::string, SummaryStat>> metrics;
};

// Runs cfg.repeats evaluations with derived seeds, writes trace + metrics per
// repeat plus summary.csv/summary.json under out_dir.
EvalSummary run_eval(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                     const QTable* table_override = nullptr);

// --- sweep -----------------------------------------------------------------

struct SweepPoint {
    double value = 0.0;
    double pdr = 0.0;
    double latency_mean_ms = 0.0;
    double rdc = 0.0;
};

// Retrains (or re-evaluates when retrain=false) per value and evaluates the
// resulting policy; rows mirror the latency/PDR/RDC sensitivity table.
std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg, const std::string& param,
                                  const std::vector<double>& values, bool retrain);
void write_sweep_csv(const std::string& param, const std::vector<SweepPoint>& points,
                     const std::filesystem::path& path);

// --- cross-protocol report ---------------------------------------------------

struct ProtocolRow {
    std::string protocol;
    double pdr = 0.0;
    double latency_mean_ms = 0.0;
    double latency_p95_ms = 0.0;
    double total_mw = 0.0;
    double rx_idle_s = 0.0;
    double rdc = 0.0;
    double lifetime_days = 0.0;
};

ProtocolRow report_row_from_json(const std::filesystem::path& metrics_json);
void write_comparison_files(const std::vector<ProtocolRow>& rows,
                            const std::filesystem::path& out_dir);

// Context written into metrics.json so report inputs are self-describing.
void write_metrics_json_with_context(const MetricsReport& report,
                                     const std::map<std::string, std::string>& context,
                                     const std::filesystem::path& path);

}  // namespace aslsim

#include "aslsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "aslsim/atomic_write.hpp"
#include "aslsim/rng.hpp"

namespace aslsim {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// two-sided 95% Student t quantiles by degrees of freedom
double t95(int df) {
    static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                   2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                   2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                   2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
    if (df < 1) return 0.0;
    if (df <= 30) return table[df - 1];
    return 1.96;
}

SummaryStat summarize(const std::vector<double>& xs) {
    SummaryStat s;
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        s.ci95_half = t95(static_cast<int>(xs.size()) - 1) * sd / std::sqrt(static_cast<double>(xs.size()));
    }
    return s;
}

}  // namespace

nlohmann::ordered_json agent_to_json(const AgentConfig& cfg) {
    return nlohmann::ordered_json{
        {"learning_rate", cfg.learning_rate},
        {"discount", cfg.discount},
        {"eps_initial", cfg.eps_initial},
        {"eps_min", cfg.eps_min},
        {"eps_decay", cfg.eps_decay},
        {"episode_len", cfg.episode_len},
        {"smoothing", cfg.smoothing},
        {"prob_clamp", cfg.prob_clamp},
        {"ratio_max", cfg.ratio_max},
        {"miss_zeta", cfg.miss_zeta},
        {"near_penalty", cfg.near_penalty},
        {"rolling_window", cfg.rolling_window},
        {"rewards",
         {{"success", cfg.rewards.success},
          {"skip", cfg.rewards.skip},
          {"idle_cost", cfg.rewards.idle_cost},
          {"miss_cost", cfg.rewards.miss_cost},
          {"terminal_success", cfg.rewards.terminal_success},
          {"terminal_failure", cfg.rewards.terminal_failure}}},
        {"clamp",
         {{"upper_frac", cfg.clamp.upper_frac},
          {"lower_frac", cfg.clamp.lower_frac},
          {"sigma_min", cfg.clamp.sigma_min}}},
        {"bins",
         {{"interarrival", cfg.bins.interarrival_bins},
          {"distance", cfg.bins.distance_bins},
          {"short_threshold", cfg.bins.short_bin_threshold},
          {"count_cap", cfg.bins.count_cap}}},
    };
}

void agent_apply_json(AgentConfig& cfg, const nlohmann::json& j) {
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("learning_rate", cfg.learning_rate);
    get("discount", cfg.discount);
    get("eps_initial", cfg.eps_initial);
    get("eps_min", cfg.eps_min);
    get("eps_decay", cfg.eps_decay);
    get("episode_len", cfg.episode_len);
    get("smoothing", cfg.smoothing);
    get("prob_clamp", cfg.prob_clamp);
    get("ratio_max", cfg.ratio_max);
    get("miss_zeta", cfg.miss_zeta);
    get("near_penalty", cfg.near_penalty);
    get("rolling_window", cfg.rolling_window);
    if (j.contains("rewards")) {
        const auto& r = j.at("rewards");
        auto getr = [&](const char* key, double& field) {
            if (r.contains(key)) field = r.at(key).get<double>();
        };
        getr("success", cfg.rewards.success);
        getr("skip", cfg.rewards.skip);
        getr("idle_cost", cfg.rewards.idle_cost);
        getr("miss_cost", cfg.rewards.miss_cost);
        getr("terminal_success", cfg.rewards.terminal_success);
        getr("terminal_failure", cfg.rewards.terminal_failure);
    }
    if (j.contains("clamp")) {
        const auto& c = j.at("clamp");
        if (c.contains("upper_frac")) cfg.clamp.upper_frac = c.at("upper_frac").get<double>();
        if (c.contains("lower_frac")) cfg.clamp.lower_frac = c.at("lower_frac").get<double>();
        if (c.contains("sigma_min")) cfg.clamp.sigma_min = c.at("sigma_min").get<double>();
    }
    if (j.contains("bins")) {
        const auto& b = j.at("bins");
        if (b.contains("interarrival")) cfg.bins.interarrival_bins = b.at("interarrival").get<int>();
        if (b.contains("distance")) cfg.bins.distance_bins = b.at("distance").get<int>();
        if (b.contains("short_threshold")) cfg.bins.short_bin_threshold = b.at("short_threshold").get<int>();
        if (b.contains("count_cap")) cfg.bins.count_cap = b.at("count_cap").get<int>();
    }
}

void set_agent_param(AgentConfig& cfg, const std::string& path, double value) {
    if (path == "learning_rate" || path == "alpha") cfg.learning_rate = value;
    else if (path == "discount" || path == "gamma") cfg.discount = value;
    else if (path == "eps_initial") cfg.eps_initial = value;
    else if (path == "eps_min") cfg.eps_min = value;
    else if (path == "eps_decay") cfg.eps_decay = value;
    else if (path == "episode_len") cfg.episode_len = static_cast<int>(value);
    else if (path == "smoothing" || path == "lambda") cfg.smoothing = value;
    else if (path == "prob_clamp") cfg.prob_clamp = value;
    else if (path == "ratio_max") cfg.ratio_max = value;
    else if (path == "miss_zeta") cfg.miss_zeta = value;
    else if (path == "near_penalty") cfg.near_penalty = value;
    else if (path == "rolling_window") cfg.rolling_window = static_cast<int>(value);
    else if (path == "rewards.success" || path == "rewards.r_succ") cfg.rewards.success = value;
    else if (path == "rewards.skip" || path == "rewards.r_skip") cfg.rewards.skip = value;
    else if (path == "rewards.idle_cost" || path == "rewards.c_idle") cfg.rewards.idle_cost = value;
    else if (path == "rewards.miss_cost" || path == "rewards.c_miss") cfg.rewards.miss_cost = value;
    else if (path == "rewards.terminal_success") cfg.rewards.terminal_success = value;
    else if (path == "rewards.terminal_failure") cfg.rewards.terminal_failure = value;
    else if (path == "clamp.upper_frac") cfg.clamp.upper_frac = value;
    else if (path == "clamp.lower_frac") cfg.clamp.lower_frac = value;
    else if (path == "clamp.sigma_min") cfg.clamp.sigma_min = value;
    else throw std::invalid_argument("unknown agent parameter path: " + path);
}

nlohmann::ordered_json scenario_to_json(const ScenarioConfig& cfg) {
    nlohmann::ordered_json j;
    if (!cfg.topology_name.empty()) {
        j["topology"] = cfg.topology_name;
    } else {
        nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
        for (const NodeSpec& n : cfg.inline_nodes) {
            nlohmann::ordered_json jn{{"id", n.id}, {"role", to_string(n.role)}, {"x", n.x}, {"y", n.y}};
            if (n.parent_id) jn["parent"] = *n.parent_id;
            nodes.push_back(std::move(jn));
        }
        j["topology"] = {{"d_max", cfg.d_max}, {"nodes", std::move(nodes)}};
    }
    j["pattern"] = cfg.pattern;
    if (cfg.pattern == "custom") {
        nlohmann::ordered_json t;
        for (const auto& [id, p] : cfg.custom_traffic)
            t[std::to_string(id)] = {{"interval_s", p.mean_interval_s},
                                     {"jitter_fraction", p.jitter_fraction},
                                     {"jittered", p.jittered}};
        j["custom_traffic"] = std::move(t);
    }
    j["protocol"] = to_string(cfg.protocol);
    j["mode"] = cfg.mode;
    j["slotframe"] = {{"length", cfg.slotframe.length},
                      {"timeslot_ms", cfg.slotframe.timeslot_ms},
                      {"channel_offsets", cfg.slotframe.channel_offsets},
                      {"max_retries", cfg.slotframe.max_retries},
                      {"queue_capacity", cfg.slotframe.queue_capacity},
                      {"overhead_duty", cfg.slotframe.overhead_duty}};
    j["agent"] = agent_to_json(cfg.agent);
    j["link_success_prob"] = cfg.link_success_prob;
    if (!cfg.link_overrides.empty()) {
        nlohmann::ordered_json o = nlohmann::ordered_json::array();
        for (const auto& [src, dst, p] : cfg.link_overrides) o.push_back({src, dst, p});
        j["link_overrides"] = std::move(o);
    }
    j["duration_ms"] = cfg.duration_ms;
    j["seed"] = cfg.seed;
    if (!cfg.qtable_path.empty()) j["qtable"] = cfg.qtable_path;
    j["warmup_fraction"] = cfg.warmup_fraction;
    j["repeats"] = cfg.repeats;
    return j;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    ScenarioConfig cfg;
    if (j.contains("topology")) {
        const auto& t = j.at("topology");
        if (t.is_string()) {
            cfg.topology_name = t.get<std::string>();
        } else {
            cfg.topology_name.clear();
            cfg.d_max = t.value("d_max", 60.0);
            for (const auto& jn : t.at("nodes")) {
                NodeSpec n;
                n.id = jn.at("id").get<int>();
                n.role = node_role_from_string(jn.at("role").get<std::string>());
                n.x = jn.value("x", 0.0);
                n.y = jn.value("y", 0.0);
                if (jn.contains("parent")) n.parent_id = jn.at("parent").get<int>();
                cfg.inline_nodes.push_back(n);
            }
        }
    }
    cfg.pattern = j.value("pattern", cfg.pattern);
    if (j.contains("custom_traffic")) {
        for (const auto& [key, jp] : j.at("custom_traffic").items()) {
            TrafficProfile p;
            p.mean_interval_s = jp.at("interval_s").get<double>();
            p.jitter_fraction = jp.value("jitter_fraction", 0.05);
            p.jittered = jp.value("jittered", true);
            cfg.custom_traffic[std::stoi(key)] = p;
        }
    }
    if (j.contains("protocol")) cfg.protocol = protocol_from_string(j.at("protocol").get<std::string>());
    cfg.mode = j.value("mode", cfg.mode);
    if (j.contains("slotframe")) {
        const auto& s = j.at("slotframe");
        cfg.slotframe.length = s.value("length", cfg.slotframe.length);
        cfg.slotframe.timeslot_ms = s.value("timeslot_ms", cfg.slotframe.timeslot_ms);
        cfg.slotframe.channel_offsets = s.value("channel_offsets", cfg.slotframe.channel_offsets);
        cfg.slotframe.max_retries = s.value("max_retries", cfg.slotframe.max_retries);
        cfg.slotframe.queue_capacity = s.value("queue_capacity", cfg.slotframe.queue_capacity);
        cfg.slotframe.overhead_duty = s.value("overhead_duty", cfg.slotframe.overhead_duty);
    }
    if (j.contains("agent")) agent_apply_json(cfg.agent, j.at("agent"));
    cfg.link_success_prob = j.value("link_success_prob", cfg.link_success_prob);
    if (j.contains("link_overrides")) {
        for (const auto& o : j.at("link_overrides"))
            cfg.link_overrides.emplace_back(o.at(0).get<int>(), o.at(1).get<int>(), o.at(2).get<double>());
    }
    cfg.duration_ms = j.value("duration_ms", cfg.duration_ms);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.qtable_path = j.value("qtable", cfg.qtable_path);
    cfg.warmup_fraction = j.value("warmup_fraction", cfg.warmup_fraction);
    cfg.repeats = j.value("repeats", cfg.repeats);
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read config " + path.string());
    nlohmann::json j;
    is >> j;
    return scenario_from_json(j);
}

Topology scenario_topology(const ScenarioConfig& cfg) {
    if (!cfg.topology_name.empty()) return builtin_topology(cfg.topology_name);
    return build_topology(cfg.inline_nodes, cfg.d_max);
}

std::map<int, TrafficProfile> scenario_traffic(const ScenarioConfig& cfg, const Topology& topo) {
    if (cfg.pattern == "custom") {
        std::map<int, TrafficProfile> out;
        for (const auto& [id, p] : cfg.custom_traffic) {
            if (!topo.has_node(id) || id == topo.sink_id()) continue;
            out[id] = p;
        }
        return out;
    }
    return traffic_pattern(cfg.pattern, topo);
}

void validate_scenario(const ScenarioConfig& cfg) {
    if (cfg.mode != "train" && cfg.mode != "eval")
        throw std::invalid_argument("mode must be train or eval, got " + cfg.mode);
    cfg.slotframe.validate();
    cfg.agent.validate();
    if (cfg.duration_ms <= 0.0) throw std::invalid_argument("duration_ms must be positive");
    if (cfg.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (cfg.warmup_fraction < 0.0 || cfg.warmup_fraction >= 1.0)
        throw std::invalid_argument("warmup_fraction out of [0,1)");
    if (cfg.mode == "train" && !protocol_uses_agent(cfg.protocol))
        throw std::invalid_argument("train mode requires an rl protocol");

    const Topology topo = scenario_topology(cfg);
    const auto traffic = scenario_traffic(cfg, topo);
    if (cfg.protocol == Protocol::prilm) {
        for (const auto& [id, p] : traffic) {
            if (p.jittered)
                throw std::invalid_argument(
                    "prilm relies on piggybacked deterministic timing and is only applicable to the "
                    "periodic (non-jittered) pattern; pattern '" +
                    cfg.pattern + "' is jittered");
        }
    }
}

namespace {

std::int64_t duration_slots(const ScenarioConfig& cfg) {
    return std::llround(cfg.duration_ms / cfg.slotframe.timeslot_ms);
}

EngineOptions engine_options(const ScenarioConfig& cfg, std::uint64_t seed, bool training,
                             const QTable* table) {
    EngineOptions opt;
    opt.protocol = cfg.protocol;
    opt.slotframe = cfg.slotframe;
    opt.agent = cfg.agent;
    opt.frozen_table = table;
    opt.training = training;
    opt.seed = seed;
    opt.link_success_prob = cfg.link_success_prob;
    for (const auto& [src, dst, p] : cfg.link_overrides) opt.link_success_overrides[{src, dst}] = p;
    opt.warmup_end_asn =
        training ? 0 : std::llround(static_cast<double>(duration_slots(cfg)) * cfg.warmup_fraction);
    opt.record_trace = !training;
    return opt;
}

}  // namespace

TrainResult run_training(const ScenarioConfig& cfg) {
    if (cfg.mode != "train") throw std::invalid_argument("run_training requires mode=train");
    validate_scenario(cfg);
    const Topology topo = scenario_topology(cfg);
    auto traffic = scenario_traffic(cfg, topo);

    Engine engine(topo, traffic, engine_options(cfg, cfg.seed, /*training=*/true, nullptr));
    engine.run(duration_slots(cfg));

    TrainResult result;
    std::vector<TrainedModel> parts;
    const std::uint64_t fp = cfg.agent.fingerprint();
    for (const Engine::NodeModel& nm : engine.node_models()) {
        result.total_episodes += nm.episodes;
        if (nm.episodes > 0)
            parts.push_back(TrainedModel{*nm.table, nm.episodes, "node" + std::to_string(nm.node), fp});
        const Agent* agent = engine.agent_for(nm.node);
        for (const Agent::EpisodeRecord& rec : agent->episode_log())
            result.convergence.emplace_back(nm.node, rec);
    }
    std::sort(result.convergence.begin(), result.convergence.end(),
              [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first < b.first;
                  return a.second.episode < b.second.episode;
              });

    if (parts.empty()) {
        result.model = TrainedModel{QTable(cfg.agent.bins.state_count()), 0, cfg.pattern, fp};
        result.model.table.set_mode(QTable::Mode::frozen);
    } else {
        FedavgResult merged = fedavg(parts);
        result.model = TrainedModel{std::move(merged.table), result.total_episodes, cfg.pattern, fp};
    }
    return result;
}

void write_convergence_csv(const TrainResult& result, const std::filesystem::path& path) {
    write_file_atomic(path, /*binary=*/false, [&](std::ostream& os) {
        os << "node,episode,return,rolling_mean,epsilon,succeeded\n";
        for (const auto& [node, rec] : result.convergence) {
            os << node << ',' << rec.episode << ',' << fmt(rec.episode_return) << ','
               << fmt(rec.rolling_mean) << ',' << fmt(rec.epsilon) << ',' << (rec.succeeded ? 1 : 0)
               << "\n";
        }
    });
}

EvalResult run_eval_once(const ScenarioConfig& cfg, std::uint64_t seed, const QTable* table_override) {
    validate_scenario(cfg);
    const Topology topo = scenario_topology(cfg);
    auto traffic = scenario_traffic(cfg, topo);

    TrainedModel loaded;
    const QTable* table = table_override;
    if (protocol_uses_agent(cfg.protocol) && !table) {
        if (cfg.qtable_path.empty())
            throw std::invalid_argument("rl protocols need --qtable in eval mode");
        loaded = load_table(cfg.qtable_path);
        if (loaded.table.states() != static_cast<std::size_t>(cfg.agent.bins.state_count()))
            throw std::invalid_argument("qtable dimensions do not match the agent bin configuration");
        table = &loaded.table;
    }

    Engine engine(topo, traffic, engine_options(cfg, seed, /*training=*/false, table));
    engine.run(duration_slots(cfg));

    EvalResult result;
    result.ledgers = engine.ledgers();
    result.trace = engine.release_trace();
    result.report = build_report(result.trace, topo, result.ledgers);
    return result;
}

EvalSummary run_eval(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                     const QTable* table_override) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::vector<std::pair<std::string, std::vector<double>>> series{
        {"pdr", {}},           {"latency_mean_ms", {}}, {"latency_median_ms", {}},
        {"latency_p95_ms", {}}, {"latency_p99_ms", {}},  {"total_mw", {}},
        {"rdc", {}},           {"rx_idle_s", {}},       {"rx_idle_slots", {}},
        {"lifetime_days", {}},
    };

    for (int r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t seed = derive_seed(cfg.seed, SeedDomain::repeat, static_cast<std::uint64_t>(r));
        EvalResult res = run_eval_once(cfg, seed, table_override);

        const fs::path rdir = cfg.repeats == 1 ? out_dir : out_dir / ("repeat_" + std::to_string(r));
        fs::create_directories(rdir);
        write_file_atomic(rdir / "trace.txt", /*binary=*/false,
                          [&](std::ostream& os) { res.trace.write(os); });
        write_report_csv(res.report, rdir / "metrics.csv");
        write_metrics_json_with_context(
            res.report,
            {{"protocol", to_string(cfg.protocol)},
             {"topology", cfg.topology_name.empty() ? "inline" : cfg.topology_name},
             {"pattern", cfg.pattern},
             {"seed", std::to_string(seed)}},
            rdir / "metrics.json");

        const MetricsReport& rep = res.report;
        series[0].second.push_back(rep.pdr);
        series[1].second.push_back(rep.latency.mean_ms);
        series[2].second.push_back(rep.latency.median_ms);
        series[3].second.push_back(rep.latency.p95_ms);
        series[4].second.push_back(rep.latency.p99_ms);
        series[5].second.push_back(rep.network_power.total_mw);
        series[6].second.push_back(rep.network_rdc);
        series[7].second.push_back(rep.network_rx_idle_s);
        series[8].second.push_back(static_cast<double>(rep.network_rx_idle_slots));
        series[9].second.push_back(rep.network_lifetime_days);
    }

    EvalSummary summary;
    summary.repeats = cfg.repeats;
    for (const auto& [name, xs] : series) summary.metrics.emplace_back(name, summarize(xs));

    write_file_atomic(out_dir / "summary.csv", /*binary=*/false, [&](std::ostream& os) {
        os << "metric,mean,ci95_half\n";
        for (const auto& [name, st] : summary.metrics)
            os << name << ',' << fmt(st.mean) << ',' << fmt(st.ci95_half) << "\n";
    });
    {
        nlohmann::ordered_json j;
        j["protocol"] = to_string(cfg.protocol);
        j["repeats"] = cfg.repeats;
        for (const auto& [name, st] : summary.metrics)
            j["metrics"][name] = {{"mean", st.mean}, {"ci95_half", st.ci95_half}};
        write_file_atomic(out_dir / "summary.json", /*binary=*/false,
                          [&](std::ostream& os) { os << j.dump(2) << "\n"; });
    }
    return summary;
}

std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg, const std::string& param,
                                  const std::vector<double>& values, bool retrain) {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
    std::vector<SweepPoint> points;
    for (double v : values) {
        ScenarioConfig point_cfg = cfg;
        point_cfg.mode = "eval";
        set_agent_param(point_cfg.agent, param, v);

        QTable trained(point_cfg.agent.bins.state_count());
        const QTable* override_table = nullptr;
        if (retrain && protocol_uses_agent(cfg.protocol)) {
            ScenarioConfig train_cfg = point_cfg;
            train_cfg.mode = "train";
            train_cfg.qtable_path.clear();
            TrainResult tr = run_training(train_cfg);
            trained = std::move(tr.model.table);
            override_table = &trained;
        }

        EvalResult res = run_eval_once(point_cfg, derive_seed(point_cfg.seed, SeedDomain::repeat, 0),
                                       override_table);
        points.push_back(SweepPoint{v, res.report.pdr, res.report.latency.mean_ms, res.report.network_rdc});
    }
    return points;
}

void write_sweep_csv(const std::string& param, const std::vector<SweepPoint>& points,
                     const std::filesystem::path& path) {
    write_file_atomic(path, /*binary=*/false, [&](std::ostream& os) {
        os << param << ",latency_ms,pdr,rdc\n";
        for (const SweepPoint& p : points)
            os << fmt(p.value) << ',' << fmt(p.latency_mean_ms) << ',' << fmt(p.pdr) << ','
               << fmt(p.rdc) << "\n";
    });
}

void write_metrics_json_with_context(const MetricsReport& report,
                                     const std::map<std::string, std::string>& context,
                                     const std::filesystem::path& path) {
    write_report_json(report, path);
    // re-open and prepend context block, keeping stable key order
    std::ifstream is(path);
    nlohmann::ordered_json body;
    is >> body;
    is.close();
    nlohmann::ordered_json j;
    j["scenario"] = context;
    for (auto& [k, v] : body.items()) j[k] = v;
    write_file_atomic(path, /*binary=*/false, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
}

ProtocolRow report_row_from_json(const std::filesystem::path& metrics_json) {
    std::ifstream is(metrics_json);
    if (!is) throw std::runtime_error("missing report input: " + metrics_json.string());
    nlohmann::json j;
    is >> j;
    ProtocolRow row;
    row.protocol = j.contains("scenario") ? j["scenario"].value("protocol", "?") : "?";
    row.pdr = j.at("pdr").get<double>();
    row.latency_mean_ms = j.at("latency_ms").at("mean").get<double>();
    row.latency_p95_ms = j.at("latency_ms").at("p95").get<double>();
    row.total_mw = j.at("network").at("power").at("total_mw").get<double>();
    row.rx_idle_s = j.at("network").at("rx_idle_s").get<double>();
    row.rdc = j.at("network").at("rdc").get<double>();
    row.lifetime_days = j.at("network").at("lifetime_days").get<double>();
    return row;
}

void write_comparison_files(const std::vector<ProtocolRow>& rows, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    write_file_atomic(out_dir / "comparison.csv", /*binary=*/false, [&](std::ostream& os) {
        os << "protocol,pdr,latency_mean_ms,latency_p95_ms,total_mw,rx_idle_s,rdc,lifetime_days\n";
        for (const ProtocolRow& r : rows)
            os << r.protocol << ',' << fmt(r.pdr) << ',' << fmt(r.latency_mean_ms) << ','
               << fmt(r.latency_p95_ms) << ',' << fmt(r.total_mw) << ',' << fmt(r.rx_idle_s) << ','
               << fmt(r.rdc) << ',' << fmt(r.lifetime_days) << "\n";
    });
    {
        double max_pdr = 0.0, max_lat = 0.0, max_pow = 0.0;
        for (const ProtocolRow& r : rows) {
            max_pdr = std::max(max_pdr, r.pdr);
            max_lat = std::max(max_lat, r.latency_mean_ms);
            max_pow = std::max(max_pow, r.total_mw);
        }
        auto norm = [](double v, double m) { return m > 0.0 ? v / m : 1.0; };
        write_file_atomic(out_dir / "tradeoff.csv", /*binary=*/false, [&](std::ostream& os) {
            os << "protocol,pdr_norm,latency_norm,power_norm\n";
            for (const ProtocolRow& r : rows)
                os << r.protocol << ',' << fmt(norm(r.pdr, max_pdr)) << ','
                   << fmt(norm(r.latency_mean_ms, max_lat)) << ','
                   << fmt(norm(r.total_mw, max_pow)) << "\n";
        });
    }
    write_file_atomic(out_dir / "pdr_bar.csv", /*binary=*/false, [&](std::ostream& os) {
        os << "protocol,pdr\n";
        for (const ProtocolRow& r : rows) os << r.protocol << ',' << fmt(r.pdr) << "\n";
    });
    write_file_atomic(out_dir / "latency.csv", /*binary=*/false, [&](std::ostream& os) {
        os << "protocol,mean_ms,p95_ms\n";
        for (const ProtocolRow& r : rows)
            os << r.protocol << ',' << fmt(r.latency_mean_ms) << ',' << fmt(r.latency_p95_ms)
               << "\n";
    });
    write_file_atomic(out_dir / "power_rx_idle.csv", /*binary=*/false, [&](std::ostream& os) {
        os << "protocol,total_mw,rx_idle_s,rdc\n";
        for (const ProtocolRow& r : rows)
            os << r.protocol << ',' << fmt(r.total_mw) << ',' << fmt(r.rx_idle_s) << ','
               << fmt(r.rdc) << "\n";
    });
}

}  // namespace aslsim

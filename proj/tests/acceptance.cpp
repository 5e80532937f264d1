// Acceptance suite: runs every criterion end to end and prints one
// pass/fail line each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "aslsim/agent.hpp"
#include "aslsim/energy.hpp"
#include "aslsim/engine.hpp"
#include "aslsim/federate.hpp"
#include "aslsim/metrics.hpp"
#include "aslsim/rng.hpp"
#include "aslsim/scenario.hpp"

using namespace aslsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void run_criterion(int id, const std::string& name, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = fn();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s (%.2fs) %s\n", out.pass ? "PASS" : "FAIL", id, name.c_str(),
                secs, out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

// shared fixture: per-pattern models trained on simple5, merged into one table
struct Fixture {
    fs::path dir;
    TrainedModel global;
    TrainResult periodic_training;

    void build() {
        dir = fs::temp_directory_path() / "aslsim_acceptance";
        fs::create_directories(dir);
        std::vector<TrainedModel> models;
        for (const char* pattern : {"high", "heterogeneous", "sparse", "periodic"}) {
            ScenarioConfig cfg;
            cfg.topology_name = "simple5";
            cfg.pattern = pattern;
            cfg.protocol = Protocol::rl_asl;
            cfg.mode = "train";
            cfg.duration_ms = 1e7;
            cfg.seed = 7;
            TrainResult r = run_training(cfg);
            if (std::string(pattern) == "periodic") periodic_training = r;
            models.push_back(std::move(r.model));
        }
        FedavgResult merged = fedavg(models);
        global = TrainedModel{std::move(merged.table), merged.table.episodes_trained(), "global",
                              models.front().fingerprint};
        save_table(global, dir / "global.qtbl");
    }
};

Fixture g_fixture;

ScenarioConfig eval_config(const std::string& topology, const std::string& pattern, Protocol proto,
                           std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.topology_name = topology;
    cfg.pattern = pattern;
    cfg.protocol = proto;
    cfg.mode = "eval";
    cfg.duration_ms = 3.6e6;  // one hour of virtual time
    cfg.seed = seed;
    return cfg;
}

// --- criteria ----------------------------------------------------------------

Outcome c1_encoding_bijection() {
    BinConfig bins;
    if (bins.state_count() != 640) return {false, "state space is not 640"};
    int max_index = -1;
    for (int b = 0; b < bins.interarrival_bins; ++b)
        for (int cs = 0; cs <= bins.count_cap; ++cs)
            for (int d = 0; d < bins.distance_bins; ++d)
                for (int cn = 0; cn <= bins.count_cap; ++cn) {
                    const int s = encode_state(b, cs, d, cn, bins);
                    const auto parts = decode_state(s, bins);
                    if (parts[0] != b || parts[1] != cs || parts[2] != d || parts[3] != cn)
                        return {false, fmt("decode mismatch at state %d", s)};
                    max_index = std::max(max_index, s);
                }
    for (int s = 0; s < 640; ++s) {
        const auto parts = decode_state(s, bins);
        if (encode_state(parts[0], parts[1], parts[2], parts[3], bins) != s)
            return {false, fmt("encode mismatch at state %d", s)};
    }
    if (max_index != 639) return {false, fmt("max index %d", max_index)};
    return {true, "640 states round-trip, max index 639"};
}

Outcome c2_expected_reward_exactness() {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        RewardConfig r;
        r.success = uniform01(rng) * 4.0;
        r.skip = uniform01(rng) * 2.0;
        r.idle_cost = -uniform01(rng) * 2.0;
        r.miss_cost = -uniform01(rng) * 4.0;
        const double p = 0.001 + 0.998 * uniform01(rng);
        // independent closed form
        const double skip_ref = p * r.miss_cost + (1.0 - p) * r.skip;
        const double listen_ref = p * r.success + (1.0 - p) * r.idle_cost;
        const double ds = std::abs(expected_reward(RxAction::skip_rx, p, r) - skip_ref);
        const double dl = std::abs(expected_reward(RxAction::listen_rx, p, r) - listen_ref);
        const double rel = std::max(ds / std::max(1e-30, std::abs(skip_ref)),
                                    dl / std::max(1e-30, std::abs(listen_ref)));
        worst = std::max(worst, rel);
        if (rel > 1e-12) return {false, fmt("relative error %.3e", rel)};
    }
    RewardConfig table2;
    const double gap = std::abs(expected_reward(RxAction::skip_rx, 1.0 / 3.0, table2) -
                                expected_reward(RxAction::listen_rx, 1.0 / 3.0, table2));
    if (gap > 1e-9) return {false, fmt("indifference gap %.3e at p=1/3", gap)};
    return {true, fmt("worst relative error %.2e, indifference gap %.2e", worst, gap)};
}

Outcome c3_q_learning_oracle() {
    // deterministic 2-state 2-action MDP
    auto next_state = [](int s, int a) { return a == 0 ? s : 1 - s; };
    auto reward = [](int s, int a) {
        static const double r[2][2] = {{1.0, 0.0}, {-1.0, 2.0}};
        return r[s][a];
    };
    const double gamma = 0.9;

    // value-iteration oracle
    double qstar[2][2] = {};
    for (int it = 0; it < 2000; ++it) {
        double next[2][2];
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a) {
                const int ns = next_state(s, a);
                next[s][a] = reward(s, a) + gamma * std::max(qstar[ns][0], qstar[ns][1]);
            }
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a) qstar[s][a] = next[s][a];
    }

    QTable q(2);
    std::mt19937_64 rng(55);
    int s = 0;
    for (int step = 0; step < 100000; ++step) {
        const RxAction act = select_action(q, s, 0.3, rng);
        const int a = static_cast<int>(act);
        const int ns = next_state(s, a);
        q_update(q, s, act, reward(s, a), ns, 0.15, gamma);
        s = ns;
    }
    double err = 0.0;
    for (int st = 0; st < 2; ++st)
        for (int a = 0; a < 2; ++a)
            err = std::max(err, std::abs(static_cast<double>(q.at(st, static_cast<RxAction>(a))) -
                                         qstar[st][a]));
    if (err > 0.05) return {false, fmt("inf-norm error %.4f", err)};
    return {true, fmt("inf-norm error %.4f after 1e5 steps", err)};
}

Outcome c4_probability_properties() {
    std::mt19937_64 rng(202);
    ClampConfig clamp;
    for (int i = 0; i < 100000; ++i) {
        const double mu = 50.0 + uniform01(rng) * 5000.0;
        NeighborStats st;
        st.last_asn = static_cast<std::int64_t>(uniform01(rng) * 100000.0);
        st.mean_interval = mu;
        st.interval_var = uniform01(rng) * mu * mu * 0.25;
        st.expected_asn = static_cast<double>(st.last_asn) + mu;

        // on-lattice slots peak at exactly 1
        const int k = static_cast<int>(uniform01(rng) * 5.0);
        if (std::abs(mu - std::floor(mu)) < 1e-12) {
            const auto on = static_cast<std::int64_t>(st.expected_asn + k * mu);
            if (neighbor_probability(st, on, clamp) != 1.0)
                return {false, "p != 1 at a lattice instant"};
        }
        // off-lattice slots stay below 1 once d is half a sigma out
        const double sigma = clamp_sigma(st.mean_interval, std::sqrt(st.interval_var), clamp);
        const auto off = static_cast<std::int64_t>(st.expected_asn + sigma);
        const double d_off = distance_to_nearest(st, off);
        if (d_off > 0.5 * sigma && neighbor_probability(st, off, clamp) >= 1.0)
            return {false, "p = 1 away from the lattice"};
    }

    // kernel monotone in d for fixed sigma
    NeighborStats st;
    st.last_asn = 0;
    st.mean_interval = 1000.0;
    st.interval_var = 2500.0;
    st.expected_asn = 1000.0;
    double prev = 2.0;
    for (int d = 0; d <= 500; ++d) {
        const double p = neighbor_probability(st, 1000 + d, clamp);
        if (p > prev + 1e-15) return {false, fmt("kernel not monotone at d=%d", d)};
        prev = p;
    }

    // aggregation clamps and is monotone in added neighbors
    std::vector<double> probs;
    double none = 1.0;
    double prev_agg = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double p = uniform01(rng);
        probs.push_back(p);
        none *= 1.0 - p;
        const double agg = 1.0 - none;
        if (agg + 1e-15 < prev_agg) return {false, "aggregate decreased when adding a neighbor"};
        prev_agg = agg;
        const double clamped = aggregate_probability(probs, 1e-3);
        if (clamped < 0.001 || clamped > 0.999) return {false, "aggregate clamp violated"};
    }
    std::vector<double> hot{1.0, 1.0};
    std::vector<double> cold{0.0};
    if (aggregate_probability(hot, 1e-3) != 0.999) return {false, "upper clamp"};
    if (aggregate_probability(cold, 1e-3) != 0.001) return {false, "lower clamp"};
    return {true, "kernel peak/monotonicity and aggregation clamps hold"};
}

Outcome c5_fedavg() {
    std::mt19937_64 rng(303);
    std::vector<TrainedModel> models;
    for (int i = 0; i < 3; ++i) {
        TrainedModel m{QTable(640), static_cast<std::uint64_t>(100 * (i + 1)),
                       "m" + std::to_string(i), 9};
        for (float& v : m.table.raw()) v = static_cast<float>(uniform01(rng) * 8.0 - 4.0);
        models.push_back(std::move(m));
    }
    FedavgResult r1 = fedavg(models);
    // weighted-mean exactness against a direct computation
    for (std::size_t e = 0; e < 640 * 2; ++e) {
        const double ref = (100.0 * models[0].table.raw()[e] + 200.0 * models[1].table.raw()[e] +
                            300.0 * models[2].table.raw()[e]) /
                           600.0;
        if (std::abs(static_cast<double>(r1.table.raw()[e]) - ref) > 1e-6)
            return {false, "weighted mean mismatch"};
    }
    std::vector<TrainedModel> perm{models[2], models[0], models[1]};
    FedavgResult r2 = fedavg(perm);
    if (r1.table.raw() != r2.table.raw()) return {false, "permutation changed the result"};
    FedavgResult same = fedavg({models[0], models[0]});
    if (same.table.raw() != models[0].table.raw()) return {false, "not idempotent"};
    double wsum = 0.0;
    for (double w : r1.weights) wsum += w;
    if (std::abs(wsum - 1.0) > 1e-15) return {false, "weights do not sum to 1"};
    return {true, "weighted mean exact, permutation invariant, idempotent"};
}

Outcome c6_quantization() {
    std::mt19937_64 rng(404);
    QTable q(640);
    for (float& v : q.raw()) v = static_cast<float>(uniform01(rng) * 66.8 - 33.4);
    QuantizeResult qr = quantize(q, 10);
    QTable back = dequantize(qr.table);
    double worst = 0.0;
    for (std::size_t i = 0; i < q.raw().size(); ++i)
        worst = std::max(worst, std::abs(static_cast<double>(back.raw()[i]) -
                                         static_cast<double>(q.raw()[i])));
    if (worst > 0.05 + 1e-9) return {false, fmt("round-trip error %.4f", worst)};

    TrainedModel m{std::move(q), 1, "sz", 9};
    const fs::path pf = g_fixture.dir / "size_full.qtbl";
    const fs::path pq = g_fixture.dir / "size_quant.qtbl";
    save_table(m, pf);
    save_table_quantized(m, 10, pq);
    const double full = static_cast<double>(fs::file_size(pf));
    const double quant = static_cast<double>(fs::file_size(pq));
    if (full < 5120.0 * 0.9 || full > 5120.0 * 1.1) return {false, fmt("full file %.0f B", full)};
    if (quant < 2560.0 * 0.9 || quant > 2560.0 * 1.1) return {false, fmt("quant file %.0f B", quant)};
    return {true, fmt("max error %.4f, files %.0f B / %.0f B", worst, full, quant)};
}

Outcome c7_energy_arithmetic() {
    PlatformCurrents cur;
    EnergyLedger deep;
    deep.deep_lpm_s = 3600.0;
    deep.elapsed_s = 3600.0;
    const double p_deep = average_power(deep, cur).total_mw;
    if (std::abs(p_deep - 0.002 * 3.3) > 1e-12) return {false, fmt("deep lpm power %.6f", p_deep)};

    std::mt19937_64 rng(505);
    for (int i = 0; i < 1000; ++i) {
        EnergyLedger led;
        led.cpu_s = uniform01(rng) * 100.0;
        led.lpm_s = uniform01(rng) * 100.0;
        led.tx_s = uniform01(rng) * 50.0;
        led.rx_receive_s = uniform01(rng) * 100.0;
        led.rx_idle_s = uniform01(rng) * 200.0;
        led.deep_lpm_s = 3600.0 - led.cpu_s - led.lpm_s;
        led.elapsed_s = 3600.0;
        PowerBreakdown p = average_power(led, cur);
        const double ref = (led.cpu_s * cur.cpu_ma + led.lpm_s * cur.lpm_ma +
                            led.deep_lpm_s * cur.deep_lpm_ma + led.tx_s * cur.tx_ma +
                            (led.rx_receive_s + led.rx_idle_s) * cur.rx_ma) /
                           led.elapsed_s * cur.supply_v;
        if (std::abs(p.total_mw - ref) > 1e-12) return {false, "hand case mismatch"};
        const double sum =
            p.cpu_mw + p.lpm_mw + p.deep_lpm_mw + p.tx_mw + p.rx_receive_mw + p.rx_idle_mw;
        if (std::abs(p.total_mw - sum) > 1e-12) return {false, "breakdown does not sum"};
    }
    return {true, "deep-lpm case 0.0066 mW exact, 1000 mixed cases match to 1e-12"};
}

Outcome c8_idle_reduction_simple5() {
    double worst_reduction = 1.0;
    double worst_pdr = 1.0;
    for (std::uint64_t seed : {1, 2, 3}) {
        EvalResult orch = run_eval_once(eval_config("simple5", "periodic", Protocol::orchestra, seed),
                                        seed);
        EvalResult rl = run_eval_once(eval_config("simple5", "periodic", Protocol::rl_asl, seed), seed,
                                      &g_fixture.global.table);
        const double reduction = 1.0 - rl.report.network_rx_idle_s / orch.report.network_rx_idle_s;
        worst_reduction = std::min(worst_reduction, reduction);
        worst_pdr = std::min(worst_pdr, rl.report.pdr);
        if (reduction < 0.35 || rl.report.pdr < 0.99)
            return {false, fmt("seed %llu: reduction %.1f%%, pdr %.4f",
                               static_cast<unsigned long long>(seed), reduction * 100.0,
                               rl.report.pdr)};
    }
    return {true, fmt("worst reduction %.1f%%, worst pdr %.4f over 3 seeds",
                      worst_reduction * 100.0, worst_pdr)};
}

Outcome c9_generalization_star22() {
    const std::uint64_t seed = 1;
    EvalResult orch =
        run_eval_once(eval_config("star22", "heterogeneous", Protocol::orchestra, seed), seed);
    EvalResult rl = run_eval_once(eval_config("star22", "heterogeneous", Protocol::rl_asl, seed),
                                  seed, &g_fixture.global.table);
    const double reduction = 1.0 - rl.report.network_rx_idle_s / orch.report.network_rx_idle_s;
    if (rl.report.pdr < 0.99) return {false, fmt("pdr %.4f", rl.report.pdr)};
    if (reduction < 0.30) return {false, fmt("reduction %.1f%%", reduction * 100.0)};
    return {true, fmt("reduction %.1f%%, pdr %.4f", reduction * 100.0, rl.report.pdr)};
}

Outcome c10_sensitivity_sweep() {
    ScenarioConfig cfg = eval_config("simple5", "periodic", Protocol::rl_asl, 7);
    cfg.duration_ms = 3.6e6;
    std::vector<SweepPoint> points = run_sweep(cfg, "rewards.r_skip", {0.25, 0.5, 0.75},
                                               /*retrain=*/true);
    double min_rdc = 1.0, max_rdc = 0.0;
    for (const SweepPoint& p : points) {
        if (p.pdr < 0.99) return {false, fmt("pdr %.4f at r_skip=%.2f", p.pdr, p.value)};
        min_rdc = std::min(min_rdc, p.rdc);
        max_rdc = std::max(max_rdc, p.rdc);
    }
    const double spread = (max_rdc - min_rdc) / min_rdc;
    if (spread > 0.20) return {false, fmt("rdc spread %.1f%%", spread * 100.0)};
    return {true, fmt("pdr >= 0.99 at all points, rdc spread %.1f%%", spread * 100.0)};
}

Outcome c11_prilm_sanity() {
    ScenarioConfig cfg;
    cfg.topology_name.clear();
    cfg.inline_nodes = {
        {1, NodeRole::sink, 0.0, 0.0, std::nullopt},
        {2, NodeRole::leaf, 10.0, 0.0, 1},
    };
    cfg.d_max = 30.0;
    cfg.pattern = "custom";
    cfg.custom_traffic[2] = TrafficProfile{17.0, 0.05, false};
    cfg.protocol = Protocol::prilm;
    cfg.mode = "eval";
    cfg.duration_ms = 600000;
    cfg.seed = 5;
    EvalResult res = run_eval_once(cfg, cfg.seed);
    if (res.report.network_rx_idle_slots != 0)
        return {false, fmt("%llu idle slots after warm-up",
                           static_cast<unsigned long long>(res.report.network_rx_idle_slots))};
    if (res.report.pdr != 1.0) return {false, fmt("pdr %.4f", res.report.pdr)};

    ScenarioConfig bad = eval_config("star22", "heterogeneous", Protocol::prilm, 5);
    try {
        validate_scenario(bad);
        return {false, "jittered pattern was not refused"};
    } catch (const std::invalid_argument&) {
    }
    return {true, "idle slots 0, pdr 1.0, jittered pattern refused"};
}

Outcome c12_training_convergence() {
    // epsilon floor: closed-form geometric decay reaches 0.05 at episode 998
    AgentConfig cfg;
    QTable q(cfg.bins.state_count());
    Agent probe(cfg, q, {2}, 1);
    std::uint64_t first_at_floor = 0;
    for (int e = 0; e < 1500 && first_at_floor == 0; ++e) {
        probe.end_episode(true);
        if (probe.episode().epsilon == cfg.eps_min) first_at_floor = probe.episode().episodes_completed;
    }
    if (first_at_floor != 998)
        return {false, fmt("epsilon floor at episode %llu",
                           static_cast<unsigned long long>(first_at_floor))};

    // return improvement on the node with the most completed episodes
    const auto& conv = g_fixture.periodic_training.convergence;
    std::map<int, std::vector<double>> by_node;
    for (const auto& [node, rec] : conv) by_node[node].push_back(rec.episode_return);
    int best_node = -1;
    std::size_t best_count = 0;
    for (const auto& [node, series] : by_node) {
        if (series.size() > best_count) {
            best_count = series.size();
            best_node = node;
        }
    }
    if (best_count < 100) return {false, fmt("only %zu episodes trained", best_count)};
    const auto& series = by_node[best_node];
    double first50 = 0.0, last50 = 0.0;
    for (int i = 0; i < 50; ++i) first50 += series[i];
    for (std::size_t i = series.size() - 50; i < series.size(); ++i) last50 += series[i];
    first50 /= 50.0;
    last50 /= 50.0;
    if (last50 <= first50)
        return {false, fmt("node %d: first50 %.1f, last50 %.1f", best_node, first50, last50)};
    return {true, fmt("epsilon floor at 998; node %d returns %.1f -> %.1f", best_node, first50,
                      last50)};
}

Outcome c13_determinism() {
    ScenarioConfig cfg = eval_config("simple5", "periodic", Protocol::rl_asl, 11);
    cfg.duration_ms = 600000;
    cfg.qtable_path = (g_fixture.dir / "global.qtbl").string();
    const fs::path a = g_fixture.dir / "det_a";
    const fs::path b = g_fixture.dir / "det_b";
    run_eval(cfg, a);
    run_eval(cfg, b);
    for (const char* file : {"trace.txt", "metrics.csv", "metrics.json", "summary.csv"}) {
        std::ifstream fa(a / file, std::ios::binary), fb(b / file, std::ios::binary);
        std::string sa((std::istreambuf_iterator<char>(fa)), {});
        std::string sb((std::istreambuf_iterator<char>(fb)), {});
        if (sa != sb || sa.empty()) return {false, fmt("%s differs", file)};
    }
    return {true, "trace and metrics byte-identical across invocations"};
}

}  // namespace

int main() {
    std::printf("building shared fixture (four trained models + fedavg)...\n");
    g_fixture.build();
    std::printf("fixture ready: %llu total episodes\n\n",
                static_cast<unsigned long long>(g_fixture.global.episodes));

    run_criterion(1, "state encoding bijection over 640 states", c1_encoding_bijection);
    run_criterion(2, "expected-reward closed form and indifference point", c2_expected_reward_exactness);
    run_criterion(3, "q-learning matches value iteration on a synthetic MDP", c3_q_learning_oracle);
    run_criterion(4, "transmission-probability model properties", c4_probability_properties);
    run_criterion(5, "federated averaging exactness", c5_fedavg);
    run_criterion(6, "quantization error bound and file footprints", c6_quantization);
    run_criterion(7, "energy arithmetic", c7_energy_arithmetic);
    run_criterion(8, "idle-listening reduction on simple5 (3 seeds)", c8_idle_reduction_simple5);
    run_criterion(9, "generalization to star22 heterogeneous", c9_generalization_star22);
    run_criterion(10, "skip-reward sensitivity sweep", c10_sensitivity_sweep);
    run_criterion(11, "prilm single-link sanity and applicability refusal", c11_prilm_sanity);
    run_criterion(12, "training convergence and epsilon schedule", c12_training_convergence);
    run_criterion(13, "byte-identical repeated evaluation", c13_determinism);

    if (g_failures == 0) {
        std::printf("\nall 13 criteria passed\n");
    } else {
        std::printf("\n%d criteria FAILED\n", g_failures);
    }
    return g_failures;
}

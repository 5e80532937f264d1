#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aslsim/qtable.hpp"

namespace aslsim {

// Per-neighbor descriptor: EWMA inter-arrival estimates plus the expected
// next-reception slot and the consecutive-miss counter.
struct NeighborStats {
    std::int64_t last_asn = 0;
    double mean_interval = 0.0;  // slots
    double interval_var = 0.0;   // slots^2
    double expected_asn = 0.0;
    std::uint32_t miss_count = 0;
};

struct RewardConfig {
    double success = 1.0;
    double skip = 0.5;
    double idle_cost = -0.5;
    double miss_cost = -1.0;
    double terminal_success = 5.0;
    double terminal_failure = -5.0;
};

struct ClampConfig {
    double upper_frac = 0.5;   // sigma never exceeds this fraction of the period
    double lower_frac = 0.05;  // and never dips below this fraction
    double sigma_min = 1.0;    // slots
};

struct BinConfig {
    int interarrival_bins = 10;  // B
    int distance_bins = 4;       // D
    int short_bin_threshold = 2;
    int count_cap = 3;  // C_max; forced to 3 by the 10*4*4*4 = 640 state space

    int state_count() const {
        return interarrival_bins * (count_cap + 1) * distance_bins * (count_cap + 1);
    }
};

struct AgentConfig {
    double learning_rate = 0.15;
    double discount = 0.9;
    double eps_initial = 1.0;
    double eps_min = 0.05;
    double eps_decay = 0.997;
    int episode_len = 500;
    double smoothing = 0.1;  // EWMA lambda
    double prob_clamp = 1e-3;
    double ratio_max = 2.0;
    double miss_zeta = 2.0;
    double near_penalty = 0.1;
    int rolling_window = 20;
    RewardConfig rewards;
    ClampConfig clamp;
    BinConfig bins;

    void validate() const;
    std::uint64_t fingerprint() const;
};

struct EncodedState {
    int mean_bin = 0;
    int short_count = 0;
    int dmin_bin = 0;
    int near_count = 0;
    int index = 0;
};

struct EpisodeStats {
    int step = 0;
    double episode_return = 0.0;
    std::deque<double> rolling;
    double best_rolling = -1e300;
    bool best_improved = false;
    double epsilon = 1.0;
    std::uint64_t episodes_completed = 0;
};

// --- neighbor statistics ---------------------------------------------------

NeighborStats update_on_reception(NeighborStats stats, std::int64_t asn, double lambda);
NeighborStats update_on_miss(NeighborStats stats);

double clamp_sigma(double mu, double sigma, const ClampConfig& cfg);

// Distance from asn to the nearest point of the expected transmission
// lattice, in slots; always in [0, mu/2].
double distance_to_nearest(const NeighborStats& stats, std::int64_t asn);

// Elapsed slots past the later of last/expected reception, clamped at zero.
double elapsed_past_expected(const NeighborStats& stats, std::int64_t asn);

// Gaussian kernel on the distance-to-nearest, in [0, 1].
double neighbor_probability(const NeighborStats& stats, std::int64_t asn, const ClampConfig& cfg);

// 1 - prod(1 - p_m), clamped into [eps_p, 1 - eps_p]. Throws on empty input.
double aggregate_probability(std::span<const double> probs, double eps_p);

// --- state encoding ----------------------------------------------------------

int bin_interarrival(double ratio, int bins, double ratio_max);
int bin_distance(double d, double sigma, int bins);

EncodedState extract_features(std::span<const NeighborStats> neighborhood, std::int64_t asn,
                              const AgentConfig& cfg);

int encode_state(int mean_bin, int short_count, int dmin_bin, int near_count, const BinConfig& bins);
std::array<int, 4> decode_state(int index, const BinConfig& bins);

// --- learning ---------------------------------------------------------------

double expected_reward(RxAction action, double p, const RewardConfig& rewards);

// Adjusts the skip action's expected reward for overdue and near-transmit
// neighbors. Listen rewards are never adjusted.
double apply_penalties(double skip_expected, std::span<const NeighborStats> neighborhood,
                       std::int64_t asn, const AgentConfig& cfg);

RxAction select_action(const QTable& q, int state, double epsilon, std::mt19937_64& rng);

// Standard one-step Q-learning update. Throws if the table is frozen.
void q_update(QTable& q, int state, RxAction action, double reward, int next_state, double alpha,
              double gamma);

// --- runtime agent ------------------------------------------------------------

// One agent per receiving node. Registered neighbors are the node's inbound
// links; the agent only starts deciding once every one of them has produced
// two receptions (before that it listens fail-safe and learns nothing).
class Agent {
  public:
    Agent(const AgentConfig& cfg, QTable& table, std::vector<int> neighbors, std::uint64_t seed);

    // Called once per scheduled unicast Rx slot. Skip decisions perform their
    // Q-update immediately; listen decisions wait for report_outcome.
    RxAction on_rx_slot(std::int64_t asn);

    // Resolves a pending listen decision. sender < 0 means nothing arrived.
    void report_outcome(std::int64_t asn, bool received, int sender = -1);

    // Statistics-only reception path for slots where no decision was pending
    // (bootstrap listens and forced listens).
    void note_reception(int sender, std::int64_t asn);

    bool awaiting_outcome() const { return pending_.has_value(); }
    bool neighborhood_ready() const;
    bool has_neighbors() const { return !neighbors_.empty(); }

    const EpisodeStats& episode() const { return episode_; }
    double current_epsilon() const;

    const NeighborStats* stats_for(int neighbor) const;

    struct EpisodeRecord {
        std::uint64_t episode = 0;
        double episode_return = 0.0;
        double rolling_mean = 0.0;
        double epsilon = 0.0;
        bool succeeded = false;
    };
    const std::vector<EpisodeRecord>& episode_log() const { return episode_log_; }

    std::uint64_t decisions() const { return decisions_; }

    // Exposed for tests; normally fires automatically every episode_len steps.
    EpisodeStats end_episode(bool succeeded);

  private:
    struct PendingDecision {
        std::int64_t asn = 0;
        int state = 0;
    };

    struct TrackedNeighbor {
        NeighborStats stats;
        int receptions = 0;  // stats valid once >= 2
    };

    void detect_misses(std::int64_t asn);
    std::vector<NeighborStats> snapshot() const;
    void finish_step(double reward);
    void advance_episode_if_due();

    AgentConfig cfg_;
    QTable* table_;
    std::vector<int> neighbors_;
    std::map<int, TrackedNeighbor> tracked_;
    std::mt19937_64 rng_;
    std::optional<PendingDecision> pending_;
    std::int64_t last_decision_asn_ = -1;
    EpisodeStats episode_;
    std::uint64_t miss_events_this_episode_ = 0;
    std::vector<EpisodeRecord> episode_log_;
    std::uint64_t decisions_ = 0;
};

}  // namespace aslsim

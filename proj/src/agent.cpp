#include "aslsim/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "aslsim/rng.hpp"

namespace aslsim {

void AgentConfig::validate() const {
    if (learning_rate <= 0.0 || learning_rate > 1.0) throw std::invalid_argument("learning_rate out of (0,1]");
    if (discount <= 0.0 || discount >= 1.0) throw std::invalid_argument("discount out of (0,1)");
    if (eps_min > eps_initial) throw std::invalid_argument("eps_min exceeds eps_initial");
    if (prob_clamp <= 0.0 || prob_clamp >= 0.5) throw std::invalid_argument("prob_clamp out of (0,0.5)");
    if (smoothing <= 0.0 || smoothing >= 1.0) throw std::invalid_argument("smoothing out of (0,1)");
    if (episode_len <= 0) throw std::invalid_argument("episode_len must be positive");
    if (bins.interarrival_bins <= 0 || bins.distance_bins <= 0 || bins.count_cap < 0)
        throw std::invalid_argument("bin configuration invalid");
}

std::uint64_t AgentConfig::fingerprint() const {
    char buf[640];
    std::snprintf(buf, sizeof buf,
                  "a=%.17g;g=%.17g;e0=%.17g;em=%.17g;ed=%.17g;T=%d;l=%.17g;pc=%.17g;rm=%.17g;"
                  "zm=%.17g;np=%.17g;W=%d;rs=%.17g;rk=%.17g;ci=%.17g;cm=%.17g;ts=%.17g;tf=%.17g;"
                  "cu=%.17g;cl=%.17g;sm=%.17g;B=%d;D=%d;bt=%d;cc=%d",
                  learning_rate, discount, eps_initial, eps_min, eps_decay, episode_len, smoothing,
                  prob_clamp, ratio_max, miss_zeta, near_penalty, rolling_window, rewards.success,
                  rewards.skip, rewards.idle_cost, rewards.miss_cost, rewards.terminal_success,
                  rewards.terminal_failure, clamp.upper_frac, clamp.lower_frac, clamp.sigma_min,
                  bins.interarrival_bins, bins.distance_bins, bins.short_bin_threshold, bins.count_cap);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char* p = buf; *p; ++p) {
        h ^= static_cast<unsigned char>(*p);
        h *= 0x100000001b3ULL;
    }
    return h;
}

NeighborStats update_on_reception(NeighborStats stats, std::int64_t asn, double lambda) {
    if (asn <= stats.last_asn) throw std::invalid_argument("reception asn must advance");
    const double delta = static_cast<double>(asn - stats.last_asn);
    stats.mean_interval = (1.0 - lambda) * stats.mean_interval + lambda * delta;
    const double err = delta - stats.mean_interval;
    stats.interval_var = (1.0 - lambda) * stats.interval_var + lambda * err * err;
    stats.last_asn = asn;
    stats.expected_asn = static_cast<double>(asn) + stats.mean_interval;
    stats.miss_count = 0;
    return stats;
}

NeighborStats update_on_miss(NeighborStats stats) {
    stats.expected_asn += stats.mean_interval;
    stats.miss_count += 1;
    return stats;
}

double clamp_sigma(double mu, double sigma, const ClampConfig& cfg) {
    // The upper bound wins when the bounds cross for tiny periods.
    const double lower = std::max(cfg.sigma_min, std::max(cfg.lower_frac * mu, sigma));
    return std::min(cfg.upper_frac * mu, lower);
}

double elapsed_past_expected(const NeighborStats& stats, std::int64_t asn) {
    const double anchor = std::max(static_cast<double>(stats.last_asn), stats.expected_asn);
    return std::max(0.0, static_cast<double>(asn) - anchor);
}

double distance_to_nearest(const NeighborStats& stats, std::int64_t asn) {
    const double mu = stats.mean_interval;
    if (mu <= 0.0) return 0.0;
    const double anchor = std::max(static_cast<double>(stats.last_asn), stats.expected_asn);
    double phase = std::fmod(static_cast<double>(asn) - anchor, mu);
    if (phase < 0.0) phase += mu;
    return std::min(phase, mu - phase);
}

double neighbor_probability(const NeighborStats& stats, std::int64_t asn, const ClampConfig& cfg) {
    const double d = distance_to_nearest(stats, asn);
    const double sigma = clamp_sigma(stats.mean_interval, std::sqrt(stats.interval_var), cfg);
    if (sigma <= 0.0) return d == 0.0 ? 1.0 : 0.0;
    return std::exp(-0.5 * (d * d) / (sigma * sigma));
}

double aggregate_probability(std::span<const double> probs, double eps_p) {
    if (probs.empty()) throw std::invalid_argument("aggregate_probability requires at least one neighbor");
    double none = 1.0;
    for (double p : probs) none *= (1.0 - p);
    const double p = 1.0 - none;
    return std::clamp(p, eps_p, 1.0 - eps_p);
}

int bin_interarrival(double ratio, int bins, double ratio_max) {
    if (ratio < 0.0) ratio = 0.0;
    const int idx = static_cast<int>(std::floor(ratio * static_cast<double>(bins) / ratio_max));
    return std::min(bins - 1, idx);
}

int bin_distance(double d, double sigma, int bins) {
    // Thresholds at 0.5, 1, 2, 4, ... sigma; the top bin saturates.
    double bound = 0.5 * sigma;
    for (int b = 0; b < bins - 1; ++b) {
        if (d < bound) return b;
        bound *= 2.0;
    }
    return bins - 1;
}

EncodedState extract_features(std::span<const NeighborStats> neighborhood, std::int64_t asn,
                              const AgentConfig& cfg) {
    if (neighborhood.empty()) throw std::invalid_argument("extract_features requires neighbors");
    const BinConfig& bins = cfg.bins;

    double bin_sum = 0.0;
    int short_count = 0;
    int near_count = 0;
    double dmin = 0.0;
    double dmin_sigma = 0.0;
    bool first = true;
    for (const NeighborStats& n : neighborhood) {
        const double ratio = elapsed_past_expected(n, asn) / n.mean_interval;
        const int b = bin_interarrival(ratio, bins.interarrival_bins, cfg.ratio_max);
        bin_sum += b;
        if (b < bins.short_bin_threshold) ++short_count;
        const double d = distance_to_nearest(n, asn);
        const double sigma = clamp_sigma(n.mean_interval, std::sqrt(n.interval_var), cfg.clamp);
        if (d <= sigma) ++near_count;
        if (first || d < dmin) {
            dmin = d;
            dmin_sigma = sigma;
            first = false;
        }
    }

    EncodedState st;
    st.mean_bin = std::clamp(
        static_cast<int>(std::lround(bin_sum / static_cast<double>(neighborhood.size()))), 0,
        bins.interarrival_bins - 1);
    st.short_count = std::min(bins.count_cap, short_count);
    st.dmin_bin = bin_distance(dmin, dmin_sigma, bins.distance_bins);
    st.near_count = std::min(bins.count_cap, near_count);
    st.index = encode_state(st.mean_bin, st.short_count, st.dmin_bin, st.near_count, bins);
    return st;
}

int encode_state(int mean_bin, int short_count, int dmin_bin, int near_count, const BinConfig& bins) {
    const int cap = bins.count_cap + 1;
    mean_bin = std::clamp(mean_bin, 0, bins.interarrival_bins - 1);
    short_count = std::clamp(short_count, 0, bins.count_cap);
    dmin_bin = std::clamp(dmin_bin, 0, bins.distance_bins - 1);
    near_count = std::clamp(near_count, 0, bins.count_cap);
    return ((mean_bin * cap + short_count) * bins.distance_bins + dmin_bin) * cap + near_count;
}

std::array<int, 4> decode_state(int index, const BinConfig& bins) {
    const int cap = bins.count_cap + 1;
    std::array<int, 4> out{};
    out[3] = index % cap;
    index /= cap;
    out[2] = index % bins.distance_bins;
    index /= bins.distance_bins;
    out[1] = index % cap;
    out[0] = index / cap;
    return out;
}

double expected_reward(RxAction action, double p, const RewardConfig& rewards) {
    if (action == RxAction::skip_rx) return p * rewards.miss_cost + (1.0 - p) * rewards.skip;
    return p * rewards.success + (1.0 - p) * rewards.idle_cost;
}

double apply_penalties(double skip_expected, std::span<const NeighborStats> neighborhood,
                       std::int64_t asn, const AgentConfig& cfg) {
    bool overdue = false;
    int near_count = 0;
    for (const NeighborStats& n : neighborhood) {
        const double sigma = clamp_sigma(n.mean_interval, std::sqrt(n.interval_var), cfg.clamp);
        const double since_last = static_cast<double>(asn - n.last_asn);
        if (since_last >= n.mean_interval + cfg.miss_zeta * sigma) overdue = true;
        if (distance_to_nearest(n, asn) <= sigma) ++near_count;
    }
    if (overdue) skip_expected -= std::abs(cfg.rewards.miss_cost);
    skip_expected -= cfg.near_penalty * std::min(cfg.bins.count_cap, near_count);
    return skip_expected;
}

RxAction select_action(const QTable& q, int state, double epsilon, std::mt19937_64& rng) {
    if (epsilon > 0.0 && uniform01(rng) < epsilon)
        return uniform01(rng) < 0.5 ? RxAction::skip_rx : RxAction::listen_rx;
    return q.greedy_action(static_cast<std::size_t>(state));
}

void q_update(QTable& q, int state, RxAction action, double reward, int next_state, double alpha,
              double gamma) {
    if (q.mode() == QTable::Mode::frozen) throw std::runtime_error("q_update on a frozen table");
    const auto s = static_cast<std::size_t>(state);
    const double old = q.at(s, action);
    const double target = reward + gamma * q.max_value(static_cast<std::size_t>(next_state));
    q.slot(s, action) = static_cast<float>(old + alpha * (target - old));
}

// --- Agent -------------------------------------------------------------------

Agent::Agent(const AgentConfig& cfg, QTable& table, std::vector<int> neighbors, std::uint64_t seed)
    : cfg_(cfg), table_(&table), neighbors_(std::move(neighbors)), rng_(seed) {
    cfg_.validate();
    std::sort(neighbors_.begin(), neighbors_.end());
    for (int n : neighbors_) tracked_[n] = TrackedNeighbor{};
    episode_.epsilon = cfg_.eps_initial;
}

bool Agent::neighborhood_ready() const {
    if (neighbors_.empty()) return false;
    for (const auto& [id, t] : tracked_)
        if (t.receptions < 2) return false;
    return true;
}

double Agent::current_epsilon() const {
    return table_->mode() == QTable::Mode::frozen ? 0.0 : episode_.epsilon;
}

const NeighborStats* Agent::stats_for(int neighbor) const {
    auto it = tracked_.find(neighbor);
    if (it == tracked_.end() || it->second.receptions < 2) return nullptr;
    return &it->second.stats;
}

std::vector<NeighborStats> Agent::snapshot() const {
    std::vector<NeighborStats> out;
    out.reserve(tracked_.size());
    for (const auto& [id, t] : tracked_)
        if (t.receptions >= 2) out.push_back(t.stats);
    return out;
}

void Agent::detect_misses(std::int64_t asn) {
    for (auto& [id, t] : tracked_) {
        if (t.receptions < 2) continue;
        double sigma = clamp_sigma(t.stats.mean_interval, std::sqrt(t.stats.interval_var), cfg_.clamp);
        int guard = 0;
        while (static_cast<double>(asn) >= t.stats.expected_asn + cfg_.miss_zeta * sigma) {
            t.stats = update_on_miss(t.stats);
            ++miss_events_this_episode_;
            if (++guard > 1000000) throw std::runtime_error("miss detection runaway");
        }
    }
}

RxAction Agent::on_rx_slot(std::int64_t asn) {
    if (asn == last_decision_asn_) throw std::logic_error("on_rx_slot invoked twice for the same asn");
    if (pending_) throw std::logic_error("previous listen decision was never resolved");
    last_decision_asn_ = asn;

    detect_misses(asn);

    if (!neighborhood_ready()) return RxAction::listen_rx;  // fail-safe, no learning

    const std::vector<NeighborStats> neigh = snapshot();
    const EncodedState st = extract_features(neigh, asn, cfg_);
    const RxAction action = select_action(*table_, st.index, current_epsilon(), rng_);
    ++decisions_;

    if (action == RxAction::skip_rx) {
        if (table_->mode() == QTable::Mode::training) {
            std::vector<double> probs;
            probs.reserve(neigh.size());
            for (const auto& n : neigh) probs.push_back(neighbor_probability(n, asn, cfg_.clamp));
            const double p = aggregate_probability(probs, cfg_.prob_clamp);
            double r = expected_reward(RxAction::skip_rx, p, cfg_.rewards);
            r = apply_penalties(r, neigh, asn, cfg_);
            q_update(*table_, st.index, RxAction::skip_rx, r, st.index, cfg_.learning_rate, cfg_.discount);
            finish_step(r);
        }
        return RxAction::skip_rx;
    }

    pending_ = PendingDecision{asn, st.index};
    return RxAction::listen_rx;
}

void Agent::report_outcome(std::int64_t asn, bool received, int sender) {
    if (!pending_ || pending_->asn != asn)
        throw std::logic_error("report_outcome without a pending decision for this asn");
    const int state = pending_->state;
    pending_.reset();

    const bool training = table_->mode() == QTable::Mode::training;
    if (received) {
        if (training) {
            q_update(*table_, state, RxAction::listen_rx, cfg_.rewards.success, state, cfg_.learning_rate,
                     cfg_.discount);
            finish_step(cfg_.rewards.success);
        }
        if (sender >= 0) note_reception(sender, asn);
        return;
    }

    if (training) {
        const std::vector<NeighborStats> neigh = snapshot();
        std::vector<double> probs;
        probs.reserve(neigh.size());
        for (const auto& n : neigh) probs.push_back(neighbor_probability(n, asn, cfg_.clamp));
        const double p = aggregate_probability(probs, cfg_.prob_clamp);
        const double r = expected_reward(RxAction::listen_rx, p, cfg_.rewards);
        q_update(*table_, state, RxAction::listen_rx, r, state, cfg_.learning_rate, cfg_.discount);
        finish_step(r);
    }
}

void Agent::note_reception(int sender, std::int64_t asn) {
    auto it = tracked_.find(sender);
    if (it == tracked_.end()) return;
    TrackedNeighbor& t = it->second;
    if (t.receptions == 0) {
        t.stats.last_asn = asn;
        t.receptions = 1;
        return;
    }
    if (asn <= t.stats.last_asn) return;  // duplicate slot, nothing to measure
    if (t.receptions == 1) {
        const double delta = static_cast<double>(asn - t.stats.last_asn);
        t.stats.mean_interval = delta;
        t.stats.interval_var = 0.0;
        t.stats.last_asn = asn;
        t.stats.expected_asn = static_cast<double>(asn) + delta;
        t.stats.miss_count = 0;
        t.receptions = 2;
        return;
    }
    t.stats = update_on_reception(t.stats, asn, cfg_.smoothing);
    if (t.receptions < 1000000) ++t.receptions;
}

void Agent::finish_step(double reward) {
    episode_.episode_return += reward;
    episode_.step += 1;
    if (episode_.step >= cfg_.episode_len) end_episode(miss_events_this_episode_ == 0);
}

EpisodeStats Agent::end_episode(bool succeeded) {
    episode_.episode_return +=
        succeeded ? cfg_.rewards.terminal_success : cfg_.rewards.terminal_failure;

    episode_.rolling.push_back(episode_.episode_return);
    while (static_cast<int>(episode_.rolling.size()) > cfg_.rolling_window) episode_.rolling.pop_front();
    double sum = 0.0;
    for (double g : episode_.rolling) sum += g;
    const double rolling_mean = sum / static_cast<double>(episode_.rolling.size());
    episode_.best_improved = rolling_mean > episode_.best_rolling;
    if (episode_.best_improved) episode_.best_rolling = rolling_mean;

    episode_.episodes_completed += 1;
    table_->set_episodes_trained(episode_.episodes_completed);
    episode_log_.push_back(EpisodeRecord{episode_.episodes_completed, episode_.episode_return,
                                         rolling_mean, episode_.epsilon, succeeded});

    episode_.epsilon = std::max(cfg_.eps_min, cfg_.eps_decay * episode_.epsilon);
    EpisodeStats result = episode_;
    episode_.step = 0;
    episode_.episode_return = 0.0;
    miss_events_this_episode_ = 0;
    return result;
}

}  // namespace aslsim

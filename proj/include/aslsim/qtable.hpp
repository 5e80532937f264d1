#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace aslsim {

enum class RxAction : int { skip_rx = 0, listen_rx = 1 };
inline constexpr int kNumActions = 2;

// Tabular action-value function over the encoded state space. Values are
// stored as 32-bit floats, matching the on-disk and in-flash representation.
class QTable {
  public:
    enum class Mode { training, frozen };

    explicit QTable(std::size_t states) : values_(states * kNumActions, 0.0f) {}

    std::size_t states() const { return values_.size() / kNumActions; }

    float at(std::size_t s, RxAction a) const { return values_[s * kNumActions + static_cast<int>(a)]; }
    float& slot(std::size_t s, RxAction a) { return values_[s * kNumActions + static_cast<int>(a)]; }

    const std::vector<float>& raw() const { return values_; }
    std::vector<float>& raw() { return values_; }

    Mode mode() const { return mode_; }
    void set_mode(Mode m) { mode_ = m; }

    std::uint64_t episodes_trained() const { return episodes_trained_; }
    void set_episodes_trained(std::uint64_t e) { episodes_trained_ = e; }

    float max_value(std::size_t s) const {
        const float a = at(s, RxAction::skip_rx);
        const float b = at(s, RxAction::listen_rx);
        return a > b ? a : b;
    }

    // Ties resolve to listen, the reliability fail-safe.
    RxAction greedy_action(std::size_t s) const {
        return at(s, RxAction::skip_rx) > at(s, RxAction::listen_rx) ? RxAction::skip_rx
                                                                     : RxAction::listen_rx;
    }

  private:
    std::vector<float> values_;
    Mode mode_ = Mode::training;
    std::uint64_t episodes_trained_ = 0;
};

}  // namespace aslsim

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aslsim/agent.hpp"
#include "aslsim/qtable.hpp"

namespace aslsim {

struct TrainedModel {
    QTable table{640};
    std::uint64_t episodes = 0;
    std::string label;
    std::uint64_t fingerprint = 0;
};

struct QuantizedTable {
    std::int32_t scale = 10;
    std::size_t states = 0;
    std::vector<std::int16_t> values;
};

struct FedavgResult {
    QTable table{640};
    std::vector<double> weights;  // in input order
};

// Episode-weighted elementwise mean. All inputs must agree on dimensions and
// config fingerprint; the result is frozen with the summed episode count.
FedavgResult fedavg(const std::vector<TrainedModel>& models);

struct QuantizeResult {
    QuantizedTable table;
    std::size_t argmax_flips = 0;  // states whose greedy action changed
};

QuantizeResult quantize(const QTable& q, std::int32_t scale);
QTable dequantize(const QuantizedTable& qt);

// Versioned little-endian binary container for both full-precision (f32) and
// quantized (i16) tables.
void save_table(const TrainedModel& model, const std::filesystem::path& path);
void save_table_quantized(const TrainedModel& model, std::int32_t scale,
                          const std::filesystem::path& path);
TrainedModel load_table(const std::filesystem::path& path);

// One line per state: index, decoded components, both action values, greedy action.
void export_table_csv(const QTable& q, const BinConfig& bins, const std::filesystem::path& path);

}  // namespace aslsim

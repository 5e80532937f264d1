#include "aslsim/federate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "aslsim/atomic_write.hpp"

namespace aslsim {

namespace {

constexpr char kMagic[8] = {'A', 'S', 'L', 'Q', 'T', 'B', 'L', '\n'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) throw std::runtime_error("table file truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

std::uint64_t content_hash(const QTable& q) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (float v : q.raw()) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 4; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace

FedavgResult fedavg(const std::vector<TrainedModel>& models) {
    if (models.empty()) throw std::invalid_argument("fedavg needs at least one model");
    const std::size_t states = models.front().table.states();
    const std::uint64_t fp = models.front().fingerprint;
    std::uint64_t total_episodes = 0;
    for (const TrainedModel& m : models) {
        if (m.table.states() != states)
            throw std::invalid_argument("fedavg dimension mismatch: " + std::to_string(m.table.states()) +
                                        " vs " + std::to_string(states));
        if (m.fingerprint != fp) {
            char buf[80];
            std::snprintf(buf, sizeof buf, "%016llx vs %016llx",
                          static_cast<unsigned long long>(m.fingerprint),
                          static_cast<unsigned long long>(fp));
            throw std::invalid_argument(std::string("fedavg config fingerprint mismatch: ") + buf);
        }
        total_episodes += m.episodes;
    }
    if (total_episodes == 0) throw std::invalid_argument("fedavg inputs have zero episodes");

    FedavgResult result{QTable(states), {}};
    result.weights.reserve(models.size());
    for (const TrainedModel& m : models)
        result.weights.push_back(static_cast<double>(m.episodes) / static_cast<double>(total_episodes));

    // Canonical summation order makes the result bitwise independent of the
    // input permutation.
    std::vector<std::size_t> order(models.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::uint64_t> hashes(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) hashes[i] = content_hash(models[i].table);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const TrainedModel& ma = models[a];
        const TrainedModel& mb = models[b];
        if (ma.label != mb.label) return ma.label < mb.label;
        if (ma.episodes != mb.episodes) return ma.episodes < mb.episodes;
        return hashes[a] < hashes[b];
    });

    for (std::size_t entry = 0; entry < states * kNumActions; ++entry) {
        double acc = 0.0;
        for (std::size_t i : order)
            acc += result.weights[i] * static_cast<double>(models[i].table.raw()[entry]);
        result.table.raw()[entry] = static_cast<float>(acc);
    }
    result.table.set_mode(QTable::Mode::frozen);
    result.table.set_episodes_trained(total_episodes);
    return result;
}

QuantizeResult quantize(const QTable& q, std::int32_t scale) {
    if (scale <= 0) throw std::invalid_argument("scale must be positive");
    QuantizeResult result;
    result.table.scale = scale;
    result.table.states = q.states();
    result.table.values.resize(q.raw().size());
    for (std::size_t i = 0; i < q.raw().size(); ++i) {
        const double scaled = std::llround(static_cast<double>(q.raw()[i]) * scale);
        if (scaled > 32767.0 || scaled < -32768.0)
            throw std::overflow_error("quantization overflow: |q| too large for scale " +
                                      std::to_string(scale));
        result.table.values[i] = static_cast<std::int16_t>(scaled);
    }
    const QTable back = dequantize(result.table);
    for (std::size_t s = 0; s < q.states(); ++s)
        if (q.greedy_action(s) != back.greedy_action(s)) ++result.argmax_flips;
    return result;
}

QTable dequantize(const QuantizedTable& qt) {
    QTable q(qt.states);
    for (std::size_t i = 0; i < qt.values.size(); ++i)
        q.raw()[i] = static_cast<float>(static_cast<double>(qt.values[i]) / qt.scale);
    q.set_mode(QTable::Mode::frozen);
    return q;
}

namespace {

void save_impl(const TrainedModel& model, std::int32_t scale, const std::filesystem::path& path) {
    write_file_atomic(path, /*binary=*/true, [&](std::ostream& os) {
        os.write(kMagic, sizeof kMagic);
        write_le<std::uint32_t>(os, kVersion);
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(scale));
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.table.states()));
        write_le<std::uint32_t>(os, kNumActions);
        write_le<std::uint64_t>(os, model.episodes);
        write_le<std::uint64_t>(os, model.fingerprint);
        write_le<std::uint16_t>(os, static_cast<std::uint16_t>(model.label.size()));
        os.write(model.label.data(), static_cast<std::streamsize>(model.label.size()));
        if (scale == 0) {
            for (float v : model.table.raw()) write_le<float>(os, v);
        } else {
            const QuantizeResult qr = quantize(model.table, scale);
            for (std::int16_t v : qr.table.values) write_le<std::int16_t>(os, v);
        }
    });
}

}  // namespace

void save_table(const TrainedModel& model, const std::filesystem::path& path) {
    save_impl(model, 0, path);
}

void save_table_quantized(const TrainedModel& model, std::int32_t scale,
                          const std::filesystem::path& path) {
    save_impl(model, scale, path);
}

TrainedModel load_table(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("not a table file: " + path.string());
    const auto version = read_le<std::uint32_t>(is);
    if (version != kVersion)
        throw std::runtime_error("unsupported table file version " + std::to_string(version));
    const auto scale = read_le<std::uint32_t>(is);
    const auto states = read_le<std::uint32_t>(is);
    const auto actions = read_le<std::uint32_t>(is);
    if (actions != kNumActions)
        throw std::runtime_error("table file has unexpected action count " + std::to_string(actions));
    const auto episodes = read_le<std::uint64_t>(is);
    const auto fingerprint = read_le<std::uint64_t>(is);
    const auto label_len = read_le<std::uint16_t>(is);
    std::string label(label_len, '\0');
    is.read(label.data(), label_len);
    if (!is) throw std::runtime_error("table file truncated");

    TrainedModel model{QTable(states), episodes, std::move(label), fingerprint};
    if (scale == 0) {
        for (float& v : model.table.raw()) v = read_le<float>(is);
    } else {
        QuantizedTable qt;
        qt.scale = static_cast<std::int32_t>(scale);
        qt.states = states;
        qt.values.resize(static_cast<std::size_t>(states) * kNumActions);
        for (std::int16_t& v : qt.values) v = read_le<std::int16_t>(is);
        model.table = dequantize(qt);
    }
    model.table.set_mode(QTable::Mode::frozen);
    model.table.set_episodes_trained(episodes);
    return model;
}

void export_table_csv(const QTable& q, const BinConfig& bins, const std::filesystem::path& path) {
    write_file_atomic(path, /*binary=*/false, [&](std::ostream& os) {
        os << "state,mean_bin,short_count,dmin_bin,near_count,q_skip,q_listen,greedy\n";
        char buf[160];
        for (std::size_t s = 0; s < q.states(); ++s) {
            const auto parts = decode_state(static_cast<int>(s), bins);
            std::snprintf(buf, sizeof buf, "%zu,%d,%d,%d,%d,%.9g,%.9g,%s\n", s, parts[0], parts[1],
                          parts[2], parts[3], q.at(s, RxAction::skip_rx), q.at(s, RxAction::listen_rx),
                          q.greedy_action(s) == RxAction::skip_rx ? "skip" : "listen");
            os << buf;
        }
    });
}

}  // namespace aslsim

#include "aslsim/trace.hpp"

#include <array>
#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace aslsim {

namespace {
constexpr std::array<const char*, 7> kKindNames = {"tx",  "ack",        "rx_idle", "skip",
                                                   "drop_retry", "drop_queue", "gen"};
}

const char* to_string(EventKind kind) { return kKindNames[static_cast<int>(kind)]; }

EventKind event_kind_from_string(const std::string& s) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (s == kKindNames[i]) return static_cast<EventKind>(i);
    throw std::invalid_argument("unknown event kind: " + s);
}

std::string to_line(const SlotEvent& e) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%" PRId64 ",%d,%d,%d,%d,%s,%" PRIu64 ",%s", e.asn, e.slot,
                  e.channel, e.src, e.dst, to_string(e.kind), e.seq, e.outcome.c_str());
    return buf;
}

SlotEvent event_from_line(const std::string& line) {
    std::istringstream ss(line);
    std::string field;
    std::array<std::string, 8> fields;
    for (auto& f : fields) {
        if (!std::getline(ss, f, ',')) throw std::invalid_argument("malformed trace line: " + line);
    }
    SlotEvent e;
    e.asn = std::stoll(fields[0]);
    e.slot = std::stoi(fields[1]);
    e.channel = std::stoi(fields[2]);
    e.src = std::stoi(fields[3]);
    e.dst = std::stoi(fields[4]);
    e.kind = event_kind_from_string(fields[5]);
    e.seq = std::stoull(fields[6]);
    e.outcome = fields[7];
    return e;
}

void SlotTrace::write(std::ostream& os) const {
    os << "# slotframe_len=" << slotframe_len << "\n";
    os << "# channel_offsets=" << channel_offsets << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", timeslot_ms);
    os << "# timeslot_ms=" << buf << "\n";
    os << "# duration_slots=" << duration_slots << "\n";
    os << "# warmup_end_asn=" << warmup_end_asn << "\n";
    os << "# seed=" << seed << "\n";
    for (const SlotEvent& e : events) os << to_line(e) << "\n";
}

SlotTrace SlotTrace::read(std::istream& is) {
    SlotTrace t;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(2, eq - 2);
            const std::string value = line.substr(eq + 1);
            if (key == "slotframe_len") t.slotframe_len = std::stoi(value);
            else if (key == "channel_offsets") t.channel_offsets = std::stoi(value);
            else if (key == "timeslot_ms") t.timeslot_ms = std::stod(value);
            else if (key == "duration_slots") t.duration_slots = std::stoll(value);
            else if (key == "warmup_end_asn") t.warmup_end_asn = std::stoll(value);
            else if (key == "seed") t.seed = std::stoull(value);
            continue;
        }
        t.events.push_back(event_from_line(line));
    }
    return t;
}

}  // namespace aslsim

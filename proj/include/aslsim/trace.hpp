#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace aslsim {

enum class EventKind { tx, ack, rx_idle, skip, drop_retry, drop_queue, gen };

const char* to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

// One line per event: asn,slot,channel,src,dst,kind,seq,outcome.
// seq is a globally unique packet id assigned at generation; 0 where not
// applicable. dst 0 means none. outcome is "ok"/"fail" for tx, "-" otherwise.
struct SlotEvent {
    std::int64_t asn = 0;
    int slot = 0;
    int channel = 0;
    int src = 0;
    int dst = 0;
    EventKind kind = EventKind::gen;
    std::uint64_t seq = 0;
    std::string outcome = "-";
};

struct SlotTrace {
    int slotframe_len = 0;
    int channel_offsets = 0;
    double timeslot_ms = 0.0;
    std::int64_t duration_slots = 0;
    std::int64_t warmup_end_asn = 0;
    std::uint64_t seed = 0;
    std::vector<SlotEvent> events;

    void write(std::ostream& os) const;
    static SlotTrace read(std::istream& is);
};

std::string to_line(const SlotEvent& e);
SlotEvent event_from_line(const std::string& line);

}  // namespace aslsim

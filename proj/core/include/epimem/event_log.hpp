#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "epimem/types.hpp"

namespace epimem {

/// One percept: a class, the raw invariant values, and — for relations —
/// participant references given as indexes of earlier items in the same
/// frame.
struct EventItem {
    std::string class_id;
    std::vector<double> raw;
    std::vector<std::uint32_t> participants;

    bool operator==(const EventItem&) const = default;
};

/// Everything perceived at one tick. Frames arrive in strictly increasing
/// tick order.
struct Frame {
    Timestamp tick = 0;
    std::vector<EventItem> items;

    bool operator==(const Frame&) const = default;
};

/// Line format, one record per line:
///
///     epimem-events 1
///     tick <t>
///     item <class> <v0>,<v1>,...            # objects
///     item <class> <v0>,... <i0>,<i1>,...   # relations; i* index frame items
///
/// Ticks must appear even for empty frames so decay keeps advancing.
void write_event_log(std::ostream& out, std::span<const Frame> frames);
void write_event_log_file(const std::string& path, std::span<const Frame> frames);

std::vector<Frame> read_event_log(std::istream& in, const std::string& origin);
std::vector<Frame> read_event_log_file(const std::string& path);

std::uint64_t item_count(std::span<const Frame> frames);

}  // namespace epimem

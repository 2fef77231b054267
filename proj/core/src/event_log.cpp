#include "epimem/event_log.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "text_util.hpp"

namespace epimem {

namespace {
constexpr const char* kHeader = "epimem-events 1";
}

void write_event_log(std::ostream& out, std::span<const Frame> frames) {
    out << kHeader << '\n';
    for (const Frame& f : frames) {
        out << "tick " << f.tick << '\n';
        for (const EventItem& item : f.items) {
            out << "item " << item.class_id << ' ';
            for (std::size_t i = 0; i < item.raw.size(); ++i) {
                if (i) out << ',';
                out << detail::fmt_double(item.raw[i]);
            }
            if (!item.participants.empty()) {
                out << ' ';
                for (std::size_t i = 0; i < item.participants.size(); ++i) {
                    if (i) out << ',';
                    out << item.participants[i];
                }
            }
            out << '\n';
        }
    }
}

void write_event_log_file(const std::string& path, std::span<const Frame> frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write event log '" + path + "'");
    write_event_log(out, frames);
    out.flush();
    if (!out) throw DataError("failed writing event log '" + path + "'");
}

std::vector<Frame> read_event_log(std::istream& in, const std::string& origin) {
    std::vector<Frame> frames;
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw ParseError(origin + ": empty event log");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        detail::fail_at(origin, lineno, "bad header '" + line + "' (expected '" + kHeader + "')");

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto tokens = detail::split_ws(line);
        if (tokens.empty()) continue;

        if (tokens[0] == "tick") {
            if (tokens.size() != 2) detail::fail_at(origin, lineno, "expected: tick <t>");
            Timestamp t = 0;
            if (!detail::parse_u64(tokens[1], t))
                detail::fail_at(origin, lineno, "bad tick '" + tokens[1] + "'");
            if (!frames.empty() && t <= frames.back().tick)
                detail::fail_at(origin, lineno, "ticks must be strictly increasing");
            frames.push_back({t, {}});
        } else if (tokens[0] == "item") {
            if (frames.empty()) detail::fail_at(origin, lineno, "item line before any tick line");
            if (tokens.size() != 3 && tokens.size() != 4)
                detail::fail_at(origin, lineno, "expected: item <class> <values> [participants]");
            EventItem item;
            item.class_id = tokens[1];
            for (const std::string& s : detail::split(tokens[2], ',')) {
                double v = 0.0;
                if (!detail::parse_double(s, v))
                    detail::fail_at(origin, lineno, "bad value '" + s + "'");
                item.raw.push_back(v);
            }
            if (tokens.size() == 4) {
                for (const std::string& s : detail::split(tokens[3], ',')) {
                    std::uint32_t idx = 0;
                    if (!detail::parse_u32(s, idx))
                        detail::fail_at(origin, lineno, "bad participant index '" + s + "'");
                    if (idx >= frames.back().items.size())
                        detail::fail_at(origin, lineno,
                                        "participant index " + s + " does not precede this item");
                    item.participants.push_back(idx);
                }
            }
            frames.back().items.push_back(std::move(item));
        } else {
            detail::fail_at(origin, lineno, "unknown record '" + tokens[0] + "'");
        }
    }
    return frames;
}

std::vector<Frame> read_event_log_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open event log");
    return read_event_log(in, path);
}

std::uint64_t item_count(std::span<const Frame> frames) {
    std::uint64_t n = 0;
    for (const Frame& f : frames) n += f.items.size();
    return n;
}

}  // namespace epimem

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace epimem {

using InstanceId = std::uint64_t;
using Timestamp = std::uint64_t;
using LeafId = std::uint64_t;
using HashKey = std::uint64_t;
using Bin = std::uint32_t;

/// Base class for everything the engine can reject.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text: config files, event logs, cue strings.
/// Messages carry origin:line or the offending token.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Contract or invariant violation on otherwise well-formed data.
class DataError : public Error {
public:
    using Error::Error;
};

/// Relaxed-atomic cell that const read paths may write (instrumentation
/// only); copyable so containing structures keep value semantics.
class RelaxedValue {
public:
    RelaxedValue() = default;
    RelaxedValue(const RelaxedValue& other)
        : v_(other.v_.load(std::memory_order_relaxed)) {}
    RelaxedValue& operator=(const RelaxedValue& other) {
        v_.store(other.v_.load(std::memory_order_relaxed), std::memory_order_relaxed);
        return *this;
    }

    void set(std::uint64_t v) const { v_.store(v, std::memory_order_relaxed); }
    std::uint64_t get() const { return v_.load(std::memory_order_relaxed); }

private:
    mutable std::atomic<std::uint64_t> v_{0};
};

/// A belief: sorted, duplicate-free instance ids. A flat vector keeps
/// snapshots cheap to copy and trivially comparable.
using BeliefSet = std::vector<InstanceId>;

inline bool belief_contains(const BeliefSet& s, InstanceId id) {
    return std::binary_search(s.begin(), s.end(), id);
}

inline void belief_insert(BeliefSet& s, InstanceId id) {
    auto it = std::lower_bound(s.begin(), s.end(), id);
    if (it == s.end() || *it != id) s.insert(it, id);
}

inline void belief_erase(BeliefSet& s, InstanceId id) {
    auto it = std::lower_bound(s.begin(), s.end(), id);
    if (it != s.end() && *it == id) s.erase(it);
}

}  // namespace epimem

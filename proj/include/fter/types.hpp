#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace fter {

/// Dense index of a record inside one dataset (0 .. num_records-1).
using RecordIndex = std::uint32_t;

/// Integer path / vote score. Scores are vote counts, never fractional.
using Score = std::uint32_t;

enum class Answer { yes, no };

enum class Decision { yes, no, unknown };

/// Which tally of a vote edge may take part in path computation.
enum class Direction { positive, negative, none };

/// Filter used when enumerating neighbours.
enum class DirectionFilter { positive, negative, any };

enum class Sign { positive, negative };

/// Unordered record pair, always stored with first < second.
struct Pair {
    RecordIndex first{0};
    RecordIndex second{0};

    Pair() = default;
    Pair(RecordIndex a, RecordIndex b) : first(a < b ? a : b), second(a < b ? b : a) {}

    bool is_self() const { return first == second; }
    std::uint64_t key() const { return (std::uint64_t{first} << 32) | second; }
    static Pair from_key(std::uint64_t k) { return {RecordIndex(k >> 32), RecordIndex(k & 0xffffffffu)}; }

    friend auto operator<=>(const Pair&, const Pair&) = default;
};

struct PairHash {
    std::size_t operator()(const Pair& p) const noexcept { return std::hash<std::uint64_t>{}(p.key()); }
};

/// Input data was malformed or referenced something that does not exist.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration value was missing or out of range.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const char* to_string(Answer a);
const char* to_string(Decision d);
const char* to_string(Direction d);

}  // namespace fter

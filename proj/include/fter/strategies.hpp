#pragma once

#include "fter/clustering.hpp"
#include "fter/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fter {

enum class StrategyKind { ers, urs, hs };

enum class Discipline { monotonic, non_monotonic, consensus };

StrategyKind parse_strategy(std::string_view s);
Discipline parse_discipline(std::string_view s);
const char* to_string(StrategyKind s);
const char* to_string(Discipline d);

struct DisciplineConfig {
    Discipline mode{Discipline::non_monotonic};
    Score quorum{3};
    Score edge_budget{10};
    Score cer_votes{5};
    double connectivity{0.0};

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// True when pair `a` goes before `b`. Rejects |phi| == 1 (resolved pairs).
bool compare(Pair a, Pair b, double phi_a, double phi_b, StrategyKind strategy);

/**
 * Strategy-ordered set of open pairs. HS keeps two logical queues: pairs with
 * phi > 0 (popped first, most certain first) and the rest (least certain first).
 * Equal priorities pop in ascending pair order.
 */
class TaskQueue {
public:
    explicit TaskQueue(StrategyKind strategy = StrategyKind::hs) : strategy_(strategy) {}

    StrategyKind strategy() const { return strategy_; }

    /// Inserts the pair or refreshes its priority.
    void push(Pair pair, double phi);
    bool erase(Pair pair);
    bool contains(Pair pair) const { return index_.contains(pair.key()); }
    std::optional<double> phi(Pair pair) const;

    std::optional<Pair> peek() const;
    std::optional<Pair> next();

    std::size_t size() const { return index_.size(); }
    bool empty() const { return index_.empty(); }

    /// Entries in pop order.
    std::vector<std::pair<Pair, double>> ordered() const;

    /// `i, j, phi, queue` rows where queue is pos|neg for HS and mono otherwise.
    void write_tsv(std::ostream& out, std::span<const Record> records) const;

private:
    struct Key {
        int bucket;
        double rank;
        Pair pair;
        friend auto operator<=>(const Key&, const Key&) = default;
    };
    Key key_for(Pair pair, double phi) const;

    StrategyKind strategy_;
    std::set<Key> order_;
    std::unordered_map<std::uint64_t, double> index_;
};

/// Majority of exactly `v` votes; an even split counts as no.
Decision cer_step(std::span<const Answer> votes, Score v);

/**
 * Transitive closure over final yes/no decisions. Yes merges components;
 * a no between two components marks every pair across them as excluded.
 */
class ClosureState {
public:
    explicit ClosureState(std::size_t num_records = 0);

    void record(Pair pair, Decision decision);
    /// Pair already follows from earlier decisions.
    bool implied(Pair pair) const;
    bool same(RecordIndex a, RecordIndex b) const { return find(a) == find(b); }
    bool separated(RecordIndex a, RecordIndex b) const;

    Clustering clustering() const;

private:
    RecordIndex find(RecordIndex r) const;

    mutable std::vector<RecordIndex> parent_;
    std::vector<std::uint32_t> size_;
    std::vector<std::set<RecordIndex>> apart_;  // per root: roots with a no between them
};

Clustering transitive_closure(std::size_t num_records, std::span<const std::pair<Pair, Decision>> decisions);

/// max(1, floor(kappa |A||B|)) distinct random pairs across the two entities.
std::vector<Pair> expand_connectivity(std::span<const RecordIndex> a, std::span<const RecordIndex> b, double kappa,
                                      std::mt19937_64& rng);

}  // namespace fter

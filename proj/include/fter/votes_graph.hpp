#pragma once

#include "fter/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fter {

struct Record {
    std::string id;
    /// Opaque display reference (image URL or text). Never interpreted by the core.
    std::optional<std::string> payload;
};

/** Yes/no tallies for one unordered record pair. */
struct VoteEdge {
    Score p{0};
    Score n{0};

    Direction usable_direction() const {
        if (p > n) return Direction::positive;
        if (n > p) return Direction::negative;
        return Direction::none;
    }
    /// Weight of the dominating tally, 0 when neither dominates.
    Score usable_weight() const { return p > n ? p : (n > p ? n : 0); }
    Score total() const { return p + n; }

    friend bool operator==(const VoteEdge&, const VoteEdge&) = default;
};

/**
 * Undirected votes multigraph over records.
 *
 * At most one VoteEdge exists per unordered pair; both orientations of a pair
 * resolve to the same edge. Every vote carries weight 1; `vote_weight` is the
 * reserved per-vote weighting hook and is fixed at 1.
 */
class VotesGraph {
public:
    static constexpr Score vote_weight = 1;

    VotesGraph() = default;
    explicit VotesGraph(std::vector<Record> records);

    RecordIndex add_record(Record record);
    std::size_t num_records() const { return records_.size(); }
    const Record& record(RecordIndex r) const { return records_.at(r); }
    std::span<const Record> records() const { return records_; }

    std::optional<RecordIndex> find(std::string_view id) const;
    /// Throws DataError naming the id when it is not a known record.
    RecordIndex index_of(std::string_view id) const;

    /// Increments exactly one tally of `pair`. Rejects unknown records and self pairs.
    const VoteEdge& add_vote(Pair pair, Answer answer);
    const VoteEdge& add_vote(std::string_view a, std::string_view b, Answer answer);

    /// Seeds a pair with a whole tally at once (similarity prefiltering).
    const VoteEdge& add_votes(Pair pair, Score yes, Score no);

    /// Tallies of `pair`; an absent edge reads as (0, 0).
    VoteEdge edge(Pair pair) const;
    Direction usable_direction(Pair pair) const { return edge(pair).usable_direction(); }

    /// Records joined to `r` by an edge whose usable direction matches the filter.
    std::vector<RecordIndex> neighbors(RecordIndex r, DirectionFilter filter) const;
    /// Every record sharing an edge with `r`, regardless of direction. Sorted ascending.
    std::span<const RecordIndex> adjacent(RecordIndex r) const;

    std::size_t num_edges() const { return edges_.size(); }
    std::size_t num_votes() const { return num_votes_; }

    template <typename Fn>
    void for_each_edge(Fn&& fn) const {
        for (const auto& [key, e] : edges_) fn(Pair::from_key(key), e);
    }

private:
    void check_pair(Pair pair) const;
    VoteEdge& touch(Pair pair);

    std::vector<Record> records_;
    std::unordered_map<std::string, RecordIndex> by_id_;
    std::unordered_map<std::uint64_t, VoteEdge> edges_;
    std::vector<std::vector<RecordIndex>> adjacency_;
    std::size_t num_votes_{0};
};

}  // namespace fter

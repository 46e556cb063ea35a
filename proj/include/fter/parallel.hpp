#pragma once

#include "fter/minmax.hpp"
#include "fter/strategies.hpp"
#include "fter/votes_graph.hpp"

#include <vector>

namespace fter {

/// Votes that could settle the pair if all agree, capped by the remaining budget.
Score required_votes(const VoteEdge& edge, Score quorum, Score edge_budget);

struct BatchItem {
    Pair pair;
    Score repeats{1};
};

struct Batch {
    std::vector<BatchItem> items;

    bool empty() const { return items.empty(); }
    std::size_t size() const { return items.size(); }
    std::size_t total_votes() const;
};

/// Closure over every pair the matrix currently decides.
ClosureState decided_closure(const PathScoreMatrix& matrix, const Quorums& quorums);

/**
 * Scans `queue` in pop order and admits a pair unless `known` (current
 * decisions plus a hypothetical yes for every pair admitted so far) already
 * implies it. `repeats(pair)` gives each admitted pair's vote count.
 * `max_pairs` of 0 means no limit.
 */
template <typename RepeatFn>
Batch build_batch(const TaskQueue& queue, ClosureState known, RepeatFn&& repeats, std::size_t max_pairs = 0) {
    Batch batch;
    for (const auto& [pair, phi] : queue.ordered()) {
        (void)phi;
        if (max_pairs && batch.size() >= max_pairs) break;
        if (known.implied(pair)) continue;
        known.record(pair, Decision::yes);
        batch.items.push_back({pair, repeats(pair)});
    }
    return batch;
}

/// MinMax disciplines: repeats are max(1, required_votes).
Batch build_batch(const TaskQueue& queue, const VotesGraph& graph, const PathScoreMatrix& matrix,
                  const Quorums& quorums, const DisciplineConfig& discipline, std::size_t max_pairs = 0);

}  // namespace fter

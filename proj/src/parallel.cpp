#include "fter/parallel.hpp"

#include <algorithm>
#include <cstdlib>

namespace fter {

Score required_votes(const VoteEdge& edge, Score quorum, Score edge_budget) {
    const auto margin = static_cast<Score>(std::abs(static_cast<long long>(edge.p) - static_cast<long long>(edge.n)));
    const Score to_quorum = margin >= quorum ? 0 : quorum - margin;
    const Score left = edge.total() >= edge_budget ? 0 : edge_budget - edge.total();
    return std::min(to_quorum, left);
}

std::size_t Batch::total_votes() const {
    std::size_t t = 0;
    for (const auto& it : items) t += it.repeats;
    return t;
}

ClosureState decided_closure(const PathScoreMatrix& matrix, const Quorums& quorums) {
    const auto n = static_cast<RecordIndex>(matrix.size());
    ClosureState known(n);
    // yes first so that no-links land on final roots
    for (RecordIndex i = 0; i < n; ++i)
        for (auto j : matrix.component_members(i))
            if (j > i && decide(matrix, Pair{i, j}, quorums) == Decision::yes) known.record(Pair{i, j}, Decision::yes);
    for (RecordIndex i = 0; i < n; ++i) {
        const auto row = matrix.n_row(i);
        for (RecordIndex j = i + 1; j < n; ++j)
            if (row[j] >= quorums.negative && !known.implied(Pair{i, j}) &&
                decide(matrix, Pair{i, j}, quorums) == Decision::no)
                known.record(Pair{i, j}, Decision::no);
    }
    return known;
}

Batch build_batch(const TaskQueue& queue, const VotesGraph& graph, const PathScoreMatrix& matrix,
                  const Quorums& quorums, const DisciplineConfig& discipline, std::size_t max_pairs) {
    return build_batch(
        queue, decided_closure(matrix, quorums),
        [&](Pair p) { return std::max<Score>(1, required_votes(graph.edge(p), discipline.quorum, discipline.edge_budget)); },
        max_pairs);
}

}  // namespace fter

#pragma once

#include "fter/votes_graph.hpp"

#include <random>
#include <string>

namespace fter::testing {

inline VotesGraph records(std::size_t n) {
    VotesGraph g;
    for (std::size_t i = 1; i <= n; ++i) g.add_record({"r" + std::to_string(i), std::nullopt});
    return g;
}

inline Pair pr(RecordIndex a, RecordIndex b) { return Pair{a - 1, b - 1}; }

inline VotesGraph graph_a() {
    auto g = records(4);
    g.add_votes(pr(1, 2), 3, 0);
    g.add_votes(pr(1, 3), 1, 0);
    g.add_votes(pr(3, 4), 3, 0);
    g.add_votes(pr(2, 4), 1, 4);
    return g;
}

inline VotesGraph graph_b() {
    auto g = records(4);
    g.add_votes(pr(1, 3), 0, 3);
    g.add_votes(pr(3, 4), 3, 0);
    g.add_votes(pr(2, 4), 3, 3);
    return g;
}

/// One random vote on a random pair of an n-record graph.
inline std::pair<Pair, Answer> random_vote(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<RecordIndex> pick(0, static_cast<RecordIndex>(n - 1));
    RecordIndex a = pick(rng), b = pick(rng);
    while (b == a) b = pick(rng);
    return {Pair{a, b}, std::bernoulli_distribution(0.5)(rng) ? Answer::yes : Answer::no};
}

}  // namespace fter::testing

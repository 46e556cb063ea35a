#pragma once

// Building blocks of the MinMax score computation. Every kernel works on one
// positive component in local (0 .. m-1) indexing and returns an m x m
// row-major table, so components can be processed independently.

#include "fter/types.hpp"
#include "fter/votes_graph.hpp"

#include <span>
#include <vector>

namespace fter::kernels {

struct LocalEdge {
    std::uint32_t a;
    std::uint32_t b;
    Score weight;
};

struct ComponentView {
    std::vector<RecordIndex> members;  // ascending global indices
    std::vector<LocalEdge> positive;   // usable positive edges inside the component
    std::vector<LocalEdge> negative;   // usable negative edges with both ends inside

    std::size_t size() const { return members.size(); }
};

/// Collects the usable edges among `members` (which must be sorted ascending).
ComponentView make_view(const VotesGraph& graph, std::span<const RecordIndex> members);

/// Connected components of the usable-positive subgraph, each sorted ascending.
std::vector<std::vector<RecordIndex>> positive_components(const VotesGraph& graph);

/// Records reachable from `seed` over usable positive edges, ascending.
std::vector<RecordIndex> positive_component_of(const VotesGraph& graph, RecordIndex seed);

/// Bottleneck (widest path) scores among the component members.
std::vector<Score> component_positive_scores(const ComponentView& view);

/**
 * Acyclic one-negative-hop scores for pairs inside the component.
 *
 * For each threshold t and internal negative edge e, a simple path through e
 * exists between i and j iff, in the threshold graph plus e, i and j hang off
 * different vertices of the block that contains e. Reachability is gathered
 * in per-row bitsets, thresholds are visited in descending order and the
 * first threshold that connects a pair is its score.
 */
std::vector<Score> component_negative_scores(const ComponentView& view);

}  // namespace fter::kernels

#pragma once

#include "fter/types.hpp"
#include "fter/votes_graph.hpp"

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

namespace fter {

/// Selects the serial reference path or the OpenMP kernels.
enum class Execution { serial, parallel };

struct Quorums {
    Score positive{3};
    Score negative{3};

    Quorums() = default;
    Quorums(Score q_p, Score q_n);
    explicit Quorums(Score q) : Quorums(q, q) {}
};

struct PathScore {
    Score value{0};
    /// Shortest path achieving `value`; empty iff value == 0.
    std::vector<RecordIndex> best_path;
};

/**
 * Per-pair MinMax scores p* (strongest all-positive acyclic path) and n*
 * (strongest acyclic path with exactly one negative hop).
 *
 * Besides the dense symmetric score tables the matrix remembers the
 * positive-component partition and the effective (usable) edges it was last
 * computed from, which is what lets `update` touch only the affected region.
 */
class PathScoreMatrix {
public:
    PathScoreMatrix() = default;
    explicit PathScoreMatrix(std::size_t num_records);

    std::size_t size() const { return n_; }

    Score p_star(RecordIndex i, RecordIndex j) const { return pos_[i * n_ + j]; }
    Score n_star(RecordIndex i, RecordIndex j) const { return neg_[i * n_ + j]; }
    Score p_star(Pair p) const { return p_star(p.first, p.second); }
    Score n_star(Pair p) const { return n_star(p.first, p.second); }
    Score score(Pair p, Sign s) const { return s == Sign::positive ? p_star(p) : n_star(p); }

    std::span<const Score> p_row(RecordIndex i) const { return {pos_.data() + i * n_, n_}; }
    std::span<const Score> n_row(RecordIndex i) const { return {neg_.data() + i * n_, n_}; }

    /// Records sharing a positive component with `r` (including `r`), ascending.
    std::span<const RecordIndex> component_members(RecordIndex r) const { return members_[comp_[r]]; }
    std::uint32_t component_of(RecordIndex r) const { return comp_[r]; }

    /// Score tables only; bookkeeping is not compared.
    bool scores_equal(const PathScoreMatrix& other) const {
        return n_ == other.n_ && pos_ == other.pos_ && neg_ == other.neg_;
    }

private:
    friend class MatrixBuilder;

    struct EffectiveEdge {
        Direction dir{Direction::none};
        Score weight{0};
        friend bool operator==(const EffectiveEdge&, const EffectiveEdge&) = default;
    };

    std::size_t n_{0};
    std::vector<Score> pos_;
    std::vector<Score> neg_;
    std::vector<std::uint32_t> comp_;
    std::vector<std::vector<RecordIndex>> members_;
    std::vector<std::uint32_t> free_labels_;
    std::unordered_map<std::uint64_t, EffectiveEdge> effective_;
};

/// Computes the whole matrix from scratch with the component kernels.
PathScoreMatrix compute_scores(const VotesGraph& graph, Execution exec = Execution::parallel);

/**
 * Reference oracle: exhaustive enumeration of acyclic paths over usable edges.
 * Exponential; rejects graphs with more than `brute_force_limit` records.
 */
inline constexpr std::size_t brute_force_limit = 12;
PathScoreMatrix brute_force_scores(const VotesGraph& graph);

/**
 * Brings `matrix` in line with `graph` after the edge of `pair` changed.
 * Returns every pair whose p* or n* changed. Affected scores are recomputed
 * exactly over the positive components touching the edge.
 */
std::vector<Pair> update(const VotesGraph& graph, PathScoreMatrix& matrix, Pair pair,
                         Execution exec = Execution::parallel);

/// Grows the matrix after records were appended to the graph.
void grow(PathScoreMatrix& matrix, std::size_t num_records);

Decision decide(const PathScoreMatrix& matrix, Pair pair, const Quorums& quorums);

/// Signed consensus (p* - n*) / quorum clamped to [-1, 1].
double consensus(const PathScoreMatrix& matrix, Pair pair, Score quorum);
double consensus(Score p_star, Score n_star, Score quorum);
/// Uses the quorum matching the sign of p* - n*.
double consensus(const PathScoreMatrix& matrix, Pair pair, const Quorums& quorums);

/// Recovers a shortest path realising the stored score of the requested sign.
PathScore path_score(const VotesGraph& graph, const PathScoreMatrix& matrix, Pair pair, Sign sign);

/// Minimal, non-dominated edges of the best path of `sign`; empty when no path exists.
std::vector<Pair> weakest_links(const PathScoreMatrix& matrix, const VotesGraph& graph, Pair pair,
                                Sign sign);

/// Same selection on an explicit record sequence.
std::vector<Pair> weakest_links_on_path(const VotesGraph& graph, std::span<const RecordIndex> path,
                                        Sign sign);

/// Debug dump: `i, j, p_star, n_star, best_path_p, best_path_n` rows.
void write_matrix_tsv(std::ostream& out, const VotesGraph& graph, const PathScoreMatrix& matrix);

}  // namespace fter

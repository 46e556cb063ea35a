#pragma once

#include "fter/minmax.hpp"
#include "fter/types.hpp"
#include "fter/votes_graph.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace fter {

/// Partition of the records 0 .. n-1 into disjoint, non-empty clusters.
class Clustering {
public:
    Clustering() = default;
    /// All singletons.
    explicit Clustering(std::size_t num_records);

    std::size_t num_records() const { return label_.size(); }
    std::size_t num_clusters() const { return live_; }

    std::uint32_t cluster_of(RecordIndex r) const { return label_.at(r); }
    std::span<const RecordIndex> members(std::uint32_t cluster) const { return members_.at(cluster); }
    bool same_cluster(RecordIndex a, RecordIndex b) const { return label_.at(a) == label_.at(b); }

    /// Clusters sorted by their smallest member, members ascending.
    std::vector<std::vector<RecordIndex>> clusters() const;

    /// Dissolves the clusters of `records` (which must be whole clusters) and
    /// installs `groups` in their place.
    void replace(std::span<const RecordIndex> records, const std::vector<std::vector<RecordIndex>>& groups);

    /// Throws std::logic_error when the partition invariant is broken.
    void validate() const;

private:
    std::uint32_t take_label();

    std::vector<std::uint32_t> label_;
    std::vector<std::vector<RecordIndex>> members_;
    std::vector<std::uint32_t> free_;
    std::size_t live_{0};
};

/// Seeded visiting order of records in resolve.
class SeedOrder {
public:
    SeedOrder() = default;
    SeedOrder(std::size_t num_records, std::uint64_t seed);

    std::uint32_t rank(RecordIndex r) const { return rank_.at(r); }
    std::size_t size() const { return rank_.size(); }

private:
    std::vector<std::uint32_t> rank_;
};

struct UpdateComponent {
    std::vector<RecordIndex> records;   // endpoints of changed pairs, ascending
    std::vector<RecordIndex> expanded;  // whole clusters containing them, ascending
};

bool is_good(RecordIndex record, std::span<const RecordIndex> cluster, const PathScoreMatrix& matrix);

/// Clusters `records` (ascending) and returns the groups.
std::vector<std::vector<RecordIndex>> resolve_groups(std::span<const RecordIndex> records,
                                                     const PathScoreMatrix& matrix, const SeedOrder& order);

/// Clusters every record of the matrix.
Clustering resolve(const PathScoreMatrix& matrix, const SeedOrder& order);
Clustering resolve(const PathScoreMatrix& matrix, std::uint64_t seed);

UpdateComponent transitive_update_component(std::span<const Pair> changed, const Clustering& clustering);

/// Re-clusters the expanded component in place; other clusters are untouched.
void partial_resolve(Clustering& clustering, const UpdateComponent& component, const PathScoreMatrix& matrix,
                     const SeedOrder& order);

/// `record_id,cluster_id` rows.
void write_clustering_csv(std::ostream& out, const VotesGraph& graph, const Clustering& clustering);

}  // namespace fter

#include "fter/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace fter {

Clustering::Clustering(std::size_t num_records) : label_(num_records), members_(num_records), live_(num_records) {
    for (RecordIndex r = 0; r < num_records; ++r) {
        label_[r] = r;
        members_[r] = {r};
    }
}

std::vector<std::vector<RecordIndex>> Clustering::clusters() const {
    std::vector<std::vector<RecordIndex>> out;
    for (const auto& m : members_)
        if (!m.empty()) out.push_back(m);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

std::uint32_t Clustering::take_label() {
    if (!free_.empty()) {
        const auto l = free_.back();
        free_.pop_back();
        return l;
    }
    members_.emplace_back();
    return static_cast<std::uint32_t>(members_.size() - 1);
}

void Clustering::replace(std::span<const RecordIndex> records, const std::vector<std::vector<RecordIndex>>& groups) {
    for (auto r : records) {
        const auto l = label_.at(r);
        if (members_[l].empty()) continue;
        members_[l].clear();
        free_.push_back(l);
        --live_;
    }
    for (const auto& g : groups) {
        if (g.empty()) continue;
        const auto l = take_label();
        members_[l] = g;
        std::sort(members_[l].begin(), members_[l].end());
        for (auto r : g) label_.at(r) = l;
        ++live_;
    }
}

void Clustering::validate() const {
    std::size_t seen = 0, live = 0;
    for (std::uint32_t l = 0; l < members_.size(); ++l) {
        if (members_[l].empty()) continue;
        ++live;
        for (auto r : members_[l]) {
            if (label_.at(r) != l) throw std::logic_error("record " + std::to_string(r) + " has a stale label");
            ++seen;
        }
    }
    if (seen != label_.size() || live != live_) throw std::logic_error("clusters do not partition the records");
}

SeedOrder::SeedOrder(std::size_t num_records, std::uint64_t seed) : rank_(num_records) {
    std::vector<RecordIndex> perm(num_records);
    std::iota(perm.begin(), perm.end(), RecordIndex{0});
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
    for (std::uint32_t k = 0; k < num_records; ++k) rank_[perm[k]] = k;
}

bool is_good(RecordIndex record, std::span<const RecordIndex> cluster, const PathScoreMatrix& matrix) {
    std::int64_t score = 0, penalty = 0;
    for (auto j : cluster) {
        if (j == record) continue;
        const std::int64_t p = matrix.p_star(record, j), n = matrix.n_star(record, j);
        if (p > n) score += p - n;
        else penalty += n - p;
    }
    return score > penalty;
}

namespace {

/// One cluster of the resolve loop, keeping per-record balances against the
/// current members so that goodness checks are O(1).
class ClusterBuilder {
public:
    ClusterBuilder(const PathScoreMatrix& matrix, std::vector<RecordIndex> scope)
        : matrix_(matrix), scope_(std::move(scope)), in_(scope_.size(), 0), balance_(scope_.size(), 0),
          links_(scope_.size(), 0) {}

    void add(std::size_t k) {
        in_[k] = 1;
        shift(k, +1);
    }
    void remove(std::size_t k) {
        in_[k] = 0;
        shift(k, -1);
    }
    bool good(std::size_t k) const { return balance_[k] > 0; }
    bool member(std::size_t k) const { return in_[k]; }
    bool linked(std::size_t k) const { return links_[k] > 0; }
    std::size_t size() const { return scope_.size(); }
    RecordIndex record(std::size_t k) const { return scope_[k]; }

    std::vector<RecordIndex> members() const {
        std::vector<RecordIndex> out;
        for (std::size_t k = 0; k < scope_.size(); ++k)
            if (in_[k]) out.push_back(scope_[k]);
        return out;
    }

private:
    void shift(std::size_t k, int sign) {
        const auto x = scope_[k];
        const auto p = matrix_.p_row(x), n = matrix_.n_row(x);
        for (std::size_t o = 0; o < scope_.size(); ++o) {
            if (o == k) continue;
            const auto y = scope_[o];
            const std::int64_t d = static_cast<std::int64_t>(p[y]) - static_cast<std::int64_t>(n[y]);
            balance_[o] += sign * d;
            if (d > 0) links_[o] += sign;
        }
    }

    const PathScoreMatrix& matrix_;
    std::vector<RecordIndex> scope_;
    std::vector<char> in_;
    std::vector<std::int64_t> balance_;  // score - penalty against members
    std::vector<int> links_;             // members with p* > n*
};

}  // namespace

std::vector<std::vector<RecordIndex>> resolve_groups(std::span<const RecordIndex> records,
                                                     const PathScoreMatrix& matrix, const SeedOrder& order) {
    std::vector<RecordIndex> visit(records.begin(), records.end());
    std::sort(visit.begin(), visit.end(), [&](auto a, auto b) { return order.rank(a) < order.rank(b); });
    std::vector<char> in_scope(matrix.size(), 0), assigned(matrix.size(), 0);
    for (auto r : records) in_scope[r] = 1;

    std::vector<std::vector<RecordIndex>> groups;
    for (auto seed : visit) {
        if (assigned[seed]) continue;
        // Anything with p* > n* to a member shares its positive component.
        std::vector<RecordIndex> scope;
        for (auto r : matrix.component_members(seed))
            if (in_scope[r] && !assigned[r]) scope.push_back(r);
        ClusterBuilder c(matrix, scope);
        const auto seed_slot =
            static_cast<std::size_t>(std::lower_bound(scope.begin(), scope.end(), seed) - scope.begin());
        c.add(seed_slot);
        for (std::size_t k = 0; k < c.size(); ++k)
            if (k != seed_slot && matrix.p_star(seed, c.record(k)) > matrix.n_star(seed, c.record(k))) c.add(k);

        // removal: first non-good member (ascending id) goes, then rescan
        for (bool removed = true; removed;) {
            removed = false;
            for (std::size_t k = 0; k < c.size(); ++k)
                if (c.member(k) && !c.good(k)) {
                    c.remove(k);
                    removed = true;
                    break;
                }
        }
        // addition: first good, linked outsider (ascending id) joins, then rescan
        for (bool added = true; added;) {
            added = false;
            for (std::size_t k = 0; k < c.size(); ++k)
                if (!c.member(k) && c.linked(k) && c.good(k)) {
                    c.add(k);
                    added = true;
                    break;
                }
        }
        auto members = c.members();
        if (members.empty()) members = {seed};
        for (auto r : members) assigned[r] = 1;
        groups.push_back(std::move(members));
    }
    return groups;
}

Clustering resolve(const PathScoreMatrix& matrix, const SeedOrder& order) {
    std::vector<RecordIndex> all(matrix.size());
    std::iota(all.begin(), all.end(), RecordIndex{0});
    Clustering out(matrix.size());
    out.replace(all, resolve_groups(all, matrix, order));
    return out;
}

Clustering resolve(const PathScoreMatrix& matrix, std::uint64_t seed) {
    return resolve(matrix, SeedOrder(matrix.size(), seed));
}

UpdateComponent transitive_update_component(std::span<const Pair> changed, const Clustering& clustering) {
    UpdateComponent out;
    std::vector<char> seen_record(clustering.num_records(), 0);
    for (const auto& p : changed)
        for (auto r : {p.first, p.second})
            if (!seen_record[r]) {
                seen_record[r] = 1;
                out.records.push_back(r);
            }
    std::sort(out.records.begin(), out.records.end());
    std::vector<char> seen_cluster;
    for (auto r : out.records) {
        const auto l = clustering.cluster_of(r);
        if (l >= seen_cluster.size()) seen_cluster.resize(l + 1, 0);
        if (seen_cluster[l]) continue;
        seen_cluster[l] = 1;
        for (auto m : clustering.members(l)) out.expanded.push_back(m);
    }
    std::sort(out.expanded.begin(), out.expanded.end());
    return out;
}

void partial_resolve(Clustering& clustering, const UpdateComponent& component, const PathScoreMatrix& matrix,
                     const SeedOrder& order) {
    if (component.expanded.empty()) return;
    clustering.replace(component.expanded, resolve_groups(component.expanded, matrix, order));
}

void write_clustering_csv(std::ostream& out, const VotesGraph& graph, const Clustering& clustering) {
    out << "record_id,cluster_id\n";
    const auto groups = clustering.clusters();
    for (std::size_t c = 0; c < groups.size(); ++c)
        for (auto r : groups[c]) out << graph.record(r).id << ',' << c << '\n';
}

}  // namespace fter

#include "fter/minmax.hpp"

#include "fter/kernels.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <unordered_set>

namespace fter {

namespace {

constexpr Score unbounded = std::numeric_limits<Score>::max();

bool use_threads(Execution exec) { return exec == Execution::parallel; }

}  // namespace

Quorums::Quorums(Score q_p, Score q_n) : positive(q_p), negative(q_n) {
    if (q_p < 1 || q_n < 1) throw ConfigError("quorums must be >= 1");
}

PathScoreMatrix::PathScoreMatrix(std::size_t num_records)
    : n_(num_records), pos_(n_ * n_, 0), neg_(n_ * n_, 0), comp_(n_) {
    members_.resize(n_);
    for (RecordIndex r = 0; r < n_; ++r) {
        comp_[r] = r;
        members_[r] = {r};
    }
}

/// Owns every mutation of PathScoreMatrix internals.
class MatrixBuilder {
public:
    MatrixBuilder(const VotesGraph& graph, PathScoreMatrix& m) : graph_(graph), m_(m) {}

    void build(Execution exec) {
        const auto n = graph_.num_records();
        m_ = PathScoreMatrix(n);
        m_.members_.clear();
        const auto comps = kernels::positive_components(graph_);
        for (std::uint32_t label = 0; label < comps.size(); ++label) {
            for (auto r : comps[label]) m_.comp_[r] = label;
            m_.members_.push_back(comps[label]);
        }
        graph_.for_each_edge([&](Pair p, const VoteEdge& e) {
            if (e.usable_direction() != Direction::none)
                m_.effective_[p.key()] = {e.usable_direction(), e.usable_weight()};
        });

        const auto num_comps = static_cast<std::int64_t>(comps.size());
#pragma omp parallel for schedule(dynamic) if (use_threads(exec))
        for (std::int64_t c = 0; c < num_comps; ++c) {
            const auto& members = comps[c];
            if (members.size() < 2) continue;
            const auto view = kernels::make_view(graph_, members);
            const auto pos = kernels::component_positive_scores(view);
            const auto neg = kernels::component_negative_scores(view);
            const auto k = members.size();
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = 0; b < k; ++b) {
                    m_.pos_[members[a] * n + members[b]] = pos[a * k + b];
                    m_.neg_[members[a] * n + members[b]] = neg[a * k + b];
                }
        }

        std::vector<std::vector<CrossEdge>> cross(comps.size());
        for (std::uint32_t label = 0; label < comps.size(); ++label) cross[label] = cross_edges(label);
        const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16) if (use_threads(exec))
        for (std::int64_t x = 0; x < rows; ++x) {
            const auto r = static_cast<RecordIndex>(x);
            cross_row(r, cross[m_.comp_[r]], std::span<Score>(m_.neg_.data() + x * n, n));
        }
    }

    std::vector<Pair> update(Pair pair, Execution exec) {
        const auto n = graph_.num_records();
        if (m_.n_ < n) grow(m_, n);
        const auto e = graph_.edge(pair);
        if (e.total() == 0) throw DataError("update on a pair without votes");
        const PathScoreMatrix::EffectiveEdge now{e.usable_direction(), e.usable_weight()};
        auto it = m_.effective_.find(pair.key());
        const PathScoreMatrix::EffectiveEdge before =
            it == m_.effective_.end() ? PathScoreMatrix::EffectiveEdge{} : it->second;
        if (now == before) return {};
        if (now.dir == Direction::none) m_.effective_.erase(pair.key());
        else m_.effective_[pair.key()] = now;

        // Positive components containing the endpoints, after the change. Their
        // union equals the union of the old components of the endpoints since
        // only this edge changed.
        auto comp_a = kernels::positive_component_of(graph_, pair.first);
        std::vector<RecordIndex> comp_b;
        if (!std::binary_search(comp_a.begin(), comp_a.end(), pair.second))
            comp_b = kernels::positive_component_of(graph_, pair.second);

        std::vector<RecordIndex> affected;
        std::set_union(comp_a.begin(), comp_a.end(), comp_b.begin(), comp_b.end(), std::back_inserter(affected));

        std::vector<char> in_affected(n, 0);
        for (auto r : affected) in_affected[r] = 1;

        std::vector<Pair> changed;

        // Relabel components.
        const auto old_a = m_.comp_[pair.first], old_b = m_.comp_[pair.second];
        for (auto l : {old_a, old_b}) {
            if (m_.members_[l].empty()) continue;
            m_.members_[l].clear();
            m_.free_labels_.push_back(l);
        }
        auto assign = [&](const std::vector<RecordIndex>& members) {
            if (members.empty()) return;
            std::uint32_t label;
            if (!m_.free_labels_.empty()) {
                label = m_.free_labels_.back();
                m_.free_labels_.pop_back();
            } else {
                label = static_cast<std::uint32_t>(m_.members_.size());
                m_.members_.emplace_back();
            }
            m_.members_[label] = members;
            for (auto r : members) m_.comp_[r] = label;
        };
        assign(comp_a);
        assign(comp_b);

        // p* inside the affected region.
        std::vector<std::vector<Score>> neg_blocks;
        std::vector<const std::vector<RecordIndex>*> blocks_for;
        for (const auto* members : {&comp_a, &comp_b}) {
            if (members->empty()) continue;
            const auto view = kernels::make_view(graph_, *members);
            const auto pos = kernels::component_positive_scores(view);
            neg_blocks.push_back(kernels::component_negative_scores(view));
            blocks_for.push_back(members);
            const auto k = members->size();
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = a + 1; b < k; ++b) {
                    const auto x = (*members)[a], y = (*members)[b];
                    if (m_.pos_[x * n + y] != pos[a * k + b]) {
                        m_.pos_[x * n + y] = m_.pos_[y * n + x] = pos[a * k + b];
                        changed.emplace_back(x, y);
                    }
                }
        }
        if (!comp_b.empty()) {
            for (auto x : comp_a)
                for (auto y : comp_b)
                    if (m_.pos_[x * n + y] != 0) {
                        m_.pos_[x * n + y] = m_.pos_[y * n + x] = 0;
                        changed.emplace_back(x, y);
                    }
        }

        // n* rows of every affected record, computed into a buffer first.
        const auto rows = static_cast<std::int64_t>(affected.size());
        std::vector<Score> buffer(affected.size() * n, 0);
        const auto cross_a = cross_edges(m_.comp_[pair.first]);
        const auto cross_b = comp_b.empty() ? std::vector<CrossEdge>{} : cross_edges(m_.comp_[pair.second]);
#pragma omp parallel for schedule(dynamic, 4) if (use_threads(exec))
        for (std::int64_t r = 0; r < rows; ++r) {
            const auto x = affected[r];
            const auto& cross = m_.comp_[x] == m_.comp_[pair.first] ? cross_a : cross_b;
            cross_row(x, cross, std::span<Score>(buffer.data() + r * n, n));
        }
        std::vector<std::size_t> row_of(n, 0);
        for (std::size_t r = 0; r < affected.size(); ++r) row_of[affected[r]] = r;
        for (std::size_t bi = 0; bi < neg_blocks.size(); ++bi) {
            const auto& members = *blocks_for[bi];
            const auto& neg = neg_blocks[bi];
            const auto k = members.size();
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = 0; b < k; ++b)
                    buffer[row_of[members[a]] * n + members[b]] = neg[a * k + b];
        }

        for (std::size_t r = 0; r < affected.size(); ++r) {
            const auto x = affected[r];
            const Score* fresh = buffer.data() + r * n;
            for (RecordIndex y = 0; y < n; ++y) {
                if (y == x || fresh[y] == m_.neg_[x * n + y]) continue;
                if (in_affected[y] && y < x) continue;  // handled from row y
                m_.neg_[x * n + y] = m_.neg_[y * n + x] = fresh[y];
                changed.emplace_back(x, y);
            }
        }

        std::sort(changed.begin(), changed.end());
        changed.erase(std::unique(changed.begin(), changed.end()), changed.end());
        return changed;
    }

    static void grow(PathScoreMatrix& matrix, std::size_t num_records) {
        const auto old = matrix.size();
        if (num_records <= old) return;
        PathScoreMatrix bigger(num_records);
        for (RecordIndex i = 0; i < old; ++i)
            for (RecordIndex j = 0; j < old; ++j) {
                bigger.pos_[i * num_records + j] = matrix.pos_[i * old + j];
                bigger.neg_[i * num_records + j] = matrix.neg_[i * old + j];
            }
        bigger.members_ = matrix.members_;
        bigger.comp_ = matrix.comp_;
        bigger.free_labels_ = matrix.free_labels_;
        bigger.effective_ = std::move(matrix.effective_);
        for (RecordIndex r = static_cast<RecordIndex>(old); r < num_records; ++r) {
            bigger.comp_.push_back(static_cast<std::uint32_t>(bigger.members_.size()));
            bigger.members_.push_back({r});
        }
        matrix = std::move(bigger);
    }

    static void assign_scores(PathScoreMatrix& m, std::vector<Score> pos, std::vector<Score> neg) {
        m.pos_ = std::move(pos);
        m.neg_ = std::move(neg);
    }

private:
    Score pos_or_unbounded(RecordIndex x, RecordIndex y) const {
        return x == y ? unbounded : m_.pos_[x * m_.n_ + y];
    }

    struct CrossEdge {
        RecordIndex inside;
        RecordIndex outside;
        Score weight;
    };

    /// Negative edges leaving the positive component `label`.
    std::vector<CrossEdge> cross_edges(std::uint32_t label) const {
        std::vector<CrossEdge> out;
        for (auto u : m_.members_[label])
            for (auto v : graph_.adjacent(u)) {
                if (m_.comp_[v] == label) continue;
                const auto e = graph_.edge(Pair{u, v});
                if (e.usable_direction() == Direction::negative) out.push_back({u, v, e.n});
            }
        return out;
    }

    /// n* from `x` to every record outside its positive component.
    void cross_row(RecordIndex x, std::span<const CrossEdge> cross, std::span<Score> out) const {
        for (const auto& c : cross) {
            const auto head = std::min(pos_or_unbounded(x, c.inside), c.weight);
            if (head == 0) continue;
            const Score* from_v = m_.pos_.data() + std::size_t{c.outside} * m_.n_;
            for (auto y : m_.members_[m_.comp_[c.outside]]) {
                const auto val = std::min(head, y == c.outside ? unbounded : from_v[y]);
                if (val > out[y]) out[y] = val;
            }
        }
    }

    const VotesGraph& graph_;
    PathScoreMatrix& m_;
};

PathScoreMatrix compute_scores(const VotesGraph& graph, Execution exec) {
    PathScoreMatrix m;
    MatrixBuilder(graph, m).build(exec);
    return m;
}

std::vector<Pair> update(const VotesGraph& graph, PathScoreMatrix& matrix, Pair pair, Execution exec) {
    return MatrixBuilder(graph, matrix).update(pair, exec);
}

void grow(PathScoreMatrix& matrix, std::size_t num_records) { MatrixBuilder::grow(matrix, num_records); }

PathScoreMatrix brute_force_scores(const VotesGraph& graph) {
    const auto n = graph.num_records();
    if (n > brute_force_limit)
        throw std::invalid_argument("brute_force_scores is limited to " + std::to_string(brute_force_limit) +
                                    " records, got " + std::to_string(n));
    struct Hop {
        RecordIndex to;
        Score weight;
    };
    std::vector<std::vector<Hop>> pos(n), neg(n);
    graph.for_each_edge([&](Pair p, const VoteEdge& e) {
        if (e.usable_direction() == Direction::positive) {
            pos[p.first].push_back({p.second, e.p});
            pos[p.second].push_back({p.first, e.p});
        } else if (e.usable_direction() == Direction::negative) {
            neg[p.first].push_back({p.second, e.n});
            neg[p.second].push_back({p.first, e.n});
        }
    });

    std::vector<char> on_path(n, 0);
    std::vector<Score> best_pos(n * n, 0), best_neg(n * n, 0);

    auto dfs = [&](auto&& self, RecordIndex source, RecordIndex at, Score bottleneck, bool used_negative) -> void {
        for (const auto& h : pos[at]) {
            if (on_path[h.to]) continue;
            const auto b = std::min(bottleneck, h.weight);
            auto& slot = used_negative ? best_neg[source * n + h.to] : best_pos[source * n + h.to];
            slot = std::max(slot, b);
            on_path[h.to] = 1;
            self(self, source, h.to, b, used_negative);
            on_path[h.to] = 0;
        }
        if (used_negative) return;
        for (const auto& h : neg[at]) {
            if (on_path[h.to]) continue;
            const auto b = std::min(bottleneck, h.weight);
            auto& slot = best_neg[source * n + h.to];
            slot = std::max(slot, b);
            on_path[h.to] = 1;
            self(self, source, h.to, b, true);
            on_path[h.to] = 0;
        }
    };
    for (RecordIndex s = 0; s < n; ++s) {
        on_path[s] = 1;
        dfs(dfs, s, s, unbounded, false);
        on_path[s] = 0;
    }
    PathScoreMatrix out(n);
    MatrixBuilder::assign_scores(out, std::move(best_pos), std::move(best_neg));
    return out;
}

Decision decide(const PathScoreMatrix& matrix, Pair pair, const Quorums& quorums) {
    if (pair.is_self()) return Decision::yes;
    const auto diff = static_cast<std::int64_t>(matrix.p_star(pair)) - static_cast<std::int64_t>(matrix.n_star(pair));
    if (diff >= static_cast<std::int64_t>(quorums.positive)) return Decision::yes;
    if (-diff >= static_cast<std::int64_t>(quorums.negative)) return Decision::no;
    return Decision::unknown;
}

double consensus(Score p_star, Score n_star, Score quorum) {
    if (quorum < 1) throw ConfigError("consensus quorum must be >= 1");
    const double phi = (static_cast<double>(p_star) - static_cast<double>(n_star)) / quorum;
    return std::clamp(phi, -1.0, 1.0);
}

double consensus(const PathScoreMatrix& matrix, Pair pair, Score quorum) {
    return consensus(matrix.p_star(pair), matrix.n_star(pair), quorum);
}

double consensus(const PathScoreMatrix& matrix, Pair pair, const Quorums& quorums) {
    const auto p = matrix.p_star(pair), n = matrix.n_star(pair);
    return consensus(p, n, p >= n ? quorums.positive : quorums.negative);
}

namespace {

std::vector<RecordIndex> shortest_positive(const VotesGraph& graph, RecordIndex from, RecordIndex to, Score floor) {
    const auto n = graph.num_records();
    std::vector<RecordIndex> parent(n, std::numeric_limits<RecordIndex>::max());
    std::vector<RecordIndex> queue{from};
    parent[from] = from;
    for (std::size_t h = 0; h < queue.size(); ++h) {
        const auto x = queue[h];
        if (x == to) break;
        for (auto y : graph.adjacent(x)) {
            if (parent[y] != std::numeric_limits<RecordIndex>::max()) continue;
            const auto e = graph.edge(Pair{x, y});
            if (e.usable_direction() != Direction::positive || e.p < floor) continue;
            parent[y] = x;
            queue.push_back(y);
        }
    }
    if (parent[to] == std::numeric_limits<RecordIndex>::max()) return {};
    std::vector<RecordIndex> path{to};
    while (path.back() != from) path.push_back(parent[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
}

/// Shortest simple path with exactly one negative hop, every hop >= floor.
std::vector<RecordIndex> shortest_negative(const VotesGraph& graph, RecordIndex from, RecordIndex to, Score floor) {
    const auto n = graph.num_records();
    constexpr std::size_t far = std::numeric_limits<std::size_t>::max() / 4;
    auto usable = [&](RecordIndex x, RecordIndex y, Direction d) {
        const auto e = graph.edge(Pair{x, y});
        return e.usable_direction() == d && e.usable_weight() >= floor;
    };
    // Remaining-hop lower bounds ignoring simplicity: after[x] with the
    // negative hop spent, before[x] with it still ahead.
    std::vector<std::size_t> after(n, far), before(n, far);
    std::vector<RecordIndex> queue{to};
    after[to] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h)
        for (auto y : graph.adjacent(queue[h]))
            if (after[y] == far && usable(queue[h], y, Direction::positive)) {
                after[y] = after[queue[h]] + 1;
                queue.push_back(y);
            }
    // 0-1 style relaxation over the layered graph (all hops cost 1).
    bool progress = true;
    for (RecordIndex x = 0; x < n; ++x)
        for (auto y : graph.adjacent(x))
            if (after[y] != far && usable(x, y, Direction::negative)) before[x] = std::min(before[x], after[y] + 1);
    while (progress) {
        progress = false;
        for (RecordIndex x = 0; x < n; ++x)
            for (auto y : graph.adjacent(x))
                if (before[y] != far && before[y] + 1 < before[x] && usable(x, y, Direction::positive)) {
                    before[x] = before[y] + 1;
                    progress = true;
                }
    }
    if (before[from] == far) return {};

    std::vector<RecordIndex> path{from};
    std::vector<char> on_path(n, 0);
    on_path[from] = 1;
    auto dfs = [&](auto&& self, RecordIndex at, bool spent, std::size_t budget) -> bool {
        if (spent && at == to) return true;
        const auto bound = spent ? after[at] : before[at];
        if (bound > budget) return false;
        for (auto y : graph.adjacent(at)) {
            if (on_path[y]) continue;
            const bool positive = usable(at, y, Direction::positive);
            const bool negative = !spent && usable(at, y, Direction::negative);
            if (!positive && !negative) continue;
            on_path[y] = 1;
            path.push_back(y);
            if (self(self, y, spent || negative, budget - 1)) return true;
            path.pop_back();
            on_path[y] = 0;
        }
        return false;
    };
    for (std::size_t limit = before[from]; limit < n; ++limit)
        if (dfs(dfs, from, false, limit)) return path;
    return {};
}

}  // namespace

PathScore path_score(const VotesGraph& graph, const PathScoreMatrix& matrix, Pair pair, Sign sign) {
    PathScore out;
    out.value = matrix.score(pair, sign);
    if (out.value == 0) return out;
    out.best_path = sign == Sign::positive ? shortest_positive(graph, pair.first, pair.second, out.value)
                                           : shortest_negative(graph, pair.first, pair.second, out.value);
    return out;
}

std::vector<Pair> weakest_links_on_path(const VotesGraph& graph, std::span<const RecordIndex> path, Sign sign) {
    if (path.size() < 2) return {};
    struct Hop {
        Pair pair;
        Score weight;
        bool reinforceable;
    };
    std::vector<Hop> hops;
    bool negative_used = false;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const Pair pr{path[k], path[k + 1]};
        const auto e = graph.edge(pr);
        // On a negative path the first hop with a negative majority is the
        // negative hop; every other hop is used positively.
        const bool as_negative = sign == Sign::negative && !negative_used && e.n > e.p;
        negative_used = negative_used || as_negative;
        if (as_negative) hops.push_back({pr, e.n, e.n >= e.p});
        else hops.push_back({pr, e.p, e.p >= e.n});
    }
    Score lowest = unbounded;
    for (const auto& h : hops) lowest = std::min(lowest, h.weight);
    std::vector<Pair> out;
    for (const auto& h : hops)
        if (h.weight == lowest && h.reinforceable) out.push_back(h.pair);
    return out;
}

std::vector<Pair> weakest_links(const PathScoreMatrix& matrix, const VotesGraph& graph, Pair pair, Sign sign) {
    const auto ps = path_score(graph, matrix, pair, sign);
    return weakest_links_on_path(graph, ps.best_path, sign);
}

void write_matrix_tsv(std::ostream& out, const VotesGraph& graph, const PathScoreMatrix& matrix) {
    auto join = [&](const std::vector<RecordIndex>& path) {
        std::string s;
        for (std::size_t k = 0; k < path.size(); ++k) {
            if (k) s += '-';
            s += graph.record(path[k]).id;
        }
        return s.empty() ? std::string("-") : s;
    };
    out << "i\tj\tp_star\tn_star\tbest_path_p\tbest_path_n\n";
    const auto n = static_cast<RecordIndex>(matrix.size());
    for (RecordIndex i = 0; i < n; ++i)
        for (RecordIndex j = i + 1; j < n; ++j) {
            const Pair p{i, j};
            if (matrix.p_star(p) == 0 && matrix.n_star(p) == 0) continue;
            out << graph.record(i).id << '\t' << graph.record(j).id << '\t' << matrix.p_star(p) << '\t'
                << matrix.n_star(p) << '\t' << join(path_score(graph, matrix, p, Sign::positive).best_path) << '\t'
                << join(path_score(graph, matrix, p, Sign::negative).best_path) << '\n';
        }
}

}  // namespace fter

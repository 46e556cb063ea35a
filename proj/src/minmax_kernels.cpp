#include "fter/kernels.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <unordered_map>
#include <unordered_set>

namespace fter::kernels {

namespace {

constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

struct UnionFind {
    explicit UnionFind(std::size_t n) : parent(n), rank(n, 0) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    std::vector<std::uint32_t> parent;
    std::vector<std::uint8_t> rank;
};

/// Adjacency of the threshold graph (positive edges with weight >= t).
struct LevelGraph {
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> adj;  // (neighbour, edge id)
    std::uint32_t num_edges{0};
};

LevelGraph level_graph(std::size_t m, std::span<const LocalEdge> positive, Score t) {
    LevelGraph g;
    g.adj.resize(m);
    for (const auto& e : positive) {
        if (e.weight < t) continue;
        g.adj[e.a].emplace_back(e.b, g.num_edges);
        g.adj[e.b].emplace_back(e.a, g.num_edges);
        ++g.num_edges;
    }
    return g;
}

/**
 * Blocks (biconnected components) of a level graph and the rooted
 * block-cut forest built from them. Tree nodes [0, blocks) are blocks,
 * [blocks, blocks + cuts) are cut vertices.
 */
struct BlockCutForest {
    std::vector<std::vector<std::uint32_t>> block_vertices;
    std::vector<std::uint32_t> node_of;  // per vertex, npos for isolated vertices
    std::vector<std::uint32_t> parent;   // per tree node
    std::vector<std::uint32_t> depth;
    std::size_t num_blocks() const { return block_vertices.size(); }
};

BlockCutForest block_cut_forest(const LevelGraph& g) {
    const std::size_t m = g.adj.size();
    BlockCutForest f;
    std::vector<std::uint32_t> disc(m, npos), low(m, 0), parent_edge(m, npos), parent_vertex(m, npos);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_stack;  // (u, v)
    std::vector<std::pair<std::uint32_t, std::size_t>> call;           // (vertex, next adjacency slot)
    std::vector<std::uint32_t> mark(m, npos);
    std::uint32_t timer = 0;

    for (std::uint32_t root = 0; root < m; ++root) {
        if (disc[root] != npos) continue;
        disc[root] = low[root] = timer++;
        call.emplace_back(root, 0);
        while (!call.empty()) {
            auto& [v, slot] = call.back();
            if (slot < g.adj[v].size()) {
                const auto [w, eid] = g.adj[v][slot++];
                if (eid == parent_edge[v]) continue;
                if (disc[w] == npos) {
                    parent_edge[w] = eid;
                    parent_vertex[w] = v;
                    disc[w] = low[w] = timer++;
                    edge_stack.emplace_back(v, w);
                    call.emplace_back(w, 0);
                } else if (disc[w] < disc[v]) {
                    low[v] = std::min(low[v], disc[w]);
                    edge_stack.emplace_back(v, w);
                }
                continue;
            }
            const auto child = v;
            call.pop_back();
            const auto u = parent_vertex[child];
            if (u == npos) continue;
            low[u] = std::min(low[u], low[child]);
            if (low[child] >= disc[u]) {
                const auto id = static_cast<std::uint32_t>(f.block_vertices.size());
                auto& block = f.block_vertices.emplace_back();
                auto add = [&](std::uint32_t x) {
                    if (mark[x] != id) {
                        mark[x] = id;
                        block.push_back(x);
                    }
                };
                while (true) {
                    const auto [a, b] = edge_stack.back();
                    edge_stack.pop_back();
                    add(a);
                    add(b);
                    if (a == u && b == child) break;
                }
            }
        }
    }

    // Tree nodes and adjacency.
    const auto blocks = f.block_vertices.size();
    std::vector<std::vector<std::uint32_t>> vertex_blocks(m);
    for (std::uint32_t b = 0; b < blocks; ++b)
        for (auto x : f.block_vertices[b]) vertex_blocks[x].push_back(b);
    f.node_of.assign(m, npos);
    std::uint32_t next_node = static_cast<std::uint32_t>(blocks);
    std::vector<std::vector<std::uint32_t>> tree;
    tree.resize(blocks);
    for (std::uint32_t x = 0; x < m; ++x) {
        if (vertex_blocks[x].size() == 1) {
            f.node_of[x] = vertex_blocks[x][0];
        } else if (vertex_blocks[x].size() > 1) {
            f.node_of[x] = next_node++;
            tree.emplace_back();
            for (auto b : vertex_blocks[x]) {
                tree[f.node_of[x]].push_back(b);
                tree[b].push_back(f.node_of[x]);
            }
        }
    }
    f.parent.assign(tree.size(), npos);
    f.depth.assign(tree.size(), 0);
    std::vector<char> seen(tree.size(), 0);
    std::vector<std::uint32_t> queue;
    for (std::uint32_t r = 0; r < tree.size(); ++r) {
        if (seen[r]) continue;
        seen[r] = 1;
        queue.assign(1, r);
        for (std::size_t h = 0; h < queue.size(); ++h) {
            const auto x = queue[h];
            for (auto y : tree[x]) {
                if (seen[y]) continue;
                seen[y] = 1;
                f.parent[y] = x;
                f.depth[y] = f.depth[x] + 1;
                queue.push_back(y);
            }
        }
    }
    return f;
}

}  // namespace

ComponentView make_view(const VotesGraph& graph, std::span<const RecordIndex> members) {
    ComponentView view;
    view.members.assign(members.begin(), members.end());
    std::unordered_map<RecordIndex, std::uint32_t> local;
    local.reserve(members.size() * 2);
    for (std::uint32_t i = 0; i < members.size(); ++i) local.emplace(members[i], i);
    for (std::uint32_t i = 0; i < members.size(); ++i) {
        const auto g = members[i];
        for (auto other : graph.adjacent(g)) {
            if (other <= g) continue;
            auto it = local.find(other);
            if (it == local.end()) continue;
            const auto e = graph.edge(Pair{g, other});
            switch (e.usable_direction()) {
                case Direction::positive: view.positive.push_back({i, it->second, e.p}); break;
                case Direction::negative: view.negative.push_back({i, it->second, e.n}); break;
                case Direction::none: break;
            }
        }
    }
    return view;
}

std::vector<RecordIndex> positive_component_of(const VotesGraph& graph, RecordIndex seed) {
    std::vector<RecordIndex> out{seed};
    std::unordered_map<RecordIndex, bool> seen{{seed, true}};
    for (std::size_t h = 0; h < out.size(); ++h) {
        const auto x = out[h];
        for (auto y : graph.adjacent(x)) {
            if (seen.contains(y)) continue;
            if (graph.edge(Pair{x, y}).usable_direction() != Direction::positive) continue;
            seen.emplace(y, true);
            out.push_back(y);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<RecordIndex>> positive_components(const VotesGraph& graph) {
    const auto n = graph.num_records();
    UnionFind uf(n);
    graph.for_each_edge([&](Pair p, const VoteEdge& e) {
        if (e.usable_direction() != Direction::positive) return;
        const auto a = uf.find(p.first), b = uf.find(p.second);
        if (a != b) uf.parent[std::max(a, b)] = std::min(a, b);
    });
    std::vector<std::uint32_t> label(n, npos);
    std::vector<std::vector<RecordIndex>> out;
    for (RecordIndex r = 0; r < n; ++r) {
        const auto root = uf.find(r);
        if (label[root] == npos) {
            label[root] = static_cast<std::uint32_t>(out.size());
            out.emplace_back();
        }
        out[label[root]].push_back(r);
    }
    return out;
}

std::vector<Score> component_positive_scores(const ComponentView& view) {
    const auto m = view.size();
    std::vector<Score> out(m * m, 0);
    std::vector<LocalEdge> edges = view.positive;
    std::sort(edges.begin(), edges.end(), [](const auto& x, const auto& y) { return x.weight > y.weight; });
    // Kruskal in descending weight order: merging two trees at weight w fixes
    // the bottleneck of every cross pair to w.
    std::vector<std::uint32_t> root(m);
    std::iota(root.begin(), root.end(), 0u);
    std::vector<std::vector<std::uint32_t>> sets(m);
    for (std::uint32_t i = 0; i < m; ++i) sets[i] = {i};
    for (const auto& e : edges) {
        auto ra = root[e.a], rb = root[e.b];
        if (ra == rb) continue;
        if (sets[ra].size() < sets[rb].size()) std::swap(ra, rb);
        for (auto x : sets[ra])
            for (auto y : sets[rb]) out[x * m + y] = out[y * m + x] = e.weight;
        for (auto y : sets[rb]) root[y] = ra;
        sets[ra].insert(sets[ra].end(), sets[rb].begin(), sets[rb].end());
        sets[rb].clear();
    }
    return out;
}

std::vector<Score> component_negative_scores(const ComponentView& view) {
    const auto m = view.size();
    std::vector<Score> out(m * m, 0);
    if (view.negative.empty()) return out;

    Score max_negative = 0;
    for (const auto& e : view.negative) max_negative = std::max(max_negative, e.weight);
    std::vector<Score> levels;
    for (const auto& e : view.positive)
        if (e.weight <= max_negative) levels.push_back(e.weight);
    for (const auto& e : view.negative) levels.push_back(e.weight);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    // Row-major bit matrices, one row of `words` per vertex / component / group.
    const std::size_t words = (m + 63) / 64;
    std::vector<std::uint64_t> reach(m * words, 0), comp_mask(m * words), group_mask(m * words);
    auto row = [words](std::vector<std::uint64_t>& v, std::size_t r) { return v.data() + r * words; };
    auto set_bit = [](std::uint64_t* r, std::size_t i) { r[i / 64] |= std::uint64_t{1} << (i % 64); };

    std::vector<std::uint32_t> comp(m), group(m), comp_start, comp_order;
    std::vector<char> in_block(m), saturated;
    std::vector<std::uint32_t> queue;
    std::unordered_set<std::uint64_t> done_cross, done_within;
    const std::size_t total_pairs = m * (m - 1);
    std::size_t filled = 0;

    for (const Score t : levels) {
        const auto g = level_graph(m, view.positive, t);

        // Connected components of the level graph: members are contiguous in
        // comp_order, [comp_start[c], comp_start[c + 1]).
        std::fill(comp.begin(), comp.end(), npos);
        std::fill(comp_mask.begin(), comp_mask.end(), 0);
        comp_start.clear();
        comp_order.clear();
        for (std::uint32_t s = 0; s < m; ++s) {
            if (comp[s] != npos) continue;
            const auto c = static_cast<std::uint32_t>(comp_start.size());
            comp_start.push_back(static_cast<std::uint32_t>(comp_order.size()));
            comp[s] = c;
            comp_order.push_back(s);
            auto* mask = row(comp_mask, c);
            for (std::size_t h = comp_start[c]; h < comp_order.size(); ++h) {
                const auto x = comp_order[h];
                set_bit(mask, x);
                for (auto [y, eid] : g.adj[x])
                    if (comp[y] == npos) {
                        comp[y] = c;
                        comp_order.push_back(y);
                    }
            }
        }
        comp_start.push_back(static_cast<std::uint32_t>(comp_order.size()));
        auto members_of = [&](std::uint32_t c) {
            return std::span<const std::uint32_t>(comp_order.data() + comp_start[c],
                                                  comp_start[c + 1] - comp_start[c]);
        };

        // A component whose members already reach each other gains nothing from
        // its own negative edges.
        const auto num_comps = comp_start.size() - 1;
        auto covers = [&](std::uint32_t c) {
            const auto* mask = row(comp_mask, c);
            for (auto x : members_of(c)) {
                const auto* r = row(reach, x);
                for (std::size_t w = 0; w < words; ++w) {
                    auto need = mask[w];
                    if (x / 64 == w) need &= ~(std::uint64_t{1} << (x % 64));
                    if (need & ~r[w]) return false;
                }
            }
            return true;
        };
        saturated.assign(num_comps, 0);
        for (std::uint32_t c = 0; c < num_comps; ++c) saturated[c] = covers(c);

        bool have_forest = false;
        BlockCutForest forest;
        // Edges with the same endpoint components (or tree nodes) reach the same pairs.
        done_cross.clear();
        done_within.clear();

        for (const auto& e : view.negative) {
            if (e.weight < t) continue;
            const auto cu = comp[e.a], cv = comp[e.b];
            if (cu != cv) {
                const auto key = (std::uint64_t{std::min(cu, cv)} << 32) | std::max(cu, cv);
                if (!done_cross.insert(key).second) continue;
                const auto* mu = row(comp_mask, cu);
                const auto* mv = row(comp_mask, cv);
                for (auto i : members_of(cu)) {
                    auto* r = row(reach, i);
                    for (std::size_t w = 0; w < words; ++w) r[w] |= mv[w];
                }
                for (auto j : members_of(cv)) {
                    auto* r = row(reach, j);
                    for (std::size_t w = 0; w < words; ++w) r[w] |= mu[w];
                }
                continue;
            }
            if (saturated[cu]) continue;
            if (!have_forest) {
                forest = block_cut_forest(g);
                have_forest = true;
            }
            auto a = forest.node_of[e.a], b = forest.node_of[e.b];
            if (!done_within.insert((std::uint64_t{std::min(a, b)} << 32) | std::max(a, b)).second) continue;
            // Union of the blocks on the tree path between the two endpoints
            // forms the block containing e once e is added.
            const auto members = members_of(cu);
            for (auto x : members) in_block[x] = 0;
            auto mark_node = [&](std::uint32_t node) {
                if (node < forest.num_blocks())
                    for (auto x : forest.block_vertices[node]) in_block[x] = 1;
            };
            while (forest.depth[a] > forest.depth[b]) { mark_node(a); a = forest.parent[a]; }
            while (forest.depth[b] > forest.depth[a]) { mark_node(b); b = forest.parent[b]; }
            while (a != b) {
                mark_node(a);
                mark_node(b);
                a = forest.parent[a];
                b = forest.parent[b];
            }
            mark_node(a);
            in_block[e.a] = in_block[e.b] = 1;

            // Every other vertex hangs off exactly one block vertex.
            queue.clear();
            for (auto x : members) {
                group[x] = npos;
                if (in_block[x]) {
                    group[x] = x;
                    queue.push_back(x);
                    std::fill_n(row(group_mask, x), words, 0);
                }
            }
            for (std::size_t h = 0; h < queue.size(); ++h) {
                const auto x = queue[h];
                for (auto [y, eid] : g.adj[x])
                    if (group[y] == npos) {
                        group[y] = group[x];
                        queue.push_back(y);
                    }
            }
            for (auto x : members) set_bit(row(group_mask, group[x]), x);
            const auto* mc = row(comp_mask, cu);
            for (auto x : members) {
                auto* r = row(reach, x);
                const auto* gm = row(group_mask, group[x]);
                for (std::size_t w = 0; w < words; ++w) r[w] |= mc[w] & ~gm[w];
            }
            saturated[cu] = covers(cu);
        }

        for (std::uint32_t i = 0; i < m; ++i) {
            const auto* r = row(reach, i);
            for (std::size_t w = 0; w < words; ++w) {
                auto bits = r[w];
                while (bits) {
                    const auto j = w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits));
                    bits &= bits - 1;
                    if (j != i && out[i * m + j] == 0) {
                        out[i * m + j] = t;
                        ++filled;
                    }
                }
            }
        }
        // Lower levels can only fill pairs that are still zero.
        if (filled == total_pairs) break;
    }
    return out;
}

}  // namespace fter::kernels

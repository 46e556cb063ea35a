// Acceptance run: one PASS/FAIL line per criterion. Tolerances and sizes are fixed here.
#include "fter/engine.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

using namespace fter;

namespace {

constexpr std::size_t seeds = 20;
constexpr std::size_t info_seeds = 5;  // UrS under noise is slow and only reported
constexpr std::size_t sim_records = 100;
constexpr std::size_t sim_entities = 20;
constexpr double phi_expected = 0.67;
constexpr double phi_tolerance = 0.005;
constexpr double noise_gap = 0.2;
constexpr double scaling_limit = 40.0;

struct Outcome {
    bool pass{false};
    std::string detail;
};

struct Criterion {
    std::string name;
    double time_limit_s;  // 0: none
    std::function<Outcome()> run;
};

std::string fmt(double x, int digits = 3) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(digits) << x;
    return o.str();
}

VotesGraph records(std::size_t n) {
    VotesGraph g;
    for (std::size_t i = 1; i <= n; ++i) g.add_record({"r" + std::to_string(i), std::nullopt});
    return g;
}

// 1-based record numbers
Pair pr(RecordIndex a, RecordIndex b) { return Pair{a - 1, b - 1}; }

struct Tally {
    Pair pair;
    Score yes, no;
};

const std::vector<Tally> graph_a_edges{{pr(1, 2), 3, 0}, {pr(1, 3), 1, 0}, {pr(3, 4), 3, 0}, {pr(2, 4), 1, 4}};

// reference matrix for graph A, rows/columns r1..r4
constexpr Score graph_a_p[4][4] = {{0, 3, 1, 1}, {3, 0, 1, 1}, {1, 1, 0, 3}, {1, 1, 3, 0}};
constexpr Score graph_a_n[4][4] = {{0, 1, 3, 3}, {1, 0, 3, 4}, {3, 3, 0, 1}, {3, 4, 1, 0}};

VotesGraph graph_a() {
    auto g = records(4);
    for (const auto& t : graph_a_edges) g.add_votes(t.pair, t.yes, t.no);
    return g;
}

/// Number of the 12 reference values `m` reproduces.
int graph_a_matches(const PathScoreMatrix& m) {
    int ok = 0;
    for (RecordIndex i = 0; i < 4; ++i)
        for (RecordIndex j = i + 1; j < 4; ++j)
            ok += (m.p_star(i, j) == graph_a_p[i][j]) + (m.n_star(i, j) == graph_a_n[i][j]);
    return ok;
}

std::vector<Pair> score_diff(const PathScoreMatrix& a, const PathScoreMatrix& b) {
    std::vector<Pair> out;
    for (RecordIndex i = 0; i < a.size(); ++i)
        for (RecordIndex j = i + 1; j < a.size(); ++j)
            if (a.p_star(i, j) != b.p_star(i, j) || a.n_star(i, j) != b.n_star(i, j)) out.emplace_back(i, j);
    return out;
}

std::pair<Pair, Answer> random_vote(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<RecordIndex> pick(0, static_cast<RecordIndex>(n - 1));
    RecordIndex a = pick(rng), b = pick(rng);
    while (b == a) b = pick(rng);
    return {Pair{a, b}, std::bernoulli_distribution(0.5)(rng) ? Answer::yes : Answer::no};
}

Outcome graph_a_fixture() {
    const auto g = graph_a();
    const int brute = graph_a_matches(brute_force_scores(g));
    auto inc_graph = records(4);
    auto m = compute_scores(inc_graph);
    for (const auto& t : graph_a_edges) {
        for (Score k = 0; k < t.yes; ++k) {
            inc_graph.add_vote(t.pair, Answer::yes);
            update(inc_graph, m, t.pair);
        }
        for (Score k = 0; k < t.no; ++k) {
            inc_graph.add_vote(t.pair, Answer::no);
            update(inc_graph, m, t.pair);
        }
    }
    const int inc = graph_a_matches(m);
    return {brute == 12 && inc == 12,
            "oracle " + std::to_string(brute) + "/12, incremental " + std::to_string(inc) + "/12"};
}

Outcome insert_r3_r4() {
    auto g = records(4);
    for (const auto& t : graph_a_edges)
        if (t.pair != pr(3, 4)) g.add_votes(t.pair, t.yes, t.no);
    auto m = compute_scores(g);
    const auto before = m;
    std::vector<Pair> reported;
    for (int k = 0; k < 3; ++k) {
        g.add_vote(pr(3, 4), Answer::yes);
        for (auto p : update(g, m, pr(3, 4))) reported.push_back(p);
    }
    std::sort(reported.begin(), reported.end());
    reported.erase(std::unique(reported.begin(), reported.end()), reported.end());

    std::vector<Pair> n_moved;
    for (RecordIndex i = 0; i < 4; ++i)
        for (RecordIndex j = i + 1; j < 4; ++j)
            if (before.n_star(i, j) != m.n_star(i, j)) n_moved.emplace_back(i, j);
    const bool stated = before.n_star(pr(2, 3)) == 0 && m.n_star(pr(2, 3)) == 3 && before.n_star(pr(1, 3)) == 0 &&
                        m.n_star(pr(1, 3)) == 3 && before.p_star(pr(2, 3)) == m.p_star(pr(2, 3));
    // n*(1,2) also moves 0 -> 1 through r1-r3-r4-r2, as in the graph A matrix
    const bool n_set = n_moved == std::vector<Pair>{pr(1, 2), pr(1, 3), pr(2, 3)};
    const auto oracle_diff = score_diff(before, brute_force_scores(g));
    const bool changed_set = reported == oracle_diff;
    return {stated && n_set && changed_set,
            std::string("n*(2,3) 0->") + std::to_string(m.n_star(pr(2, 3))) + ", n*(1,3) 0->" +
                std::to_string(m.n_star(pr(1, 3))) + ", p*(2,3) " + (stated ? "unchanged" : "?") +
                ", changed set " + (changed_set ? "matches" : "differs") + " (" + std::to_string(reported.size()) +
                " pairs)"};
}

Outcome resolve_graph_a() {
    const auto m = compute_scores(graph_a());
    const std::vector<std::vector<RecordIndex>> expected{{0, 1}, {2, 3}};
    std::size_t bad = 0;
    constexpr std::size_t tries = 1000;
    for (std::uint64_t s = 0; s < tries; ++s) bad += resolve(m, s).clusters() != expected;
    return {bad == 0, std::to_string(tries - bad) + "/" + std::to_string(tries) + " seeds give {r1,r2},{r3,r4}"};
}

Outcome oracle_equivalence() {
    constexpr std::size_t graphs = 400;
    std::size_t checks = 0, bad = 0;
    for (std::uint64_t seed = 0; seed < graphs; ++seed) {
        std::mt19937_64 rng(0xacce55 + seed);
        const std::size_t n = 2 + seed % 7;
        const int votes = 1 + static_cast<int>(seed % 12);
        auto g = records(n);
        auto m = compute_scores(g, seed % 2 ? Execution::serial : Execution::parallel);
        for (int v = 0; v < votes; ++v) {
            const auto [p, a] = random_vote(rng, n);
            g.add_vote(p, a);
            const auto before = m;
            const auto changed = update(g, m, p, seed % 2 ? Execution::serial : Execution::parallel);
            const auto oracle = brute_force_scores(g);
            ++checks;
            if (!m.scores_equal(oracle) || changed != score_diff(before, oracle)) ++bad;
        }
    }
    return {bad == 0, std::to_string(graphs) + " graphs, " + std::to_string(checks) + " votes, " +
                          std::to_string(bad) + " mismatches"};
}

Outcome weak_transitivity() {
    constexpr std::size_t graphs = 1500;
    std::size_t triples = 0, violations = 0;
    for (std::uint64_t seed = 0; seed < graphs; ++seed) {
        std::mt19937_64 rng(0x7a11 + seed);
        const std::size_t n = 3 + seed % 6;
        const int votes = 1 + static_cast<int>(seed % 25);
        auto g = records(n);
        for (int v = 0; v < votes; ++v) {
            const auto [p, a] = random_vote(rng, n);
            g.add_vote(p, a);
        }
        const Quorums q(1 + static_cast<Score>(seed % 3));
        const auto m = brute_force_scores(g);
        auto d = [&](RecordIndex a, RecordIndex b) { return decide(m, Pair{a, b}, q); };
        for (RecordIndex i = 0; i < n; ++i)
            for (RecordIndex j = 0; j < n; ++j)
                for (RecordIndex k = 0; k < n; ++k) {
                    if (i == j || j == k || i == k) continue;
                    ++triples;
                    const auto ij = d(i, j), jk = d(j, k), ik = d(i, k);
                    if (ij == Decision::yes && jk == Decision::yes && ik == Decision::no) ++violations;
                    if (ij == Decision::yes && jk == Decision::no && ik == Decision::yes) ++violations;
                }
    }
    return {violations == 0, std::to_string(graphs) + " graphs, " + std::to_string(triples) + " ordered triples, " +
                                 std::to_string(violations) + " violations"};
}

Outcome phi_example() {
    const double phi = consensus(3, 1, 3);
    return {std::abs(phi - phi_expected) <= phi_tolerance, "phi(3,1,q=3) = " + fmt(phi, 4)};
}

Dataset sim_data(std::size_t n, std::size_t entities, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.num_records = n;
    spec.num_entities = entities;
    spec.zipf = true;
    spec.max_entity_size = 50;
    spec.seed = seed;
    return make_synthetic_dataset(spec);
}

struct Summary {
    double mean_cost{0}, mean_f{0}, min_f{1}, max_precision_drop{0}, mean_update_us{0};
    std::vector<MetricsPoint> mean_trace;
};

Summary simulate(Discipline d, StrategyKind s, NoiseModel noise, std::size_t n_seeds, std::size_t n = sim_records,
                 std::size_t entities = sim_entities, std::uint64_t seed_base = 0) {
    Summary out;
    std::vector<std::vector<MetricsPoint>> traces;
    for (std::uint64_t k = 0; k < n_seeds; ++k) {
        const auto seed = seed_base + k;
        const auto data = sim_data(n, entities, seed);
        ExperimentConfig c;
        c.engine.discipline.mode = d;
        c.engine.strategy = s;
        c.engine.seed = seed;
        c.noise = noise;
        c.noise.seed = 1000 + seed;
        auto result = run_experiment(data, c);
        const auto& r = result.runs.front();
        const double f = r.final_metrics ? r.final_metrics->f_measure : 0.0;
        out.mean_cost += static_cast<double>(r.cost);
        out.mean_f += f;
        out.min_f = std::min(out.min_f, f);
        out.mean_update_us += r.mean_update_micros;
        for (const auto& pt : r.trace) out.max_precision_drop = std::max(out.max_precision_drop, 1.0 - pt.precision);
        traces.push_back(r.trace);
    }
    const auto k = static_cast<double>(n_seeds);
    out.mean_cost /= k;
    out.mean_f /= k;
    out.mean_update_us /= k;
    out.mean_trace = mean_trace(traces);
    return out;
}

/// Mean F over costs 1..horizon, holding the last value.
double f_area(const std::vector<MetricsPoint>& trace, std::uint64_t horizon) {
    if (trace.empty() || horizon == 0) return 0.0;
    double sum = 0;
    for (std::uint64_t c = 1; c <= horizon; ++c) sum += trace[std::min<std::size_t>(c, trace.size()) - 1].f_measure;
    return sum / static_cast<double>(horizon);
}

Outcome perfect_crowd() {
    const auto cer = simulate(Discipline::consensus, StrategyKind::hs, {}, seeds);
    const auto fer = simulate(Discipline::monotonic, StrategyKind::hs, {}, seeds);
    const auto feer = simulate(Discipline::non_monotonic, StrategyKind::hs, {}, seeds);
    const bool all_one = cer.min_f == 1.0 && fer.min_f == 1.0 && feer.min_f == 1.0;
    return {all_one && feer.mean_cost <= fer.mean_cost,
            "min F cer/fer/feer " + fmt(cer.min_f) + "/" + fmt(fer.min_f) + "/" + fmt(feer.min_f) +
                ", mean cost fer " + fmt(fer.mean_cost, 1) + " feer " + fmt(feer.mean_cost, 1) + " (cer " +
                fmt(cer.mean_cost, 1) + ")"};
}

Outcome noisy_crowd() {
    const NoiseModel noise{0.3, 0.3, 0};
    const auto cer = simulate(Discipline::consensus, StrategyKind::hs, noise, seeds);
    const auto fer = simulate(Discipline::monotonic, StrategyKind::hs, noise, seeds);
    const auto feer = simulate(Discipline::non_monotonic, StrategyKind::hs, noise, seeds);
    const bool pass = fer.mean_f - cer.mean_f >= noise_gap && feer.mean_f - cer.mean_f >= noise_gap;
    // reported only: the uncertainty-first strategy on fewer seeds
    const auto u_cer = simulate(Discipline::consensus, StrategyKind::urs, noise, info_seeds);
    const auto u_fer = simulate(Discipline::monotonic, StrategyKind::urs, noise, info_seeds);
    const auto u_feer = simulate(Discipline::non_monotonic, StrategyKind::urs, noise, info_seeds);
    return {pass, "hs mean F cer " + fmt(cer.mean_f) + " fer " + fmt(fer.mean_f) + " feer " + fmt(feer.mean_f) +
                      "; urs (" + std::to_string(info_seeds) + " seeds) cer " + fmt(u_cer.mean_f) + " fer " +
                      fmt(u_fer.mean_f) + " feer " + fmt(u_feer.mean_f)};
}

Outcome false_negatives_only() {
    const NoiseModel noise{0.0, 0.3, 0};
    double worst = 0, lowest_recall_f = 1;
    int runs = 0;
    for (auto d : {Discipline::consensus, Discipline::monotonic, Discipline::non_monotonic})
        for (auto s : {StrategyKind::ers, StrategyKind::urs, StrategyKind::hs}) {
            const auto r = simulate(d, s, noise, info_seeds);
            worst = std::max(worst, r.max_precision_drop);
            lowest_recall_f = std::min(lowest_recall_f, r.min_f);
            runs += static_cast<int>(info_seeds);
        }
    return {worst == 0.0, std::to_string(runs) + " runs, max precision drop " + fmt(worst, 6) + ", lowest final F " +
                              fmt(lowest_recall_f)};
}

Outcome urs_vs_ers() {
    const auto urs = simulate(Discipline::monotonic, StrategyKind::urs, {}, seeds);
    const auto ers = simulate(Discipline::monotonic, StrategyKind::ers, {}, seeds);
    const auto horizon = static_cast<std::uint64_t>(std::max(urs.mean_trace.size(), ers.mean_trace.size()));
    return {urs.mean_cost < ers.mean_cost, "mean total cost urs " + fmt(urs.mean_cost, 1) + " ers " +
                                               fmt(ers.mean_cost, 1) + "; mean F over cost urs " +
                                               fmt(f_area(urs.mean_trace, horizon)) + " ers " +
                                               fmt(f_area(ers.mean_trace, horizon))};
}

Outcome batch_spanning_tree() {
    std::size_t bad = 0, checked = 0;
    for (std::size_t n : {2u, 3u, 5u, 10u, 40u, 100u})
        for (auto s : {StrategyKind::ers, StrategyKind::urs, StrategyKind::hs}) {
            EngineConfig c;
            c.batched = true;
            c.strategy = s;
            Engine engine(records(n), c);
            const auto batch = engine.next_batch();
            ++checked;
            // a set of n-1 pairs that connects all n records is a tree, and no tree edge
            // follows from the others: removing it disconnects its endpoints
            std::vector<std::size_t> parent(n);
            std::iota(parent.begin(), parent.end(), std::size_t{0});
            std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
                return parent[x] == x ? x : parent[x] = find(parent[x]);
            };
            for (const auto& it : batch.items) parent[find(it.pair.first)] = find(it.pair.second);
            bool connected = true;
            for (std::size_t r = 1; r < n; ++r) connected = connected && find(r) == find(0);
            if (batch.size() != n - 1 || !connected) ++bad;
        }
    return {bad == 0, std::to_string(checked) + " empty graphs, " + std::to_string(bad) + " not a spanning tree"};
}

Outcome update_scaling() {
    const auto small = simulate(Discipline::monotonic, StrategyKind::hs, {}, info_seeds, 100, 20);
    const auto large = simulate(Discipline::monotonic, StrategyKind::hs, {}, 1, 1000, 200);
    const double ratio = large.mean_update_us / small.mean_update_us;
    return {ratio <= scaling_limit, "mean update n=100 " + fmt(small.mean_update_us / 1000.0, 3) + " ms, n=1000 " +
                                        fmt(large.mean_update_us / 1000.0, 3) + " ms, ratio " + fmt(ratio, 1)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    bool strict = false;
    std::string only;
    app.add_flag("--strict", strict, "exit 1 when any criterion fails");
    app.add_option("--only", only, "run the criteria whose name contains this");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {"graph_a_scores", 1, graph_a_fixture},
        {"insert_r3_r4", 0, insert_r3_r4},
        {"resolve_graph_a", 0, resolve_graph_a},
        {"oracle_equivalence", 60, oracle_equivalence},
        {"weak_transitivity", 0, weak_transitivity},
        {"phi_example", 0, phi_example},
        {"perfect_crowd", 300, perfect_crowd},
        {"noise_0.3", 600, noisy_crowd},
        {"false_negative_precision", 0, false_negatives_only},
        {"urs_cost_below_ers", 0, urs_vs_ers},
        {"batch_spanning_tree", 0, batch_spanning_tree},
        {"update_scaling", 0, update_scaling},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && c.name.find(only) == std::string::npos) continue;
        const auto t0 = std::chrono::steady_clock::now();
        auto out = c.run();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
            out.pass = false;
            out.detail += "; over the " + fmt(c.time_limit_s, 0) + " s limit";
        }
        failed += !out.pass;
        std::cout << (out.pass ? "PASS " : "FAIL ") << c.name << ": " << out.detail << " [" << fmt(secs, 2) << " s]"
                  << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " failed" : std::string("all passed")) << std::endl;
    return strict && failed ? 1 : 0;
}

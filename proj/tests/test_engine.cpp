#include "fixtures.hpp"

#include "fter/engine.hpp"

#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

using namespace fter;
using fter::testing::records;

namespace {

GroundTruth truth_of(std::vector<std::uint32_t> entity_of) {
    GroundTruth t;
    t.entity_of = std::move(entity_of);
    std::uint32_t k = 0;
    for (auto e : t.entity_of) k = std::max(k, e + 1);
    for (std::uint32_t e = 0; e < k; ++e) t.entity_names.push_back("e" + std::to_string(e));
    return t;
}

EngineConfig config_for(Discipline d, StrategyKind s = StrategyKind::hs) {
    EngineConfig c;
    c.discipline.mode = d;
    c.strategy = s;
    return c;
}

/// Scripted answers per pair; pairs without a script get the truth.
class ScriptedCrowd : public CrowdSource {
public:
    ScriptedCrowd(const GroundTruth& truth, std::map<Pair, Answer> script) : truth_(truth), script_(std::move(script)) {}
    std::optional<Answer> answer(Pair pair) override {
        asked.push_back(pair);
        if (auto it = script_.find(pair); it != script_.end()) return it->second;
        return truth_.same(pair) ? Answer::yes : Answer::no;
    }
    std::vector<Pair> asked;

private:
    const GroundTruth& truth_;
    std::map<Pair, Answer> script_;
};

/// Alternates yes/no forever.
class FlipCrowd : public CrowdSource {
public:
    std::optional<Answer> answer(Pair) override { return (k_++ % 2) ? Answer::no : Answer::yes; }

private:
    std::size_t k_{0};
};

/// Pairs a perfect crowd gets asked by a closure-pruned pass in ascending pair order.
std::size_t pruned_pair_count(const GroundTruth& truth) {
    const auto n = truth.entity_of.size();
    std::vector<std::size_t> label(n);
    for (std::size_t r = 0; r < n; ++r) label[r] = r;
    std::set<std::pair<std::size_t, std::size_t>> apart;
    std::size_t asked = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto a = label[i], b = label[j];
            if (a == b || apart.contains({std::min(a, b), std::max(a, b)})) continue;
            ++asked;
            if (truth.entity_of[i] == truth.entity_of[j]) {
                for (auto& l : label)
                    if (l == b) l = a;
                std::set<std::pair<std::size_t, std::size_t>> moved;
                for (auto [x, y] : apart) {
                    if (x == b) x = a;
                    if (y == b) y = a;
                    moved.insert({std::min(x, y), std::max(x, y)});
                }
                apart = std::move(moved);
            } else {
                apart.insert({std::min(a, b), std::max(a, b)});
            }
        }
    return asked;
}

}  // namespace

TEST_CASE("answer for an unissued pair is rejected") {
    Engine e(records(3), EngineConfig{});
    CHECK_THROWS_AS(e.integrate({0, 1}, Answer::yes), DataError);
    const auto p = e.next_task();
    REQUIRE(p);
    e.integrate(*p, Answer::yes);
    CHECK_THROWS_AS(e.integrate(*p, Answer::yes), DataError);
    CHECK_THROWS_AS(e.withdraw(*p), DataError);
}

TEST_CASE("perfect crowd on four records resolves both entities") {
    const auto truth = truth_of({0, 0, 1, 1});
    for (auto d : {Discipline::monotonic, Discipline::non_monotonic, Discipline::consensus})
        for (auto s : {StrategyKind::ers, StrategyKind::urs, StrategyKind::hs}) {
            Engine e(records(4), config_for(d, s), truth);
            SyntheticCrowd crowd(truth, {0.0, 0.0, 1});
            const auto r = run_once(e, crowd);
            REQUIRE(r.final_metrics);
            CHECK(r.final_metrics->f_measure == 1.0);
            CHECK(e.finished());
            CHECK(e.clustering().same_cluster(0, 1));
            CHECK_FALSE(e.clustering().same_cluster(1, 2));
        }
}

TEST_CASE("trace has one point per vote with rising cost") {
    const auto truth = truth_of({0, 1, 0, 2, 1});
    Engine e(records(5), EngineConfig{}, truth);
    SyntheticCrowd crowd(truth, {0.2, 0.2, 4});
    const auto r = run_once(e, crowd);
    REQUIRE(r.trace.size() == r.cost);
    for (std::size_t k = 0; k < r.trace.size(); ++k) CHECK(r.trace[k].cost == k + 1);
    CHECK(e.update_micros().size() == r.cost);
}

TEST_CASE("cer cost is five votes per pair left by closure pruning") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        SyntheticSpec spec;
        spec.num_records = 30;
        spec.num_entities = 6;
        spec.seed = seed;
        const auto data = make_synthetic_dataset(spec);
        ExperimentConfig c;
        c.engine = config_for(Discipline::consensus);
        const auto res = run_experiment(data, c);
        const auto expected = pruned_pair_count(*data.truth);
        CHECK(res.runs[0].cer_pairs_asked == expected);
        CHECK(res.runs[0].cost == 5 * expected);
        CHECK(res.runs[0].final_metrics->f_measure == 1.0);
    }
}

TEST_CASE("empty dataset gives an empty trace") {
    Dataset empty;
    empty.truth = GroundTruth{};
    ExperimentConfig c;
    const auto res = run_experiment(empty, c);
    REQUIRE(res.runs.size() == 1);
    CHECK(res.runs[0].trace.empty());
    CHECK(res.runs[0].cost == 0);
    CHECK(res.mean_trace.empty());
}

TEST_CASE("feer never costs more than fer with a perfect crowd") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticSpec spec;
        spec.num_records = 30;
        spec.num_entities = 6;
        spec.seed = seed;
        const auto data = make_synthetic_dataset(spec);
        ExperimentConfig c;
        c.engine.seed = seed;
        c.engine.discipline.mode = Discipline::monotonic;
        const auto fer = run_experiment(data, c);
        c.engine.discipline.mode = Discipline::non_monotonic;
        const auto feer = run_experiment(data, c);
        CHECK(feer.runs[0].cost <= fer.runs[0].cost);
        CHECK(fer.runs[0].final_metrics->f_measure == 1.0);
        CHECK(feer.runs[0].final_metrics->f_measure == 1.0);
    }
}

TEST_CASE("feer asks a pair again once a contradiction makes it uncertain") {
    // r1-r3-r2 already agree and one worker doubted r2-r4. Once r4 joins r1,
    // the doubt reaches [r1,r2] through r4.
    auto g = records(4);
    g.add_votes({0, 2}, 3, 0);
    g.add_votes({1, 2}, 3, 0);
    g.add_votes({1, 3}, 0, 2);
    const auto truth = truth_of({0, 0, 0, 0});
    const std::map<Pair, Answer> script;
    const Pair target{0, 1};

    for (auto d : {Discipline::monotonic, Discipline::non_monotonic}) {
        Engine e(g, config_for(d, StrategyKind::hs), truth);
        CHECK(decide(e.matrix(), target, e.config().quorums()) == Decision::yes);
        CHECK_FALSE(e.queue().contains(target));
        ScriptedCrowd crowd(truth, script);
        bool requeued = false;
        while (auto p = e.next_task()) {
            e.integrate(*p, *crowd.answer(*p));
            requeued = requeued || e.queue().contains(target);
        }
        const bool asked = std::find(crowd.asked.begin(), crowd.asked.end(), target) != crowd.asked.end();
        if (d == Discipline::non_monotonic) {
            CHECK(requeued);
            CHECK(asked);
        } else {
            CHECK_FALSE(requeued);
            CHECK_FALSE(asked);
        }
    }
}

TEST_CASE("edge budget stops a contested pair") {
    for (auto d : {Discipline::monotonic, Discipline::non_monotonic}) {
        // a quorum the flipping crowd can never reach
        auto c = config_for(d);
        c.discipline.quorum = 8;
        c.discipline.edge_budget = 10;
        Engine e(records(2), c);
        FlipCrowd crowd;
        const auto r = run_once(e, crowd);
        CHECK(r.cost == 10);
        CHECK(e.finished());
        CHECK(e.graph().edge({0, 1}).total() == 10);
    }
}

TEST_CASE("serial and parallel execution agree") {
    SyntheticSpec spec;
    spec.num_records = 40;
    spec.num_entities = 8;
    spec.seed = 11;
    const auto data = make_synthetic_dataset(spec);
    for (auto d : {Discipline::monotonic, Discipline::non_monotonic}) {
        ExperimentConfig c;
        c.engine = config_for(d);
        c.noise = {0.2, 0.2, 9};
        c.engine.execution = Execution::serial;
        const auto a = run_experiment(data, c);
        c.engine.execution = Execution::parallel;
        const auto b = run_experiment(data, c);
        CHECK(a.runs[0].cost == b.runs[0].cost);
        CHECK(a.runs[0].clustering.clusters() == b.runs[0].clustering.clusters());
        CHECK(a.runs[0].final_metrics->f_measure == b.runs[0].final_metrics->f_measure);
    }
}

TEST_CASE("same answers give the same state in batched and sequential mode") {
    // A batch of one pair with k repeats is the sequential run of those k votes.
    const auto truth = truth_of({0, 0});
    auto c = config_for(Discipline::non_monotonic);
    Engine seq(records(2), c, truth);
    c.batched = true;
    Engine par(records(2), c, truth);
    const auto batch = par.next_batch();
    REQUIRE(batch.size() == 1);
    for (Score k = 0; k < batch.items[0].repeats; ++k) par.integrate(batch.items[0].pair, Answer::yes);
    while (auto p = seq.next_task()) seq.integrate(*p, Answer::yes);
    CHECK(seq.cost() == par.cost());
    CHECK(seq.matrix().scores_equal(par.matrix()));
    CHECK(seq.clustering().clusters() == par.clustering().clusters());
}

TEST_CASE("batched runs reach the truth") {
    SyntheticSpec spec;
    spec.num_records = 30;
    spec.num_entities = 5;
    spec.seed = 2;
    const auto data = make_synthetic_dataset(spec);
    for (auto d : {Discipline::monotonic, Discipline::non_monotonic, Discipline::consensus}) {
        ExperimentConfig c;
        c.engine = config_for(d);
        c.engine.batched = true;
        const auto res = run_experiment(data, c);
        CHECK(res.runs[0].final_metrics->f_measure == 1.0);
        CHECK(res.runs[0].trace.size() == res.runs[0].cost);
    }
}

TEST_CASE("false negatives alone never cost precision") {
    SyntheticSpec spec;
    spec.num_records = 40;
    spec.num_entities = 8;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        spec.seed = seed;
        const auto data = make_synthetic_dataset(spec);
        for (auto d : {Discipline::monotonic, Discipline::non_monotonic, Discipline::consensus}) {
            ExperimentConfig c;
            c.engine = config_for(d);
            c.noise = {0.0, 0.3, 100 + seed};
            const auto res = run_experiment(data, c);
            for (const auto& m : res.runs[0].trace) CHECK(m.precision == 1.0);
        }
    }
}

TEST_CASE("prefilter restricts and orders the candidates") {
    auto g = records(4);
    const std::map<Pair, double> sim{{Pair{0, 1}, 0.95}, {Pair{2, 3}, 0.5},  {Pair{0, 2}, 0.6},
                                     {Pair{0, 3}, 0.3},  {Pair{1, 2}, 0.45}, {Pair{1, 3}, 0.05}};
    SimilarityPrefilter f{0.1, 0.9, [&](Pair p) { return sim.at(p); }};
    const auto pre = apply_prefilter(g, f, 10);
    const auto truth = truth_of({0, 0, 1, 1});
    Engine e(g, config_for(Discipline::non_monotonic), pre, truth);
    CHECK(decide(e.matrix(), {0, 1}, e.config().quorums()) == Decision::yes);
    CHECK(decide(e.matrix(), {1, 3}, e.config().quorums()) == Decision::no);
    CHECK(decide(e.matrix(), {0, 3}, e.config().quorums()) == Decision::no);
    const auto first = e.next_task();
    REQUIRE(first);
    CHECK(*first == Pair{0, 2});  // highest prior among the survivors
    e.withdraw(*first);
    SyntheticCrowd crowd(truth, {});
    const auto r = run_once(e, crowd);
    CHECK(r.final_metrics->f_measure == 1.0);
}

TEST_CASE("replay drives the engine over the recorded pairs") {
    Dataset data;
    data.graph = records(3);
    data.truth = truth_of({0, 0, 1});
    std::uint64_t seq = 0;
    for (int k = 0; k < 3; ++k) data.votes.push_back({{0, 1}, "w" + std::to_string(k), Answer::yes, seq++});
    for (int k = 0; k < 3; ++k) data.votes.push_back({{1, 2}, "w" + std::to_string(k), Answer::no, seq++});
    data.votes.push_back({{1, 2}, "w9", Answer::yes, seq++});
    ExperimentConfig c;
    c.crowd = CrowdKind::replay;
    const auto res = run_experiment(data, c);
    const auto& r = res.runs[0];
    CHECK(r.cost == 6);  // the fourth vote on [r2,r3] is never needed
    CHECK(r.final_metrics->f_measure == 1.0);
}

TEST_CASE("dry replay closes the pair on what it has") {
    Dataset data;
    data.graph = records(2);
    data.truth = truth_of({0, 0});
    data.votes.push_back({{0, 1}, "w", Answer::yes, 0});
    ExperimentConfig c;
    c.crowd = CrowdKind::replay;
    const auto res = run_experiment(data, c);
    CHECK(res.runs[0].cost == 1);
    CHECK(res.runs[0].clustering.same_cluster(0, 1));  // p*=1 > n*=0
}

TEST_CASE("cost cap withdraws the outstanding work") {
    const auto truth = truth_of({0, 0, 1, 1, 2});
    Engine e(records(5), EngineConfig{}, truth);
    SyntheticCrowd crowd(truth, {});
    const auto r = run_once(e, crowd, 4);
    CHECK(r.cost == 4);
    CHECK(e.outstanding() == 0);
}

TEST_CASE("repetitions derive distinct seeds and average traces") {
    SyntheticSpec spec;
    spec.num_records = 20;
    spec.num_entities = 4;
    const auto data = make_synthetic_dataset(spec);
    ExperimentConfig c;
    c.noise = {0.2, 0.2, 1};
    c.repetitions = 3;
    const auto res = run_experiment(data, c);
    REQUIRE(res.runs.size() == 3);
    std::uint64_t longest = 0;
    for (const auto& r : res.runs) longest = std::max(longest, r.cost);
    CHECK(res.mean_trace.size() == longest);
    CHECK_THROWS_AS([&] {
        ExperimentConfig bad;
        bad.repetitions = 0;
        run_experiment(data, bad);
    }(), ConfigError);
}

TEST_CASE("mean trace interpolates and holds") {
    const std::vector<MetricsPoint> a{{1, 1, 0, 0}, {3, 1, 1, 1}};
    const std::vector<MetricsPoint> b{{1, 1, 0.5, 0.5}};
    const auto m = mean_trace({a, b});
    REQUIRE(m.size() == 3);
    CHECK(m[0].f_measure == doctest::Approx(0.25));
    CHECK(m[1].f_measure == doctest::Approx(0.5));
    CHECK(m[2].f_measure == doctest::Approx(0.75));
    std::ostringstream out;
    write_trace_tsv(out, m);
    CHECK(out.str().rfind("cost\tprecision\trecall\tf\n", 0) == 0);
}

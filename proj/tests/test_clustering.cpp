#include "fixtures.hpp"

#include "fter/clustering.hpp"
#include "fter/metrics.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace fter;
using fter::testing::pr;

namespace {

using Groups = std::vector<std::vector<RecordIndex>>;

}  // namespace

TEST_CASE("graph A resolves to two clusters for every seed") {
    const auto m = compute_scores(fter::testing::graph_a());
    for (std::uint64_t seed = 0; seed < 64; ++seed) CHECK(resolve(m, seed).clusters() == Groups{{0, 1}, {2, 3}});
}

TEST_CASE("graph B resolves with r1 and r2 alone") {
    const auto m = compute_scores(fter::testing::graph_b());
    for (std::uint64_t seed = 0; seed < 64; ++seed)
        CHECK(resolve(m, seed).clusters() == Groups{{0}, {1}, {2, 3}});
}

TEST_CASE("no votes gives singletons") {
    const auto m = compute_scores(fter::testing::records(5));
    CHECK(resolve(m, 3).num_clusters() == 5);
}

TEST_CASE("is_good") {
    const auto m = compute_scores(fter::testing::graph_a());
    const std::vector<RecordIndex> c1{0};
    const std::vector<RecordIndex> c12{0, 1};
    CHECK(is_good(1, c1, m));
    CHECK_FALSE(is_good(2, c12, m));
    const std::vector<RecordIndex> alone{2};
    const auto empty = compute_scores(fter::testing::records(3));
    CHECK_FALSE(is_good(0, alone, empty));
}

TEST_CASE("transitive update component") {
    Clustering c(4);
    c.replace(std::vector<RecordIndex>{0, 1, 2, 3}, {{0, 1}, {2, 3}});
    const std::vector<Pair> one{pr(1, 3)};
    CHECK(transitive_update_component(one, c).expanded == std::vector<RecordIndex>{0, 1, 2, 3});
    CHECK(transitive_update_component({}, c).expanded.empty());
    const std::vector<Pair> inside{pr(1, 2)};
    CHECK(transitive_update_component(inside, c).expanded == std::vector<RecordIndex>{0, 1});
}

TEST_CASE("partial resolve over everything equals full resolve") {
    const auto m = compute_scores(fter::testing::graph_a());
    const SeedOrder order(4, 11);
    Clustering c(4);
    UpdateComponent all;
    all.expanded = {0, 1, 2, 3};
    partial_resolve(c, all, m, order);
    CHECK(c.clusters() == resolve(m, order).clusters());
    const auto before = c.clusters();
    partial_resolve(c, UpdateComponent{}, m, order);
    CHECK(c.clusters() == before);
}

TEST_CASE("partial resolve matches full resolve after every vote") {
    int clustering_diffs = 0, f_diffs = 0, steps = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t n = 3 + seed % 6;
        std::vector<std::uint32_t> truth(n);
        for (auto& t : truth) t = std::uniform_int_distribution<std::uint32_t>(0, 2)(rng);
        auto g = fter::testing::records(n);
        auto m = compute_scores(g);
        const SeedOrder order(n, seed);
        Clustering c(n);
        for (int v = 0; v < 12; ++v) {
            const auto [p, a] = fter::testing::random_vote(rng, n);
            g.add_vote(p, a);
            const auto changed = update(g, m, p);
            const auto component = transitive_update_component(changed, c);
            partial_resolve(c, component, m, order);
            c.validate();
            // records outside the component keep their cluster
            const auto full = resolve(m, order);
            ++steps;
            if (c.clusters() != full.clusters()) ++clustering_diffs;
            if (pairwise_metrics(c, truth).f_measure != pairwise_metrics(full, truth).f_measure) ++f_diffs;
        }
    }
    MESSAGE("partial vs full: " << clustering_diffs << " clustering and " << f_diffs << " F differences in "
                                << steps << " steps");
    CHECK(f_diffs == 0);
}

TEST_CASE("partial resolve leaves other clusters untouched") {
    const auto m = compute_scores(fter::testing::graph_a());
    Clustering c(4);
    c.replace(std::vector<RecordIndex>{0, 1, 2, 3}, {{0, 1}, {2}, {3}});
    const auto label = c.cluster_of(0);
    UpdateComponent comp;
    comp.expanded = {2, 3};
    partial_resolve(c, comp, m, SeedOrder(4, 1));
    CHECK(c.cluster_of(0) == label);
    CHECK(c.same_cluster(2, 3));
    c.validate();
}

TEST_CASE("clustering csv") {
    const auto g = fter::testing::graph_a();
    std::ostringstream out;
    write_clustering_csv(out, g, resolve(compute_scores(g), 0));
    CHECK(out.str() == "record_id,cluster_id\nr1,0\nr2,0\nr3,1\nr4,1\n");
}

TEST_CASE("pairwise metrics") {
    Clustering c(4);
    const std::vector<std::uint32_t> truth{0, 0, 1, 1};
    CHECK(pairwise_metrics(c, truth).recall == 0.0);
    CHECK(pairwise_metrics(c, truth).f_measure == 0.0);
    c.replace(std::vector<RecordIndex>{0, 1, 2, 3}, {{0, 1, 2, 3}});
    const auto m = pairwise_metrics(c, truth);
    CHECK(m.precision == doctest::Approx(2.0 / 6));
    CHECK(m.recall == 1.0);
    CHECK(m.f_measure == doctest::Approx(0.5));
    c.replace(std::vector<RecordIndex>{0, 1, 2, 3}, {{0, 1}, {2, 3}});
    CHECK(pairwise_metrics(c, truth).f_measure == 1.0);
}

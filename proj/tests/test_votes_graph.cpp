#include "fixtures.hpp"

#include <doctest.h>

using namespace fter;
using fter::testing::pr;

TEST_CASE("add_vote increments one tally") {
    auto g = fter::testing::graph_a();
    const auto& e = g.add_vote(pr(2, 4), Answer::no);
    CHECK(e.p == 1);
    CHECK(e.n == 5);
    g.add_vote("r4", "r2", Answer::yes);
    CHECK(g.edge(pr(2, 4)) == VoteEdge{2, 5});
}

TEST_CASE("add_vote rejects unknown records and self pairs") {
    auto g = fter::testing::records(3);
    CHECK_THROWS_AS(g.add_vote("r1", "zz", Answer::yes), DataError);
    CHECK_THROWS_AS(g.add_vote(Pair{0, 0}, Answer::yes), DataError);
    CHECK_THROWS_AS(g.add_vote(Pair{0, 7}, Answer::yes), DataError);
    CHECK(g.num_votes() == 0);
}

TEST_CASE("duplicate record ids are rejected") {
    auto g = fter::testing::records(2);
    CHECK_THROWS_AS(g.add_record({"r1", std::nullopt}), DataError);
}

TEST_CASE("usable direction is strict") {
    CHECK(fter::testing::graph_a().usable_direction(pr(2, 4)) == Direction::negative);
    CHECK(fter::testing::graph_b().usable_direction(pr(2, 4)) == Direction::none);
    CHECK(fter::testing::graph_a().usable_direction(pr(1, 2)) == Direction::positive);
    CHECK(fter::testing::graph_a().usable_direction(pr(2, 3)) == Direction::none);
}

TEST_CASE("neighbours by direction") {
    const auto g = fter::testing::graph_a();
    CHECK(g.neighbors(0, DirectionFilter::positive) == std::vector<RecordIndex>{1, 2});
    CHECK(g.neighbors(1, DirectionFilter::negative) == std::vector<RecordIndex>{3});
    CHECK(g.neighbors(1, DirectionFilter::any) == std::vector<RecordIndex>{0, 3});
    const auto b = fter::testing::graph_b();
    CHECK(b.neighbors(1, DirectionFilter::any).empty());
    CHECK(b.adjacent(1).size() == 1);
}

TEST_CASE("edge lookup is orientation free") {
    const auto g = fter::testing::graph_a();
    CHECK(g.edge(Pair{3, 1}) == g.edge(Pair{1, 3}));
    CHECK(g.edge(pr(1, 4)) == VoteEdge{});
}

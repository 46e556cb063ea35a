#include "fter/votes_graph.hpp"

#include <algorithm>

namespace fter {

const char* to_string(Answer a) { return a == Answer::yes ? "yes" : "no"; }

const char* to_string(Decision d) {
    switch (d) {
        case Decision::yes: return "yes";
        case Decision::no: return "no";
        case Decision::unknown: return "unknown";
    }
    return "?";
}

const char* to_string(Direction d) {
    switch (d) {
        case Direction::positive: return "positive";
        case Direction::negative: return "negative";
        case Direction::none: return "none";
    }
    return "?";
}

VotesGraph::VotesGraph(std::vector<Record> records) {
    for (auto& r : records) add_record(std::move(r));
}

RecordIndex VotesGraph::add_record(Record record) {
    if (by_id_.contains(record.id)) throw DataError("duplicate record id '" + record.id + "'");
    const auto idx = static_cast<RecordIndex>(records_.size());
    by_id_.emplace(record.id, idx);
    records_.push_back(std::move(record));
    adjacency_.emplace_back();
    return idx;
}

std::optional<RecordIndex> VotesGraph::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

RecordIndex VotesGraph::index_of(std::string_view id) const {
    if (auto r = find(id)) return *r;
    throw DataError("unknown record '" + std::string(id) + "'");
}

void VotesGraph::check_pair(Pair pair) const {
    if (pair.second >= records_.size())
        throw DataError("unknown record index " + std::to_string(pair.second));
    if (pair.is_self()) throw DataError("self pair on record '" + records_[pair.first].id + "'");
}

VoteEdge& VotesGraph::touch(Pair pair) {
    auto [it, inserted] = edges_.try_emplace(pair.key());
    if (inserted) {
        auto link = [this](RecordIndex from, RecordIndex to) {
            auto& adj = adjacency_[from];
            adj.insert(std::lower_bound(adj.begin(), adj.end(), to), to);
        };
        link(pair.first, pair.second);
        link(pair.second, pair.first);
    }
    return it->second;
}

const VoteEdge& VotesGraph::add_vote(Pair pair, Answer answer) {
    check_pair(pair);
    auto& e = touch(pair);
    (answer == Answer::yes ? e.p : e.n) += vote_weight;
    ++num_votes_;
    return e;
}

const VoteEdge& VotesGraph::add_vote(std::string_view a, std::string_view b, Answer answer) {
    const auto ia = index_of(a);
    const auto ib = index_of(b);
    if (ia == ib) throw DataError("self pair on record '" + std::string(a) + "'");
    return add_vote(Pair{ia, ib}, answer);
}

const VoteEdge& VotesGraph::add_votes(Pair pair, Score yes, Score no) {
    check_pair(pair);
    auto& e = touch(pair);
    e.p += yes;
    e.n += no;
    num_votes_ += yes + no;
    return e;
}

VoteEdge VotesGraph::edge(Pair pair) const {
    auto it = edges_.find(pair.key());
    return it == edges_.end() ? VoteEdge{} : it->second;
}

std::vector<RecordIndex> VotesGraph::neighbors(RecordIndex r, DirectionFilter filter) const {
    if (r >= records_.size()) throw DataError("unknown record index " + std::to_string(r));
    std::vector<RecordIndex> out;
    for (auto other : adjacency_[r]) {
        const auto dir = edge(Pair{r, other}).usable_direction();
        const bool keep = filter == DirectionFilter::any ? dir != Direction::none
                        : filter == DirectionFilter::positive ? dir == Direction::positive
                                                               : dir == Direction::negative;
        if (keep) out.push_back(other);
    }
    return out;
}

std::span<const RecordIndex> VotesGraph::adjacent(RecordIndex r) const { return adjacency_.at(r); }

}  // namespace fter

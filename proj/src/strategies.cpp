#include "fter/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace fter {

StrategyKind parse_strategy(std::string_view s) {
    if (s == "ers" || s == "ErS") return StrategyKind::ers;
    if (s == "urs" || s == "UrS") return StrategyKind::urs;
    if (s == "hs" || s == "HS") return StrategyKind::hs;
    throw ConfigError("unknown strategy '" + std::string(s) + "' (expected ers|urs|hs)");
}

Discipline parse_discipline(std::string_view s) {
    if (s == "fer" || s == "monotonic") return Discipline::monotonic;
    if (s == "feer" || s == "non_monotonic") return Discipline::non_monotonic;
    if (s == "cer" || s == "consensus") return Discipline::consensus;
    throw ConfigError("unknown discipline '" + std::string(s) + "' (expected cer|fer|feer)");
}

const char* to_string(StrategyKind s) {
    switch (s) {
        case StrategyKind::ers: return "ers";
        case StrategyKind::urs: return "urs";
        case StrategyKind::hs: return "hs";
    }
    return "?";
}

const char* to_string(Discipline d) {
    switch (d) {
        case Discipline::monotonic: return "fer";
        case Discipline::non_monotonic: return "feer";
        case Discipline::consensus: return "cer";
    }
    return "?";
}

void DisciplineConfig::validate() const {
    if (quorum < 1) throw ConfigError("quorum must be >= 1");
    if (edge_budget < quorum) throw ConfigError("edge budget must be >= quorum");
    if (mode == Discipline::consensus && (cer_votes < 1 || cer_votes % 2 == 0))
        throw ConfigError("votes per pair must be odd, got " + std::to_string(cer_votes));
    if (!(connectivity >= 0.0 && connectivity <= 1.0)) throw ConfigError("connectivity must lie in [0, 1]");
}

namespace {

void check_open(double phi) {
    if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("resolved pair (|phi| = 1) cannot be queued");
}

}  // namespace

bool compare(Pair a, Pair b, double phi_a, double phi_b, StrategyKind strategy) {
    check_open(phi_a);
    check_open(phi_b);
    double ka = 0, kb = 0;
    switch (strategy) {
        case StrategyKind::ers: ka = -std::abs(phi_a), kb = -std::abs(phi_b); break;
        case StrategyKind::urs: ka = std::abs(phi_a), kb = std::abs(phi_b); break;
        case StrategyKind::hs: ka = -phi_a, kb = -phi_b; break;
    }
    if (ka != kb) return ka < kb;
    return a < b;
}

TaskQueue::Key TaskQueue::key_for(Pair pair, double phi) const {
    switch (strategy_) {
        case StrategyKind::ers: return {0, -std::abs(phi), pair};
        case StrategyKind::urs: return {0, std::abs(phi), pair};
        case StrategyKind::hs: return phi > 0 ? Key{0, -phi, pair} : Key{1, std::abs(phi), pair};
    }
    return {0, 0, pair};
}

void TaskQueue::push(Pair pair, double phi) {
    check_open(phi);
    auto [it, inserted] = index_.try_emplace(pair.key(), phi);
    if (!inserted) {
        if (it->second == phi) return;
        order_.erase(key_for(pair, it->second));
        it->second = phi;
    }
    order_.insert(key_for(pair, phi));
}

bool TaskQueue::erase(Pair pair) {
    auto it = index_.find(pair.key());
    if (it == index_.end()) return false;
    order_.erase(key_for(pair, it->second));
    index_.erase(it);
    return true;
}

std::optional<double> TaskQueue::phi(Pair pair) const {
    auto it = index_.find(pair.key());
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<Pair> TaskQueue::peek() const {
    if (order_.empty()) return std::nullopt;
    return order_.begin()->pair;
}

std::optional<Pair> TaskQueue::next() {
    auto top = peek();
    if (top) erase(*top);
    return top;
}

std::vector<std::pair<Pair, double>> TaskQueue::ordered() const {
    std::vector<std::pair<Pair, double>> out;
    out.reserve(order_.size());
    for (const auto& k : order_) out.emplace_back(k.pair, index_.at(k.pair.key()));
    return out;
}

void TaskQueue::write_tsv(std::ostream& out, std::span<const Record> records) const {
    out << "i\tj\tphi\tqueue\n";
    for (const auto& k : order_) {
        const char* queue = strategy_ != StrategyKind::hs ? "mono" : (k.bucket == 0 ? "pos" : "neg");
        out << records[k.pair.first].id << '\t' << records[k.pair.second].id << '\t' << index_.at(k.pair.key())
            << '\t' << queue << '\n';
    }
}

Decision cer_step(std::span<const Answer> votes, Score v) {
    if (votes.size() != v)
        throw std::invalid_argument("expected " + std::to_string(v) + " votes, got " + std::to_string(votes.size()));
    const auto yes = std::count(votes.begin(), votes.end(), Answer::yes);
    return 2 * static_cast<std::size_t>(yes) > votes.size() ? Decision::yes : Decision::no;
}

ClosureState::ClosureState(std::size_t num_records) : parent_(num_records), size_(num_records, 1), apart_(num_records) {
    std::iota(parent_.begin(), parent_.end(), RecordIndex{0});
}

RecordIndex ClosureState::find(RecordIndex r) const {
    while (parent_[r] != r) {
        parent_[r] = parent_[parent_[r]];
        r = parent_[r];
    }
    return r;
}

bool ClosureState::separated(RecordIndex a, RecordIndex b) const {
    const auto ra = find(a), rb = find(b);
    return ra != rb && apart_[ra].contains(rb);
}

bool ClosureState::implied(Pair pair) const { return same(pair.first, pair.second) || separated(pair.first, pair.second); }

void ClosureState::record(Pair pair, Decision decision) {
    auto ra = find(pair.first), rb = find(pair.second);
    if (ra == rb || decision == Decision::unknown) return;
    if (decision == Decision::no) {
        apart_[ra].insert(rb);
        apart_[rb].insert(ra);
        return;
    }
    // Earlier decisions are final: a yes across a no-separation cannot occur
    // while implied pairs are never asked, but keep the merge well defined.
    if (size_[ra] < size_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    size_[ra] += size_[rb];
    for (auto other : apart_[rb]) {
        apart_[other].erase(rb);
        if (other != ra) {
            apart_[other].insert(ra);
            apart_[ra].insert(other);
        }
    }
    apart_[rb].clear();
    apart_[ra].erase(ra);
}

Clustering ClosureState::clustering() const {
    const auto n = parent_.size();
    std::vector<std::vector<RecordIndex>> groups(n);
    for (RecordIndex r = 0; r < n; ++r) groups[find(r)].push_back(r);
    std::vector<RecordIndex> all(n);
    std::iota(all.begin(), all.end(), RecordIndex{0});
    Clustering c(n);
    c.replace(all, groups);
    return c;
}

Clustering transitive_closure(std::size_t num_records, std::span<const std::pair<Pair, Decision>> decisions) {
    ClosureState state(num_records);
    for (const auto& [p, d] : decisions) state.record(p, d);
    return state.clustering();
}

std::vector<Pair> expand_connectivity(std::span<const RecordIndex> a, std::span<const RecordIndex> b, double kappa,
                                      std::mt19937_64& rng) {
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw ConfigError("connectivity must lie in [0, 1]");
    const std::size_t total = a.size() * b.size();
    if (total == 0) return {};
    const auto want = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(kappa * total)));
    // sample distinct cells of the |A| x |B| grid
    std::vector<std::size_t> cells(total);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    for (std::size_t k = 0; k < want; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, total - 1);
        std::swap(cells[k], cells[pick(rng)]);
    }
    std::vector<Pair> out;
    out.reserve(want);
    for (std::size_t k = 0; k < want; ++k) out.emplace_back(a[cells[k] / b.size()], b[cells[k] % b.size()]);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace fter

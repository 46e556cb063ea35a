#include "fter/engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace fter {

namespace {

/// Similarity in [0, 1] mapped onto an open consensus value.
double prior_phi(double similarity) { return std::clamp(2.0 * similarity - 1.0, -0.999, 0.999); }

std::string pair_name(const VotesGraph& g, Pair p) {
    return "[" + g.record(p.first).id + "," + g.record(p.second).id + "]";
}

}  // namespace

Engine::Engine(VotesGraph graph, EngineConfig config, std::optional<GroundTruth> truth)
    : config_(config), quorums_(config.quorums()), graph_(std::move(graph)), truth_(std::move(truth)) {
    setup();
    std::vector<std::pair<Pair, double>> all;
    const auto n = static_cast<RecordIndex>(graph_.num_records());
    all.reserve(static_cast<std::size_t>(n) * (n > 0 ? n - 1 : 0) / 2);
    for (RecordIndex i = 0; i < n; ++i)
        for (RecordIndex j = i + 1; j < n; ++j) all.emplace_back(Pair{i, j}, 0.0);
    seed_queue(all, false);
}

Engine::Engine(VotesGraph graph, EngineConfig config, const PrefilterResult& prefilter,
               std::optional<GroundTruth> truth)
    : config_(config), quorums_(config.quorums()), graph_(std::move(graph)), truth_(std::move(truth)) {
    setup();
    all_pairs_ = false;
    for (const auto& [p, s] : prefilter.candidates) candidates_.insert(p.key());
    seed_queue(prefilter.candidates, true);
}

Engine::Engine(VotesGraph graph, EngineConfig config, const std::vector<Pair>& candidates,
               std::optional<GroundTruth> truth)
    : config_(config), quorums_(config.quorums()), graph_(std::move(graph)), truth_(std::move(truth)) {
    setup();
    all_pairs_ = false;
    std::vector<std::pair<Pair, double>> list;
    for (auto p : candidates) {
        if (p.is_self() || p.second >= graph_.num_records())
            throw DataError("candidate pair outside the dataset: " + std::to_string(p.first) + "," +
                            std::to_string(p.second));
        if (candidates_.insert(p.key()).second) list.emplace_back(p, 0.0);
    }
    seed_queue(list, false);
}

void Engine::setup() {
    config_.validate();
    if (truth_ && truth_->entity_of.size() != graph_.num_records())
        throw DataError("ground truth covers " + std::to_string(truth_->entity_of.size()) + " of " +
                        std::to_string(graph_.num_records()) + " records");
    const auto n = graph_.num_records();
    matrix_ = compute_scores(graph_, config_.execution);
    order_ = SeedOrder(n, config_.seed);
    closure_ = ClosureState(n);
    rng_.seed(config_.seed ^ 0x6a09e667f3bcc909ull);
    queue_ = TaskQueue(config_.strategy);
    clustering_ = config_.discipline.mode == Discipline::consensus ? Clustering(n) : resolve(matrix_, order_);
}

void Engine::seed_queue(const std::vector<std::pair<Pair, double>>& candidates, bool with_prior) {
    for (const auto& [p, s] : candidates) {
        if (with_prior) prior_[p.key()] = prior_phi(s);
        if (config_.discipline.mode == Discipline::consensus || open(p)) queue_.push(p, priority(p));
    }
}

bool Engine::candidate(Pair pair) const { return all_pairs_ || candidates_.contains(pair.key()); }

bool Engine::open(Pair pair) const {
    if (!candidate(pair) || closed_.contains(pair.key())) return false;
    if (graph_.edge(pair).total() >= config_.discipline.edge_budget) return false;
    return decide(matrix_, pair, quorums_) == Decision::unknown;
}

double Engine::priority(Pair pair) const {
    if (matrix_.p_star(pair) == 0 && matrix_.n_star(pair) == 0) {
        auto it = prior_.find(pair.key());
        return it == prior_.end() ? 0.0 : it->second;
    }
    if (config_.discipline.mode == Discipline::consensus) return 0.0;
    return consensus(matrix_, pair, quorums_);
}

bool Engine::issued(Pair pair) const {
    auto it = outstanding_.find(pair.key());
    return it != outstanding_.end() && it->second > 0;
}

void Engine::take_outstanding(Pair pair) {
    ++outstanding_[pair.key()];
    ++outstanding_total_;
}

bool Engine::finished() const {
    return queue_.empty() && pending_.empty() && outstanding_total_ == 0 && cer_tasks_.empty();
}

std::optional<Pair> Engine::next_task() {
    if (config_.discipline.mode == Discipline::consensus) return next_cer_task();
    if (!pending_.empty()) {
        const auto p = pending_.front();
        pending_.pop_front();
        pending_set_.erase(p.key());
        take_outstanding(p);
        return p;
    }
    auto p = queue_.next();
    if (!p) return std::nullopt;
    take_outstanding(*p);
    if (config_.discipline.connectivity > 0) expand(*p);
    return p;
}

void Engine::expand(Pair popped) {
    const auto ca = clustering_.cluster_of(popped.first), cb = clustering_.cluster_of(popped.second);
    if (ca == cb) return;
    for (auto q : expand_connectivity(clustering_.members(ca), clustering_.members(cb), config_.discipline.connectivity,
                                      rng_)) {
        if (q == popped || !queue_.erase(q)) continue;
        pending_.push_back(q);
        pending_set_.insert(q.key());
    }
}

std::optional<Pair> Engine::next_cer_task() {
    for (auto p : cer_order_) {
        auto& t = cer_tasks_.at(p.key());
        if (t.issued < config_.discipline.cer_votes) {
            ++t.issued;
            take_outstanding(p);
            return p;
        }
    }
    while (auto p = queue_.next()) {
        if (closure_.implied(*p)) continue;
        cer_tasks_[p->key()].issued = 1;
        cer_order_.push_back(*p);
        ++cer_asked_;
        take_outstanding(*p);
        return p;
    }
    return std::nullopt;
}

Batch Engine::next_batch() {
    Batch batch;
    if (config_.discipline.mode == Discipline::consensus) {
        const auto v = config_.discipline.cer_votes;
        batch = build_batch(queue_, closure_, [v](Pair) { return v; }, config_.max_batch);
        for (const auto& it : batch.items) {
            queue_.erase(it.pair);
            auto& t = cer_tasks_[it.pair.key()];
            t.issued = v;
            cer_order_.push_back(it.pair);
            ++cer_asked_;
        }
        // drop everything the closure already settles
        for (const auto& [p, phi] : queue_.ordered())
            if (closure_.implied(p)) queue_.erase(p);
    } else {
        batch = build_batch(queue_, graph_, matrix_, quorums_, config_.discipline, config_.max_batch);
        for (const auto& it : batch.items) queue_.erase(it.pair);
    }
    for (const auto& it : batch.items)
        for (Score k = 0; k < it.repeats; ++k) take_outstanding(it.pair);
    return batch;
}

const std::vector<Pair>& Engine::integrate(Pair pair, Answer answer) {
    if (!issued(pair)) throw DataError("answer for a pair that was not issued: " + pair_name(graph_, pair));
    --outstanding_[pair.key()];
    --outstanding_total_;
    if (outstanding_[pair.key()] == 0) outstanding_.erase(pair.key());

    const auto start = std::chrono::steady_clock::now();
    graph_.add_vote(pair, answer);
    ++cost_;
    if (config_.discipline.mode == Discipline::consensus) {
        integrate_cer(pair, answer);
        last_changed_.clear();
    } else {
        last_changed_ = update(graph_, matrix_, pair, config_.execution);
        const auto component = transitive_update_component(last_changed_, clustering_);
        partial_resolve(clustering_, component, matrix_, order_);
        adjust(last_changed_, pair);
    }
    update_micros_.push_back(
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count());
    if (auto m = metrics()) trace_.push_back(*m);
    return last_changed_;
}

void Engine::integrate_cer(Pair pair, Answer answer) {
    auto it = cer_tasks_.find(pair.key());
    if (it == cer_tasks_.end()) return;
    auto& t = it->second;
    t.answers.push_back(answer);
    if (t.answers.size() < config_.discipline.cer_votes) return;
    closure_.record(pair, cer_step(t.answers, config_.discipline.cer_votes));
    cer_tasks_.erase(it);
    cer_order_.erase(std::find(cer_order_.begin(), cer_order_.end(), pair));
    clustering_ = closure_.clustering();
}

void Engine::adjust(const std::vector<Pair>& changed, Pair asked) {
    bool asked_seen = false;
    for (auto p : changed) {
        asked_seen = asked_seen || p == asked;
        reconsider(p, p == asked);
    }
    if (!asked_seen) reconsider(asked, true);
}

void Engine::reconsider(Pair pair, bool just_asked) {
    if (issued(pair) || pending_set_.contains(pair.key())) return;
    const bool ok = open(pair);
    if (queue_.contains(pair)) {
        if (ok) queue_.push(pair, priority(pair));
        else queue_.erase(pair);
        return;
    }
    if (!ok) return;
    if (just_asked) {
        queue_.push(pair, priority(pair));
    } else if (config_.discipline.mode == Discipline::non_monotonic) {
        auto& count = reinserted_[pair.key()];
        if (count < config_.discipline.edge_budget) {
            ++count;
            queue_.push(pair, priority(pair));
        }
    }
}

void Engine::withdraw(Pair pair) {
    if (!issued(pair)) throw DataError("withdraw of a pair that was not issued: " + pair_name(graph_, pair));
    if (--outstanding_[pair.key()] == 0) outstanding_.erase(pair.key());
    --outstanding_total_;
    if (config_.discipline.mode == Discipline::consensus) {
        auto& t = cer_tasks_.at(pair.key());
        --t.issued;
        return;
    }
    reconsider(pair, true);
}

void Engine::close(Pair pair) {
    if (!issued(pair)) throw DataError("close of a pair that was not issued: " + pair_name(graph_, pair));
    if (--outstanding_[pair.key()] == 0) outstanding_.erase(pair.key());
    --outstanding_total_;
    closed_.insert(pair.key());
    queue_.erase(pair);
    if (config_.discipline.mode == Discipline::consensus) {
        auto it = cer_tasks_.find(pair.key());
        if (it == cer_tasks_.end() || issued(pair)) return;
        // settle on whatever arrived; without answers nothing is decided
        const auto& a = it->second.answers;
        if (!a.empty()) {
            const auto yes = std::count(a.begin(), a.end(), Answer::yes);
            closure_.record(pair, 2 * static_cast<std::size_t>(yes) > a.size() ? Decision::yes : Decision::no);
            clustering_ = closure_.clustering();
        }
        cer_tasks_.erase(it);
        cer_order_.erase(std::find(cer_order_.begin(), cer_order_.end(), pair));
    }
}

std::optional<MetricsPoint> Engine::metrics() const {
    if (!truth_) return std::nullopt;
    auto m = pairwise_metrics(clustering_, truth_->entity_of);
    m.cost = cost_;
    return m;
}

void ExperimentConfig::validate() const {
    engine.validate();
    noise.validate();
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (prefilter && crowd != CrowdKind::synthetic) throw ConfigError("prefiltering needs the synthetic crowd");
}

RunResult run_once(Engine& engine, CrowdSource& crowd, std::uint64_t max_cost) {
    auto capped = [&] { return max_cost && engine.cost() >= max_cost; };
    while (!engine.finished() && !capped()) {
        if (engine.config().batched) {
            const auto batch = engine.next_batch();
            if (batch.empty()) break;
            for (const auto& it : batch.items) {
                Score k = 0;
                for (; k < it.repeats && !capped(); ++k) {
                    const auto a = crowd.answer(it.pair);
                    if (!a) break;
                    engine.integrate(it.pair, *a);
                }
                if (k < it.repeats) {
                    const bool dry = !capped();
                    for (; k < it.repeats; ++k) dry ? engine.close(it.pair) : engine.withdraw(it.pair);
                }
            }
        } else {
            const auto p = engine.next_task();
            if (!p) break;
            if (const auto a = crowd.answer(*p)) engine.integrate(*p, *a);
            else engine.close(*p);
        }
    }
    RunResult r;
    r.trace = engine.trace();
    r.clustering = engine.clustering();
    r.cost = engine.cost();
    r.final_metrics = engine.metrics();
    r.cer_pairs_asked = engine.cer_pairs_asked();
    const auto& t = engine.update_micros();
    if (!t.empty()) {
        double sum = 0;
        for (auto x : t) sum += x;
        r.mean_update_micros = sum / static_cast<double>(t.size());
    }
    return r;
}

Engine make_engine(const Dataset& data, const ExperimentConfig& config, std::size_t rep) {
    auto engine_config = config.engine;
    engine_config.seed = config.engine.seed + rep * 0x9e3779b97f4a7c15ull;
    if (config.prefilter) {
        auto graph = data.graph;
        const SimilarityPrefilter f{config.prefilter->lower, config.prefilter->upper, payload_jaccard(graph)};
        const auto seeded = apply_prefilter(graph, f, config.engine.discipline.edge_budget);
        return Engine(std::move(graph), engine_config, seeded, data.truth);
    }
    if (config.crowd == CrowdKind::replay) {
        std::vector<Pair> recorded;
        for (const auto& v : data.votes) recorded.push_back(v.pair);
        std::sort(recorded.begin(), recorded.end());
        recorded.erase(std::unique(recorded.begin(), recorded.end()), recorded.end());
        return Engine(data.graph, engine_config, recorded, data.truth);
    }
    return Engine(data.graph, engine_config, data.truth);
}

std::unique_ptr<CrowdSource> make_crowd(const Dataset& data, const ExperimentConfig& config, const Engine& engine,
                                        std::size_t rep) {
    if (config.crowd == CrowdKind::replay) return std::make_unique<ReplayCrowd>(data.votes, engine.graph());
    if (!data.truth) throw ConfigError("a synthetic crowd needs a ground truth");
    auto noise = config.noise;
    noise.seed = config.noise.seed + rep * 0xbf58476d1ce4e5b9ull;
    return std::make_unique<SyntheticCrowd>(*data.truth, noise);
}

ExperimentResult run_experiment(const Dataset& data, const ExperimentConfig& config) {
    config.validate();
    if (config.crowd == CrowdKind::synthetic && !data.truth)
        throw ConfigError("a synthetic crowd needs a ground truth");
    ExperimentResult out;
    std::vector<std::vector<MetricsPoint>> traces;
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        auto engine = make_engine(data, config, rep);
        auto crowd = make_crowd(data, config, engine, rep);
        auto r = run_once(engine, *crowd, config.max_cost);
        traces.push_back(r.trace);
        out.runs.push_back(std::move(r));
    }
    out.mean_trace = mean_trace(traces);
    return out;
}

std::vector<MetricsPoint> mean_trace(const std::vector<std::vector<MetricsPoint>>& traces) {
    std::uint64_t last = 0;
    std::size_t live = 0;
    for (const auto& t : traces)
        if (!t.empty()) {
            last = std::max(last, t.back().cost);
            ++live;
        }
    std::vector<MetricsPoint> out;
    if (live == 0) return out;
    for (std::uint64_t c = 1; c <= last; ++c) {
        MetricsPoint sum{c, 0, 0, 0};
        for (const auto& t : traces) {
            if (t.empty()) continue;
            MetricsPoint at;
            if (c <= t.front().cost) {
                at = t.front();
            } else if (c >= t.back().cost) {
                at = t.back();
            } else {
                const auto hi = std::lower_bound(t.begin(), t.end(), c,
                                                 [](const MetricsPoint& m, std::uint64_t x) { return m.cost < x; });
                const auto lo = hi - 1;
                const double w = static_cast<double>(c - lo->cost) / static_cast<double>(hi->cost - lo->cost);
                at.precision = lo->precision + w * (hi->precision - lo->precision);
                at.recall = lo->recall + w * (hi->recall - lo->recall);
                at.f_measure = lo->f_measure + w * (hi->f_measure - lo->f_measure);
            }
            sum.precision += at.precision;
            sum.recall += at.recall;
            sum.f_measure += at.f_measure;
        }
        sum.precision /= live;
        sum.recall /= live;
        sum.f_measure /= live;
        out.push_back(sum);
    }
    return out;
}

void write_trace_tsv(std::ostream& out, const std::vector<MetricsPoint>& trace) {
    out << "cost\tprecision\trecall\tf\n";
    for (const auto& m : trace) out << m.cost << '\t' << m.precision << '\t' << m.recall << '\t' << m.f_measure << '\n';
}

}  // namespace fter

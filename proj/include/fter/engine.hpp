#pragma once

#include "fter/clustering.hpp"
#include "fter/crowd.hpp"
#include "fter/metrics.hpp"
#include "fter/minmax.hpp"
#include "fter/parallel.hpp"
#include "fter/strategies.hpp"
#include "fter/votes_graph.hpp"

#include <chrono>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace fter {

struct EngineConfig {
    StrategyKind strategy{StrategyKind::hs};
    DisciplineConfig discipline{};
    Execution execution{Execution::parallel};
    /// Issue spanning-tree batches instead of single pairs.
    bool batched{false};
    std::size_t max_batch{0};
    std::uint64_t seed{0};

    Quorums quorums() const { return Quorums(discipline.quorum); }
    void validate() const { discipline.validate(); }
};

/**
 * Next-crowdsource loop state: votes graph, MinMax matrix, clustering and the
 * task queue. One writer; every answer goes through `integrate`.
 */
class Engine {
public:
    Engine(VotesGraph graph, EngineConfig config, std::optional<GroundTruth> truth = std::nullopt);
    /// Restricts the candidate pairs to the prefilter survivors, ordered by similarity.
    Engine(VotesGraph graph, EngineConfig config, const PrefilterResult& prefilter,
           std::optional<GroundTruth> truth = std::nullopt);
    /// Restricts the candidate pairs to `candidates`.
    Engine(VotesGraph graph, EngineConfig config, const std::vector<Pair>& candidates,
           std::optional<GroundTruth> truth = std::nullopt);

    /// Issues one task, or nullopt when nothing can be asked right now.
    std::optional<Pair> next_task();
    /// Issues a batch; every item counts as `repeats` outstanding tasks.
    Batch next_batch();

    /// Integrates one answer for an issued pair. Throws DataError otherwise.
    const std::vector<Pair>& integrate(Pair pair, Answer answer);
    /// Returns an issued task unanswered (expiry); the pair may be asked again.
    void withdraw(Pair pair);
    /// Returns an issued task for which no answer will ever exist.
    void close(Pair pair);

    bool finished() const;
    std::size_t outstanding() const { return outstanding_total_; }
    bool issued(Pair pair) const;

    std::uint64_t cost() const { return cost_; }
    const VotesGraph& graph() const { return graph_; }
    const PathScoreMatrix& matrix() const { return matrix_; }
    const Clustering& clustering() const { return clustering_; }
    const TaskQueue& queue() const { return queue_; }
    const EngineConfig& config() const { return config_; }
    const std::optional<GroundTruth>& truth() const { return truth_; }

    std::optional<MetricsPoint> metrics() const;
    const std::vector<MetricsPoint>& trace() const { return trace_; }
    /// Wall time of each integration in microseconds.
    const std::vector<double>& update_micros() const { return update_micros_; }

    /// Pairs asked so far under the consensus discipline.
    std::size_t cer_pairs_asked() const { return cer_asked_; }

private:
    struct CerTask {
        std::vector<Answer> answers;
        Score issued{0};
    };

    void setup();
    void seed_queue(const std::vector<std::pair<Pair, double>>& candidates, bool with_prior);
    bool candidate(Pair pair) const;
    bool open(Pair pair) const;
    double priority(Pair pair) const;
    void adjust(const std::vector<Pair>& changed, Pair asked);
    void reconsider(Pair pair, bool just_asked);
    void take_outstanding(Pair pair);
    std::optional<Pair> next_cer_task();
    void integrate_cer(Pair pair, Answer answer);
    void expand(Pair popped);

    EngineConfig config_;
    Quorums quorums_;
    VotesGraph graph_;
    PathScoreMatrix matrix_;
    Clustering clustering_;
    SeedOrder order_;
    TaskQueue queue_;
    std::optional<GroundTruth> truth_;

    bool all_pairs_{true};
    std::unordered_set<std::uint64_t> candidates_;
    std::unordered_map<std::uint64_t, double> prior_;
    std::unordered_map<std::uint64_t, Score> outstanding_;
    std::size_t outstanding_total_{0};
    std::unordered_map<std::uint64_t, Score> reinserted_;
    std::unordered_set<std::uint64_t> closed_;
    std::deque<Pair> pending_;
    std::unordered_set<std::uint64_t> pending_set_;
    std::mt19937_64 rng_;

    ClosureState closure_;
    std::unordered_map<std::uint64_t, CerTask> cer_tasks_;
    std::vector<Pair> cer_order_;
    std::size_t cer_asked_{0};

    std::uint64_t cost_{0};
    std::vector<MetricsPoint> trace_;
    std::vector<double> update_micros_;
    std::vector<Pair> last_changed_;
};

enum class CrowdKind { synthetic, replay };

/// Payload-similarity thresholds; pairs outside [lower, upper] are seeded.
struct PrefilterBounds {
    double lower{0.0};
    double upper{1.0};
};

struct ExperimentConfig {
    EngineConfig engine{};
    CrowdKind crowd{CrowdKind::synthetic};
    NoiseModel noise{};
    std::size_t repetitions{1};
    /// Stop a run after this many votes (0: run to completion).
    std::uint64_t max_cost{0};
    /// Synthetic crowd only: prefilter candidates by payload Jaccard.
    std::optional<PrefilterBounds> prefilter;

    void validate() const;
};

struct RunResult {
    std::vector<MetricsPoint> trace;
    Clustering clustering;
    std::uint64_t cost{0};
    std::optional<MetricsPoint> final_metrics;
    double mean_update_micros{0.0};
    std::size_t cer_pairs_asked{0};
};

struct ExperimentResult {
    std::vector<RunResult> runs;
    std::vector<MetricsPoint> mean_trace;
};

/// Drives one engine to completion against `crowd`.
RunResult run_once(Engine& engine, CrowdSource& crowd, std::uint64_t max_cost = 0);

/// Engine for repetition `rep`: prefiltered, restricted to the recorded pairs
/// for a replay crowd, or over all pairs.
Engine make_engine(const Dataset& data, const ExperimentConfig& config, std::size_t rep = 0);
/// Crowd for repetition `rep`; a replay crowd reads `engine`'s record ids.
std::unique_ptr<CrowdSource> make_crowd(const Dataset& data, const ExperimentConfig& config, const Engine& engine,
                                        std::size_t rep = 0);

/// Repeats the run with seeds derived from the configured ones.
ExperimentResult run_experiment(const Dataset& data, const ExperimentConfig& config);

/// Averages traces at every integer cost, interpolating linearly inside a run
/// and holding its last point after it ends.
std::vector<MetricsPoint> mean_trace(const std::vector<std::vector<MetricsPoint>>& traces);

/// `cost precision recall f` rows, tab separated.
void write_trace_tsv(std::ostream& out, const std::vector<MetricsPoint>& trace);

}  // namespace fter

#pragma once

#include "fter/types.hpp"
#include "fter/votes_graph.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fter {

/// Entity label per record index.
struct GroundTruth {
    std::vector<std::uint32_t> entity_of;
    std::vector<std::string> entity_names;

    std::size_t num_entities() const { return entity_names.size(); }
    bool covers(RecordIndex r) const { return r < entity_of.size(); }
    bool same(Pair p) const;
};

struct NoiseModel {
    double false_positive{0.0};
    double false_negative{0.0};
    std::uint64_t seed{0};

    void validate() const;
};

/// Source of crowd answers; nullopt means no more answers exist for the pair.
class CrowdSource {
public:
    virtual ~CrowdSource() = default;
    virtual std::optional<Answer> answer(Pair pair) = 0;
};

/// Noisy oracle over a ground truth, one i.i.d. draw per vote.
class SyntheticCrowd : public CrowdSource {
public:
    SyntheticCrowd(const GroundTruth& truth, NoiseModel noise);
    std::optional<Answer> answer(Pair pair) override;

private:
    const GroundTruth& truth_;
    NoiseModel noise_;
    std::mt19937_64 rng_;
};

struct RecordedVote {
    Pair pair;
    std::string worker;
    Answer answer;
    std::uint64_t seq;
};

/// Replays recorded votes per pair in seq order.
class ReplayCrowd : public CrowdSource {
public:
    ReplayCrowd(std::span<const RecordedVote> votes, const VotesGraph& graph);
    std::optional<Answer> answer(Pair pair) override;
    bool has(Pair pair) const { return votes_.contains(pair.key()); }

private:
    struct Stream {
        std::vector<Answer> answers;
        std::size_t cursor{0};
    };
    const VotesGraph& graph_;
    std::unordered_map<std::uint64_t, Stream> votes_;
};

using SimilarityFn = std::function<double(Pair)>;

struct SimilarityPrefilter {
    double lower{0.0};
    double upper{1.0};
    SimilarityFn similarity;

    void validate() const;
};

struct PrefilterResult {
    std::vector<Pair> seeded_positive;
    std::vector<Pair> seeded_negative;
    /// Unseeded pairs with their similarity, in ascending pair order.
    std::vector<std::pair<Pair, double>> candidates;
};

/// Seeds clear matches and non-matches with a full budget of votes.
PrefilterResult apply_prefilter(VotesGraph& graph, const SimilarityPrefilter& prefilter, Score edge_budget);

/// Jaccard similarity of lower-cased alphanumeric token sets.
double jaccard(std::string_view a, std::string_view b);

/// Jaccard over record payloads (empty payloads compare as empty sets).
SimilarityFn payload_jaccard(const VotesGraph& graph);

struct DatasetStats {
    std::optional<std::size_t> records;
    std::optional<std::size_t> entities;
    std::optional<std::size_t> pairs;
    std::optional<std::size_t> votes;
};

struct Dataset {
    VotesGraph graph;  // records only, no votes
    std::optional<GroundTruth> truth;
    std::vector<RecordedVote> votes;
};

/// Ground truth rows `record_id,entity_id`. Adds unseen records to `graph`.
GroundTruth load_truth(const std::filesystem::path& path, VotesGraph& graph);
/// Vote rows `record_i,record_j,worker_id,answer,seq`, answer 0|1. Adds unseen records.
std::vector<RecordedVote> load_votes(const std::filesystem::path& path, VotesGraph& graph);

/**
 * JSON manifest naming `truth`, `votes` and optional `records`
 * (`record_id,payload`) files relative to the manifest, an optional
 * `payload_base_url` and optional `stats` checked against the loaded data.
 */
Dataset load_manifest(const std::filesystem::path& path);

/// Throws DataError when a declared statistic disagrees with the data.
void check_stats(const Dataset& data, const DatasetStats& stats);

/**
 * `num_records` records spread over `num_entities` entities. With `zipf`,
 * entity k is picked with weight 1/k^exponent and no entity grows past
 * `max_entity_size`; otherwise uniformly. Record order is shuffled.
 */
struct SyntheticSpec {
    std::size_t num_records{100};
    std::size_t num_entities{20};
    bool zipf{true};
    double exponent{1.0};
    std::size_t max_entity_size{50};
    std::uint64_t seed{0};
};
Dataset make_synthetic_dataset(const SyntheticSpec& spec);

}  // namespace fter

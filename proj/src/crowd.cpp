#include "fter/crowd.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace fter {

bool GroundTruth::same(Pair p) const {
    if (!covers(p.first) || !covers(p.second))
        throw DataError("record index " + std::to_string(std::max(p.first, p.second)) + " missing from ground truth");
    return entity_of[p.first] == entity_of[p.second];
}

void NoiseModel::validate() const {
    auto ok = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!ok(false_positive) || !ok(false_negative)) throw ConfigError("noise rates must lie in [0, 1]");
}

SyntheticCrowd::SyntheticCrowd(const GroundTruth& truth, NoiseModel noise)
    : truth_(truth), noise_(noise), rng_(noise.seed) {
    noise_.validate();
}

std::optional<Answer> SyntheticCrowd::answer(Pair pair) {
    const bool same = truth_.same(pair);
    const double flip = same ? noise_.false_negative : noise_.false_positive;
    const bool wrong = std::bernoulli_distribution(flip)(rng_);
    return (same != wrong) ? Answer::yes : Answer::no;
}

ReplayCrowd::ReplayCrowd(std::span<const RecordedVote> votes, const VotesGraph& graph) : graph_(graph) {
    std::vector<const RecordedVote*> sorted;
    sorted.reserve(votes.size());
    for (const auto& v : votes) sorted.push_back(&v);
    std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->seq < b->seq; });
    for (const auto* v : sorted) votes_[v->pair.key()].answers.push_back(v->answer);
}

std::optional<Answer> ReplayCrowd::answer(Pair pair) {
    auto it = votes_.find(pair.key());
    if (it == votes_.end())
        throw DataError("no recorded votes for pair [" + graph_.record(pair.first).id + "," +
                        graph_.record(pair.second).id + "]");
    auto& s = it->second;
    if (s.cursor >= s.answers.size()) return std::nullopt;
    return s.answers[s.cursor++];
}

void SimilarityPrefilter::validate() const {
    if (!(0.0 <= lower && lower <= upper && upper <= 1.0))
        throw ConfigError("prefilter thresholds must satisfy 0 <= lower <= upper <= 1");
    if (!similarity) throw ConfigError("prefilter needs a similarity provider");
}

PrefilterResult apply_prefilter(VotesGraph& graph, const SimilarityPrefilter& prefilter, Score edge_budget) {
    prefilter.validate();
    PrefilterResult out;
    const auto n = static_cast<RecordIndex>(graph.num_records());
    for (RecordIndex i = 0; i < n; ++i)
        for (RecordIndex j = i + 1; j < n; ++j) {
            const Pair p{i, j};
            const double s = prefilter.similarity(p);
            if (s > prefilter.upper) {
                graph.add_votes(p, edge_budget, 0);
                out.seeded_positive.push_back(p);
            } else if (s < prefilter.lower) {
                graph.add_votes(p, 0, edge_budget);
                out.seeded_negative.push_back(p);
            } else {
                out.candidates.emplace_back(p, s);
            }
        }
    return out;
}

namespace {

std::set<std::string> tokens(std::string_view text) {
    std::set<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        } else if (!cur.empty()) {
            out.insert(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.insert(std::move(cur));
    return out;
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

RecordIndex intern(VotesGraph& graph, const std::string& id) {
    if (auto r = graph.find(id)) return *r;
    return graph.add_record({id, std::nullopt});
}

/// Reads rows after the header, calling `fn(fields, line_number)`.
template <typename Fn>
void for_each_row(const std::filesystem::path& path, std::size_t columns, const char* header, Fn&& fn) {
    auto in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_row(line);
        if (line_no == 1 && !fields.empty() && fields[0] == header) continue;
        if (fields.size() != columns)
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                            " fields, got " + std::to_string(fields.size()));
        fn(fields, line_no);
    }
}

}  // namespace

double jaccard(std::string_view a, std::string_view b) {
    const auto ta = tokens(a), tb = tokens(b);
    if (ta.empty() && tb.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& t : ta) common += tb.count(t);
    return static_cast<double>(common) / static_cast<double>(ta.size() + tb.size() - common);
}

SimilarityFn payload_jaccard(const VotesGraph& graph) {
    std::vector<std::string> text;
    for (const auto& r : graph.records()) text.push_back(r.payload.value_or(""));
    return [text = std::move(text)](Pair p) { return jaccard(text[p.first], text[p.second]); };
}

GroundTruth load_truth(const std::filesystem::path& path, VotesGraph& graph) {
    std::unordered_map<std::string, std::uint32_t> entity_ids;
    GroundTruth truth;
    std::vector<std::optional<std::uint32_t>> label;
    for_each_row(path, 2, "record_id", [&](const std::vector<std::string>& f, std::size_t line_no) {
        if (f[0].empty() || f[1].empty())
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty field");
        const auto r = intern(graph, f[0]);
        auto [it, inserted] = entity_ids.try_emplace(f[1], static_cast<std::uint32_t>(truth.entity_names.size()));
        if (inserted) truth.entity_names.push_back(f[1]);
        if (label.size() <= r) label.resize(r + 1);
        if (label[r] && *label[r] != it->second)
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": record '" + f[0] +
                            "' assigned to two entities");
        label[r] = it->second;
    });
    label.resize(graph.num_records());
    for (RecordIndex r = 0; r < label.size(); ++r) {
        if (!label[r]) throw DataError("record '" + graph.record(r).id + "' missing from " + path.string());
        truth.entity_of.push_back(*label[r]);
    }
    return truth;
}

std::vector<RecordedVote> load_votes(const std::filesystem::path& path, VotesGraph& graph) {
    std::vector<RecordedVote> votes;
    for_each_row(path, 5, "record_i", [&](const std::vector<std::string>& f, std::size_t line_no) {
        auto where = [&] { return path.string() + ":" + std::to_string(line_no) + ": "; };
        if (f[0] == f[1]) throw DataError(where() + "self pair on '" + f[0] + "'");
        if (f[3] != "0" && f[3] != "1") throw DataError(where() + "answer must be 0 or 1, got '" + f[3] + "'");
        std::uint64_t seq = 0;
        try {
            std::size_t used = 0;
            seq = std::stoull(f[4], &used);
            if (used != f[4].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DataError(where() + "bad seq '" + f[4] + "'");
        }
        const auto a = intern(graph, f[0]), b = intern(graph, f[1]);
        votes.push_back({Pair{a, b}, f[2], f[3] == "1" ? Answer::yes : Answer::no, seq});
    });
    return votes;
}

void check_stats(const Dataset& data, const DatasetStats& stats) {
    auto check = [](const char* what, std::optional<std::size_t> declared, std::size_t actual) {
        if (declared && *declared != actual)
            throw DataError(std::string("manifest declares ") + std::to_string(*declared) + " " + what + ", data has " +
                            std::to_string(actual));
    };
    check("records", stats.records, data.graph.num_records());
    if (stats.entities) {
        if (!data.truth) throw DataError("manifest declares entities but no ground truth is loaded");
        check("entities", stats.entities, data.truth->num_entities());
    }
    std::unordered_set<std::uint64_t> pairs;
    for (const auto& v : data.votes) pairs.insert(v.pair.key());
    check("pairs", stats.pairs, pairs.size());
    check("votes", stats.votes, data.votes.size());
}

Dataset load_manifest(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw DataError(path.string() + ": manifest must be a JSON object");
    const auto dir = path.parent_path();
    auto file = [&](const char* key) -> std::optional<std::filesystem::path> {
        if (!j.contains(key)) return std::nullopt;
        if (!j[key].is_string()) throw DataError(path.string() + ": '" + key + "' must be a string");
        std::filesystem::path p = j[key].get<std::string>();
        return p.is_absolute() ? p : dir / p;
    };

    Dataset data;
    if (auto records = file("records")) {
        for_each_row(*records, 2, "record_id", [&](const std::vector<std::string>& f, std::size_t) {
            data.graph.add_record({f[0], f[1].empty() ? std::nullopt : std::optional<std::string>(f[1])});
        });
    }
    if (auto truth = file("truth")) data.truth = load_truth(*truth, data.graph);
    if (auto votes = file("votes")) data.votes = load_votes(*votes, data.graph);
    if (data.truth && data.truth->entity_of.size() != data.graph.num_records()) {
        // votes introduced records the truth file does not know
        const auto r = static_cast<RecordIndex>(data.truth->entity_of.size());
        throw DataError("record '" + data.graph.record(r).id + "' missing from ground truth");
    }

    if (j.contains("payload_base_url")) {
        const auto base = j["payload_base_url"].get<std::string>();
        VotesGraph relinked;
        for (const auto& r : data.graph.records())
            relinked.add_record({r.id, r.payload ? r.payload : std::optional<std::string>(base + r.id)});
        data.graph = std::move(relinked);
    }

    if (j.contains("stats")) {
        const auto& s = j["stats"];
        DatasetStats stats;
        auto read = [&](const char* key, std::optional<std::size_t>& slot) {
            if (s.contains(key)) slot = s[key].get<std::size_t>();
        };
        try {
            read("records", stats.records);
            read("entities", stats.entities);
            read("pairs", stats.pairs);
            read("votes", stats.votes);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ": bad stats: " + e.what());
        }
        check_stats(data, stats);
    }
    return data;
}

Dataset make_synthetic_dataset(const SyntheticSpec& spec) {
    if (spec.num_entities == 0 && spec.num_records > 0) throw ConfigError("need at least one entity");
    if (spec.num_entities > spec.num_records) throw ConfigError("more entities than records");
    if (spec.num_entities * spec.max_entity_size < spec.num_records)
        throw ConfigError("entities cannot hold all records under the maximum entity size");
    std::mt19937_64 rng(spec.seed);
    const auto k = spec.num_entities;
    std::vector<double> weight(k, 1.0);
    if (spec.zipf)
        for (std::size_t e = 0; e < k; ++e) weight[e] = 1.0 / std::pow(static_cast<double>(e + 1), spec.exponent);

    // one record per entity, the rest by weight among entities with room
    std::vector<std::uint32_t> label;
    std::vector<std::size_t> size(k, 0);
    for (std::uint32_t e = 0; e < k; ++e) {
        label.push_back(e);
        ++size[e];
    }
    while (label.size() < spec.num_records) {
        std::vector<double> w = weight;
        for (std::size_t e = 0; e < k; ++e)
            if (size[e] >= spec.max_entity_size) w[e] = 0;
        const auto e = static_cast<std::uint32_t>(std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng));
        label.push_back(e);
        ++size[e];
    }
    std::shuffle(label.begin(), label.end(), rng);

    Dataset data;
    data.truth.emplace();
    for (std::uint32_t e = 0; e < k; ++e) data.truth->entity_names.push_back("e" + std::to_string(e));
    for (std::size_t r = 0; r < label.size(); ++r) {
        data.graph.add_record({"r" + std::to_string(r), std::nullopt});
        data.truth->entity_of.push_back(label[r]);
    }
    return data;
}

}  // namespace fter

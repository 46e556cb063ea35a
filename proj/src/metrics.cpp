#include "fter/metrics.hpp"

#include <stdexcept>
#include <unordered_map>

namespace fter {

namespace {

std::uint64_t pairs_within(std::uint64_t k) { return k * (k - 1) / 2; }

}  // namespace

MetricsPoint pairwise_metrics(const Clustering& clustering, std::span<const std::uint32_t> entity_of) {
    if (entity_of.size() != clustering.num_records())
        throw DataError("ground truth covers " + std::to_string(entity_of.size()) + " records, clustering " +
                        std::to_string(clustering.num_records()));
    std::unordered_map<std::uint32_t, std::uint64_t> entity_size;
    for (auto e : entity_of) ++entity_size[e];
    std::uint64_t truth_same = 0;
    for (const auto& [e, k] : entity_size) truth_same += pairs_within(k);

    std::uint64_t predicted_same = 0, correct = 0;
    std::unordered_map<std::uint32_t, std::uint64_t> overlap;
    for (const auto& cluster : clustering.clusters()) {
        predicted_same += pairs_within(cluster.size());
        overlap.clear();
        for (auto r : cluster) ++overlap[entity_of[r]];
        for (const auto& [e, k] : overlap) correct += pairs_within(k);
    }
    MetricsPoint m;
    m.precision = predicted_same ? static_cast<double>(correct) / predicted_same : 1.0;
    m.recall = truth_same ? static_cast<double>(correct) / truth_same : 1.0;
    m.f_measure = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

}  // namespace fter

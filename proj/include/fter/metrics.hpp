#pragma once

#include "fter/clustering.hpp"

#include <cstdint>
#include <span>

namespace fter {

struct MetricsPoint {
    std::uint64_t cost{0};
    double precision{1.0};
    double recall{1.0};
    double f_measure{1.0};
};

/// Pairwise precision / recall / F of `clustering` against entity labels per record.
MetricsPoint pairwise_metrics(const Clustering& clustering, std::span<const std::uint32_t> entity_of);

}  // namespace fter

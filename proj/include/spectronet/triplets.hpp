#pragma once

#include <cstdint>
#include <vector>

#include "spectronet/dataset.hpp"

namespace spectronet {

/// A batch of training tuples. Tuple i is (anchors[i], noise_sources[i],
/// alignment_sets[i]); the targets of all members of one tuple are pairwise
/// distinct. Values are sample indices into the dataset.
struct TripletBatch {
    std::vector<std::size_t> anchors;
    std::vector<std::size_t> noise_sources;
    std::vector<std::vector<std::size_t>> alignment_sets;

    std::size_t size() const { return anchors.size(); }
};

/// Draws `batch` tuples with replacement. Each tuple picks 2 + n_align
/// pairwise-distinct targets uniformly, then one sample uniformly within
/// each. Deterministic for a fixed seed.
TripletBatch make_triplets(const Dataset& d, std::size_t batch,
                           std::size_t n_align, std::uint64_t seed);

} // namespace spectronet

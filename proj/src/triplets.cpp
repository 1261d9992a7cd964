#include "spectronet/triplets.hpp"

#include "spectronet/rng.hpp"

namespace spectronet {

TripletBatch make_triplets(const Dataset& d, std::size_t batch,
                           std::size_t n_align, std::uint64_t seed) {
    if (batch == 0) throw UsageError("make_triplets: batch must be positive");
    if (n_align == 0) {
        throw UsageError("make_triplets: n_align must be positive");
    }
    auto groups = d.by_target();
    const std::size_t needed = 2 + n_align;
    if (groups.size() < needed) {
        throw UsageError("make_triplets: need at least " +
                         std::to_string(needed) + " distinct targets, have " +
                         std::to_string(groups.size()));
    }

    // Flatten the target map into indexable form (sorted by target id, so
    // sampling is independent of map iteration quirks).
    std::vector<const std::vector<std::size_t>*> members;
    members.reserve(groups.size());
    for (const auto& [target, idx] : groups) {
        (void)target;
        members.push_back(&idx);
    }

    Rng rng(seed);
    TripletBatch out;
    out.anchors.reserve(batch);
    out.noise_sources.reserve(batch);
    out.alignment_sets.reserve(batch);

    std::vector<std::size_t> pool(members.size());
    for (std::size_t b = 0; b < batch; ++b) {
        // Partial Fisher-Yates: the first `needed` entries of pool become a
        // uniform draw of distinct targets.
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
        for (std::size_t i = 0; i < needed; ++i) {
            const std::size_t j = i + rng.uniform_int(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        auto pick = [&](std::size_t slot) {
            const auto& idx = *members[pool[slot]];
            return idx[rng.uniform_int(idx.size())];
        };
        out.anchors.push_back(pick(0));
        out.noise_sources.push_back(pick(1));
        std::vector<std::size_t> align;
        align.reserve(n_align);
        for (std::size_t a = 0; a < n_align; ++a) {
            align.push_back(pick(2 + a));
        }
        out.alignment_sets.push_back(std::move(align));
    }
    return out;
}

} // namespace spectronet

/// @file synthetic_corpus.hpp
/// @brief Seeded generator of podcast-like episodes for offline runs.
#pragma once

#include <cstdint>
#include <vector>

#include "vizpod/datagen.hpp"

namespace vizpod {

struct SyntheticCorpusOptions {
    std::size_t episodes = 20;
    std::uint64_t seed = 7;
};

/// Mostly two-speaker Host/Guest episodes of 1,200-4,000 words; every tenth
/// episode (offset 7) is a monologue and every tenth (offset 9) is too short,
/// so the filter has something to reject. Same seed, same corpus.
std::vector<Episode> synthetic_episodes(const SyntheticCorpusOptions& opts = {});

}  // namespace vizpod

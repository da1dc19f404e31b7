/// @file dataset_stats.hpp
/// @brief Image-count and word-count distributions of a manifest set.
///
/// Word bins are half-open [lo, hi) with edges 0, 500, 600, 700, 800, 900,
/// 1000, 1200, 1500, 2000 and an open-ended last bin. Image bins are 2, 3, 4,
/// 5 and 6+, preceded by a 0-1 bin that only manifests built outside the
/// pipeline can land in.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vizpod/datagen.hpp"
#include "vizpod/style_metrics.hpp"

namespace vizpod {

inline constexpr std::array<std::size_t, 10> kWordBinEdges = {0, 500, 600, 700, 800, 900, 1000, 1200, 1500, 2000};

struct HistogramBin {
    std::string label;
    std::size_t lo = 0;
    std::optional<std::size_t> hi;  ///< exclusive; empty for the open-ended bin
    std::size_t count = 0;
    long percent_tenths = 0;  ///< percentage × 10, rounded half-up

    double percent() const { return static_cast<double>(percent_tenths) / 10.0; }
};

/// round_half_up(1000 * count / total), computed in integers.
long percent_tenths(std::size_t count, std::size_t total);

std::vector<HistogramBin> image_count_histogram(const std::vector<std::size_t>& image_counts);
std::vector<HistogramBin> word_count_histogram(const std::vector<std::size_t>& word_counts);

struct DatasetStats {
    std::size_t sample_count = 0;
    std::vector<HistogramBin> image_counts;
    std::vector<HistogramBin> word_counts;
    CorpusStyleReport source_style;
};

/// Throws EmptyInput for an empty manifest set.
DatasetStats dataset_stats(const std::vector<SampleManifest>& manifests);

nlohmann::json to_json(const DatasetStats& s);
std::string format_dataset_stats(const DatasetStats& s);

}  // namespace vizpod

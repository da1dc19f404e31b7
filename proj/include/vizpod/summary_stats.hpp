/// @file summary_stats.hpp
/// @brief Mean and sample standard deviation, the "mean ± std" cells of the report tables.
#pragma once

#include <cmath>
#include <span>
#include <string>

namespace vizpod {

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  ///< sample (n - 1) deviation; 0 for a single value
    std::size_t n = 0;
};

inline MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    out.n = values.size();
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

std::string format_mean_std(const MeanStd& m, int precision = 1);

}  // namespace vizpod

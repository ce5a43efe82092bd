#pragma once

#include "pv/forest.hpp"
#include "pv/rng.hpp"

#include <vector>

namespace golden {

/// 3-feature dataset behind tests/data/golden_1tree.pvf.
inline pv::TrainingSet dataset()
{
    pv::Rng rng(20240607);
    const std::size_t n = 200, m = 3;
    std::vector<double> rows;
    std::vector<std::uint8_t> labels;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform(), b = rng.uniform(), c = std::floor(rng.uniform() * 4);
        rows.insert(rows.end(), {a, b, c});
        labels.push_back((a + 0.5 * b > 0.7) != (c == 3) ? 1 : 0);
    }
    return pv::TrainingSet::from_rows(rows, labels, m);
}

inline pv::RFParams params()
{
    pv::RFParams p;
    p.trees = 1;
    p.features_per_node = 2;
    p.min_leaf = 5;
    p.seed = 77;
    return p;
}

/// Probe points whose predictions are recorded next to the model.
inline std::vector<std::vector<double>> probes()
{
    std::vector<std::vector<double>> out;
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= 4; ++j)
            for (int c = 0; c < 4; ++c)
                out.push_back({i / 4.0, j / 4.0, static_cast<double>(c)});
    return out;
}

} // namespace golden

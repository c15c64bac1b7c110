#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "wavechaos/error.hpp"
#include "wavechaos/types.hpp"

namespace wavechaos {

/// Frequency grid with complex S-matrix elements for selected (a, b) pairs,
/// 1-based port indices as in S_ba.
struct ComplexTrace {
    std::vector<double> f;
    std::string unit = "Hz";  // "Hz" for ingested data, "f/d" for simulated
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::vector<Complex>> values;  // values[pair][i]

    std::size_t size() const { return f.size(); }

    void validate() const {
        if (values.size() != pairs.size()) throw InvalidArgument("trace: pair count does not match value columns");
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (!std::isfinite(f[i])) throw InvalidArgument("trace: frequency " + std::to_string(i) + " not finite");
            if (i > 0 && !(f[i] > f[i - 1])) throw InvalidArgument("trace: grid not ascending at index " + std::to_string(i));
        }
        for (const auto& col : values) {
            if (col.size() != f.size()) throw InvalidArgument("trace: column length differs from grid length");
            for (std::size_t i = 0; i < col.size(); ++i)
                if (!std::isfinite(col[i].real()) || !std::isfinite(col[i].imag()))
                    throw InvalidArgument("trace: non-finite entry at index " + std::to_string(i));
        }
    }

    /// Column for S_ab; throws if absent.
    const std::vector<Complex>& element(int a, int b) const {
        for (std::size_t p = 0; p < pairs.size(); ++p)
            if (pairs[p] == std::make_pair(a, b)) return values[p];
        throw InvalidArgument("trace has no element S" + std::to_string(a) + std::to_string(b));
    }
};

}  // namespace wavechaos

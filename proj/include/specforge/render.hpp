#pragma once

#include <string>

#include "specforge/spectra.hpp"

namespace specforge::cli {

struct RenderOptions {
    std::string scale = "linear";    // linear | log
    std::string component = "abs";   // abs | real | imag
    bool center_zero = false;        // symmetric color range about zero
    std::string quadrant = "all";    // all | 1..4 | rephasing | nonrephasing
    bool invert_y = false;           // negate the f2 axis for display
    bool diagonal_line = true;
    bool antidiagonal_line = true;
    std::size_t max_pixels = 900;    // per axis before striding
};

// Binary PPM heatmap with tick labels in eV. f1 runs along x, f2 along y
// (upward). Throws ValidationError on all-NaN data.
void render_heatmap(const spectra::Spectrum2D& spectrum,
                    const std::string& path, const RenderOptions& opts = {});

}  // namespace specforge::cli

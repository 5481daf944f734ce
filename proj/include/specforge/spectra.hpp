#pragma once

#include <array>
#include <string>
#include <vector>

#include "specforge/response.hpp"

namespace specforge::spectra {

using algebra::cplx;

enum class Part { Real, Imag, Complex };

Part parse_part(const std::string& name);  // "real" | "imag" | "complex"
std::string part_name(Part p);

// Frequency axes are energies in eV: bin spacing 2*pi*hbar/(N*dt) with
// dt = 1/r fs, zero-centered (fftshift order, ascending).
struct Spectrum2D {
    std::vector<cplx> values;  // row-major, f1 rows x f2 cols
    std::vector<double> f1_ev, f2_ev;
    std::array<double, 4> extent{};  // f1_min, f1_max, f2_min, f2_max
    Part part = Part::Complex;
    std::string source;  // provenance (diagram DSL, delays, quadrant, ...)

    cplx& at(std::size_t i, std::size_t j) { return values[i * f2_ev.size() + j]; }
    const cplx& at(std::size_t i, std::size_t j) const {
        return values[i * f2_ev.size() + j];
    }
};

// Unnormalized forward 2D DFT of the selected part of the grid, both axes
// zero-centered; axis1 (t1) maps to f1 (rows), axis2 to f2. zero_pad
// multiplies each time axis length before transforming (1 = none).
Spectrum2D transform2d(const response::ResponseGrid& grid, Part part,
                       std::size_t zero_pad = 1);

enum class QuadrantKind { rephasing, nonrephasing };

// nonrephasing: f1 >= 0, f2 >= 0 block. rephasing: f1 >= 0, f2 <= 0 block
// with the f2 axis negated and re-sorted ascending for display.
Spectrum2D select_quadrant(const Spectrum2D& s, QuadrantKind kind);

// Half-open quadrant split (1: f1>=0,f2>=0; 2: f1<0,f2>=0; 3: f1<0,f2<0;
// 4: f1>=0,f2<0). The four views tile the centered spectrum exactly.
Spectrum2D quadrant(const Spectrum2D& s, int q);

struct Spectrum1D {
    std::vector<cplx> values;
    std::vector<double> f_ev;
};

Spectrum1D transform1d(const std::vector<cplx>& series, std::size_t r,
                       std::size_t zero_pad = 1);

// Weighted elementwise sum over spectra with identical axes (weights
// default to 1).
Spectrum2D combine(const std::vector<Spectrum2D>& spectra,
                   const std::vector<double>& weights = {});

// Directory format: metadata.txt, real.csv, imag.csv, f1.csv, f2.csv.
void save_spectrum(const std::string& dir, const Spectrum2D& s);
Spectrum2D load_spectrum(const std::string& dir);

}  // namespace specforge::spectra

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spectronet/errors.hpp"

namespace spectronet {

/// One laser-shot measurement: a strictly increasing wavelength grid (nm)
/// with one intensity per bin, plus provenance.
struct Spectrum {
    std::vector<double> wavelengths;
    std::vector<double> intensities;
    std::string target_id;
    int location_id = 0;
    int shot_index = 0;

    std::size_t size() const { return wavelengths.size(); }

    /// Throws UsageError if the shape invariants do not hold, DataError if
    /// any intensity is non-finite.
    void validate() const;
};

/// A set of closed wavelength intervals [lo, hi] to drop from spectra.
/// Bands may overlap; an empty list is the identity mask.
struct WavelengthMask {
    struct Band {
        double lo = 0.0;
        double hi = 0.0;
    };
    std::vector<Band> bands;

    bool contains(double wavelength) const;
};

/// The five default ignore bands (nm) for ChemCam-style LIBS grids.
WavelengthMask default_mask();

/// Parses a mask file: one "lo,hi" pair per line, '#' comments allowed.
WavelengthMask load_mask(const std::string& path);

/// Removes every bin whose wavelength falls inside any band. Throws
/// DataError if nothing survives.
Spectrum apply_mask(const Spectrum& s, const WavelengthMask& m);

/// Arithmetic per-bin mean over a group of spectra sharing grid, target and
/// location. shot_index of the result is the smallest in the group.
Spectrum shot_average(const std::vector<Spectrum>& group);

} // namespace spectronet

#include "spectronet/spectrum.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace spectronet {

void Spectrum::validate() const {
    if (wavelengths.empty()) {
        throw UsageError("spectrum must contain at least one bin");
    }
    if (wavelengths.size() != intensities.size()) {
        throw UsageError("wavelength/intensity length mismatch: " +
                         std::to_string(wavelengths.size()) + " vs " +
                         std::to_string(intensities.size()));
    }
    for (std::size_t i = 1; i < wavelengths.size(); ++i) {
        if (!(wavelengths[i] > wavelengths[i - 1])) {
            throw DataError("wavelength grid not strictly increasing at bin " +
                            std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < intensities.size(); ++i) {
        if (!std::isfinite(intensities[i])) {
            throw DataError("non-finite intensity at bin " + std::to_string(i) +
                            " of sample '" + target_id + "'");
        }
    }
}

bool WavelengthMask::contains(double wavelength) const {
    for (const Band& b : bands) {
        if (wavelength >= b.lo && wavelength <= b.hi) return true;
    }
    return false;
}

WavelengthMask default_mask() {
    return WavelengthMask{{{240.811, 246.635},
                           {338.457, 340.797},
                           {382.13, 387.859},
                           {473.184, 492.427},
                           {849.0, 905.574}}};
}

WavelengthMask load_mask(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open mask file '" + path + "'");
    WavelengthMask m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        double lo, hi;
        char comma;
        if (!(ss >> lo >> comma >> hi) || comma != ',') {
            throw DataError("mask file '" + path + "' line " +
                            std::to_string(lineno) + ": expected 'lo,hi'");
        }
        if (lo > hi) {
            throw DataError("mask file '" + path + "' line " +
                            std::to_string(lineno) + ": lo > hi");
        }
        m.bands.push_back({lo, hi});
    }
    return m;
}

Spectrum apply_mask(const Spectrum& s, const WavelengthMask& m) {
    Spectrum out;
    out.target_id = s.target_id;
    out.location_id = s.location_id;
    out.shot_index = s.shot_index;
    out.wavelengths.reserve(s.size());
    out.intensities.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!m.contains(s.wavelengths[i])) {
            out.wavelengths.push_back(s.wavelengths[i]);
            out.intensities.push_back(s.intensities[i]);
        }
    }
    if (out.wavelengths.empty()) {
        throw DataError("mask removed every bin of sample '" + s.target_id +
                        "'");
    }
    return out;
}

Spectrum shot_average(const std::vector<Spectrum>& group) {
    if (group.empty()) {
        throw UsageError("shot_average: empty group");
    }
    const Spectrum& first = group.front();
    Spectrum out;
    out.wavelengths = first.wavelengths;
    out.target_id = first.target_id;
    out.location_id = first.location_id;
    out.shot_index = first.shot_index;
    out.intensities.assign(first.size(), 0.0);
    for (const Spectrum& s : group) {
        if (s.target_id != first.target_id ||
            s.location_id != first.location_id) {
            throw UsageError(
                "shot_average: group mixes targets or locations ('" +
                first.target_id + "'/" + std::to_string(first.location_id) +
                " vs '" + s.target_id + "'/" + std::to_string(s.location_id) +
                ")");
        }
        if (s.wavelengths != first.wavelengths) {
            throw UsageError("shot_average: group members disagree on grid");
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            out.intensities[i] += s.intensities[i];
        }
        out.shot_index = std::min(out.shot_index, s.shot_index);
    }
    const double inv = 1.0 / static_cast<double>(group.size());
    for (double& v : out.intensities) v *= inv;
    return out;
}

} // namespace spectronet

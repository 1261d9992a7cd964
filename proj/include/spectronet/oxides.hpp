#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "spectronet/errors.hpp"

namespace spectronet {

/// The eight major-element oxides, in the fixed column order used by
/// manifests, calibration labels and result files.
enum class Oxide : int {
    SiO2 = 0,
    TiO2,
    Al2O3,
    FeOT,
    MgO,
    CaO,
    Na2O,
    K2O,
};

inline constexpr std::size_t kNumOxides = 8;

inline constexpr std::array<const char*, kNumOxides> kOxideNames = {
    "SiO2", "TiO2", "Al2O3", "FeOT", "MgO", "CaO", "Na2O", "K2O"};

using OxideVector = std::array<double, kNumOxides>;

inline const char* oxide_name(Oxide o) {
    return kOxideNames[static_cast<std::size_t>(o)];
}

inline Oxide oxide_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kNumOxides; ++i) {
        if (name == kOxideNames[i]) return static_cast<Oxide>(i);
    }
    throw UsageError("unknown oxide '" + name +
                     "' (expected one of SiO2, TiO2, Al2O3, FeOT, MgO, CaO, "
                     "Na2O, K2O)");
}

} // namespace spectronet

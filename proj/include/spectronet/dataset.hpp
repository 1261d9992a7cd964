#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spectronet/oxides.hpp"
#include "spectronet/spectrum.hpp"

namespace spectronet {

/// A collection of spectra on one shared wavelength grid, with optional
/// per-target oxide wt% labels.
struct Dataset {
    std::vector<Spectrum> samples;
    std::vector<std::string> sample_ids; // parallel to samples
    std::map<std::string, OxideVector> labels;
    std::vector<double> grid;

    std::size_t size() const { return samples.size(); }

    /// Sorted unique target ids.
    std::vector<std::string> target_ids() const;

    /// Sample indices grouped by target id.
    std::map<std::string, std::vector<std::size_t>> by_target() const;

    /// Checks the shared-grid and label-coverage invariants.
    void validate() const;
};

enum class DatasetFormat { csv };

/// Loads spectra.csv + manifest.csv from a directory.
Dataset load_dataset(const std::string& dir,
                     DatasetFormat format = DatasetFormat::csv);

/// Loads an explicit spectra-table / manifest file pair.
Dataset load_dataset_files(const std::string& spectra_csv,
                           const std::string& manifest_csv);

/// Writes spectra.csv + manifest.csv into a directory.
void save_dataset(const Dataset& d, const std::string& dir);

/// Writes one spectra-table CSV (header "wavelength,<id>,..."; one row per
/// bin, %.17g floats so values round-trip exactly).
void write_spectra_table(const std::string& path,
                         const std::vector<double>& grid,
                         const std::vector<std::string>& ids,
                         const std::vector<const std::vector<double>*>& columns);

/// Reads one spectra-table CSV back as (grid, ids, columns).
struct SpectraTable {
    std::vector<double> grid;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> columns; // one per id
};
SpectraTable read_spectra_table(const std::string& path);

/// Applies a wavelength mask to every sample (and the grid) of a dataset.
Dataset apply_mask(const Dataset& d, const WavelengthMask& m);

/// Shot-averages each (target, location) group; results are sorted by
/// (target_id, location_id).
std::vector<Spectrum> group_shot_averages(const Dataset& d);

/// Throws DataError if the two grids differ.
void require_same_grid(const std::vector<double>& a,
                       const std::vector<double>& b,
                       const std::string& context);

} // namespace spectronet

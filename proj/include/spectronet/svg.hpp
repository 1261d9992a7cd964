#pragma once

#include <string>
#include <vector>

namespace spectronet::svg {

/// Spectrum overlay: raw trace in blue, cleaned trace in orange, with axes
/// and a small legend.
void write_overlay(const std::string& path,
                   const std::vector<double>& wavelengths,
                   const std::vector<double>& raw,
                   const std::vector<double>& cleaned,
                   const std::string& title);

/// Prediction-vs-truth scatter with the ideal 1:1 reference line; the RMSE
/// is printed in the legend.
void write_scatter(const std::string& path, const std::vector<double>& truth,
                   const std::vector<double>& prediction,
                   const std::string& title, double rmse_value);

} // namespace spectronet::svg

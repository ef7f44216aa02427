#pragma once

#include <filesystem>
#include <string>

#include "demest/dem.hpp"

namespace demest {

/// Parses the DEM text format: one instruction per line.
///   error(<rate>) D<i> D<j> ...    hyperedge (L<k> targets parse, ignored)
///   detector(<x>, <y>, <t>) D<i>   detector coordinates, last value = round
///   # ...                          comment
/// Duplicate detector sets merge by the inclusion-exclusion rule. Other
/// instructions (repeat, shift_detectors, ...) are rejected. The detector
/// count is inferred from the largest index referenced unless a positive
/// `detector_count` is given.
Dem parse_dem(const std::string& text, uint32_t detector_count = 0);

Dem read_dem_file(const std::filesystem::path& path, uint32_t detector_count = 0);

/// Deterministic writer: edges sorted by the integer view of their detector
/// sets, rates printed with 17 significant digits so that
/// parse_dem(write_dem(d)) reproduces d exactly.
std::string write_dem(const Dem& dem);

void write_dem_file(const std::filesystem::path& path, const Dem& dem);

}  // namespace demest

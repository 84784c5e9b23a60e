#pragma once

// TOML scenario/scan files. Tables and keys mirror the C++ field names:
//
//   [cell]          length_cm temperature_c total_density_cm3 fraction_87
//                   fraction_85 buffer_gas_torr
//   [gain_control]  power_mw waist_mm raman_offset_mhz hwhm_mhz
//   [loss_control]  single_photon_detuning_ghz (same keys in both)
//   [scenario]      pumping_efficiency kappa hyperfine_87_ghz hyperfine_85_ghz
//   [scan]          freq_start_mhz freq_stop_mhz n_points
//   [pinhole]       enabled radius_um distance_m
//   [noise]         relative_sigma seed
//   [probe]         wavelength_nm waist_mm waist_location_m
//   [grid]          size pitch_um
//
// Every key is optional and defaults to ScanConfig{}; an omitted kappa means
// default_kappa(). Unknown tables or keys and wrongly typed values raise
// ConfigParse naming the source line and the dotted field.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "vapor/experiment.hpp"

namespace vapor {

ScanConfig parse_config(std::string_view text, std::string_view source_name = "<config>");
ScanConfig load_config(const std::filesystem::path& path);

// Complete document listing every field; parse_config reads it back to an
// identical ScanConfig.
void write_config(std::ostream& os, const ScanConfig& config);
std::string config_to_string(const ScanConfig& config);

}  // namespace vapor

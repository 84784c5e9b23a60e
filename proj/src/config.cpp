#include "vapor/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "vapor/error.hpp"
#include "vapor/text.hpp"

namespace vapor {
namespace {

std::string where(std::string_view source, const toml::source_region& region) {
  std::string s(source);
  if (region.begin.line) s += ":" + std::to_string(region.begin.line);
  return s;
}

[[noreturn]] void parse_fail(std::string_view source, const toml::node& node,
                             const std::string& field, const std::string& what) {
  fail(ErrorCode::ConfigParse, where(source, node.source()) + ": " + field + ": " + what);
}

double read_double(std::string_view source, const toml::node& node, const std::string& field) {
  if (const auto v = node.value_exact<double>()) return *v;
  if (const auto v = node.value_exact<std::int64_t>()) return static_cast<double>(*v);
  parse_fail(source, node, field, "expected a number");
}

std::int64_t read_int(std::string_view source, const toml::node& node, const std::string& field,
                      std::int64_t min_value) {
  const auto v = node.value_exact<std::int64_t>();
  if (!v) parse_fail(source, node, field, "expected an integer");
  if (*v < min_value) {
    parse_fail(source, node, field, "must be >= " + std::to_string(min_value));
  }
  return *v;
}

bool read_bool(std::string_view source, const toml::node& node, const std::string& field) {
  const auto v = node.value_exact<bool>();
  if (!v) parse_fail(source, node, field, "expected true or false");
  return *v;
}

using Setter = std::function<void(const toml::node&, const std::string&)>;
using KeyTable = std::map<std::string, Setter, std::less<>>;

KeyTable control_keys(std::string_view src, ControlLaserConfig& c) {
  auto num = [src](double& dst) {
    return [src, &dst](const toml::node& n, const std::string& f) { dst = read_double(src, n, f); };
  };
  return {{"power_mw", num(c.power_mw)},
          {"waist_mm", num(c.waist_mm)},
          {"raman_offset_mhz", num(c.raman_offset_mhz)},
          {"hwhm_mhz", num(c.hwhm_mhz)},
          {"single_photon_detuning_ghz", num(c.single_photon_detuning_ghz)}};
}

std::string toml_double(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

ScanConfig parse_config(std::string_view text, std::string_view source) {
  toml::table doc;
  try {
    doc = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    fail(ErrorCode::ConfigParse,
         where(source, e.source()) + ": " + std::string(e.description()));
  }

  ScanConfig c;
  auto num = [source](double& dst) {
    return [source, &dst](const toml::node& n, const std::string& f) {
      dst = read_double(source, n, f);
    };
  };
  VaporCellConfig& cell = c.scenario.cell;
  std::map<std::string, KeyTable, std::less<>> tables;
  tables["cell"] = {{"length_cm", num(cell.length_cm)},
                    {"temperature_c", num(cell.temperature_c)},
                    {"total_density_cm3", num(cell.total_density_cm3)},
                    {"fraction_87", num(cell.fraction_87)},
                    {"fraction_85", num(cell.fraction_85)},
                    {"buffer_gas_torr", num(cell.buffer_gas_torr)}};
  tables["gain_control"] = control_keys(source, c.scenario.gain_control);
  tables["loss_control"] = control_keys(source, c.scenario.loss_control);
  tables["scenario"] = {{"pumping_efficiency", num(c.scenario.pumping_efficiency)},
                        {"kappa", num(c.scenario.kappa)},
                        {"hyperfine_87_ghz", num(c.scenario.hyperfine_87_ghz)},
                        {"hyperfine_85_ghz", num(c.scenario.hyperfine_85_ghz)}};
  tables["scan"] = {{"freq_start_mhz", num(c.freq_start_mhz)},
                    {"freq_stop_mhz", num(c.freq_stop_mhz)},
                    {"n_points", [&](const toml::node& n, const std::string& f) {
                       c.n_points = static_cast<std::size_t>(read_int(source, n, f, 2));
                     }}};
  tables["pinhole"] = {{"enabled", [&](const toml::node& n, const std::string& f) {
                          c.pinhole.enabled = read_bool(source, n, f);
                        }},
                       {"radius_um", num(c.pinhole.radius_um)},
                       {"distance_m", num(c.pinhole.distance_m)}};
  tables["noise"] = {{"relative_sigma", num(c.noise.relative_sigma)},
                     {"seed", [&](const toml::node& n, const std::string& f) {
                        c.noise.seed = static_cast<std::uint64_t>(read_int(source, n, f, 0));
                      }}};
  tables["probe"] = {{"wavelength_nm", num(c.probe.wavelength_nm)},
                     {"waist_mm", num(c.probe.waist_mm)},
                     {"waist_location_m", num(c.probe.waist_location_m)}};
  tables["grid"] = {{"size", [&](const toml::node& n, const std::string& f) {
                       c.grid.size = static_cast<std::size_t>(read_int(source, n, f, 4));
                     }},
                    {"pitch_um", num(c.grid.pitch_um)}};

  for (const auto& [key, node] : doc) {
    const std::string name(key.str());
    const auto table_it = tables.find(name);
    if (table_it == tables.end()) parse_fail(source, node, name, "unknown table");
    const auto* table = node.as_table();
    if (!table) parse_fail(source, node, name, "expected a table");
    for (const auto& [sub_key, value] : *table) {
      const std::string field = name + "." + std::string(sub_key.str());
      const auto setter = table_it->second.find(sub_key.str());
      if (setter == table_it->second.end()) parse_fail(source, value, field, "unknown key");
      setter->second(value, field);
    }
  }

  try {
    validate(c);
  } catch (const Error& e) {
    fail(ErrorCode::ConfigParse, std::string(source) + ": " + e.what());
  }
  return c;
}

ScanConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigParse, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

void write_config(std::ostream& os, const ScanConfig& c) {
  auto d = [](double v) { return toml_double(v); };
  const auto& s = c.scenario;
  os << "[cell]\n"
     << "length_cm = " << d(s.cell.length_cm) << '\n'
     << "temperature_c = " << d(s.cell.temperature_c) << '\n'
     << "total_density_cm3 = " << d(s.cell.total_density_cm3) << '\n'
     << "fraction_87 = " << d(s.cell.fraction_87) << '\n'
     << "fraction_85 = " << d(s.cell.fraction_85) << '\n'
     << "buffer_gas_torr = " << d(s.cell.buffer_gas_torr) << '\n';
  for (const auto& [name, ctl] : {std::pair{"gain_control", &s.gain_control},
                                  std::pair{"loss_control", &s.loss_control}}) {
    os << "\n[" << name << "]\n"
       << "power_mw = " << d(ctl->power_mw) << '\n'
       << "waist_mm = " << d(ctl->waist_mm) << '\n'
       << "raman_offset_mhz = " << d(ctl->raman_offset_mhz) << '\n'
       << "hwhm_mhz = " << d(ctl->hwhm_mhz) << '\n'
       << "single_photon_detuning_ghz = " << d(ctl->single_photon_detuning_ghz) << '\n';
  }
  os << "\n[scenario]\n"
     << "pumping_efficiency = " << d(s.pumping_efficiency) << '\n'
     << "kappa = " << d(s.kappa) << '\n'
     << "hyperfine_87_ghz = " << d(s.hyperfine_87_ghz) << '\n'
     << "hyperfine_85_ghz = " << d(s.hyperfine_85_ghz) << '\n'
     << "\n[scan]\n"
     << "freq_start_mhz = " << d(c.freq_start_mhz) << '\n'
     << "freq_stop_mhz = " << d(c.freq_stop_mhz) << '\n'
     << "n_points = " << c.n_points << '\n'
     << "\n[pinhole]\n"
     << "enabled = " << (c.pinhole.enabled ? "true" : "false") << '\n'
     << "radius_um = " << d(c.pinhole.radius_um) << '\n'
     << "distance_m = " << d(c.pinhole.distance_m) << '\n'
     << "\n[noise]\n"
     << "relative_sigma = " << d(c.noise.relative_sigma) << '\n'
     << "seed = " << c.noise.seed << '\n'
     << "\n[probe]\n"
     << "wavelength_nm = " << d(c.probe.wavelength_nm) << '\n'
     << "waist_mm = " << d(c.probe.waist_mm) << '\n'
     << "waist_location_m = " << d(c.probe.waist_location_m) << '\n'
     << "\n[grid]\n"
     << "size = " << c.grid.size << '\n'
     << "pitch_um = " << d(c.grid.pitch_um) << '\n';
}

std::string config_to_string(const ScanConfig& config) {
  std::ostringstream os;
  write_config(os, config);
  return os.str();
}

}  // namespace vapor

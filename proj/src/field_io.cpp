#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "vapor/beam.hpp"
#include "vapor/error.hpp"
#include "vapor/text.hpp"

namespace vapor {
namespace {

constexpr std::array<char, 4> kMagic{'V', 'P', 'F', 'D'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T value) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  os.write(bytes.data(), bytes.size());
}

template <class T>
T get(std::istream& is) {
  std::array<char, sizeof(T)> bytes{};
  if (!is.read(bytes.data(), bytes.size())) {
    fail(ErrorCode::DataFormat, "field file truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  return std::bit_cast<T>(bytes);
}

}  // namespace

void write_field_binary(std::ostream& os, const ComplexField& field) {
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kVersion);
  put<std::uint64_t>(os, field.size());
  put<double>(os, field.pitch_um());
  put<double>(os, field.wavelength_nm());
  for (const auto& a : field.samples()) {
    put<double>(os, a.real());
    put<double>(os, a.imag());
  }
}

ComplexField read_field_binary(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    fail(ErrorCode::DataFormat, "not a field file (bad magic)");
  }
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) {
    fail(ErrorCode::DataFormat, "unsupported field file version " + std::to_string(version));
  }
  const auto n = get<std::uint64_t>(is);
  const double pitch = get<double>(is);
  const double wavelength = get<double>(is);
  if (n == 0 || n > (1u << 16)) fail(ErrorCode::DataFormat, "field size out of range");
  ComplexField field(static_cast<std::size_t>(n), pitch, wavelength);
  for (auto& a : field.samples()) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    a = {re, im};
  }
  return field;
}

void write_intensity_slice_csv(std::ostream& os, const ComplexField& field) {
  os << "x_um,intensity\n";
  const std::size_t row = field.size() / 2;
  for (std::size_t c = 0; c < field.size(); ++c) {
    const double x_um = (static_cast<double>(c) - static_cast<double>(row)) * field.pitch_um();
    os << format_double(x_um) << ','
       << format_double(std::norm(field.at(row, c))) << '\n';
  }
}

}  // namespace vapor

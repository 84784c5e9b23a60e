#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace vapor::fft {

enum class Direction { Forward, Inverse };

// Unnormalized in-place transforms (FFTW sign convention: forward uses
// exp(-2*pi*i*jk/n)). Plans are cached per shape and are safe to execute
// from several threads at once.
void transform_1d(std::span<std::complex<double>> data, Direction dir);
void transform_2d(std::span<std::complex<double>> data, std::size_t n,
                  Direction dir);

}  // namespace vapor::fft

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace oxicopd {

/// Real-input DFT, bins 0..n/2. Safe to call from several threads.
std::vector<std::complex<double>> real_dft(std::span<const double> x);

} // namespace oxicopd

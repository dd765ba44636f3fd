#pragma once

#include "gncm/hsi_data.hpp"

#include <cstdint>

namespace gncm {

/// Pure-pixel endmember search by iterated maximal projection. The first pick
/// is the pixel farthest from the image mean; each later pick maximizes
/// |f' y_n| for a random direction f orthogonal to the spectra already chosen.
/// Returns columns of Y clipped to (1e-6, 1 - 1e-6). Ties go to the lowest
/// pixel index. Throws DomainError when N < R or the data are rank deficient.
EndmemberLibrary extract_endmembers(const HsiCube& cube, int R, std::uint64_t seed);

/// Same, returning the selected pixel indices instead of spectra.
std::vector<int> select_pure_pixels(const Eigen::MatrixXd& Y, int R, std::uint64_t seed);

} // namespace gncm

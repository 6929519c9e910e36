#pragma once

#include "hdsurr/common.hpp"

#include <vector>

namespace hdsurr {

/// Rows of a tall N×r matrix spanning a quasi-dominant r×r submatrix Â, i.e.
/// every entry of A·Â⁻¹ is bounded by 1 + delta in magnitude.
///
/// Starts from Gaussian elimination with row pivoting and then swaps rows
/// greedily. Equal magnitudes resolve to the lowest row index. A rank-deficient
/// input throws PivotError carrying `mode`.
std::vector<int> maxvol(const Matrix& a, double delta = 1e-2, int mode = -1,
                        int max_iterations = 200);

}  // namespace hdsurr

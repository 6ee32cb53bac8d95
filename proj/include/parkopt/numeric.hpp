#pragma once

// Small dense numeric kernels shared by the estimation and oracle code.

#include <cstddef>
#include <functional>
#include <vector>

#include "parkopt/errors.hpp"

namespace parkopt {

// Cholesky solve of the SPD system G x = b. Returns false when a pivot
// drops below `pivot_tol` times the largest diagonal entry.
bool cholesky_solve(std::vector<std::vector<double>> g, std::vector<double> b,
                    std::vector<double>* x, double pivot_tol = 1e-12);

// Golden-section minimisation of a unimodal f on [lo, hi]; the iteration
// count is fixed so results are bit-reproducible.
double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, int iters = 200);

} // namespace parkopt

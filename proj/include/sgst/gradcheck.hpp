#pragma once

#include <functional>
#include <vector>

#include "sgst/autodiff.hpp"

namespace sgst {

// Compares reverse-mode gradients against central differences in f64.
// `f` rebuilds the scalar graph from leaf nodes each call so perturbed
// evaluations see fresh forward values.
//
// Returns max over checked coordinates of
//   |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|).
//
// When max_coords_per_input > 0, a deterministic subsample of coordinates is
// checked per input (full sweep otherwise).
double grad_check(const std::function<NodePtr<double>(const std::vector<NodePtr<double>>&)>& f,
                  std::vector<Tensor<double>> inputs, double epsilon = 1e-4, int max_coords_per_input = 0,
                  uint64_t coord_seed = 0);

}  // namespace sgst

#pragma once

#include <vector>

#include "pbd/nn/gradient.hpp"

namespace pbd::nn {

/// Compares analytic gradients against central finite differences.
///
/// Returns the maximum over checked parameters of
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-12). Only stages
/// whose parameters are not frozen are checked; when they hold more than
/// `max_parameters` values an evenly strided subset is used.
double finite_diff_check(std::vector<Network> chain, const Batch& batch, const LossSpec& loss, double step = 1e-5,
                         std::size_t max_parameters = 2000);

}  // namespace pbd::nn

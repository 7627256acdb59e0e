#pragma once

#include "ifv/model.hpp"

namespace ifv {

// e^{A} by scaling and squaring with the diagonal [13/13] Pade approximant.
Mat matrix_exponential(const Mat& a);

}  // namespace ifv

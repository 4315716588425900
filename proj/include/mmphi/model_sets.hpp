#pragma once

#include <cstdint>
#include <vector>

#include "mmphi/glm.hpp"
#include "mmphi/sampling.hpp"

namespace mmphi {

/// One model per coefficient vector, sharing link and basis.
std::vector<ModelSpec> models_from_coefficients(LinkKind link, const Basis& basis, const std::vector<Vec>& betas);

/// Six-model space over x in R^2: probit and logit crossed with the bases
/// (1, x1, x2), (1, x1, x2, x1x2) and the full quadratic. The quadratic
/// coefficients are standard normal; each lower-order coefficient is drawn
/// N(b, (0.5 b)^2) around its quadratic counterpart. Order: probit g1..g3,
/// then logit g1..g3.
std::vector<ModelSpec> nested_polynomial_models(std::uint64_t seed);

}  // namespace mmphi

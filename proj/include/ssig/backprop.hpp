#pragma once

#include <cstddef>

#include "ssig/model.hpp"
#include "ssig/objective.hpp"
#include "ssig/random.hpp"

namespace ssig {

struct LossAndGradients {
  LossBreakdown loss;
  Gradients grads;
};

// Minibatch negative ELBO averaged over `samples` Monte Carlo draws, and its
// pathwise gradients with respect to (mu, rho, phi).
//
// Hard mode is straight-through: the reported loss uses the binary masks,
// while the gradients are those of the same draw with every hard mask
// replaced by its coupled relaxation z_soft = sigmoid(eta / tau). In soft
// mode the reported loss is exactly the differentiated one.
LossAndGradients loss_and_gradients(const VariationalState& state, const BatchView& batch,
                                    std::size_t n_total, std::size_t samples, double tau,
                                    RandomStream& stream, MaskMode mask_mode);

}  // namespace ssig

// Copyright 2026 the truce-ts authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>

#include "truce/numerics/ops.hpp"

// Exact-enumeration variational objective over a small discrete program
// space. All inputs are [1 x |Z|] rows of log-probabilities or caption
// log-likelihoods, one column per program.
namespace truce::inline TRUCE_PRECISION::train {

using num::Var;

struct ElboTerms {
  Var elbo;   // recon - kl
  Var recon;  // sum_z q(z) log p(y | z)
  Var kl;     // sum_z q(z) (log q(z) - log p(z | x))
};

ElboTerms elbo(Var log_prior, Var caption_lp, Var log_q);

// log sum_z p(z | x) p(y | z), by log-sum-exp.
Var marginal_loglik(Var log_prior, Var caption_lp);

// -log q(z* | y).
Var aux_loss(Var log_q, int z_star);

// The same quantities in double precision from the network outputs, with each
// log-distribution renormalized in double. Used for the identity checks.
struct VariationalCheck {
  double kl = 0.0;
  double elbo = 0.0;
  double marginal = 0.0;
  double elbo_at_posterior = 0.0;  // ELBO with q set to the exact posterior
  double prior_sum = 0.0;
};
VariationalCheck check_identities(std::span<const double> log_prior, std::span<const double> caption_lp,
                                  std::span<const double> log_q);

}  // namespace truce::inline TRUCE_PRECISION::train

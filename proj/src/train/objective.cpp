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

#include "truce/train/objective.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::train {

namespace {

void check_rows(const char* what, Var a, Var b) {
  if (a.rows() != 1 || a.shape() != b.shape())
    throw ShapeError(std::string(what) + ": expected matching [1 x Z] rows, got " + num::shape_str(a.shape()) +
                     " and " + num::shape_str(b.shape()));
}

double logsumexp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

std::vector<double> renormalized(std::span<const double> logp) {
  const double z = logsumexp(logp);
  std::vector<double> out(logp.size());
  for (std::size_t i = 0; i < logp.size(); ++i) out[i] = logp[i] - z;
  return out;
}

}  // namespace

ElboTerms elbo(Var log_prior, Var caption_lp, Var log_q) {
  check_rows("elbo", log_prior, caption_lp);
  check_rows("elbo", log_prior, log_q);
  Var q = num::exp(log_q);
  Var recon = num::sum_all(num::mul(q, caption_lp));
  Var kl = num::sum_all(num::mul(q, num::sub(log_q, log_prior)));
  return {num::sub(recon, kl), recon, kl};
}

Var marginal_loglik(Var log_prior, Var caption_lp) {
  check_rows("marginal_loglik", log_prior, caption_lp);
  return num::logsumexp_rows(num::add(log_prior, caption_lp));
}

Var aux_loss(Var log_q, int z_star) {
  if (z_star < 0 || z_star >= log_q.cols()) throw ArgumentError("aux_loss: program id out of range");
  return num::scale(num::pick_cols(log_q, {z_star}), -1);
}

VariationalCheck check_identities(std::span<const double> log_prior, std::span<const double> caption_lp,
                                  std::span<const double> log_q) {
  const std::size_t Z = log_prior.size();
  if (caption_lp.size() != Z || log_q.size() != Z) throw ShapeError("check_identities: length mismatch");
  const auto lp = renormalized(log_prior);
  const auto lq = renormalized(log_q);
  VariationalCheck c;
  std::vector<double> joint(Z);
  for (std::size_t z = 0; z < Z; ++z) {
    const double q = std::exp(lq[z]);
    c.prior_sum += std::exp(lp[z]);
    c.kl += q * (lq[z] - lp[z]);
    c.elbo += q * caption_lp[z];
    joint[z] = lp[z] + caption_lp[z];
  }
  c.elbo -= c.kl;
  c.marginal = logsumexp(joint);
  // exact posterior: q*(z) = p(z | x) p(y | z) / p(y | x)
  for (std::size_t z = 0; z < Z; ++z) {
    const double lpost = joint[z] - c.marginal;
    const double q = std::exp(lpost);
    c.elbo_at_posterior += q * (caption_lp[z] - (lpost - lp[z]));
  }
  return c;
}

}  // namespace truce::inline TRUCE_PRECISION::train

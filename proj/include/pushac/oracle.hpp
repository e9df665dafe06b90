#pragma once

// Exact ground truth on small instances, by enumeration and dense linear
// solves: stationary distribution, averaged return, relative Q (Poisson
// equation), local advantages, exact policy gradients, and the TD fixed
// point the critic converges to.

#include <iosfwd>
#include <string>

#include "pushac/env.hpp"
#include "pushac/policy.hpp"
#include "pushac/types.hpp"

namespace pushac::oracle {

// State-action kernel P((s,a) -> (s',a')) = P(s'|s,a) pi(s',a').
Matrix state_action_chain(const env::NetworkedMDP& mdp, const Matrix& policy_table);

// Unique left eigenvector of an irreducible row-stochastic matrix for
// eigenvalue 1, normalized to a distribution. Rejects reducible chains.
Vector stationary_distribution(const Matrix& chain);

double averaged_return(const env::NetworkedMDP& mdp, const Matrix& policy_table);

// Relative action values: solves (I - P_sa) Q = Rbar - J 1 with the
// normalization sum_{s,a} d(s) pi(s,a) Q(s,a) = 0.
Vector relative_q(const env::NetworkedMDP& mdp, const Matrix& policy_table);

struct PolicyEvaluation {
    Vector d_theta;      // stationary distribution over states
    double J = 0.0;      // averaged return
    Vector q;            // relative Q over (s,a), zero mean under D
    Vector d_sa;         // diagonal of D: d(s) pi(s,a)
    Vector omega_theta;  // TD fixed point (empty when no features given)
};

PolicyEvaluation evaluate(const env::NetworkedMDP& mdp, const policy::PolicyParams& params,
                          const policy::PolicyFeatures& feats,
                          const env::FeatureMap* features = nullptr);

// A^i(s,a) = Q(s,a) - sum_{b} pi^i(b|s) Q(s, (b, a^{-i})), from the exact Q.
double local_advantage_exact(const env::NetworkedMDP& mdp, const PolicyEvaluation& eval,
                             const policy::PolicyParams& params,
                             const policy::PolicyFeatures& feats, int agent, int s,
                             int joint_action);

// Exact gradient of the averaged return with respect to agent i's block,
// enumerated over the stationary state-action distribution.
Vector policy_gradient(const env::NetworkedMDP& mdp, const policy::PolicyParams& params,
                       const policy::PolicyFeatures& feats, int agent);

// Solves Phi^T D (I - P_sa) Phi w = Phi^T D (Rbar - J 1) and verifies the
// fixed-point residual; rejects singular systems as a feature failure.
Vector td_fixed_point(const env::NetworkedMDP& mdp, const policy::PolicyParams& params,
                      const policy::PolicyFeatures& feats, const env::FeatureMap& features);

// Text report for the CLI: J, d_theta, omega_theta, per-agent gradients.
void write_report(const env::NetworkedMDP& mdp, const policy::PolicyParams& params,
                  const policy::PolicyFeatures& feats, const env::FeatureMap* features,
                  std::ostream& os);

}  // namespace pushac::oracle

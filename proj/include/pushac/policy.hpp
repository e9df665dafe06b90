#pragma once

// Per-agent softmax policies over box-constrained parameters. Policy features
// x(s, a_i) are separate from the critic's state-action features; the default
// is a one-hot table, which makes each agent's softmax exactly tabular.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pushac/env.hpp"
#include "pushac/types.hpp"

namespace pushac::policy {

// Per-agent feature table: row s*|A_i| + a_i of x[i] is x(s, a_i).
struct PolicyFeatures {
    std::vector<Matrix> x;

    int n_agents() const { return static_cast<int>(x.size()); }
    int param_dim(int agent) const { return static_cast<int>(x[agent].cols()); }

    static PolicyFeatures one_hot(int n_states, const std::vector<int>& action_sizes);
};

struct PolicyParams {
    std::vector<Vector> theta;  // one block per agent, each inside the box
    double theta_max = 10.0;

    static PolicyParams zeros(const PolicyFeatures& feats, double theta_max = 10.0);
    static PolicyParams random(const PolicyFeatures& feats, double scale, std::uint64_t seed,
                               double theta_max = 10.0);
};

// Softmax over logits theta_i . x(s, b) for b in agent i's action set.
// Strictly positive, sums to 1.
Vector action_probs(const Vector& theta_i, const Matrix& x_i, int n_actions, int s);

double joint_prob(const PolicyParams& params, const PolicyFeatures& feats,
                  const std::vector<int>& action_sizes, int s, const std::vector<int>& action);

// Softmax score: x(s, a_i) - sum_b pi(b|s) x(s, b).
Vector score(const Vector& theta_i, const Matrix& x_i, int n_actions, int s, int a_i);

// Coordinate-wise clamp onto [-theta_max, theta_max]; the Euclidean
// projection for box sets.
Vector project(const Vector& theta_i, double theta_max);

// Inverse-CDF draw from a probability vector.
int sample_index(const Vector& probs, Rng& rng);

// S x |A| table of joint-action probabilities under the product policy.
Matrix joint_table(const PolicyParams& params, const PolicyFeatures& feats,
                   const env::NetworkedMDP& mdp);

// Flat decimal vectors per agent with an index header.
void save_params(const PolicyParams& params, std::ostream& os);
PolicyParams load_params(std::istream& is);
void save_params_file(const PolicyParams& params, const std::string& path);
PolicyParams load_params_file(const std::string& path);

}  // namespace pushac::policy

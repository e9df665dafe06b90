#pragma once

// Finite networked multi-agent MDPs: a global state shared by N agents, one
// action set per agent, a joint transition kernel, per-agent reward tables,
// and the linear feature map used by the critic.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pushac/types.hpp"

namespace pushac::env {

class NetworkedMDP {
public:
    NetworkedMDP(int n_states, std::vector<int> action_sizes, Matrix transition,
                 Matrix rewards);

    int n_states() const { return n_states_; }
    int n_agents() const { return static_cast<int>(action_sizes_.size()); }
    const std::vector<int>& action_sizes() const { return action_sizes_; }
    int n_joint_actions() const { return n_joint_; }
    int n_state_actions() const { return n_states_ * n_joint_; }
    double r_max() const { return r_max_; }

    // Row s*|A|+a of the transition matrix is P(. | s, a).
    const Matrix& transition() const { return transition_; }
    // rewards(i, s*|A|+a) = R^i(s, a).
    const Matrix& rewards() const { return rewards_; }

    int sa_index(int s, int a) const { return s * n_joint_ + a; }
    int joint_index(const std::vector<int>& action) const;
    std::vector<int> decode_joint(int a) const;
    // Joint action with agent i's component replaced.
    int replace_component(int a, int agent, int ai) const;

    double reward(int agent, int s, int a) const { return rewards_(agent, sa_index(s, a)); }
    // R-bar(s,a), the team average.
    double mean_reward(int s, int a) const { return rewards_.col(sa_index(s, a)).mean(); }

private:
    int n_states_;
    std::vector<int> action_sizes_;
    int n_joint_;
    std::vector<int> strides_;  // mixed-radix strides for joint action encoding
    Matrix transition_;
    Matrix rewards_;
    double r_max_;
};

struct TransitionSample {
    int state = 0;
    std::vector<int> joint_action;
    int joint_action_index = 0;
    int next_state = 0;
    std::vector<double> rewards;  // per agent
};

// Random test-bed MDP: each (s,a) row has `branching` uniformly chosen
// successors with Dirichlet(1,...,1) probabilities; rewards i.i.d. uniform on
// [0, reward_scale]. Resampled until the uniform-policy chain is irreducible;
// if the chain is periodic, 0.01 self-transition mass is blended in.
NetworkedMDP generate_garnet(int n_states, const std::vector<int>& action_sizes,
                             int branching, double reward_scale, std::uint64_t seed);

// Rewards are the deterministic table values plus optional additive noise
// uniform on [-reward_noise, reward_noise].
TransitionSample step(const NetworkedMDP& mdp, int s, const std::vector<int>& action,
                      Rng& rng, double reward_noise = 0.0);

// P_policy(s'|s) = sum_a policy(s,a) P(s'|s,a); policy is S x |A| row stochastic.
Matrix induced_chain(const NetworkedMDP& mdp, const Matrix& policy);

// True iff the induced chain is irreducible and aperiodic, i.e. primitive:
// some boolean power with all entries positive, power bound |S|^2.
bool validate_ergodicity(const NetworkedMDP& mdp, const Matrix& policy);

// Irreducibility alone (strong connectivity of the positive-entry digraph).
bool chain_irreducible(const Matrix& chain);
bool chain_primitive(const Matrix& chain);

class FeatureMap {
public:
    FeatureMap(int n_states, int n_joint_actions, Matrix phi);

    int dim() const { return static_cast<int>(phi_.cols()); }
    const Matrix& phi() const { return phi_; }
    double max_abs_entry() const { return max_abs_; }
    Vector row(int s, int a) const { return phi_.row(s * n_joint_ + a); }
    int n_states() const { return n_states_; }
    int n_joint_actions() const { return n_joint_; }

private:
    int n_states_, n_joint_;
    Matrix phi_;  // (S*|A|) x K, full column rank, 1 not in column span
    double max_abs_;
};

// Random features in [-1, 1], resampled until Phi has full column rank and
// the least-squares residual of Phi u = 1 exceeds 1e-6.
FeatureMap generate_features(const NetworkedMDP& mdp, int dim, std::uint64_t seed);

// Structured text round-trip, 17 significant digits.
void save_mdp(const NetworkedMDP& mdp, std::ostream& os);
NetworkedMDP load_mdp(std::istream& is);
void save_mdp_file(const NetworkedMDP& mdp, const std::string& path);
NetworkedMDP load_mdp_file(const std::string& path);
void save_features(const FeatureMap& fm, std::ostream& os);
FeatureMap load_features(std::istream& is);
void save_features_file(const FeatureMap& fm, const std::string& path);
FeatureMap load_features_file(const std::string& path);

}  // namespace pushac::env

#pragma once

// The three training algorithms as seeded, deterministic simulation loops:
// entry-wise consensus over undirected graphs, full-vector push-sum over
// digraphs, and randomized entry-wise push-sum (two scalars per agent per
// round). Includes communication-cost accounting and conservation monitors.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pushac/critic.hpp"
#include "pushac/env.hpp"
#include "pushac/graph.hpp"
#include "pushac/policy.hpp"
#include "pushac/types.hpp"

namespace pushac::algo {

enum class Algorithm { consensus_entrywise, push_full, push_entrywise };

std::string algorithm_name(Algorithm a);
// Throws ValidationError naming the valid tags on an unknown string.
Algorithm parse_algorithm(const std::string& name);

struct RunConfig {
    Algorithm algorithm = Algorithm::push_entrywise;
    long T = 0;
    double c_omega = 1.0;
    double nu_omega = 0.65;
    double c_theta = 1.0;
    double nu_theta = 0.85;
    Matrix selection_probs;  // N x K, rows positive and summing to 1; empty = uniform
    bool freeze_actor = false;
    bool freeze_critic_learning = false;
    std::uint64_t seed = 0;
    long log_every = 100;
    double theta_max = 10.0;
    double theta_init_scale = 0.0;  // uniform[-s, s] initial policy parameters
    double init_omega_scale = 0.0;  // uniform[-s, s] initial critic numerators
    double reward_noise = 0.0;

    void validate(int n_agents, int feature_dim) const;
};

// beta_{w,t} = c_w / (t+1)^{nu_w}; beta_{theta,t} = c_theta / (t+1)^{nu_theta}.
double beta_omega(const RunConfig& cfg, long t);
double beta_theta(const RunConfig& cfg, long t);

struct MetricsRow {
    long t = 0;  // iterations completed
    double mu_mean = 0.0;
    double consensus_err = 0.0;  // max_i ||z^i - <omega>||_2
    double critic_err = 0.0;     // max_i ||z^i - omega_theta||_2 (NaN without oracle)
    double j_theta = 0.0;        // oracle J(theta_t) (NaN without oracle)
    long long scalars_per_agent = 0;  // cumulative transmissions
    double y_min = 0.0;
    double y_max = 0.0;
};

struct RunSummary {
    double y_min_observed = 0.0;  // the run's observed alpha
    double y_max_observed = 0.0;
    double max_y_sum_dev = 0.0;         // max_t max_k |sum_i y^{ik} - N|
    double max_conservation_dev = 0.0;  // per-round <omega> update identity residual
    double max_z_norm = 0.0;
    double max_omega_norm = 0.0;
    long long scalars_per_agent_total = 0;
    long long coordination_scalars_total = 0;  // consensus baseline only
};

struct RunResult {
    std::vector<MetricsRow> rows;
    std::vector<critic::CriticState> states;
    policy::PolicyParams theta;
    RunSummary summary;
};

// (s_t, a_t, r_{t+1}, s_{t+1}, a_{t+1}): everything one critic round consumes.
struct StepContext {
    int s = 0;
    int a_index = 0;
    int s_next = 0;
    int a_next_index = 0;
    const std::vector<double>* rewards = nullptr;
};

struct RoundOutput {
    long long scalars_per_agent = 0;
    Vector deltas;  // per-agent TD errors of this round
};

// Mean across agents per coordinate; input is N x K.
Vector network_average(const Matrix& stacked);
Vector network_average_omega(const std::vector<critic::CriticState>& states);

// One critic step of the entry-wise push-sum algorithm: mu update, local TD
// half-step, per-entry mixing of omega-tilde and y, ratio recompute. Each
// agent broadcasts two scalars.
RoundOutput critic_round_push_entrywise(std::vector<critic::CriticState>& states,
                                        const StepContext& ctx,
                                        const env::FeatureMap& features,
                                        const std::vector<Matrix>& weights, double beta_w,
                                        long t = 0);

// Full-vector push-sum round: K+1 scalars per agent.
RoundOutput critic_round_push_full(std::vector<critic::CriticState>& states,
                                   const StepContext& ctx, const env::FeatureMap& features,
                                   const Matrix& weights, double beta_w, long t = 0);

// Entry-wise consensus round for the undirected baseline: no y/z ratio,
// z mirrors omega. One scalar per agent plus coordination overhead, counted
// by the caller.
RoundOutput critic_round_consensus_entrywise(std::vector<critic::CriticState>& states,
                                             const StepContext& ctx,
                                             const env::FeatureMap& features,
                                             const std::vector<Matrix>& weights, double beta_w,
                                             long t = 0);

// Extra value scalars agents must send because an incident edge coordinated
// on an entry other than their own proposal.
long long coordination_overhead(const graph::DirectedGraph& g, const std::vector<int>& proposals,
                                const std::vector<int>& edge_entries);

// theta^i <- project(theta^i + beta * A^i * psi^i) for every agent.
void actor_step(policy::PolicyParams& theta, const policy::PolicyFeatures& feats,
                const std::vector<critic::CriticState>& states,
                const env::NetworkedMDP& mdp, const env::FeatureMap& features,
                const StepContext& ctx, double beta_t);

// Oracle attachment: evaluated at every logged iteration.
struct OraclePoint {
    double j = 0.0;
    Vector omega_theta;
};
using RunOracle = std::function<OraclePoint(const policy::PolicyParams&)>;

RunResult run(const RunConfig& cfg, const env::NetworkedMDP& mdp,
              const graph::DirectedGraph& g, const env::FeatureMap& features,
              const policy::PolicyFeatures& policy_feats, const policy::PolicyParams& theta0,
              const RunOracle* oracle = nullptr);

// Convenience overload: one-hot policy features, theta_0 drawn per config.
RunResult run(const RunConfig& cfg, const env::NetworkedMDP& mdp,
              const graph::DirectedGraph& g, const env::FeatureMap& features,
              const RunOracle* oracle = nullptr);

// Frozen-learning averaging benchmark: omega_0 uniform in [-1,1]^{N x K},
// pure mixing rounds, per-round max_i ||z^i - <omega_0>||_inf.
struct ConsensusBenchmark {
    Vector target;                 // <omega_0>
    std::vector<double> error;     // one entry per round
    RunSummary summary;
};
ConsensusBenchmark consensus_benchmark(const graph::DirectedGraph& g, int dim, long rounds,
                                       Algorithm algorithm, std::uint64_t seed,
                                       const Matrix* selection_probs = nullptr);

// Fixed-header CSV: t,mu_mean,consensus_err,critic_err,J_theta,
// scalars_per_agent,y_min,y_max. 17 significant digits.
void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& os);

}  // namespace pushac::algo

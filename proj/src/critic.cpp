#include "pushac/critic.hpp"

#include <string>

namespace pushac::critic {

std::vector<CriticState> make_states(int n_agents, int dim) {
    return std::vector<CriticState>(n_agents, CriticState(dim));
}

double local_advantage_sample(const Vector& z_i, const Vector& theta_i, const Matrix& x_i,
                              const env::NetworkedMDP& mdp, const env::FeatureMap& features,
                              int agent, int s, int joint_action) {
    const int n_actions = mdp.action_sizes()[agent];
    const Vector probs = policy::action_probs(theta_i, x_i, n_actions, s);
    double counterfactual = 0.0;
    for (int b = 0; b < n_actions; ++b) {
        const int a_b = mdp.replace_component(joint_action, agent, b);
        counterfactual += probs[b] * q_value(z_i, features.row(s, a_b));
    }
    return q_value(z_i, features.row(s, joint_action)) - counterfactual;
}

void check_y_positive(const Vector& y, long iteration) {
    if (y.minCoeff() < kMinPushWeight)
        throw NumericError("push-sum weight underflow at iteration " + std::to_string(iteration) +
                           " (y_min = " + std::to_string(y.minCoeff()) + ")");
}

}  // namespace pushac::critic

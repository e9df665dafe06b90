#pragma once

// One agent's learner variables and the scalar pieces of the critic update:
// linear Q estimate, TD error, sampled local advantage, long-run reward
// tracker.

#include <vector>

#include "pushac/env.hpp"
#include "pushac/policy.hpp"
#include "pushac/types.hpp"

namespace pushac::critic {

struct CriticState {
    double mu = 0.0;
    Vector omega;  // push-sum numerator
    Vector y;      // push-sum weights, strictly positive
    Vector z;      // omega / y, recomputed after every mixing round

    explicit CriticState(int dim)
        : omega(Vector::Zero(dim)), y(Vector::Ones(dim)), z(Vector::Zero(dim)) {}
};

std::vector<CriticState> make_states(int n_agents, int dim);

inline double q_value(const Vector& z, const Vector& phi_sa) {
    if (z.size() != phi_sa.size()) throw ValidationError("q_value: dimension mismatch");
    return z.dot(phi_sa);
}

inline double td_error(double r, double mu, double q_next, double q_cur) {
    return r - mu + q_next - q_cur;
}

// A^i = Q(s,a; z_i) - sum_b pi^i(b|s) Q(s, (b, a^{-i}); z_i).
double local_advantage_sample(const Vector& z_i, const Vector& theta_i, const Matrix& x_i,
                              const env::NetworkedMDP& mdp, const env::FeatureMap& features,
                              int agent, int s, int joint_action);

inline double mu_update(double mu, double r, double beta) {
    if (beta <= 0.0 || beta > 1.0) throw ValidationError("mu_update: beta must be in (0, 1]");
    return (1.0 - beta) * mu + beta * r;
}

// Aborts when any push-sum weight drops below this; excluded in theory for
// strongly connected graphs.
constexpr double kMinPushWeight = 1e-14;

void check_y_positive(const Vector& y, long iteration);

}  // namespace pushac::critic

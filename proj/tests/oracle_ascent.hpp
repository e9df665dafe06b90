#pragma once

// Projected gradient ascent on the exact averaged return, used as the
// reference optimum for the actor-improvement checks. Uses a doubling /
// backtracking step so softmax saturation (exponentially small gradients)
// still reaches the box face in a bounded number of iterations.

#include <cmath>

#include "pushac/oracle.hpp"
#include "pushac/policy.hpp"

namespace pushac::testing {

struct AscentResult {
    policy::PolicyParams theta;
    double j = 0.0;
    // ||project(theta + g) - theta|| with unit reference step: zero at a
    // projected stationary point, also on the box boundary.
    double stationarity = 0.0;
};

inline AscentResult gradient_ascent(const env::NetworkedMDP& mdp,
                                    const policy::PolicyFeatures& feats,
                                    policy::PolicyParams theta, int iters,
                                    double initial_step = 1.0) {
    auto j_of = [&](const policy::PolicyParams& p) {
        return oracle::averaged_return(mdp, policy::joint_table(p, feats, mdp));
    };
    AscentResult out{std::move(theta), 0.0, 0.0};
    out.j = j_of(out.theta);
    double step = initial_step;

    for (int it = 0; it < iters; ++it) {
        std::vector<Vector> grads(mdp.n_agents());
        double grad_norm2 = 0.0;
        for (int i = 0; i < mdp.n_agents(); ++i) {
            grads[i] = oracle::policy_gradient(mdp, out.theta, feats, i);
            grad_norm2 += grads[i].squaredNorm();
        }

        policy::PolicyParams trial = out.theta;
        double moved = 0.0;
        for (int i = 0; i < mdp.n_agents(); ++i) {
            trial.theta[i] =
                policy::project(out.theta.theta[i] + step * grads[i], out.theta.theta_max);
            moved += (trial.theta[i] - out.theta.theta[i]).squaredNorm();
        }
        const double j_trial = j_of(trial);
        if (j_trial >= out.j) {
            out.theta = std::move(trial);
            out.j = j_trial;
            step = std::min(step * 2.0, 1e9);
            if (std::sqrt(moved) < 1e-12 && grad_norm2 < 1e-20) break;
        } else {
            step *= 0.5;
            if (step < 1e-12) break;
        }
    }

    out.stationarity = 0.0;
    for (int i = 0; i < mdp.n_agents(); ++i) {
        const Vector g = oracle::policy_gradient(mdp, out.theta, feats, i);
        out.stationarity +=
            (policy::project(out.theta.theta[i] + g, out.theta.theta_max) -
             out.theta.theta[i])
                .squaredNorm();
    }
    out.stationarity = std::sqrt(out.stationarity);
    return out;
}

}  // namespace pushac::testing

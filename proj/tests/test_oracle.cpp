#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle_ascent.hpp"
#include "pushac/oracle.hpp"

using namespace pushac;
using namespace pushac::oracle;

namespace {

Matrix uniform_policy(const env::NetworkedMDP& mdp) {
    return Matrix::Constant(mdp.n_states(), mdp.n_joint_actions(),
                            1.0 / mdp.n_joint_actions());
}

env::NetworkedMDP constant_reward_mdp(double c, std::uint64_t seed) {
    const auto base = env::generate_garnet(4, {2, 2}, 3, 1.0, seed);
    Matrix rewards = Matrix::Constant(base.rewards().rows(), base.rewards().cols(), c);
    return env::NetworkedMDP(base.n_states(), base.action_sizes(), base.transition(),
                             rewards);
}

// Policy gradient through the global advantage A(s,a) = Q(s,a) - V(s); the
// independent route for the two-form identity.
Vector gradient_via_global_advantage(const env::NetworkedMDP& mdp,
                                     const policy::PolicyParams& params,
                                     const policy::PolicyFeatures& feats, int agent) {
    const PolicyEvaluation eval = evaluate(mdp, params, feats);
    const Matrix table = policy::joint_table(params, feats, mdp);
    Vector grad = Vector::Zero(feats.param_dim(agent));
    for (int s = 0; s < mdp.n_states(); ++s) {
        double v = 0.0;
        for (int a = 0; a < mdp.n_joint_actions(); ++a)
            v += table(s, a) * eval.q[mdp.sa_index(s, a)];
        for (int a = 0; a < mdp.n_joint_actions(); ++a) {
            const double weight = eval.d_sa[mdp.sa_index(s, a)];
            const int a_i = mdp.decode_joint(a)[agent];
            const Vector psi = policy::score(params.theta[agent], feats.x[agent],
                                             mdp.action_sizes()[agent], s, a_i);
            grad += weight * (eval.q[mdp.sa_index(s, a)] - v) * psi;
        }
    }
    return grad;
}

}  // namespace

TEST_CASE("stationary distribution") {
    SUBCASE("doubly stochastic chain is uniform") {
        Matrix p(3, 3);
        p << 0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5;
        const Vector d = stationary_distribution(p);
        for (int s = 0; s < 3; ++s) CHECK(d[s] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("two-state chain solved by hand") {
        Matrix p(2, 2);
        p << 0.9, 0.1, 0.5, 0.5;
        const Vector d = stationary_distribution(p);
        CHECK(d[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
        CHECK(d[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    }
    SUBCASE("fixed point of the chain") {
        const auto mdp = env::generate_garnet(6, {2, 2}, 3, 1.0, 5);
        const Matrix chain = env::induced_chain(mdp, uniform_policy(mdp));
        const Vector d = stationary_distribution(chain);
        CHECK((chain.transpose() * d - d).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(d.minCoeff() >= 0.0);
    }
    SUBCASE("reducible chain rejected") {
        CHECK_THROWS_AS(stationary_distribution(Matrix::Identity(3, 3)), ValidationError);
    }
}

TEST_CASE("averaged return") {
    SUBCASE("constant rewards give that constant") {
        const auto mdp = constant_reward_mdp(0.37, 3);
        CHECK(averaged_return(mdp, uniform_policy(mdp)) ==
              doctest::Approx(0.37).epsilon(1e-12));
    }
    SUBCASE("linear in the rewards") {
        const auto mdp = env::generate_garnet(4, {2, 2}, 3, 1.0, 9);
        const double j = averaged_return(mdp, uniform_policy(mdp));
        env::NetworkedMDP scaled(mdp.n_states(), mdp.action_sizes(), mdp.transition(),
                                 3.5 * mdp.rewards());
        CHECK(averaged_return(scaled, uniform_policy(mdp)) ==
              doctest::Approx(3.5 * j).epsilon(1e-12));
    }
    SUBCASE("matches a long simulated trajectory") {
        const auto mdp = env::generate_garnet(4, {2, 2}, 3, 1.0, 13);
        const auto feats = policy::PolicyFeatures::one_hot(4, mdp.action_sizes());
        const auto params = policy::PolicyParams::random(feats, 0.8, 7);
        const Matrix table = policy::joint_table(params, feats, mdp);
        const double j = averaged_return(mdp, table);

        Rng rng(99);
        int s = 0;
        double total = 0.0;
        const long steps = 1000000;
        std::vector<int> action(2);
        for (long t = 0; t < steps; ++t) {
            for (int i = 0; i < 2; ++i) {
                const Vector probs = policy::action_probs(params.theta[i], feats.x[i],
                                                          mdp.action_sizes()[i], s);
                action[i] = policy::sample_index(probs, rng);
            }
            const auto sample = env::step(mdp, s, action, rng);
            total += (sample.rewards[0] + sample.rewards[1]) / 2.0;
            s = sample.next_state;
        }
        CHECK(std::abs(total / steps - j) < 1e-3);
    }
}

TEST_CASE("relative Q") {
    SUBCASE("constant rewards give identically zero Q") {
        const auto mdp = constant_reward_mdp(1.1, 21);
        const Vector q = relative_q(mdp, uniform_policy(mdp));
        CHECK(q.cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("state values satisfy the state-level fixed point") {
        const auto mdp = env::generate_garnet(5, {2, 2}, 3, 1.0, 23);
        const auto feats = policy::PolicyFeatures::one_hot(5, mdp.action_sizes());
        const auto params = policy::PolicyParams::random(feats, 0.6, 11);
        const Matrix table = policy::joint_table(params, feats, mdp);
        const Vector q = relative_q(mdp, table);
        const double j = averaged_return(mdp, table);

        // V(s) = sum_a pi Q; V = Rbar_s - J + P V must close
        Vector v = Vector::Zero(5);
        Vector r_s = Vector::Zero(5);
        for (int s = 0; s < 5; ++s) {
            for (int a = 0; a < mdp.n_joint_actions(); ++a) {
                v[s] += table(s, a) * q[mdp.sa_index(s, a)];
                r_s[s] += table(s, a) * mdp.mean_reward(s, a);
            }
        }
        const Matrix chain = env::induced_chain(mdp, table);
        const Vector residual = v - (r_s.array() - j).matrix() - chain * v;
        CHECK(residual.cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("adding a reward constant shifts J but not Q") {
        const auto mdp = env::generate_garnet(4, {2, 2}, 3, 1.0, 29);
        const Matrix table = uniform_policy(mdp);
        const Vector q = relative_q(mdp, table);
        const double j = averaged_return(mdp, table);
        env::NetworkedMDP shifted(
            mdp.n_states(), mdp.action_sizes(), mdp.transition(),
            mdp.rewards() + Matrix::Constant(mdp.rewards().rows(), mdp.rewards().cols(), 2.5));
        CHECK(averaged_return(shifted, table) == doctest::Approx(j + 2.5).epsilon(1e-10));
        CHECK((relative_q(shifted, table) - q).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("exact local advantage") {
    const auto mdp = env::generate_garnet(4, {2, 3}, 3, 1.0, 31);
    const auto feats = policy::PolicyFeatures::one_hot(4, mdp.action_sizes());
    const auto params = policy::PolicyParams::random(feats, 0.9, 17);
    const auto eval = evaluate(mdp, params, feats);

    SUBCASE("advantages center to zero under the agent's policy") {
        for (int agent = 0; agent < 2; ++agent) {
            for (int s = 0; s < 4; ++s) {
                const Vector probs = policy::action_probs(
                    params.theta[agent], feats.x[agent], mdp.action_sizes()[agent], s);
                double mean = 0.0;
                for (int b = 0; b < mdp.action_sizes()[agent]; ++b)
                    mean += probs[b] * local_advantage_exact(
                                           mdp, eval, params, feats, agent, s,
                                           mdp.replace_component(0, agent, b));
                CHECK(std::abs(mean) < 1e-12);
            }
        }
    }

    SUBCASE("single-agent local advantage is the global advantage") {
        const auto solo = env::generate_garnet(4, {3}, 3, 1.0, 37);
        const auto sfeats = policy::PolicyFeatures::one_hot(4, solo.action_sizes());
        const auto sparams = policy::PolicyParams::random(sfeats, 0.8, 19);
        const auto seval = evaluate(solo, sparams, sfeats);
        const Matrix table = policy::joint_table(sparams, sfeats, solo);
        for (int s = 0; s < 4; ++s) {
            double v = 0.0;
            for (int a = 0; a < 3; ++a) v += table(s, a) * seval.q[solo.sa_index(s, a)];
            for (int a = 0; a < 3; ++a) {
                const double global = seval.q[solo.sa_index(s, a)] - v;
                CHECK(local_advantage_exact(solo, seval, sparams, sfeats, 0, s, a) ==
                      doctest::Approx(global).epsilon(1e-10));
            }
        }
    }

    SUBCASE("single-action agent has zero advantage") {
        const auto solo = env::generate_garnet(3, {1, 2}, 2, 1.0, 41);
        const auto sfeats = policy::PolicyFeatures::one_hot(3, solo.action_sizes());
        const auto sparams = policy::PolicyParams::zeros(sfeats);
        const auto seval = evaluate(solo, sparams, sfeats);
        for (int a = 0; a < solo.n_joint_actions(); ++a)
            CHECK(local_advantage_exact(solo, seval, sparams, sfeats, 0, 1, a) ==
                  doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("policy gradient") {
    SUBCASE("local-advantage and global-advantage forms agree") {
        for (int trial = 0; trial < 5; ++trial) {
            const int n_agents = 1 + trial % 3;
            std::vector<int> sizes(n_agents, 2);
            const auto mdp =
                env::generate_garnet(3 + trial, sizes, 2, 1.0, 100 + trial);
            const auto feats =
                policy::PolicyFeatures::one_hot(mdp.n_states(), mdp.action_sizes());
            const auto params = policy::PolicyParams::random(feats, 0.7, 50 + trial);
            for (int i = 0; i < n_agents; ++i) {
                const Vector local = policy_gradient(mdp, params, feats, i);
                const Vector global = gradient_via_global_advantage(mdp, params, feats, i);
                CHECK((local - global).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }

    SUBCASE("matches central finite differences of the averaged return") {
        const auto mdp = env::generate_garnet(4, {2, 2}, 3, 1.0, 61);
        const auto feats = policy::PolicyFeatures::one_hot(4, mdp.action_sizes());
        auto params = policy::PolicyParams::random(feats, 0.5, 23);
        const double h = 1e-5;
        for (int agent = 0; agent < 2; ++agent) {
            const Vector grad = policy_gradient(mdp, params, feats, agent);
            Vector fd(grad.size());
            for (long c = 0; c < grad.size(); ++c) {
                auto up = params, down = params;
                up.theta[agent][c] += h;
                down.theta[agent][c] -= h;
                const double j_up =
                    averaged_return(mdp, policy::joint_table(up, feats, mdp));
                const double j_down =
                    averaged_return(mdp, policy::joint_table(down, feats, mdp));
                fd[c] = (j_up - j_down) / (2.0 * h);
            }
            CHECK((grad - fd).norm() / std::max(1e-12, grad.norm()) < 1e-5);
        }
    }

    SUBCASE("gradient is exactly zero when rewards are constant") {
        const auto mdp = constant_reward_mdp(0.9, 67);
        const auto feats = policy::PolicyFeatures::one_hot(4, mdp.action_sizes());
        const auto params = policy::PolicyParams::random(feats, 0.8, 29);
        for (int i = 0; i < 2; ++i)
            CHECK(policy_gradient(mdp, params, feats, i).cwiseAbs().maxCoeff() < 1e-8);
    }

    SUBCASE("projected ascent converges to a stationary point") {
        const auto mdp = env::generate_garnet(3, {2, 2}, 2, 1.0, 71);
        const auto feats = policy::PolicyFeatures::one_hot(3, mdp.action_sizes());
        const auto start = policy::PolicyParams::random(feats, 0.3, 31);
        const auto result = testing::gradient_ascent(mdp, feats, start, 3000);
        // the projected move under a unit step vanishes at a maximizer, also
        // on the box boundary
        CHECK(result.stationarity < 1e-8);
        CHECK(result.j >= averaged_return(mdp, policy::joint_table(start, feats, mdp)));
    }
}

TEST_CASE("TD fixed point") {
    const auto mdp = env::generate_garnet(4, {2, 2}, 3, 1.0, 83);
    const auto feats = policy::PolicyFeatures::one_hot(4, mdp.action_sizes());
    const auto params = policy::PolicyParams::random(feats, 0.6, 37);

    SUBCASE("near-tabular features recover Q up to a constant shift") {
        // identity features minus the last column: kernel direction is 1
        const int n = mdp.n_state_actions();
        Matrix phi = Matrix::Identity(n, n).leftCols(n - 1);
        const env::FeatureMap features(4, mdp.n_joint_actions(), phi);
        const Vector omega = td_fixed_point(mdp, params, feats, features);
        const Vector q = relative_q(mdp, policy::joint_table(params, feats, mdp));
        const Vector diff = phi * omega - q;
        const double mean = diff.mean();
        CHECK((diff.array() - mean).abs().maxCoeff() < 1e-9);
    }

    SUBCASE("constant rewards give the zero fixed point") {
        const auto cmdp = constant_reward_mdp(0.55, 91);
        const auto cfeats = policy::PolicyFeatures::one_hot(4, cmdp.action_sizes());
        const auto cparams = policy::PolicyParams::random(cfeats, 0.5, 41);
        const auto features = env::generate_features(cmdp, 5, 43);
        const Vector omega = td_fixed_point(cmdp, cparams, cfeats, features);
        CHECK(omega.cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("equilibrium pair (J, omega) zeroes the projected drift") {
        const auto features = env::generate_features(mdp, 5, 47);
        const Vector omega = td_fixed_point(mdp, params, feats, features);
        const auto eval = evaluate(mdp, params, feats);
        const Matrix table = policy::joint_table(params, feats, mdp);
        const Matrix p_sa = state_action_chain(mdp, table);
        const int n = mdp.n_state_actions();

        Vector rbar(n);
        for (int s = 0; s < 4; ++s)
            for (int a = 0; a < mdp.n_joint_actions(); ++a)
                rbar[mdp.sa_index(s, a)] = mdp.mean_reward(s, a);

        // mu drift: -<mu> + J = 0 at <mu> = J; omega drift restricted to the
        // feature residual
        const Vector drift =
            features.phi().transpose() * eval.d_sa.asDiagonal() *
            (rbar - Vector::Constant(n, eval.J) + (p_sa - Matrix::Identity(n, n)) *
                                                      features.phi() * omega);
        CHECK(drift.cwiseAbs().maxCoeff() < 1e-10);
    }

    SUBCASE("rank-breaking features are rejected") {
        // constant feature column makes Phi^T D (I-P) Phi singular
        const int n = mdp.n_state_actions();
        Matrix phi(n, 2);
        for (long r = 0; r < n; ++r) {
            phi(r, 0) = (r % 2 == 0) ? 0.5 : -0.5;
            phi(r, 1) = 0.25;  // constant column: (I-P) Phi kills it
        }
        // constructing the FeatureMap itself rejects this (ones in span)
        CHECK_THROWS_AS(env::FeatureMap(4, mdp.n_joint_actions(), phi), ValidationError);
    }
}

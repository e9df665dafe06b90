#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "pushac/env.hpp"
#include "pushac/policy.hpp"

using namespace pushac;
using namespace pushac::env;

namespace {

std::string mdp_to_string(const NetworkedMDP& mdp) {
    std::stringstream ss;
    save_mdp(mdp, ss);
    return ss.str();
}

Matrix uniform_policy(const NetworkedMDP& mdp) {
    return Matrix::Constant(mdp.n_states(), mdp.n_joint_actions(),
                            1.0 / mdp.n_joint_actions());
}

}  // namespace

TEST_CASE("joint action encoding round-trips") {
    NetworkedMDP mdp = generate_garnet(3, {2, 3, 2}, 2, 1.0, 4);
    CHECK(mdp.n_joint_actions() == 12);
    for (int a = 0; a < mdp.n_joint_actions(); ++a) {
        const auto parts = mdp.decode_joint(a);
        CHECK(mdp.joint_index(parts) == a);
    }
    // replacing a component re-encodes just that agent
    const auto parts = mdp.decode_joint(7);
    for (int b = 0; b < 3; ++b) {
        auto expect = parts;
        expect[1] = b;
        CHECK(mdp.replace_component(7, 1, b) == mdp.joint_index(expect));
    }
}

TEST_CASE("garnet generation") {
    SUBCASE("single state forces the trivial kernel") {
        NetworkedMDP mdp = generate_garnet(1, {2, 2}, 1, 1.0, 1);
        CHECK(mdp.transition().rows() == 4);
        for (long r = 0; r < 4; ++r) CHECK(mdp.transition()(r, 0) == doctest::Approx(1.0));
    }
    SUBCASE("full branching gives strictly positive rows") {
        NetworkedMDP mdp = generate_garnet(4, {2}, 4, 1.0, 2);
        CHECK(mdp.transition().minCoeff() > 0.0);
        CHECK(validate_ergodicity(mdp, uniform_policy(mdp)));
    }
    SUBCASE("fixed seed reproduces the MDP byte for byte") {
        NetworkedMDP a = generate_garnet(5, {2, 2, 2}, 3, 2.0, 42);
        NetworkedMDP b = generate_garnet(5, {2, 2, 2}, 3, 2.0, 42);
        CHECK(mdp_to_string(a) == mdp_to_string(b));
        NetworkedMDP c = generate_garnet(5, {2, 2, 2}, 3, 2.0, 43);
        CHECK(mdp_to_string(a) != mdp_to_string(c));
    }
    SUBCASE("rewards live in [0, scale] and r_max matches") {
        NetworkedMDP mdp = generate_garnet(4, {2, 2}, 2, 3.0, 7);
        CHECK(mdp.rewards().minCoeff() >= 0.0);
        CHECK(mdp.rewards().maxCoeff() <= 3.0);
        CHECK(mdp.r_max() == doctest::Approx(mdp.rewards().maxCoeff()));
    }
    SUBCASE("infeasible sizes rejected") {
        CHECK_THROWS_AS(generate_garnet(3, {2}, 4, 1.0, 1), ValidationError);
        CHECK_THROWS_AS(generate_garnet(3, {2}, 0, 1.0, 1), ValidationError);
        CHECK_THROWS_AS(generate_garnet(3, {2}, 2, -1.0, 1), ValidationError);
    }
}

TEST_CASE("step sampling") {
    NetworkedMDP mdp = generate_garnet(4, {2, 2}, 2, 1.0, 11);
    Rng rng(5);

    SUBCASE("deterministic row always lands on its successor") {
        Matrix transition(2, 2);
        transition << 0.0, 1.0, 1.0, 0.0;
        Matrix rewards(1, 2);
        rewards << 0.25, 0.75;
        NetworkedMDP det(2, {1}, transition, rewards);
        for (int trial = 0; trial < 50; ++trial)
            CHECK(step(det, 0, {0}, rng).next_state == 1);
    }

    SUBCASE("rewards equal the table lookup exactly") {
        const auto sample = step(mdp, 2, {1, 0}, rng);
        for (int i = 0; i < 2; ++i)
            CHECK(sample.rewards[i] == mdp.reward(i, 2, sample.joint_action_index));
    }

    SUBCASE("uniform row frequencies match within 3 sigma") {
        Matrix t4 = Matrix::Constant(4, 4, 0.25);
        Matrix r4 = Matrix::Zero(1, 4);
        NetworkedMDP uni(4, {1}, t4, r4);
        const int n_draws = 100000;
        std::vector<int> counts(4, 0);
        for (int d = 0; d < n_draws; ++d) counts[step(uni, 0, {0}, rng).next_state]++;
        // binomial: sigma = sqrt(n p (1-p))
        const double sigma = std::sqrt(n_draws * 0.25 * 0.75);
        for (int sp = 0; sp < 4; ++sp)
            CHECK(std::abs(counts[sp] - n_draws * 0.25) < 3.0 * sigma);
    }

    SUBCASE("out-of-range state rejected") {
        CHECK_THROWS_AS(step(mdp, 99, {0, 0}, rng), ValidationError);
    }
}

TEST_CASE("induced chain") {
    NetworkedMDP mdp = generate_garnet(4, {2, 2}, 3, 1.0, 3);

    SUBCASE("single joint action picks that slice") {
        for (int a = 0; a < mdp.n_joint_actions(); ++a) {
            Matrix policy = Matrix::Zero(4, mdp.n_joint_actions());
            policy.col(a).setOnes();
            const Matrix chain = induced_chain(mdp, policy);
            for (int s = 0; s < 4; ++s)
                CHECK((chain.row(s) - mdp.transition().row(mdp.sa_index(s, a)))
                          .cwiseAbs()
                          .maxCoeff() == 0.0);
        }
    }

    SUBCASE("uniform over two actions averages the slices") {
        Matrix policy = Matrix::Zero(4, mdp.n_joint_actions());
        policy.col(0).setConstant(0.5);
        policy.col(3).setConstant(0.5);
        const Matrix chain = induced_chain(mdp, policy);
        for (int s = 0; s < 4; ++s) {
            const Vector expect = 0.5 * (mdp.transition().row(mdp.sa_index(s, 0)) +
                                         mdp.transition().row(mdp.sa_index(s, 3)));
            CHECK((chain.row(s).transpose() - expect).cwiseAbs().maxCoeff() < 1e-15);
        }
    }

    SUBCASE("rows sum to one") {
        const Matrix chain = induced_chain(mdp, uniform_policy(mdp));
        for (int s = 0; s < 4; ++s) CHECK(std::abs(chain.row(s).sum() - 1.0) < 1e-12);
    }

    SUBCASE("affine in the policy") {
        Rng rng(8);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Matrix p1(4, mdp.n_joint_actions()), p2(4, mdp.n_joint_actions());
        for (int s = 0; s < 4; ++s) {
            for (int a = 0; a < mdp.n_joint_actions(); ++a) {
                p1(s, a) = u(rng);
                p2(s, a) = u(rng);
            }
            p1.row(s) /= p1.row(s).sum();
            p2.row(s) /= p2.row(s).sum();
        }
        const double lam = 0.3;
        const Matrix mixed = induced_chain(mdp, lam * p1 + (1 - lam) * p2);
        const Matrix expect =
            lam * induced_chain(mdp, p1) + (1 - lam) * induced_chain(mdp, p2);
        CHECK((mixed - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("ergodicity validation") {
    SUBCASE("identity chain is reducible") {
        Matrix t = Matrix::Identity(3, 3);
        NetworkedMDP mdp(3, {1}, t, Matrix::Zero(1, 3));
        CHECK_FALSE(validate_ergodicity(mdp, uniform_policy(mdp)));
        CHECK_FALSE(chain_irreducible(Matrix::Identity(3, 3)));
    }
    SUBCASE("full-support chain passes") {
        Matrix t = Matrix::Constant(3, 3, 1.0 / 3.0);
        NetworkedMDP mdp(3, {1}, t, Matrix::Zero(1, 3));
        CHECK(validate_ergodicity(mdp, uniform_policy(mdp)));
    }
    SUBCASE("2-cycle permutation chain is periodic") {
        Matrix t(2, 2);
        t << 0, 1, 1, 0;
        NetworkedMDP mdp(2, {1}, t, Matrix::Zero(1, 2));
        CHECK_FALSE(validate_ergodicity(mdp, uniform_policy(mdp)));
        CHECK(chain_irreducible(t));
        CHECK_FALSE(chain_primitive(t));
    }
}

// Ergodicity must hold not just for the uniform policy but across the policy
// class; sampled at 20 random softmax policies.
TEST_CASE("garnet instances stay ergodic under random softmax policies") {
    NetworkedMDP mdp = generate_garnet(5, {2, 2, 2}, 3, 1.0, 17);
    const auto feats = policy::PolicyFeatures::one_hot(5, mdp.action_sizes());
    CHECK(validate_ergodicity(mdp, uniform_policy(mdp)));
    for (int p = 0; p < 20; ++p) {
        const auto params = policy::PolicyParams::random(feats, 2.0, derive_seed(600, p));
        CHECK(validate_ergodicity(mdp, policy::joint_table(params, feats, mdp)));
    }
}

TEST_CASE("mean reward is the per-agent average") {
    NetworkedMDP mdp = generate_garnet(3, {2, 2}, 2, 1.0, 23);
    for (int s = 0; s < 3; ++s) {
        for (int a = 0; a < mdp.n_joint_actions(); ++a) {
            double sum = 0.0;
            for (int i = 0; i < 2; ++i) sum += mdp.reward(i, s, a);
            CHECK(mdp.mean_reward(s, a) == doctest::Approx(sum / 2.0).epsilon(1e-15));
        }
    }
}

TEST_CASE("feature generation") {
    NetworkedMDP mdp = generate_garnet(4, {2, 2}, 2, 1.0, 31);

    SUBCASE("near-tabular dimension keeps full rank") {
        const int dim = mdp.n_state_actions() - 1;
        const FeatureMap fm = generate_features(mdp, dim, 9);
        CHECK(fm.dim() == dim);
        Eigen::ColPivHouseholderQR<Matrix> qr(fm.phi());
        CHECK(qr.rank() == dim);
        CHECK(fm.max_abs_entry() <= 1.0);
    }

    SUBCASE("an explicit all-ones column is rejected") {
        Matrix phi = Matrix::Zero(mdp.n_state_actions(), 2);
        phi.col(0).setOnes();
        for (long r = 0; r < phi.rows(); ++r) phi(r, 1) = static_cast<double>(r % 3) - 1.0;
        CHECK_THROWS_AS(FeatureMap(4, mdp.n_joint_actions(), phi), ValidationError);
    }

    SUBCASE("rank-deficient features are rejected") {
        Matrix phi(mdp.n_state_actions(), 2);
        for (long r = 0; r < phi.rows(); ++r) {
            phi(r, 0) = 0.5 * static_cast<double>(r) - 2.0;
            phi(r, 1) = 2.0 * phi(r, 0);
        }
        CHECK_THROWS_AS(FeatureMap(4, mdp.n_joint_actions(), phi), ValidationError);
    }

    SUBCASE("fixed seed reproduces the table") {
        const FeatureMap a = generate_features(mdp, 3, 77);
        const FeatureMap b = generate_features(mdp, 3, 77);
        CHECK((a.phi() - b.phi()).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("K >= |S||A| rejected") {
        CHECK_THROWS_AS(generate_features(mdp, mdp.n_state_actions(), 1), ValidationError);
    }
}

TEST_CASE("mdp and feature serialization round-trip") {
    NetworkedMDP mdp = generate_garnet(4, {2, 3}, 3, 1.5, 51);
    std::stringstream ss;
    save_mdp(mdp, ss);
    const NetworkedMDP back = load_mdp(ss);
    CHECK(back.n_states() == mdp.n_states());
    CHECK(back.action_sizes() == mdp.action_sizes());
    CHECK((back.transition() - mdp.transition()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.rewards() - mdp.rewards()).cwiseAbs().maxCoeff() == 0.0);

    const FeatureMap fm = generate_features(mdp, 5, 4);
    std::stringstream fs;
    save_features(fm, fs);
    const FeatureMap fback = load_features(fs);
    CHECK((fback.phi() - fm.phi()).cwiseAbs().maxCoeff() == 0.0);
}

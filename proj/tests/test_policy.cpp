#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pushac/policy.hpp"

using namespace pushac;
using namespace pushac::policy;

namespace {

// log pi(a_i | s) evaluated directly, for the finite-difference score oracle.
double log_prob(const Vector& theta, const Matrix& x, int n_actions, int s, int a_i) {
    return std::log(action_probs(theta, x, n_actions, s)[a_i]);
}

}  // namespace

TEST_CASE("action probabilities") {
    const auto feats = PolicyFeatures::one_hot(3, {4});
    const Matrix& x = feats.x[0];

    SUBCASE("zero parameters give the uniform distribution") {
        const Vector probs = action_probs(Vector::Zero(12), x, 4, 1);
        for (int b = 0; b < 4; ++b) CHECK(probs[b] == doctest::Approx(0.25).epsilon(1e-12));
    }

    SUBCASE("binary softmax is the logistic function of the logit gap") {
        const auto feats2 = PolicyFeatures::one_hot(1, {2});
        Vector theta(2);
        theta << 1.3, -0.4;
        const double gap = theta[0] - theta[1];
        const Vector probs = action_probs(theta, feats2.x[0], 2, 0);
        CHECK(probs[0] == doctest::Approx(1.0 / (1.0 + std::exp(-gap))).epsilon(1e-12));
        CHECK(probs[0] + probs[1] == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("adding a constant to all logits changes nothing") {
        Rng rng(3);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        Vector theta(12);
        for (long c = 0; c < 12; ++c) theta[c] = u(rng);
        const Vector base = action_probs(theta, x, 4, 2);
        // one-hot features: shifting the block for state 2 shifts all logits
        Vector shifted = theta;
        for (int b = 0; b < 4; ++b) shifted[2 * 4 + b] += 5.0;
        const Vector after = action_probs(shifted, x, 4, 2);
        CHECK((base - after).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("probabilities stay strictly positive at the box corners") {
        Vector theta = Vector::Constant(12, 10.0);
        theta[0] = -10.0;
        const Vector probs = action_probs(theta, x, 4, 0);
        CHECK(probs.minCoeff() > 1e-300);
        CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("joint probabilities multiply per-agent factors") {
    const std::vector<int> sizes{2, 3};
    const auto feats = PolicyFeatures::one_hot(2, sizes);

    SUBCASE("single agent reduces to action_probs") {
        const auto solo = PolicyFeatures::one_hot(2, {3});
        auto params = PolicyParams::random(solo, 1.0, 5);
        const Vector probs = action_probs(params.theta[0], solo.x[0], 3, 1);
        for (int a = 0; a < 3; ++a)
            CHECK(joint_prob(params, solo, {3}, 1, {a}) == doctest::Approx(probs[a]));
    }

    SUBCASE("zero parameters give 1/|A|") {
        auto params = PolicyParams::zeros(feats);
        CHECK(joint_prob(params, feats, sizes, 0, {1, 2}) ==
              doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    }

    SUBCASE("joint distribution sums to one") {
        auto params = PolicyParams::random(feats, 1.5, 11);
        for (int s = 0; s < 2; ++s) {
            double total = 0.0;
            for (int a0 = 0; a0 < 2; ++a0)
                for (int a1 = 0; a1 < 3; ++a1)
                    total += joint_prob(params, feats, sizes, s, {a0, a1});
            CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("softmax score") {
    const auto feats = PolicyFeatures::one_hot(2, {3});
    auto params = PolicyParams::random(feats, 1.0, 7);
    const Matrix& x = feats.x[0];

    SUBCASE("uniform policy centers the feature rows") {
        const Vector psi = score(Vector::Zero(6), x, 3, 1, 2);
        Vector mean = Vector::Zero(6);
        for (int b = 0; b < 3; ++b) mean += x.row(1 * 3 + b).transpose() / 3.0;
        CHECK((psi - (x.row(1 * 3 + 2).transpose() - mean)).cwiseAbs().maxCoeff() < 1e-15);
    }

    SUBCASE("score has zero mean under the policy") {
        for (int s = 0; s < 2; ++s) {
            const Vector probs = action_probs(params.theta[0], x, 3, s);
            Vector mean = Vector::Zero(6);
            for (int b = 0; b < 3; ++b) mean += probs[b] * score(params.theta[0], x, 3, s, b);
            CHECK(mean.cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    SUBCASE("score matches central finite differences of log pi") {
        const double h = 1e-5;
        const Vector psi = score(params.theta[0], x, 3, 0, 1);
        for (long c = 0; c < 6; ++c) {
            Vector up = params.theta[0], down = params.theta[0];
            up[c] += h;
            down[c] -= h;
            const double fd =
                (log_prob(up, x, 3, 0, 1) - log_prob(down, x, 3, 0, 1)) / (2.0 * h);
            CHECK(psi[c] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("box projection") {
    SUBCASE("interior points unchanged") {
        Vector t(3);
        t << 0.5, -2.0, 9.9;
        CHECK((project(t, 10.0) - t).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("coordinates clamp to the box") {
        Vector t(3);
        t << 11.0, -15.0, 3.0;
        const Vector p = project(t, 10.0);
        CHECK(p[0] == 10.0);
        CHECK(p[1] == -10.0);
        CHECK(p[2] == 3.0);
    }
    SUBCASE("idempotent") {
        Rng rng(9);
        std::uniform_real_distribution<double> u(-30.0, 30.0);
        for (int trial = 0; trial < 50; ++trial) {
            Vector t(4);
            for (long c = 0; c < 4; ++c) t[c] = u(rng);
            const Vector once = project(t, 10.0);
            CHECK((project(once, 10.0) - once).cwiseAbs().maxCoeff() == 0.0);
            CHECK(once.cwiseAbs().maxCoeff() <= 10.0);
        }
    }
    SUBCASE("clamp is the nearest box point, against a grid search") {
        Rng rng(21);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        const double box = 1.0;
        for (int trial = 0; trial < 20; ++trial) {
            Vector t(2);
            t << u(rng), u(rng);
            const Vector p = project(t, box);
            const double best = (t - p).norm();
            // brute-force grid over the box
            for (double g0 = -box; g0 <= box; g0 += 0.01) {
                for (double g1 = -box; g1 <= box; g1 += 0.01) {
                    Vector q(2);
                    q << g0, g1;
                    CHECK((t - q).norm() >= best - 1e-9);
                }
            }
        }
    }
}

TEST_CASE("inverse-CDF sampling is deterministic and matches frequencies") {
    Vector probs(3);
    probs << 0.2, 0.5, 0.3;
    Rng a(123), b(123);
    for (int trial = 0; trial < 100; ++trial)
        CHECK(sample_index(probs, a) == sample_index(probs, b));

    Rng rng(77);
    std::vector<int> counts(3, 0);
    const int n = 100000;
    for (int d = 0; d < n; ++d) counts[sample_index(probs, rng)]++;
    for (int k = 0; k < 3; ++k) {
        const double sigma = std::sqrt(n * probs[k] * (1 - probs[k]));
        CHECK(std::abs(counts[k] - n * probs[k]) < 3.5 * sigma);
    }
}

TEST_CASE("params serialization round-trip") {
    const auto feats = PolicyFeatures::one_hot(3, {2, 4});
    auto params = PolicyParams::random(feats, 2.0, 31, 8.0);
    std::stringstream ss;
    save_params(params, ss);
    const auto back = load_params(ss);
    CHECK(back.theta_max == params.theta_max);
    REQUIRE(back.theta.size() == params.theta.size());
    for (std::size_t i = 0; i < back.theta.size(); ++i)
        CHECK((back.theta[i] - params.theta[i]).cwiseAbs().maxCoeff() == 0.0);
}

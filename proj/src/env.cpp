#include "pushac/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace pushac::env {

namespace {

constexpr double kRowSumTol = 1e-12;

void write_double(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

}  // namespace

NetworkedMDP::NetworkedMDP(int n_states, std::vector<int> action_sizes, Matrix transition,
                           Matrix rewards)
    : n_states_(n_states), action_sizes_(std::move(action_sizes)) {
    if (n_states_ < 1) throw ValidationError("mdp: n_states must be >= 1");
    if (action_sizes_.empty()) throw ValidationError("mdp: at least one agent required");
    n_joint_ = 1;
    strides_.assign(action_sizes_.size(), 0);
    // Last agent's action varies fastest.
    for (int i = static_cast<int>(action_sizes_.size()) - 1; i >= 0; --i) {
        if (action_sizes_[i] < 1) throw ValidationError("mdp: action sizes must be >= 1");
        strides_[i] = n_joint_;
        n_joint_ *= action_sizes_[i];
    }
    if (transition.rows() != n_states_ * n_joint_ || transition.cols() != n_states_)
        throw ValidationError("mdp: transition tensor has wrong shape");
    if (rewards.rows() != static_cast<long>(action_sizes_.size()) ||
        rewards.cols() != n_states_ * n_joint_)
        throw ValidationError("mdp: reward table has wrong shape");
    for (long r = 0; r < transition.rows(); ++r) {
        if (transition.row(r).minCoeff() < 0.0)
            throw ValidationError("mdp: negative transition probability");
        if (std::abs(transition.row(r).sum() - 1.0) > kRowSumTol)
            throw ValidationError("mdp: transition row does not sum to 1");
    }
    transition_ = std::move(transition);
    rewards_ = std::move(rewards);
    r_max_ = rewards_.cwiseAbs().maxCoeff();
    if (!std::isfinite(r_max_)) throw ValidationError("mdp: rewards must be finite");
}

int NetworkedMDP::joint_index(const std::vector<int>& action) const {
    if (action.size() != action_sizes_.size())
        throw ValidationError("mdp: joint action has wrong arity");
    int idx = 0;
    for (std::size_t i = 0; i < action.size(); ++i) {
        if (action[i] < 0 || action[i] >= action_sizes_[i])
            throw ValidationError("mdp: action component out of range");
        idx += strides_[i] * action[i];
    }
    return idx;
}

std::vector<int> NetworkedMDP::decode_joint(int a) const {
    std::vector<int> out(action_sizes_.size());
    for (std::size_t i = 0; i < action_sizes_.size(); ++i) {
        out[i] = (a / strides_[i]) % action_sizes_[i];
    }
    return out;
}

int NetworkedMDP::replace_component(int a, int agent, int ai) const {
    const int old = (a / strides_[agent]) % action_sizes_[agent];
    return a + (ai - old) * strides_[agent];
}

bool chain_irreducible(const Matrix& chain) {
    const int n = static_cast<int>(chain.rows());
    // Forward and backward reachability from node 0 over positive entries.
    for (bool reversed : {false, true}) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w = 0; w < n; ++w) {
                const double p = reversed ? chain(w, v) : chain(v, w);
                if (p > 0.0 && !seen[w]) {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        if (count != n) return false;
    }
    return true;
}

bool chain_primitive(const Matrix& chain) {
    const int n = static_cast<int>(chain.rows());
    using BoolMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
    BoolMat base = (chain.array() > 0.0);
    BoolMat power = base;
    const int bound = n * n;
    for (int m = 1; m <= bound; ++m) {
        if (power.all()) return true;
        BoolMat next = BoolMat::Constant(n, n, false);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (power(i, k))
                    for (int j = 0; j < n; ++j)
                        if (base(k, j)) next(i, j) = true;
        power = next;
    }
    return power.all();
}

Matrix induced_chain(const NetworkedMDP& mdp, const Matrix& policy) {
    if (policy.rows() != mdp.n_states() || policy.cols() != mdp.n_joint_actions())
        throw ValidationError("induced_chain: policy table has wrong shape");
    Matrix p = Matrix::Zero(mdp.n_states(), mdp.n_states());
    for (int s = 0; s < mdp.n_states(); ++s)
        for (int a = 0; a < mdp.n_joint_actions(); ++a)
            p.row(s) += policy(s, a) * mdp.transition().row(mdp.sa_index(s, a));
    return p;
}

bool validate_ergodicity(const NetworkedMDP& mdp, const Matrix& policy) {
    return chain_primitive(induced_chain(mdp, policy));
}

NetworkedMDP generate_garnet(int n_states, const std::vector<int>& action_sizes,
                             int branching, double reward_scale, std::uint64_t seed) {
    if (branching < 1 || branching > n_states)
        throw ValidationError("generate_garnet: branching must be in [1, n_states]");
    if (reward_scale <= 0.0) throw ValidationError("generate_garnet: reward_scale must be positive");
    int n_joint = 1;
    for (int sz : action_sizes) {
        if (sz < 1) throw ValidationError("generate_garnet: action sizes must be >= 1");
        n_joint *= sz;
    }

    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);

    for (int attempt = 0; attempt < 1000; ++attempt) {
        Matrix transition = Matrix::Zero(n_states * n_joint, n_states);
        std::vector<int> succ(n_states);
        std::iota(succ.begin(), succ.end(), 0);
        for (int s = 0; s < n_states; ++s) {
            for (int a = 0; a < n_joint; ++a) {
                std::shuffle(succ.begin(), succ.end(), rng);
                // Dirichlet(1,...,1) over the chosen successors.
                double total = 0.0;
                std::vector<double> mass(branching);
                for (int b = 0; b < branching; ++b) {
                    mass[b] = expo(rng);
                    total += mass[b];
                }
                for (int b = 0; b < branching; ++b)
                    transition(s * n_joint + a, succ[b]) = mass[b] / total;
            }
        }
        Matrix rewards(action_sizes.size(), n_states * n_joint);
        for (long i = 0; i < rewards.rows(); ++i)
            for (long c = 0; c < rewards.cols(); ++c) rewards(i, c) = reward_scale * unit(rng);

        NetworkedMDP mdp(n_states, action_sizes, std::move(transition), std::move(rewards));
        const Matrix uniform =
            Matrix::Constant(n_states, n_joint, 1.0 / static_cast<double>(n_joint));
        Matrix chain = induced_chain(mdp, uniform);
        if (!chain_irreducible(chain)) continue;
        if (!chain_primitive(chain)) {
            // Blend in self-transition mass to break periodicity.
            const double eps = 0.01;
            Matrix fixed = mdp.transition() * (1.0 - eps);
            for (int s = 0; s < n_states; ++s)
                for (int a = 0; a < n_joint; ++a) fixed(s * n_joint + a, s) += eps;
            mdp = NetworkedMDP(n_states, action_sizes, std::move(fixed), mdp.rewards());
            if (!validate_ergodicity(mdp, uniform)) continue;
        }
        return mdp;
    }
    throw ValidationError("generate_garnet: failed to generate an ergodic MDP");
}

TransitionSample step(const NetworkedMDP& mdp, int s, const std::vector<int>& action,
                      Rng& rng, double reward_noise) {
    if (s < 0 || s >= mdp.n_states()) throw ValidationError("step: state out of range");
    TransitionSample out;
    out.state = s;
    out.joint_action = action;
    out.joint_action_index = mdp.joint_index(action);

    const auto row = mdp.transition().row(mdp.sa_index(s, out.joint_action_index));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    int next = mdp.n_states() - 1;
    double acc = 0.0;
    for (int sp = 0; sp < mdp.n_states(); ++sp) {
        acc += row(sp);
        if (u < acc) {
            next = sp;
            break;
        }
    }
    out.next_state = next;

    out.rewards.resize(mdp.n_agents());
    for (int i = 0; i < mdp.n_agents(); ++i) {
        double r = mdp.reward(i, s, out.joint_action_index);
        if (reward_noise > 0.0) {
            std::uniform_real_distribution<double> noise(-reward_noise, reward_noise);
            r += noise(rng);
        }
        out.rewards[i] = r;
    }
    return out;
}

FeatureMap::FeatureMap(int n_states, int n_joint_actions, Matrix phi)
    : n_states_(n_states), n_joint_(n_joint_actions), phi_(std::move(phi)) {
    if (phi_.rows() != static_cast<long>(n_states_) * n_joint_)
        throw ValidationError("features: table has wrong number of rows");
    if (phi_.cols() < 1 || phi_.cols() >= phi_.rows())
        throw ValidationError("features: dimension must satisfy 1 <= K < |S||A|");
    max_abs_ = phi_.cwiseAbs().maxCoeff();
    if (!std::isfinite(max_abs_)) throw ValidationError("features: entries must be finite");

    Eigen::ColPivHouseholderQR<Matrix> qr(phi_);
    if (qr.rank() != phi_.cols())
        throw ValidationError("features: matrix is rank deficient");
    const Vector ones = Vector::Ones(phi_.rows());
    const Vector residual = phi_ * qr.solve(ones) - ones;
    if (residual.norm() <= 1e-6)
        throw ValidationError("features: all-ones vector lies in the column span");
}

FeatureMap generate_features(const NetworkedMDP& mdp, int dim, std::uint64_t seed) {
    const int rows = mdp.n_state_actions();
    if (dim >= rows)
        throw ValidationError("generate_features: K must be smaller than |S||A|");
    if (dim < 1) throw ValidationError("generate_features: K must be >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int attempt = 0; attempt < 100; ++attempt) {
        Matrix phi(rows, dim);
        for (long r = 0; r < phi.rows(); ++r)
            for (long c = 0; c < phi.cols(); ++c) phi(r, c) = u(rng);
        try {
            return FeatureMap(mdp.n_states(), mdp.n_joint_actions(), std::move(phi));
        } catch (const ValidationError&) {
            continue;  // resample on rank/ones failure
        }
    }
    throw ValidationError("generate_features: failed to draw a valid feature table");
}

void save_mdp(const NetworkedMDP& mdp, std::ostream& os) {
    os << mdp.n_states() << " " << mdp.n_agents() << "\n";
    for (int i = 0; i < mdp.n_agents(); ++i)
        os << mdp.action_sizes()[i] << (i + 1 < mdp.n_agents() ? " " : "\n");
    for (long r = 0; r < mdp.transition().rows(); ++r) {
        for (long c = 0; c < mdp.transition().cols(); ++c) {
            if (c) os << " ";
            write_double(os, mdp.transition()(r, c));
        }
        os << "\n";
    }
    for (long r = 0; r < mdp.rewards().rows(); ++r) {
        for (long c = 0; c < mdp.rewards().cols(); ++c) {
            if (c) os << " ";
            write_double(os, mdp.rewards()(r, c));
        }
        os << "\n";
    }
}

NetworkedMDP load_mdp(std::istream& is) {
    int n_states, n_agents;
    if (!(is >> n_states >> n_agents)) throw ValidationError("load_mdp: bad header");
    std::vector<int> sizes(n_agents);
    int n_joint = 1;
    for (int& s : sizes) {
        if (!(is >> s)) throw ValidationError("load_mdp: bad action sizes");
        n_joint *= s;
    }
    Matrix transition(n_states * n_joint, n_states);
    for (long r = 0; r < transition.rows(); ++r)
        for (long c = 0; c < transition.cols(); ++c)
            if (!(is >> transition(r, c))) throw ValidationError("load_mdp: bad transition table");
    Matrix rewards(n_agents, n_states * n_joint);
    for (long r = 0; r < rewards.rows(); ++r)
        for (long c = 0; c < rewards.cols(); ++c)
            if (!(is >> rewards(r, c))) throw ValidationError("load_mdp: bad reward table");
    return NetworkedMDP(n_states, std::move(sizes), std::move(transition), std::move(rewards));
}

void save_mdp_file(const NetworkedMDP& mdp, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ValidationError("save_mdp_file: cannot open " + path);
    save_mdp(mdp, os);
}

NetworkedMDP load_mdp_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("load_mdp_file: cannot open " + path);
    return load_mdp(is);
}

void save_features(const FeatureMap& fm, std::ostream& os) {
    os << fm.n_states() << " " << fm.n_joint_actions() << " " << fm.dim() << "\n";
    for (long r = 0; r < fm.phi().rows(); ++r) {
        for (long c = 0; c < fm.phi().cols(); ++c) {
            if (c) os << " ";
            write_double(os, fm.phi()(r, c));
        }
        os << "\n";
    }
}

FeatureMap load_features(std::istream& is) {
    int n_states, n_joint, dim;
    if (!(is >> n_states >> n_joint >> dim)) throw ValidationError("load_features: bad header");
    Matrix phi(static_cast<long>(n_states) * n_joint, dim);
    for (long r = 0; r < phi.rows(); ++r)
        for (long c = 0; c < phi.cols(); ++c)
            if (!(is >> phi(r, c))) throw ValidationError("load_features: bad table");
    return FeatureMap(n_states, n_joint, std::move(phi));
}

void save_features_file(const FeatureMap& fm, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ValidationError("save_features_file: cannot open " + path);
    save_features(fm, os);
}

FeatureMap load_features_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("load_features_file: cannot open " + path);
    return load_features(is);
}

}  // namespace pushac::env

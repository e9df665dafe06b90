#include "pushac/oracle.hpp"

#include <cmath>
#include <ostream>

namespace pushac::oracle {

namespace {

constexpr double kResidualTol = 1e-9;

void write_double(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

Vector mean_reward_vector(const env::NetworkedMDP& mdp) {
    Vector rbar(mdp.n_state_actions());
    for (int s = 0; s < mdp.n_states(); ++s)
        for (int a = 0; a < mdp.n_joint_actions(); ++a)
            rbar[mdp.sa_index(s, a)] = mdp.mean_reward(s, a);
    return rbar;
}

}  // namespace

Matrix state_action_chain(const env::NetworkedMDP& mdp, const Matrix& policy_table) {
    const int S = mdp.n_states();
    const int A = mdp.n_joint_actions();
    Matrix p(S * A, S * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap)
                    p(mdp.sa_index(s, a), mdp.sa_index(sp, ap)) =
                        mdp.transition()(mdp.sa_index(s, a), sp) * policy_table(sp, ap);
    return p;
}

Vector stationary_distribution(const Matrix& chain) {
    if (chain.rows() != chain.cols())
        throw ValidationError("stationary_distribution: matrix must be square");
    if (!env::chain_irreducible(chain))
        throw ValidationError("stationary_distribution: chain is reducible");
    const long n = chain.rows();
    // d^T P = d^T with the last equation replaced by the normalization.
    Matrix a = chain.transpose() - Matrix::Identity(n, n);
    a.row(n - 1).setOnes();
    Vector b = Vector::Zero(n);
    b[n - 1] = 1.0;
    Vector d = a.partialPivLu().solve(b);
    if ((chain.transpose() * d - d).cwiseAbs().maxCoeff() > kResidualTol)
        throw NumericError("stationary_distribution: linear solve residual too large");
    return d;
}

double averaged_return(const env::NetworkedMDP& mdp, const Matrix& policy_table) {
    const Vector d = stationary_distribution(env::induced_chain(mdp, policy_table));
    double j = 0.0;
    for (int s = 0; s < mdp.n_states(); ++s)
        for (int a = 0; a < mdp.n_joint_actions(); ++a)
            j += d[s] * policy_table(s, a) * mdp.mean_reward(s, a);
    return j;
}

Vector relative_q(const env::NetworkedMDP& mdp, const Matrix& policy_table) {
    const int n = mdp.n_state_actions();
    const Matrix p_sa = state_action_chain(mdp, policy_table);
    const Vector d_sa = stationary_distribution(p_sa);
    const double j = averaged_return(mdp, policy_table);
    const Vector rhs = mean_reward_vector(mdp).array() - j;

    // (I - P + 1 d^T) is nonsingular for ergodic chains and its solution
    // carries the d-weighted zero-mean normalization.
    Matrix a = Matrix::Identity(n, n) - p_sa + Vector::Ones(n) * d_sa.transpose();
    Vector q = a.partialPivLu().solve(rhs);
    const double residual =
        ((Matrix::Identity(n, n) - p_sa) * q - rhs).cwiseAbs().maxCoeff();
    if (residual > kResidualTol)
        throw NumericError("relative_q: Poisson equation residual too large");
    return q;
}

PolicyEvaluation evaluate(const env::NetworkedMDP& mdp, const policy::PolicyParams& params,
                          const policy::PolicyFeatures& feats,
                          const env::FeatureMap* features) {
    const Matrix table = policy::joint_table(params, feats, mdp);
    PolicyEvaluation eval;
    eval.d_theta = stationary_distribution(env::induced_chain(mdp, table));
    eval.J = averaged_return(mdp, table);
    eval.q = relative_q(mdp, table);
    eval.d_sa = Vector(mdp.n_state_actions());
    for (int s = 0; s < mdp.n_states(); ++s)
        for (int a = 0; a < mdp.n_joint_actions(); ++a)
            eval.d_sa[mdp.sa_index(s, a)] = eval.d_theta[s] * table(s, a);
    if (features) eval.omega_theta = td_fixed_point(mdp, params, feats, *features);
    return eval;
}

double local_advantage_exact(const env::NetworkedMDP& mdp, const PolicyEvaluation& eval,
                             const policy::PolicyParams& params,
                             const policy::PolicyFeatures& feats, int agent, int s,
                             int joint_action) {
    const int n_actions = mdp.action_sizes()[agent];
    const Vector probs =
        policy::action_probs(params.theta[agent], feats.x[agent], n_actions, s);
    double counterfactual = 0.0;
    for (int b = 0; b < n_actions; ++b)
        counterfactual += probs[b] * eval.q[mdp.sa_index(s, mdp.replace_component(joint_action, agent, b))];
    return eval.q[mdp.sa_index(s, joint_action)] - counterfactual;
}

Vector policy_gradient(const env::NetworkedMDP& mdp, const policy::PolicyParams& params,
                       const policy::PolicyFeatures& feats, int agent) {
    const PolicyEvaluation eval = evaluate(mdp, params, feats);
    Vector grad = Vector::Zero(feats.param_dim(agent));
    for (int s = 0; s < mdp.n_states(); ++s) {
        for (int a = 0; a < mdp.n_joint_actions(); ++a) {
            const double weight = eval.d_sa[mdp.sa_index(s, a)];
            if (weight == 0.0) continue;
            const int a_i = mdp.decode_joint(a)[agent];
            const Vector psi = policy::score(params.theta[agent], feats.x[agent],
                                             mdp.action_sizes()[agent], s, a_i);
            grad += weight * local_advantage_exact(mdp, eval, params, feats, agent, s, a) * psi;
        }
    }
    return grad;
}

Vector td_fixed_point(const env::NetworkedMDP& mdp, const policy::PolicyParams& params,
                      const policy::PolicyFeatures& feats, const env::FeatureMap& features) {
    const Matrix table = policy::joint_table(params, feats, mdp);
    const Matrix p_sa = state_action_chain(mdp, table);
    const Vector d_sa = stationary_distribution(p_sa);
    const double j = averaged_return(mdp, table);
    const Matrix& phi = features.phi();
    const int n = mdp.n_state_actions();

    const Matrix weighted = d_sa.asDiagonal() * (Matrix::Identity(n, n) - p_sa) * phi;
    const Matrix system = phi.transpose() * weighted;  // K x K
    const Vector target = mean_reward_vector(mdp).array() - j;
    const Vector rhs = phi.transpose() * d_sa.asDiagonal() * target;

    Eigen::FullPivLU<Matrix> lu(system);
    if (!lu.isInvertible())
        throw ValidationError(
            "td_fixed_point: singular projected system; feature conditions violated");
    const Vector omega = lu.solve(rhs);

    // Fixed-point condition Phi^T D [Rbar - J 1 + P Phi w - Phi w] = 0.
    const Vector residual =
        phi.transpose() * d_sa.asDiagonal() * (target + (p_sa - Matrix::Identity(n, n)) * phi * omega);
    if (residual.cwiseAbs().maxCoeff() > 1e-10)
        throw NumericError("td_fixed_point: fixed-point residual too large");
    return omega;
}

void write_report(const env::NetworkedMDP& mdp, const policy::PolicyParams& params,
                  const policy::PolicyFeatures& feats, const env::FeatureMap* features,
                  std::ostream& os) {
    const PolicyEvaluation eval = evaluate(mdp, params, feats, features);
    os << "averaged_return ";
    write_double(os, eval.J);
    os << "\nstationary_distribution";
    for (long s = 0; s < eval.d_theta.size(); ++s) {
        os << " ";
        write_double(os, eval.d_theta[s]);
    }
    os << "\n";
    if (features) {
        os << "td_fixed_point";
        for (long k = 0; k < eval.omega_theta.size(); ++k) {
            os << " ";
            write_double(os, eval.omega_theta[k]);
        }
        os << "\n";
    }
    for (int i = 0; i < mdp.n_agents(); ++i) {
        const Vector g = policy_gradient(mdp, params, feats, i);
        os << "policy_gradient_agent " << i;
        for (long c = 0; c < g.size(); ++c) {
            os << " ";
            write_double(os, g[c]);
        }
        os << "\n";
    }
}

}  // namespace pushac::oracle

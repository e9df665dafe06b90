#include "pushac/policy.hpp"

#include <cmath>
#include <fstream>

namespace pushac::policy {

namespace {

void write_double(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

}  // namespace

PolicyFeatures PolicyFeatures::one_hot(int n_states, const std::vector<int>& action_sizes) {
    PolicyFeatures feats;
    feats.x.reserve(action_sizes.size());
    for (int sz : action_sizes)
        feats.x.push_back(Matrix::Identity(static_cast<long>(n_states) * sz,
                                           static_cast<long>(n_states) * sz));
    return feats;
}

PolicyParams PolicyParams::zeros(const PolicyFeatures& feats, double theta_max) {
    PolicyParams p;
    p.theta_max = theta_max;
    for (const Matrix& xi : feats.x) p.theta.push_back(Vector::Zero(xi.cols()));
    return p;
}

PolicyParams PolicyParams::random(const PolicyFeatures& feats, double scale, std::uint64_t seed,
                                  double theta_max) {
    PolicyParams p;
    p.theta_max = theta_max;
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (const Matrix& xi : feats.x) {
        Vector t(xi.cols());
        for (long c = 0; c < t.size(); ++c) t[c] = u(rng);
        p.theta.push_back(project(t, theta_max));
    }
    return p;
}

Vector action_probs(const Vector& theta_i, const Matrix& x_i, int n_actions, int s) {
    Vector logits(n_actions);
    for (int b = 0; b < n_actions; ++b)
        logits[b] = x_i.row(static_cast<long>(s) * n_actions + b).dot(theta_i);
    logits.array() -= logits.maxCoeff();
    Vector probs = logits.array().exp();
    probs /= probs.sum();
    return probs;
}

double joint_prob(const PolicyParams& params, const PolicyFeatures& feats,
                  const std::vector<int>& action_sizes, int s, const std::vector<int>& action) {
    double p = 1.0;
    for (std::size_t i = 0; i < action_sizes.size(); ++i)
        p *= action_probs(params.theta[i], feats.x[i], action_sizes[i], s)[action[i]];
    return p;
}

Vector score(const Vector& theta_i, const Matrix& x_i, int n_actions, int s, int a_i) {
    const Vector probs = action_probs(theta_i, x_i, n_actions, s);
    Vector mean = Vector::Zero(x_i.cols());
    for (int b = 0; b < n_actions; ++b)
        mean += probs[b] * x_i.row(static_cast<long>(s) * n_actions + b).transpose();
    return x_i.row(static_cast<long>(s) * n_actions + a_i).transpose() - mean;
}

Vector project(const Vector& theta_i, double theta_max) {
    return theta_i.cwiseMax(-theta_max).cwiseMin(theta_max);
}

int sample_index(const Vector& probs, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double acc = 0.0;
    for (long i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
}

Matrix joint_table(const PolicyParams& params, const PolicyFeatures& feats,
                   const env::NetworkedMDP& mdp) {
    const int S = mdp.n_states();
    const int A = mdp.n_joint_actions();
    const int N = mdp.n_agents();
    Matrix table(S, A);
    for (int s = 0; s < S; ++s) {
        std::vector<Vector> per_agent(N);
        for (int i = 0; i < N; ++i)
            per_agent[i] = action_probs(params.theta[i], feats.x[i], mdp.action_sizes()[i], s);
        for (int a = 0; a < A; ++a) {
            const std::vector<int> parts = mdp.decode_joint(a);
            double p = 1.0;
            for (int i = 0; i < N; ++i) p *= per_agent[i][parts[i]];
            table(s, a) = p;
        }
    }
    return table;
}

void save_params(const PolicyParams& params, std::ostream& os) {
    os << params.theta.size() << " ";
    write_double(os, params.theta_max);
    os << "\n";
    for (std::size_t i = 0; i < params.theta.size(); ++i) {
        os << i << " " << params.theta[i].size() << "\n";
        for (long c = 0; c < params.theta[i].size(); ++c) {
            if (c) os << " ";
            write_double(os, params.theta[i][c]);
        }
        os << "\n";
    }
}

PolicyParams load_params(std::istream& is) {
    PolicyParams p;
    std::size_t n;
    if (!(is >> n >> p.theta_max)) throw ValidationError("load_params: bad header");
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t idx, m;
        if (!(is >> idx >> m) || idx != i) throw ValidationError("load_params: bad agent header");
        Vector t(m);
        for (std::size_t c = 0; c < m; ++c)
            if (!(is >> t[c])) throw ValidationError("load_params: bad value");
        p.theta.push_back(std::move(t));
    }
    return p;
}

void save_params_file(const PolicyParams& params, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ValidationError("save_params_file: cannot open " + path);
    save_params(params, os);
}

PolicyParams load_params_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("load_params_file: cannot open " + path);
    return load_params(is);
}

}  // namespace pushac::policy

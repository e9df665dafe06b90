#include "pushac/algo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

namespace pushac::algo {

namespace {

Matrix stacked_omega(const std::vector<critic::CriticState>& states) {
    Matrix m(states.size(), states[0].omega.size());
    for (std::size_t i = 0; i < states.size(); ++i) m.row(i) = states[i].omega;
    return m;
}

Matrix stacked_y(const std::vector<critic::CriticState>& states) {
    Matrix m(states.size(), states[0].y.size());
    for (std::size_t i = 0; i < states.size(); ++i) m.row(i) = states[i].y;
    return m;
}

// mu update and local TD half-step shared by all three rounds; returns the
// per-agent TD errors and fills tilde with omega + beta * delta * phi(s,a).
Vector td_half_step(std::vector<critic::CriticState>& states, const StepContext& ctx,
                    const env::FeatureMap& features, double beta_w, Matrix& tilde) {
    const Vector phi_cur = features.row(ctx.s, ctx.a_index);
    const Vector phi_next = features.row(ctx.s_next, ctx.a_next_index);
    const int n = static_cast<int>(states.size());
    Vector deltas(n);
    tilde.resize(n, phi_cur.size());
    for (int i = 0; i < n; ++i) {
        const double r = (*ctx.rewards)[i];
        deltas[i] = critic::td_error(r, states[i].mu, states[i].z.dot(phi_next),
                                     states[i].z.dot(phi_cur));
        if (beta_w > 0.0) {
            tilde.row(i) = states[i].omega + beta_w * deltas[i] * phi_cur;
            states[i].mu = critic::mu_update(states[i].mu, r, beta_w);
        } else {
            tilde.row(i) = states[i].omega;
        }
    }
    return deltas;
}

void mix_entrywise(std::vector<critic::CriticState>& states, const Matrix& tilde,
                   const std::vector<Matrix>& weights, long t) {
    const int n = static_cast<int>(states.size());
    const int dim = static_cast<int>(tilde.cols());
    Matrix y = stacked_y(states);
    Matrix omega_next(n, dim), y_next(n, dim);
    for (int k = 0; k < dim; ++k) {
        omega_next.col(k) = weights[k] * tilde.col(k);
        y_next.col(k) = weights[k] * y.col(k);
    }
    for (int i = 0; i < n; ++i) {
        states[i].omega = omega_next.row(i);
        states[i].y = y_next.row(i);
        critic::check_y_positive(states[i].y, t);
        states[i].z = states[i].omega.cwiseQuotient(states[i].y);
    }
}

void mix_full(std::vector<critic::CriticState>& states, const Matrix& tilde,
              const Matrix& weights, long t) {
    const Matrix omega_next = weights * tilde;
    const Matrix y_next = weights * stacked_y(states);
    for (std::size_t i = 0; i < states.size(); ++i) {
        states[i].omega = omega_next.row(i);
        states[i].y = y_next.row(i);
        critic::check_y_positive(states[i].y, t);
        states[i].z = states[i].omega.cwiseQuotient(states[i].y);
    }
}

}  // namespace

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::consensus_entrywise: return "consensus-entrywise";
        case Algorithm::push_full: return "push-full";
        case Algorithm::push_entrywise: return "push-entrywise";
    }
    return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "consensus-entrywise") return Algorithm::consensus_entrywise;
    if (name == "push-full") return Algorithm::push_full;
    if (name == "push-entrywise") return Algorithm::push_entrywise;
    throw ValidationError("unknown algorithm '" + name +
                          "' (valid tags: consensus-entrywise, push-full, push-entrywise)");
}

void RunConfig::validate(int n_agents, int feature_dim) const {
    if (T < 0) throw ValidationError("config: T must be >= 0");
    if (!(c_omega > 0.0 && c_omega <= 1.0))
        throw ValidationError("config: c_omega must be in (0, 1] to keep mu a convex combination");
    if (c_theta < 0.0) throw ValidationError("config: c_theta must be >= 0");
    if (!(0.5 < nu_omega && nu_omega < nu_theta && nu_theta <= 1.0))
        throw ValidationError("config: exponents must satisfy 0.5 < nu_omega < nu_theta <= 1");
    if (log_every < 1) throw ValidationError("config: log_every must be >= 1");
    if (theta_max <= 0.0) throw ValidationError("config: theta_max must be positive");
    if (theta_init_scale < 0.0 || init_omega_scale < 0.0 || reward_noise < 0.0)
        throw ValidationError("config: scales must be nonnegative");
    if (selection_probs.size() != 0) {
        if (selection_probs.rows() != n_agents || selection_probs.cols() != feature_dim)
            throw ValidationError("config: selection_probs must be N x K");
        for (long i = 0; i < selection_probs.rows(); ++i) {
            if (selection_probs.row(i).minCoeff() <= 0.0)
                throw ValidationError("config: selection probabilities must be positive");
            if (std::abs(selection_probs.row(i).sum() - 1.0) > 1e-12)
                throw ValidationError("config: selection probabilities must sum to 1");
        }
    }
}

double beta_omega(const RunConfig& cfg, long t) {
    return cfg.c_omega / std::pow(static_cast<double>(t) + 1.0, cfg.nu_omega);
}

double beta_theta(const RunConfig& cfg, long t) {
    return cfg.c_theta / std::pow(static_cast<double>(t) + 1.0, cfg.nu_theta);
}

Vector network_average(const Matrix& stacked) {
    return stacked.colwise().mean().transpose();
}

Vector network_average_omega(const std::vector<critic::CriticState>& states) {
    return network_average(stacked_omega(states));
}

RoundOutput critic_round_push_entrywise(std::vector<critic::CriticState>& states,
                                        const StepContext& ctx,
                                        const env::FeatureMap& features,
                                        const std::vector<Matrix>& weights, double beta_w,
                                        long t) {
    RoundOutput out;
    Matrix tilde;
    out.deltas = td_half_step(states, ctx, features, beta_w, tilde);
    mix_entrywise(states, tilde, weights, t);
    out.scalars_per_agent = 2;  // one scaled omega entry and one scaled y entry
    return out;
}

RoundOutput critic_round_push_full(std::vector<critic::CriticState>& states,
                                   const StepContext& ctx, const env::FeatureMap& features,
                                   const Matrix& weights, double beta_w, long t) {
    RoundOutput out;
    Matrix tilde;
    out.deltas = td_half_step(states, ctx, features, beta_w, tilde);
    mix_full(states, tilde, weights, t);
    out.scalars_per_agent = features.dim() + 1;
    return out;
}

RoundOutput critic_round_consensus_entrywise(std::vector<critic::CriticState>& states,
                                             const StepContext& ctx,
                                             const env::FeatureMap& features,
                                             const std::vector<Matrix>& weights, double beta_w,
                                             long t) {
    (void)t;
    RoundOutput out;
    Matrix tilde;
    out.deltas = td_half_step(states, ctx, features, beta_w, tilde);
    const int n = static_cast<int>(states.size());
    const int dim = static_cast<int>(tilde.cols());
    Matrix omega_next(n, dim);
    for (int k = 0; k < dim; ++k) omega_next.col(k) = weights[k] * tilde.col(k);
    for (int i = 0; i < n; ++i) {
        states[i].omega = omega_next.row(i);
        states[i].z = states[i].omega;  // no ratio variables in this baseline
    }
    out.scalars_per_agent = 1;
    return out;
}

long long coordination_overhead(const graph::DirectedGraph& g, const std::vector<int>& proposals,
                                const std::vector<int>& edge_entries) {
    long long overhead = 0;
    for (int i = 0; i < g.n_agents(); ++i) {
        std::set<int> needed;
        for (std::size_t e = 0; e < g.edges().size(); ++e)
            if (g.edges()[e].first == i) needed.insert(edge_entries[e]);
        needed.erase(proposals[i]);
        overhead += static_cast<long long>(needed.size());
    }
    return overhead;
}

void actor_step(policy::PolicyParams& theta, const policy::PolicyFeatures& feats,
                const std::vector<critic::CriticState>& states,
                const env::NetworkedMDP& mdp, const env::FeatureMap& features,
                const StepContext& ctx, double beta_t) {
    if (beta_t == 0.0) return;
    for (int i = 0; i < mdp.n_agents(); ++i) {
        const double adv = critic::local_advantage_sample(states[i].z, theta.theta[i],
                                                          feats.x[i], mdp, features, i, ctx.s,
                                                          ctx.a_index);
        const int a_i = mdp.decode_joint(ctx.a_index)[i];
        const Vector psi =
            policy::score(theta.theta[i], feats.x[i], mdp.action_sizes()[i], ctx.s, a_i);
        theta.theta[i] =
            policy::project(theta.theta[i] + beta_t * adv * psi, theta.theta_max);
    }
}

namespace {

Matrix uniform_selection_probs(int n_agents, int dim) {
    return Matrix::Constant(n_agents, dim, 1.0 / static_cast<double>(dim));
}

void observe_y(const std::vector<critic::CriticState>& states, RunSummary& summary) {
    const int n = static_cast<int>(states.size());
    const int dim = static_cast<int>(states[0].y.size());
    for (int k = 0; k < dim; ++k) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += states[i].y[k];
        summary.max_y_sum_dev =
            std::max(summary.max_y_sum_dev, std::abs(sum - static_cast<double>(n)));
    }
    for (const auto& st : states) {
        summary.y_min_observed = std::min(summary.y_min_observed, st.y.minCoeff());
        summary.y_max_observed = std::max(summary.y_max_observed, st.y.maxCoeff());
    }
}

void check_finite(const std::vector<critic::CriticState>& states, long t) {
    for (const auto& st : states)
        if (!st.omega.allFinite() || !st.y.allFinite() || !st.z.allFinite() ||
            !std::isfinite(st.mu))
            throw NumericError("non-finite learner state at iteration " + std::to_string(t));
}

}  // namespace

RunResult run(const RunConfig& cfg, const env::NetworkedMDP& mdp,
              const graph::DirectedGraph& g, const env::FeatureMap& features,
              const policy::PolicyFeatures& policy_feats, const policy::PolicyParams& theta0,
              const RunOracle* oracle) {
    const int n = mdp.n_agents();
    const int dim = features.dim();
    cfg.validate(n, dim);
    if (g.n_agents() != n) throw ValidationError("run: graph and MDP disagree on agent count");
    if (cfg.algorithm == Algorithm::consensus_entrywise) {
        if (!g.is_symmetric())
            throw ValidationError("run: consensus-entrywise requires a symmetric edge set");
    }
    if (!graph::is_strongly_connected(g))
        throw ValidationError("run: graph must be strongly connected");

    Rng rng(cfg.seed);
    RunResult result;
    result.theta = theta0;
    result.states = critic::make_states(n, dim);
    if (cfg.init_omega_scale > 0.0) {
        std::uniform_real_distribution<double> u(-cfg.init_omega_scale, cfg.init_omega_scale);
        for (auto& st : result.states) {
            for (int k = 0; k < dim; ++k) st.omega[k] = u(rng);
            st.z = st.omega.cwiseQuotient(st.y);
        }
    }

    RunSummary& summary = result.summary;
    summary.y_min_observed = std::numeric_limits<double>::infinity();
    summary.y_max_observed = 0.0;
    observe_y(result.states, summary);

    const Matrix probs = cfg.selection_probs.size() != 0
                             ? cfg.selection_probs
                             : uniform_selection_probs(n, dim);
    const Matrix push_weights = cfg.algorithm == Algorithm::push_full
                                    ? graph::build_push_sum_weights(g)
                                    : Matrix();

    // Oracle reference is constant while the actor is frozen.
    std::optional<OraclePoint> frozen_ref;
    if (oracle && cfg.freeze_actor) frozen_ref = (*oracle)(result.theta);

    std::uniform_int_distribution<int> state_dist(0, mdp.n_states() - 1);
    int s = state_dist(rng);
    std::vector<int> action(n);
    auto sample_actions = [&](int state, std::vector<int>& out) {
        for (int i = 0; i < n; ++i) {
            const Vector p = policy::action_probs(result.theta.theta[i], policy_feats.x[i],
                                                  mdp.action_sizes()[i], state);
            out[i] = policy::sample_index(p, rng);
        }
    };
    sample_actions(s, action);

    std::vector<int> selections(n), next_action(n);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (long t = 0; t < cfg.T; ++t) {
        const double beta_w = cfg.freeze_critic_learning ? 0.0 : beta_omega(cfg, t);
        const double beta_t = cfg.freeze_actor ? 0.0 : beta_theta(cfg, t);

        const env::TransitionSample sample = env::step(mdp, s, action, rng, cfg.reward_noise);
        sample_actions(sample.next_state, next_action);

        StepContext ctx;
        ctx.s = s;
        ctx.a_index = sample.joint_action_index;
        ctx.s_next = sample.next_state;
        ctx.a_next_index = mdp.joint_index(next_action);
        ctx.rewards = &sample.rewards;

        // Actor update first: it reads the pre-mix critic estimate z_t.
        actor_step(result.theta, policy_feats, result.states, mdp, features, ctx, beta_t);

        const Vector mean_before = network_average_omega(result.states);
        RoundOutput round;
        switch (cfg.algorithm) {
            case Algorithm::push_entrywise: {
                for (int i = 0; i < n; ++i)
                    selections[i] = policy::sample_index(probs.row(i).transpose(), rng);
                const auto weights = graph::build_entrywise_push_weights(g, selections, dim);
                round = critic_round_push_entrywise(result.states, ctx, features, weights,
                                                    beta_w, t);
                break;
            }
            case Algorithm::push_full:
                round = critic_round_push_full(result.states, ctx, features, push_weights,
                                               beta_w, t);
                break;
            case Algorithm::consensus_entrywise: {
                for (int i = 0; i < n; ++i)
                    selections[i] = policy::sample_index(probs.row(i).transpose(), rng);
                const auto edge_entries = graph::coordinate_edge_entries(g, selections);
                const auto weights =
                    graph::build_coordinated_consensus_weights(g, edge_entries, dim);
                round = critic_round_consensus_entrywise(result.states, ctx, features, weights,
                                                         beta_w, t);
                summary.coordination_scalars_total +=
                    coordination_overhead(g, selections, edge_entries);
                break;
            }
        }
        summary.scalars_per_agent_total += round.scalars_per_agent;

        // <omega_{t+1}> = <omega_t> + beta * <delta> * phi_t, exactly preserved
        // by column-stochastic mixing.
        const Vector expected =
            mean_before + beta_w * round.deltas.mean() * features.row(ctx.s, ctx.a_index);
        const double dev =
            (network_average_omega(result.states) - expected).cwiseAbs().maxCoeff();
        summary.max_conservation_dev = std::max(summary.max_conservation_dev, dev);
        observe_y(result.states, summary);
        check_finite(result.states, t);
        for (const auto& st : result.states) {
            summary.max_z_norm = std::max(summary.max_z_norm, st.z.norm());
            summary.max_omega_norm = std::max(summary.max_omega_norm, st.omega.norm());
        }

        if ((t + 1) % cfg.log_every == 0) {
            MetricsRow row;
            row.t = t + 1;
            double mu_sum = 0.0;
            for (const auto& st : result.states) mu_sum += st.mu;
            row.mu_mean = mu_sum / n;
            const Vector mean_omega = network_average_omega(result.states);
            row.consensus_err = 0.0;
            for (const auto& st : result.states)
                row.consensus_err = std::max(row.consensus_err, (st.z - mean_omega).norm());
            if (oracle) {
                const OraclePoint ref = frozen_ref ? *frozen_ref : (*oracle)(result.theta);
                row.j_theta = ref.j;
                row.critic_err = 0.0;
                for (const auto& st : result.states)
                    row.critic_err = std::max(row.critic_err, (st.z - ref.omega_theta).norm());
            } else {
                row.j_theta = nan;
                row.critic_err = nan;
            }
            row.scalars_per_agent = summary.scalars_per_agent_total;
            row.y_min = std::numeric_limits<double>::infinity();
            row.y_max = 0.0;
            for (const auto& st : result.states) {
                row.y_min = std::min(row.y_min, st.y.minCoeff());
                row.y_max = std::max(row.y_max, st.y.maxCoeff());
            }
            result.rows.push_back(row);
        }

        s = sample.next_state;
        action = next_action;
    }
    return result;
}

RunResult run(const RunConfig& cfg, const env::NetworkedMDP& mdp,
              const graph::DirectedGraph& g, const env::FeatureMap& features,
              const RunOracle* oracle) {
    const auto feats = policy::PolicyFeatures::one_hot(mdp.n_states(), mdp.action_sizes());
    const policy::PolicyParams theta0 =
        cfg.theta_init_scale > 0.0
            ? policy::PolicyParams::random(feats, cfg.theta_init_scale,
                                           derive_seed(cfg.seed, 0x7e7a), cfg.theta_max)
            : policy::PolicyParams::zeros(feats, cfg.theta_max);
    return run(cfg, mdp, g, features, feats, theta0, oracle);
}

ConsensusBenchmark consensus_benchmark(const graph::DirectedGraph& g, int dim, long rounds,
                                       Algorithm algorithm, std::uint64_t seed,
                                       const Matrix* selection_probs) {
    if (algorithm == Algorithm::consensus_entrywise)
        throw ValidationError("consensus_benchmark: use push-full or push-entrywise");
    if (!graph::is_strongly_connected(g))
        throw ValidationError("consensus_benchmark: graph must be strongly connected");
    const int n = g.n_agents();
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    ConsensusBenchmark bench;
    auto states = critic::make_states(n, dim);
    for (auto& st : states) {
        for (int k = 0; k < dim; ++k) st.omega[k] = u(rng);
        st.z = st.omega;
    }
    bench.target = network_average_omega(states);
    bench.summary.y_min_observed = std::numeric_limits<double>::infinity();
    bench.summary.y_max_observed = 0.0;

    const Matrix probs =
        selection_probs ? *selection_probs : uniform_selection_probs(n, dim);
    const Matrix full_weights =
        algorithm == Algorithm::push_full ? graph::build_push_sum_weights(g) : Matrix();
    std::vector<int> selections(n);

    bench.error.reserve(rounds);
    for (long t = 0; t < rounds; ++t) {
        if (algorithm == Algorithm::push_entrywise) {
            for (int i = 0; i < n; ++i)
                selections[i] = policy::sample_index(probs.row(i).transpose(), rng);
            const auto weights = graph::build_entrywise_push_weights(g, selections, dim);
            mix_entrywise(states, stacked_omega(states), weights, t);
            bench.summary.scalars_per_agent_total += 2;
        } else {
            mix_full(states, stacked_omega(states), full_weights, t);
            bench.summary.scalars_per_agent_total += dim + 1;
        }
        observe_y(states, bench.summary);
        double err = 0.0;
        for (const auto& st : states)
            err = std::max(err, (st.z - bench.target).cwiseAbs().maxCoeff());
        bench.error.push_back(err);
    }
    return bench;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& os) {
    os << "t,mu_mean,consensus_err,critic_err,J_theta,scalars_per_agent,y_min,y_max\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g,%lld,%.17g,%.17g\n", r.t,
                      r.mu_mean, r.consensus_err, r.critic_err, r.j_theta, r.scalars_per_agent,
                      r.y_min, r.y_max);
        os << buf;
    }
}

}  // namespace pushac::algo

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pushac/algo.hpp"
#include "pushac/critic.hpp"
#include "pushac/env.hpp"
#include "pushac/graph.hpp"
#include "pushac/oracle.hpp"
#include "pushac/policy.hpp"

namespace py = pybind11;
using namespace pushac;

namespace {

policy::PolicyParams params_from_list(const std::vector<Vector>& theta, double theta_max) {
    policy::PolicyParams p;
    p.theta = theta;
    p.theta_max = theta_max;
    return p;
}

py::dict summary_dict(const algo::RunSummary& s) {
    py::dict d;
    d["y_min_observed"] = s.y_min_observed;
    d["y_max_observed"] = s.y_max_observed;
    d["max_y_sum_dev"] = s.max_y_sum_dev;
    d["max_conservation_dev"] = s.max_conservation_dev;
    d["max_z_norm"] = s.max_z_norm;
    d["max_omega_norm"] = s.max_omega_norm;
    d["scalars_per_agent_total"] = s.scalars_per_agent_total;
    d["coordination_scalars_total"] = s.coordination_scalars_total;
    return d;
}

py::dict metrics_dict(const std::vector<algo::MetricsRow>& rows) {
    const auto n = static_cast<py::ssize_t>(rows.size());
    py::list t, mu, cons, crit, j, scalars, ymin, ymax;
    for (py::ssize_t i = 0; i < n; ++i) {
        t.append(rows[i].t);
        mu.append(rows[i].mu_mean);
        cons.append(rows[i].consensus_err);
        crit.append(rows[i].critic_err);
        j.append(rows[i].j_theta);
        scalars.append(rows[i].scalars_per_agent);
        ymin.append(rows[i].y_min);
        ymax.append(rows[i].y_max);
    }
    py::dict d;
    d["t"] = t;
    d["mu_mean"] = mu;
    d["consensus_err"] = cons;
    d["critic_err"] = crit;
    d["J_theta"] = j;
    d["scalars_per_agent"] = scalars;
    d["y_min"] = ymin;
    d["y_max"] = ymax;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Decentralized actor-critic over directed graphs: core operations";

    py::register_exception<ValidationError>(m, "PushacValidationError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "PushacNumericError", PyExc_ArithmeticError);

    py::class_<graph::DirectedGraph>(m, "DirectedGraph")
        .def(py::init<int, std::vector<std::pair<int, int>>>(), py::arg("n_agents"),
             py::arg("edges"))
        .def_property_readonly("n_agents", &graph::DirectedGraph::n_agents)
        .def_property_readonly("edges", &graph::DirectedGraph::edges)
        .def("out_degree", &graph::DirectedGraph::out_degree)
        .def("is_symmetric", &graph::DirectedGraph::is_symmetric);

    m.def("directed_cycle", &graph::directed_cycle, py::arg("n"));
    m.def("complete_graph", &graph::complete_graph, py::arg("n"));
    m.def("random_digraph", &graph::random_digraph, py::arg("n"), py::arg("edge_prob"),
          py::arg("seed"), py::arg("undirected") = false);
    m.def("is_strongly_connected", &graph::is_strongly_connected);
    m.def("push_sum_weights", &graph::build_push_sum_weights);
    m.def("entrywise_push_weights", &graph::build_entrywise_push_weights, py::arg("g"),
          py::arg("selections"), py::arg("n_entries"));
    m.def("metropolis_weights", &graph::build_metropolis_weights);
    m.def("block_matrix", &graph::build_block_matrix);
    m.def("spectral_norm", &graph::spectral_norm);

    py::class_<env::NetworkedMDP>(m, "NetworkedMDP")
        .def(py::init<int, std::vector<int>, Matrix, Matrix>(), py::arg("n_states"),
             py::arg("action_sizes"), py::arg("transition"), py::arg("rewards"))
        .def_property_readonly("n_states", &env::NetworkedMDP::n_states)
        .def_property_readonly("n_agents", &env::NetworkedMDP::n_agents)
        .def_property_readonly("action_sizes", &env::NetworkedMDP::action_sizes)
        .def_property_readonly("n_joint_actions", &env::NetworkedMDP::n_joint_actions)
        .def_property_readonly("transition", &env::NetworkedMDP::transition)
        .def_property_readonly("rewards", &env::NetworkedMDP::rewards)
        .def_property_readonly("r_max", &env::NetworkedMDP::r_max);

    m.def("generate_garnet", &env::generate_garnet, py::arg("n_states"),
          py::arg("action_sizes"), py::arg("branching"), py::arg("reward_scale"),
          py::arg("seed"));
    m.def("induced_chain", &env::induced_chain);
    m.def("validate_ergodicity", &env::validate_ergodicity);

    py::class_<env::FeatureMap>(m, "FeatureMap")
        .def(py::init<int, int, Matrix>(), py::arg("n_states"), py::arg("n_joint_actions"),
             py::arg("phi"))
        .def_property_readonly("dim", &env::FeatureMap::dim)
        .def_property_readonly("phi", &env::FeatureMap::phi);

    m.def("generate_features", &env::generate_features, py::arg("mdp"), py::arg("dim"),
          py::arg("seed"));

    m.def(
        "stationary_distribution",
        [](const Matrix& chain) { return oracle::stationary_distribution(chain); },
        py::arg("chain"));

    m.def(
        "evaluate_policy",
        [](const env::NetworkedMDP& mdp, const std::vector<Vector>& theta,
           const env::FeatureMap* features, double theta_max) {
            const auto feats =
                policy::PolicyFeatures::one_hot(mdp.n_states(), mdp.action_sizes());
            const auto params = params_from_list(theta, theta_max);
            const auto ev = oracle::evaluate(mdp, params, feats, features);
            py::dict d;
            d["J"] = ev.J;
            d["d_theta"] = ev.d_theta;
            d["q"] = ev.q;
            d["d_sa"] = ev.d_sa;
            if (features) d["omega_theta"] = ev.omega_theta;
            return d;
        },
        py::arg("mdp"), py::arg("theta"), py::arg("features") = nullptr,
        py::arg("theta_max") = 10.0,
        "Exact policy evaluation with one-hot policy features");

    m.def(
        "policy_gradient",
        [](const env::NetworkedMDP& mdp, const std::vector<Vector>& theta, int agent,
           double theta_max) {
            const auto feats =
                policy::PolicyFeatures::one_hot(mdp.n_states(), mdp.action_sizes());
            return oracle::policy_gradient(mdp, params_from_list(theta, theta_max), feats,
                                           agent);
        },
        py::arg("mdp"), py::arg("theta"), py::arg("agent"), py::arg("theta_max") = 10.0);

    m.def(
        "td_fixed_point",
        [](const env::NetworkedMDP& mdp, const std::vector<Vector>& theta,
           const env::FeatureMap& features, double theta_max) {
            const auto feats =
                policy::PolicyFeatures::one_hot(mdp.n_states(), mdp.action_sizes());
            return oracle::td_fixed_point(mdp, params_from_list(theta, theta_max), feats,
                                          features);
        },
        py::arg("mdp"), py::arg("theta"), py::arg("features"), py::arg("theta_max") = 10.0);

    py::class_<algo::RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_property(
            "algorithm",
            [](const algo::RunConfig& c) { return algo::algorithm_name(c.algorithm); },
            [](algo::RunConfig& c, const std::string& s) { c.algorithm = algo::parse_algorithm(s); })
        .def_readwrite("T", &algo::RunConfig::T)
        .def_readwrite("c_omega", &algo::RunConfig::c_omega)
        .def_readwrite("nu_omega", &algo::RunConfig::nu_omega)
        .def_readwrite("c_theta", &algo::RunConfig::c_theta)
        .def_readwrite("nu_theta", &algo::RunConfig::nu_theta)
        .def_readwrite("selection_probs", &algo::RunConfig::selection_probs)
        .def_readwrite("freeze_actor", &algo::RunConfig::freeze_actor)
        .def_readwrite("freeze_critic_learning", &algo::RunConfig::freeze_critic_learning)
        .def_readwrite("seed", &algo::RunConfig::seed)
        .def_readwrite("log_every", &algo::RunConfig::log_every)
        .def_readwrite("theta_max", &algo::RunConfig::theta_max)
        .def_readwrite("theta_init_scale", &algo::RunConfig::theta_init_scale)
        .def_readwrite("init_omega_scale", &algo::RunConfig::init_omega_scale)
        .def_readwrite("reward_noise", &algo::RunConfig::reward_noise);

    m.def(
        "run",
        [](const algo::RunConfig& cfg, const env::NetworkedMDP& mdp,
           const graph::DirectedGraph& g, const env::FeatureMap& features, bool with_oracle) {
            const auto feats =
                policy::PolicyFeatures::one_hot(mdp.n_states(), mdp.action_sizes());
            algo::RunOracle hook = [&](const policy::PolicyParams& theta) {
                algo::OraclePoint pt;
                const Matrix table = policy::joint_table(theta, feats, mdp);
                pt.j = oracle::averaged_return(mdp, table);
                pt.omega_theta = oracle::td_fixed_point(mdp, theta, feats, features);
                return pt;
            };
            const auto res =
                algo::run(cfg, mdp, g, features, with_oracle ? &hook : nullptr);
            py::dict d;
            d["metrics"] = metrics_dict(res.rows);
            d["summary"] = summary_dict(res.summary);
            py::list theta;
            for (const auto& ti : res.theta.theta) theta.append(ti);
            d["theta"] = theta;
            py::list z, mu;
            for (const auto& st : res.states) {
                z.append(st.z);
                mu.append(st.mu);
            }
            d["z"] = z;
            d["mu"] = mu;
            return d;
        },
        py::arg("config"), py::arg("mdp"), py::arg("graph"), py::arg("features"),
        py::arg("with_oracle") = false,
        "Run one seeded training simulation; returns metrics, summary, and final states");

    m.def(
        "consensus_benchmark",
        [](const graph::DirectedGraph& g, int dim, long rounds, const std::string& algorithm,
           std::uint64_t seed) {
            const auto bench = algo::consensus_benchmark(
                g, dim, rounds, algo::parse_algorithm(algorithm), seed);
            py::dict d;
            d["target"] = bench.target;
            d["error"] = bench.error;
            d["summary"] = summary_dict(bench.summary);
            return d;
        },
        py::arg("graph"), py::arg("dim"), py::arg("rounds"), py::arg("algorithm"),
        py::arg("seed"),
        "Frozen-learning push-sum averaging benchmark");
}

#include "pushac/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "pushac/critic.hpp"
#include "pushac/oracle.hpp"

namespace fs = std::filesystem;

namespace pushac::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void write_double(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

}  // namespace

Config Config::parse(std::istream& is) {
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError("config line " + std::to_string(lineno) +
                                      ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ValidationError("config line " + std::to_string(lineno) +
                                      ": empty section name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.values_.count(full))
            throw ValidationError("config line " + std::to_string(lineno) + ": duplicate key '" +
                                  full + "'");
        cfg.values_[full] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open config file: " + path);
    return parse(is);
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_str(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    used_.insert(key);
    return it->second;
}

std::string Config::get_str_required(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("config: missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
}

long Config::get_int(const std::string& key, long def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    used_.insert(key);
    try {
        std::size_t pos = 0;
        const long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing text");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config: key '" + key + "' is not an integer: " + it->second);
    }
}

double Config::get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    used_.insert(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing text");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config: key '" + key + "' is not a number: " + it->second);
    }
}

bool Config::get_bool(const std::string& key, bool def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    used_.insert(key);
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValidationError("config: key '" + key + "' is not a boolean: " + it->second);
}

std::vector<int> Config::get_int_list(const std::string& key) const {
    std::vector<int> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    used_.insert(key);
    std::istringstream ss(it->second);
    int v;
    while (ss >> v) out.push_back(v);
    if (!ss.eof())
        throw ValidationError("config: key '" + key + "' is not an integer list: " + it->second);
    return out;
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::vector<std::string> Config::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!used_.count(k)) out.push_back(k);
    return out;
}

namespace {

env::NetworkedMDP build_mdp(const Config& cfg) {
    const std::string source = cfg.get_str("mdp.source", "garnet");
    if (source == "file") return env::load_mdp_file(cfg.get_str_required("mdp.file"));
    if (source != "garnet")
        throw ValidationError("config: mdp.source must be 'garnet' or 'file'");
    const int n_states = static_cast<int>(cfg.get_int("mdp.n_states", 5));
    const int n_agents = static_cast<int>(cfg.get_int("mdp.n_agents", 3));
    std::vector<int> actions = cfg.get_int_list("mdp.actions");
    if (actions.empty())
        actions.assign(n_agents, static_cast<int>(cfg.get_int("mdp.actions_per_agent", 2)));
    else if (static_cast<int>(actions.size()) != n_agents)
        throw ValidationError("config: mdp.actions must list one size per agent");
    const int branching = static_cast<int>(cfg.get_int("mdp.branching", 3));
    const double scale = cfg.get_double("mdp.reward_scale", 1.0);
    const auto seed = static_cast<std::uint64_t>(cfg.get_int("mdp.seed", 1));
    return env::generate_garnet(n_states, actions, branching, scale, seed);
}

graph::DirectedGraph build_graph(const Config& cfg, int n_agents) {
    const std::string source = cfg.get_str("graph.source", "cycle");
    const int n = static_cast<int>(cfg.get_int("graph.n_agents", n_agents));
    if (n != n_agents)
        throw ValidationError("config: graph.n_agents disagrees with the MDP agent count");
    if (source == "file") {
        auto g = graph::load_graph_file(cfg.get_str_required("graph.file"));
        if (g.n_agents() != n_agents)
            throw ValidationError("config: graph file disagrees with the MDP agent count");
        return g;
    }
    if (source == "cycle") return graph::directed_cycle(n);
    if (source == "complete") return graph::complete_graph(n);
    if (source == "random-digraph")
        return graph::random_digraph(n, cfg.get_double("graph.edge_prob", 0.35),
                                     static_cast<std::uint64_t>(cfg.get_int("graph.seed", 1)),
                                     cfg.get_bool("graph.undirected", false));
    throw ValidationError(
        "config: graph.source must be cycle, complete, random-digraph, or file");
}

env::FeatureMap build_features(const Config& cfg, const env::NetworkedMDP& mdp) {
    const std::string source = cfg.get_str("features.source", "random");
    if (source == "file") {
        auto fm = env::load_features_file(cfg.get_str_required("features.file"));
        if (fm.n_states() != mdp.n_states() || fm.n_joint_actions() != mdp.n_joint_actions())
            throw ValidationError("config: feature file disagrees with the MDP dimensions");
        return fm;
    }
    if (source != "random")
        throw ValidationError("config: features.source must be 'random' or 'file'");
    const int dim = static_cast<int>(cfg.get_int("features.dim", 4));
    const auto seed = static_cast<std::uint64_t>(cfg.get_int("features.seed", 1));
    return env::generate_features(mdp, dim, seed);
}

policy::PolicyParams build_theta(const Config& cfg, const policy::PolicyFeatures& feats) {
    const double theta_max = cfg.get_double("policy.theta_max", 10.0);
    const std::string init = cfg.get_str("policy.init", "zeros");
    if (init == "file") return policy::load_params_file(cfg.get_str_required("policy.file"));
    if (init == "zeros") return policy::PolicyParams::zeros(feats, theta_max);
    if (init == "random")
        return policy::PolicyParams::random(
            feats, cfg.get_double("policy.scale", 0.5),
            static_cast<std::uint64_t>(cfg.get_int("policy.seed", 1)), theta_max);
    throw ValidationError("config: policy.init must be zeros, random, or file");
}

algo::RunConfig build_run_config(const Config& cfg, const Overrides& opts) {
    algo::RunConfig rc;
    rc.algorithm = algo::parse_algorithm(cfg.get_str("run.algorithm", "push-entrywise"));
    rc.T = cfg.get_int("run.T", 10000);
    rc.c_omega = cfg.get_double("run.c_omega", 1.0);
    rc.nu_omega = cfg.get_double("run.nu_omega", 0.65);
    rc.c_theta = cfg.get_double("run.c_theta", 1.0);
    rc.nu_theta = cfg.get_double("run.nu_theta", 0.85);
    rc.freeze_actor = cfg.get_bool("run.freeze_actor", false);
    rc.freeze_critic_learning = cfg.get_bool("run.freeze_critic", false);
    rc.seed = static_cast<std::uint64_t>(cfg.get_int("run.seed", 0));
    rc.theta_max = cfg.get_double("policy.theta_max", 10.0);
    rc.reward_noise = cfg.get_double("run.reward_noise", 0.0);
    rc.init_omega_scale = cfg.get_double("run.init_omega_scale", 0.0);
    rc.log_every = opts.log_every.value_or(cfg.get_int("output.log_every", 100));
    return rc;
}

void ensure_consumed(const Config& cfg) {
    const auto unused = cfg.unused_keys();
    if (!unused.empty()) {
        std::string msg = "config: unknown key(s):";
        for (const auto& k : unused) msg += " " + k;
        throw ValidationError(msg);
    }
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory: " + dir);
}

// Ergodicity must hold before any run starts; checked for the uniform policy
// and the configured initial policy.
void validate_ergodicity_for(const env::NetworkedMDP& mdp,
                             const policy::PolicyFeatures& feats,
                             const policy::PolicyParams& theta0) {
    const Matrix uniform = Matrix::Constant(mdp.n_states(), mdp.n_joint_actions(),
                                            1.0 / mdp.n_joint_actions());
    if (!env::validate_ergodicity(mdp, uniform))
        throw ValidationError("MDP is not ergodic under the uniform policy");
    if (!env::validate_ergodicity(mdp, policy::joint_table(theta0, feats, mdp)))
        throw ValidationError("MDP is not ergodic under the configured initial policy");
}

}  // namespace

Experiment load_experiment(const Config& cfg, const Overrides& opts) {
    env::NetworkedMDP mdp = build_mdp(cfg);
    graph::DirectedGraph g = build_graph(cfg, mdp.n_agents());
    env::FeatureMap features = build_features(cfg, mdp);
    policy::PolicyFeatures feats =
        policy::PolicyFeatures::one_hot(mdp.n_states(), mdp.action_sizes());
    policy::PolicyParams theta0 = build_theta(cfg, feats);
    algo::RunConfig rc = build_run_config(cfg, opts);

    Experiment exp{std::move(mdp),    std::move(g),      std::move(features),
                   std::move(feats),  std::move(theta0), rc,
                   opts.out_dir.value_or(cfg.get_str("output.dir", "out")),
                   opts.seeds.value_or(cfg.get_int("run.seeds", 1)),
                   cfg.get_bool("run.oracle", false)};
    if (exp.n_seeds < 1) throw ValidationError("config: run.seeds must be >= 1");

    exp.run.validate(exp.mdp.n_agents(), exp.features.dim());
    validate_ergodicity_for(exp.mdp, exp.policy_feats, exp.theta0);
    if (!graph::is_strongly_connected(exp.graph))
        throw ValidationError("graph is not strongly connected");
    if (exp.run.algorithm == algo::Algorithm::consensus_entrywise && !exp.graph.is_symmetric())
        throw ValidationError("consensus-entrywise requires an undirected (symmetric) graph");
    return exp;
}

namespace {

void write_critic_states(const std::vector<critic::CriticState>& states,
                         const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open " + path);
    os << states.size() << " " << (states.empty() ? 0 : states[0].omega.size()) << "\n";
    for (std::size_t i = 0; i < states.size(); ++i) {
        os << i << " mu ";
        write_double(os, states[i].mu);
        os << "\n" << i << " omega";
        for (long k = 0; k < states[i].omega.size(); ++k) {
            os << " ";
            write_double(os, states[i].omega[k]);
        }
        os << "\n" << i << " y";
        for (long k = 0; k < states[i].y.size(); ++k) {
            os << " ";
            write_double(os, states[i].y[k]);
        }
        os << "\n" << i << " z";
        for (long k = 0; k < states[i].z.size(); ++k) {
            os << " ";
            write_double(os, states[i].z[k]);
        }
        os << "\n";
    }
}

algo::RunOracle make_oracle(const Experiment& exp) {
    return [&exp](const policy::PolicyParams& theta) {
        algo::OraclePoint pt;
        const Matrix table = policy::joint_table(theta, exp.policy_feats, exp.mdp);
        pt.j = oracle::averaged_return(exp.mdp, table);
        pt.omega_theta =
            oracle::td_fixed_point(exp.mdp, theta, exp.policy_feats, exp.features);
        return pt;
    };
}

}  // namespace

int cmd_run(const Config& cfg, const Overrides& opts, std::ostream& out, std::ostream& err) {
    Experiment exp = load_experiment(cfg, opts);
    ensure_consumed(cfg);
    ensure_out_dir(exp.out_dir);

    const algo::RunOracle hook = make_oracle(exp);
    const algo::RunOracle* oracle_ptr = exp.attach_oracle ? &hook : nullptr;

    std::vector<std::string> errors(exp.n_seeds);
    std::vector<int> codes(exp.n_seeds, kExitOk);
    std::atomic<long> next{0};
    const unsigned workers = std::max(1u, std::min<unsigned>(
        std::thread::hardware_concurrency(), static_cast<unsigned>(exp.n_seeds)));

    auto worker = [&]() {
        for (long idx = next.fetch_add(1); idx < exp.n_seeds; idx = next.fetch_add(1)) {
            algo::RunConfig rc = exp.run;
            if (exp.n_seeds > 1) rc.seed = derive_seed(exp.run.seed, idx);
            try {
                const algo::RunResult res = algo::run(rc, exp.mdp, exp.graph, exp.features,
                                                      exp.policy_feats, exp.theta0, oracle_ptr);
                const std::string tag = "_seed" + std::to_string(idx);
                std::ofstream csv(exp.out_dir + "/metrics" + tag + ".csv");
                if (!csv) throw ValidationError("cannot write metrics file");
                algo::write_metrics_csv(res.rows, csv);
                policy::save_params_file(res.theta, exp.out_dir + "/final_theta" + tag + ".txt");
                write_critic_states(res.states, exp.out_dir + "/final_critic" + tag + ".txt");
            } catch (const ValidationError& e) {
                errors[idx] = e.what();
                codes[idx] = kExitValidation;
            } catch (const NumericError& e) {
                errors[idx] = e.what();
                codes[idx] = kExitNumeric;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    int exit_code = kExitOk;
    for (long idx = 0; idx < exp.n_seeds; ++idx) {
        if (codes[idx] != kExitOk) {
            err << "seed " << idx << " failed: " << errors[idx] << "\n";
            exit_code = std::max(exit_code, codes[idx]);
        } else if (!opts.quiet) {
            out << "seed " << idx << " done: " << exp.out_dir << "/metrics_seed" << idx
                << ".csv\n";
        }
    }
    return exit_code;
}

int cmd_oracle(const Config& cfg, const Overrides& opts, std::ostream& out, std::ostream&) {
    Experiment exp = load_experiment(cfg, opts);
    ensure_consumed(cfg);
    ensure_out_dir(exp.out_dir);
    const std::string path = exp.out_dir + "/oracle_report.txt";
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open " + path);
    oracle::write_report(exp.mdp, exp.theta0, exp.policy_feats, &exp.features, os);
    if (!opts.quiet) out << "oracle report written to " << path << "\n";
    return kExitOk;
}

int cmd_validate(const Config& cfg, const Overrides& opts, std::ostream& out, std::ostream&) {
    env::NetworkedMDP mdp = build_mdp(cfg);
    graph::DirectedGraph g = build_graph(cfg, mdp.n_agents());
    bool all_ok = true;
    auto report = [&](const std::string& name, bool ok, const std::string& stat) {
        out << (ok ? "PASS " : "FAIL ") << name << " (" << stat << ")\n";
        all_ok = all_ok && ok;
    };

    report("graph strongly connected", graph::is_strongly_connected(g),
           "n=" + std::to_string(g.n_agents()) +
               " edges=" + std::to_string(g.edges().size()));

    // Ergodicity under the uniform policy and a batch of random policies.
    const Matrix uniform =
        Matrix::Constant(mdp.n_states(), mdp.n_joint_actions(), 1.0 / mdp.n_joint_actions());
    bool ergodic = env::validate_ergodicity(mdp, uniform);
    const long n_policies = cfg.get_int("validate.policies", 20);
    const auto feats = policy::PolicyFeatures::one_hot(mdp.n_states(), mdp.action_sizes());
    long passed = ergodic ? 1 : 0;
    for (long p = 0; p < n_policies; ++p) {
        const auto params = policy::PolicyParams::random(feats, 1.0, derive_seed(4242, p));
        const bool ok = env::validate_ergodicity(mdp, policy::joint_table(params, feats, mdp));
        ergodic = ergodic && ok;
        passed += ok ? 1 : 0;
    }
    report("chain ergodic under sampled policies", ergodic,
           std::to_string(passed) + "/" + std::to_string(n_policies + 1) + " policies");

    // Critic feature conditions: full column rank and 1 outside the span.
    bool features_ok = true;
    std::string feature_stat;
    try {
        const env::FeatureMap fm = build_features(cfg, mdp);
        const Vector ones = Vector::Ones(fm.phi().rows());
        Eigen::ColPivHouseholderQR<Matrix> qr(fm.phi());
        const double residual = (fm.phi() * qr.solve(ones) - ones).norm();
        feature_stat = "rank=" + std::to_string(qr.rank()) + "/" + std::to_string(fm.dim()) +
                       " ones_residual=" + std::to_string(residual);
    } catch (const ValidationError& e) {
        features_ok = false;
        feature_stat = e.what();
    }
    report("critic features full rank, ones excluded", features_ok, feature_stat);

    // Weight-matrix conditions for the configured sampler.
    const std::string sampler_name = cfg.get_str("validate.sampler", "metropolis");
    const int n_samples = static_cast<int>(cfg.get_int("validate.n_samples", 200));
    const double eta = cfg.get_double("validate.eta", 1e-3);
    const double tol = cfg.get_double("validate.tol", 1e-9);
    const int dim = static_cast<int>(cfg.get_int("features.dim", 4));
    try {
        graph::WeightSampler sampler;
        const Matrix* exact_mean = nullptr;
        Matrix metro;
        if (sampler_name == "metropolis") {
            metro = graph::build_metropolis_weights(g);
            sampler = [&metro](Rng&) { return metro; };
            exact_mean = &metro;
        } else if (sampler_name == "identity") {
            sampler = [&g](Rng&) { return Matrix::Identity(g.n_agents(), g.n_agents()); };
        } else if (sampler_name == "entrywise-block") {
            sampler = [&g, dim](Rng& rng) {
                std::uniform_int_distribution<int> pick(0, dim - 1);
                std::vector<int> proposals(g.n_agents());
                for (int& p : proposals) p = pick(rng);
                const auto entries = graph::coordinate_edge_entries(g, proposals);
                return graph::build_block_matrix(
                    graph::build_coordinated_consensus_weights(g, entries, dim));
            };
        } else {
            throw ValidationError(
                "config: validate.sampler must be metropolis, identity, or entrywise-block");
        }
        const auto rep = graph::check_weight_assumptions(sampler, n_samples, eta, tol,
                                                         derive_seed(99, 0), exact_mean);
        report("weight matrices: rows stochastic", rep.row_stochastic_ok,
               "dev=" + std::to_string(rep.max_row_sum_dev));
        report("weight matrices: entries above eta", rep.min_entry_ok,
               "min=" + std::to_string(rep.min_positive_entry) + " eta=" + std::to_string(eta));
        report("weight matrices: mean column stochastic", rep.mean_col_stochastic_ok,
               "dev=" + std::to_string(rep.mean_col_sum_dev));
        report("weight matrices: mixing norm below one", rep.mixing_ok,
               "norm=" + std::to_string(rep.mixing_spectral_norm));
    } catch (const ValidationError& e) {
        report("weight matrices", false, e.what());
    }

    ensure_consumed(cfg);
    (void)opts;
    return all_ok ? kExitOk : kExitValidation;
}

int cmd_consensus_test(const Config& cfg, const Overrides& opts, std::ostream& out,
                       std::ostream&) {
    graph::DirectedGraph g =
        build_graph(cfg, static_cast<int>(cfg.get_int("graph.n_agents", 10)));
    const int dim = static_cast<int>(cfg.get_int("consensus.dim", 8));
    const long rounds = cfg.get_int("consensus.rounds", 200);
    const auto algorithm = algo::parse_algorithm(cfg.get_str("consensus.algorithm", "push-full"));
    const long n_seeds = opts.seeds.value_or(cfg.get_int("consensus.seeds", 1));
    const auto master = static_cast<std::uint64_t>(cfg.get_int("consensus.seed", 0));
    const std::string dir = opts.out_dir.value_or(cfg.get_str("output.dir", "out"));
    ensure_consumed(cfg);
    ensure_out_dir(dir);

    for (long idx = 0; idx < n_seeds; ++idx) {
        const auto bench = algo::consensus_benchmark(g, dim, rounds, algorithm,
                                                     derive_seed(master, idx));
        const std::string path = dir + "/consensus_errors_seed" + std::to_string(idx) + ".csv";
        std::ofstream os(path);
        if (!os) throw ValidationError("cannot open " + path);
        os << "round,error_inf\n";
        for (std::size_t r = 0; r < bench.error.size(); ++r) {
            os << (r + 1) << ",";
            write_double(os, bench.error[r]);
            os << "\n";
        }
        if (!opts.quiet) {
            out << "seed " << idx << ": final error ";
            write_double(out, bench.error.empty() ? 0.0 : bench.error.back());
            out << " after " << rounds << " rounds, y in [";
            write_double(out, bench.summary.y_min_observed);
            out << ", ";
            write_double(out, bench.summary.y_max_observed);
            out << "]\n";
        }
    }
    return kExitOk;
}

namespace {

const char* kConfigHelp = R"(Config file keys (section.key = default):
  [mdp]      source=garnet|file, file, n_states=5, n_agents=3, actions_per_agent=2,
             actions (per-agent list), branching=3, reward_scale=1.0, seed=1
  [graph]    source=cycle|complete|random-digraph|file, file, n_agents, edge_prob=0.35,
             undirected=false, seed=1
  [features] source=random|file, file, dim=4, seed=1
  [policy]   init=zeros|random|file, file, scale=0.5, seed=1, theta_max=10.0
  [run]      algorithm=push-entrywise|push-full|consensus-entrywise, T=10000,
             c_omega=1.0, nu_omega=0.65, c_theta=1.0, nu_theta=0.85,
             freeze_actor=false, freeze_critic=false, reward_noise=0.0,
             init_omega_scale=0.0, oracle=false, seed=0, seeds=1
  [output]   dir=out, log_every=100
  [consensus] dim=8, rounds=200, algorithm=push-full, seeds=1, seed=0   (consensus-test)
  [validate]  sampler=metropolis|identity|entrywise-block, n_samples=200,
              eta=0.001, tol=1e-9, policies=20                          (validate)
)";

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Decentralized actor-critic simulator over directed communication graphs"};
    app.footer(kConfigHelp);
    app.require_subcommand(1);

    std::string config_path;
    Overrides opts;
    long seeds_flag = -1, log_flag = -1;
    std::string out_dir_flag;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config file");
        sub->add_option("--out-dir", out_dir_flag, "output directory override");
        sub->add_option("--seeds", seeds_flag, "number of seeds override");
        sub->add_option("--log-every", log_flag, "metric logging cadence override");
        sub->add_flag("--quiet", opts.quiet, "suppress progress output");
    };

    CLI::App* c_run = app.add_subcommand("run", "execute a training run per seed");
    CLI::App* c_oracle = app.add_subcommand("oracle", "write the exact policy-evaluation report");
    CLI::App* c_validate = app.add_subcommand("validate", "check model assumptions, exit 0 iff all pass");
    CLI::App* c_consensus =
        app.add_subcommand("consensus-test", "frozen-learning averaging benchmark");
    for (CLI::App* sub : {c_run, c_oracle, c_validate, c_consensus}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return kExitOk;
        }
        err << e.what() << "\n";
        return kExitValidation;
    }

    try {
        Config cfg;
        if (!config_path.empty()) cfg = Config::parse_file(config_path);
        if (!out_dir_flag.empty()) opts.out_dir = out_dir_flag;
        if (seeds_flag >= 0) opts.seeds = seeds_flag;
        if (log_flag >= 0) opts.log_every = log_flag;

        if (c_run->parsed()) return cmd_run(cfg, opts, out, err);
        if (c_oracle->parsed()) return cmd_oracle(cfg, opts, out, err);
        if (c_validate->parsed()) return cmd_validate(cfg, opts, out, err);
        if (c_consensus->parsed()) return cmd_consensus_test(cfg, opts, out, err);
        err << "no subcommand given\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        err << "validation failure: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace pushac::cli

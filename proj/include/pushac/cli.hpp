#pragma once

// Configuration-driven entry point: experiment configs are flat key = value
// text grouped into [sections]; subcommands wire them to the library and
// write data files. Exit codes: 0 success, 2 validation failure, 3 numeric
// failure.

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pushac/algo.hpp"
#include "pushac/env.hpp"
#include "pushac/graph.hpp"
#include "pushac/policy.hpp"

namespace pushac::cli {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

class Config {
public:
    Config() = default;
    static Config parse(std::istream& is);
    static Config parse_file(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_str(const std::string& key, const std::string& def) const;
    std::string get_str_required(const std::string& key) const;
    long get_int(const std::string& key, long def) const;
    double get_double(const std::string& key, double def) const;
    bool get_bool(const std::string& key, bool def) const;
    std::vector<int> get_int_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    // Typos are validation failures: every key must be consumed by a command.
    std::vector<std::string> unused_keys() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

// Command-line overrides applied on top of the config file.
struct Overrides {
    std::optional<std::string> out_dir;
    std::optional<long> seeds;
    std::optional<long> log_every;
    bool quiet = false;
};

// Everything a run needs, constructed and validated from a config.
struct Experiment {
    env::NetworkedMDP mdp;
    graph::DirectedGraph graph;
    env::FeatureMap features;
    policy::PolicyFeatures policy_feats;
    policy::PolicyParams theta0;
    algo::RunConfig run;
    std::string out_dir;
    long n_seeds = 1;
    bool attach_oracle = false;
};

Experiment load_experiment(const Config& cfg, const Overrides& opts);

int cmd_run(const Config& cfg, const Overrides& opts, std::ostream& out, std::ostream& err);
int cmd_oracle(const Config& cfg, const Overrides& opts, std::ostream& out, std::ostream& err);
int cmd_validate(const Config& cfg, const Overrides& opts, std::ostream& out, std::ostream& err);
int cmd_consensus_test(const Config& cfg, const Overrides& opts, std::ostream& out,
                       std::ostream& err);

// Full argv entry point used by the binary and by tests.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pushac::cli

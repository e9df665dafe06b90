#pragma once

// Directed communication graphs and the mixing matrices used by the three
// training algorithms: push-sum weights for digraphs, per-entry push weights
// for randomized single-entry transmission, Metropolis weights for undirected
// baselines, and the NK x NK block aggregate of per-entry matrices.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "pushac/types.hpp"

namespace pushac::graph {

// Edge (i, j) means agent i transmits to agent j. Every node has an implicit
// self-loop that is not part of the edge set and does not count toward
// out-degrees.
class DirectedGraph {
public:
    DirectedGraph(int n_agents, std::vector<std::pair<int, int>> edges);

    int n_agents() const { return n_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    // Out-degree excluding the implicit self-loop.
    int out_degree(int j) const { return static_cast<int>(out_[j].size()); }
    const std::vector<int>& out_neighbors(int j) const { return out_[j]; }
    const std::vector<int>& in_neighbors(int i) const { return in_[i]; }

    bool has_edge(int i, int j) const;
    // True iff (i,j) in edges implies (j,i) in edges.
    bool is_symmetric() const;

private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;   // sorted, unique
    std::vector<std::vector<int>> out_, in_;   // sorted adjacency
};

// Generators used by tests and the CLI's inline graph specs.
DirectedGraph directed_cycle(int n);
DirectedGraph complete_graph(int n);
// Erdos-Renyi digraph with independent edge probability, resampled until
// strongly connected. With undirected=true every edge is added both ways.
DirectedGraph random_digraph(int n, double edge_prob, std::uint64_t seed,
                             bool undirected = false);

// Self-loops are ignored; singleton graphs count as strongly connected.
bool is_strongly_connected(const DirectedGraph& g);

// B(i,j) = 1/(1+d_j) when j transmits to i or i == j, so each column j
// splits its mass evenly over {j} + out-neighbors and sums to 1.
Matrix build_push_sum_weights(const DirectedGraph& g);

// Per-entry push matrices B^k for sender-side selection: agent j picked
// selections[j]. For the selected entry, column j is the push-sum column;
// for every other entry, agent j retains all mass (B^k(j,j) = 1).
// Every B^k is column stochastic.
std::vector<Matrix> build_entrywise_push_weights(const DirectedGraph& g,
                                                 const std::vector<int>& selections,
                                                 int n_entries);

// Metropolis weights on a symmetric edge set: W(i,j) = 1/(1+max(deg_i,deg_j))
// for neighbors, diagonal absorbs the remainder. Doubly stochastic.
Matrix build_metropolis_weights(const DirectedGraph& g);

// Coordinated per-edge entry choice for the undirected baseline: each agent
// proposes one entry, the entry exchanged over an edge is the min of the two
// endpoint proposals. Returns one entry index per edge of g.edges().
std::vector<int> coordinate_edge_entries(const DirectedGraph& g,
                                         const std::vector<int>& proposals);

// C^k = Metropolis weights on the subgraph of edges coordinated to entry k,
// identity rows for agents with no such edge. Each C^k is doubly stochastic.
std::vector<Matrix> build_coordinated_consensus_weights(const DirectedGraph& g,
                                                        const std::vector<int>& edge_entries,
                                                        int n_entries);

// sum_k C^k (x) e_k e_k^T: entry (i*K + k, j*K + k) = C^k(i, j), zero across
// entry blocks.
Matrix build_block_matrix(const std::vector<Matrix>& mats);

// Largest eigenvalue magnitude of a symmetric matrix by power iteration,
// relative tolerance 1e-10, at most 10000 iterations.
double spectral_norm(const Matrix& m);

// Draws one weight matrix per call; deterministic given the Rng state.
using WeightSampler = std::function<Matrix(Rng&)>;

struct AssumptionReport {
    double max_row_sum_dev = 0.0;       // over all samples
    double min_positive_entry = 0.0;    // over all samples
    double mean_col_sum_dev = 0.0;      // of E[C] (exact mean if supplied)
    double mixing_spectral_norm = 0.0;  // of mean of C^T (I - 11^T/N) C
    bool row_stochastic_ok = false;
    bool min_entry_ok = false;
    bool mean_col_stochastic_ok = false;
    bool mixing_ok = false;

    bool all_pass() const {
        return row_stochastic_ok && min_entry_ok && mean_col_stochastic_ok && mixing_ok;
    }
};

// Samples n_samples matrices and checks the four weight-matrix conditions:
// rows sum to 1 (within tol), positive entries >= eta, E[C] column stochastic
// (within tol), and the mixing norm strictly below one. E[C] is the sample
// mean unless the sampler registers an exact mean.
AssumptionReport check_weight_assumptions(const WeightSampler& sampler, int n_samples,
                                          double eta, double tol, std::uint64_t seed,
                                          const Matrix* exact_mean = nullptr);

// Edge-list text format: first line N, then one "i j" line per edge.
void save_graph(const DirectedGraph& g, std::ostream& os);
DirectedGraph load_graph(std::istream& is);
void save_graph_file(const DirectedGraph& g, const std::string& path);
DirectedGraph load_graph_file(const std::string& path);

}  // namespace pushac::graph

#include "pushac/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace pushac::graph {

DirectedGraph::DirectedGraph(int n_agents, std::vector<std::pair<int, int>> edges)
    : n_(n_agents), edges_(std::move(edges)) {
    if (n_ <= 0) throw ValidationError("graph: n_agents must be positive");
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw ValidationError("graph: duplicate edge");
    out_.assign(n_, {});
    in_.assign(n_, {});
    for (const auto& [i, j] : edges_) {
        if (i < 0 || i >= n_ || j < 0 || j >= n_)
            throw ValidationError("graph: edge index out of range");
        if (i == j)
            throw ValidationError("graph: explicit self-loop (self-loops are implicit)");
        out_[i].push_back(j);
        in_[j].push_back(i);
    }
}

bool DirectedGraph::has_edge(int i, int j) const {
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(i, j));
}

bool DirectedGraph::is_symmetric() const {
    for (const auto& [i, j] : edges_)
        if (!has_edge(j, i)) return false;
    return true;
}

DirectedGraph directed_cycle(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    if (n > 1) e.emplace_back(n - 1, 0);
    return DirectedGraph(n, std::move(e));
}

DirectedGraph complete_graph(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) e.emplace_back(i, j);
    return DirectedGraph(n, std::move(e));
}

DirectedGraph random_digraph(int n, double edge_prob, std::uint64_t seed, bool undirected) {
    if (edge_prob <= 0.0 || edge_prob > 1.0)
        throw ValidationError("random_digraph: edge_prob must be in (0, 1]");
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<std::pair<int, int>> e;
        for (int i = 0; i < n; ++i) {
            for (int j = (undirected ? i + 1 : 0); j < n; ++j) {
                if (i == j) continue;
                if (u(rng) < edge_prob) {
                    e.emplace_back(i, j);
                    if (undirected) e.emplace_back(j, i);
                }
            }
        }
        DirectedGraph g(n, std::move(e));
        if (is_strongly_connected(g)) return g;
    }
    throw ValidationError("random_digraph: failed to draw a strongly connected graph");
}

namespace {

// Nodes reachable from 0 following out (or in, when reversed) edges.
int reach_count(const DirectedGraph& g, bool reversed) {
    std::vector<char> seen(g.n_agents(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        const auto& next = reversed ? g.in_neighbors(v) : g.out_neighbors(v);
        for (int w : next) {
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count;
}

}  // namespace

bool is_strongly_connected(const DirectedGraph& g) {
    if (g.n_agents() == 1) return true;
    return reach_count(g, false) == g.n_agents() && reach_count(g, true) == g.n_agents();
}

Matrix build_push_sum_weights(const DirectedGraph& g) {
    if (!is_strongly_connected(g))
        throw ValidationError("build_push_sum_weights: graph is not strongly connected");
    const int n = g.n_agents();
    Matrix b = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        const double w = 1.0 / (1.0 + g.out_degree(j));
        b(j, j) = w;
        for (int i : g.out_neighbors(j)) b(i, j) = w;
    }
    return b;
}

std::vector<Matrix> build_entrywise_push_weights(const DirectedGraph& g,
                                                 const std::vector<int>& selections,
                                                 int n_entries) {
    if (!is_strongly_connected(g))
        throw ValidationError("build_entrywise_push_weights: graph is not strongly connected");
    const int n = g.n_agents();
    if (static_cast<int>(selections.size()) != n)
        throw ValidationError("build_entrywise_push_weights: one selection per agent required");
    for (int s : selections)
        if (s < 0 || s >= n_entries)
            throw ValidationError("build_entrywise_push_weights: selection index out of range");

    std::vector<Matrix> mats(n_entries, Matrix::Identity(n, n));
    for (int j = 0; j < n; ++j) {
        Matrix& bk = mats[selections[j]];
        const double w = 1.0 / (1.0 + g.out_degree(j));
        bk(j, j) = w;
        for (int i : g.out_neighbors(j)) bk(i, j) = w;
    }
    return mats;
}

Matrix build_metropolis_weights(const DirectedGraph& g) {
    if (!g.is_symmetric())
        throw ValidationError("build_metropolis_weights: edge set must be symmetric");
    if (!is_strongly_connected(g))
        throw ValidationError("build_metropolis_weights: graph must be connected");
    const int n = g.n_agents();
    Matrix w = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j : g.out_neighbors(i))
            w(i, j) = 1.0 / (1.0 + std::max(g.out_degree(i), g.out_degree(j)));
        w(i, i) = 1.0 - w.row(i).sum();
    }
    return w;
}

std::vector<int> coordinate_edge_entries(const DirectedGraph& g,
                                         const std::vector<int>& proposals) {
    if (static_cast<int>(proposals.size()) != g.n_agents())
        throw ValidationError("coordinate_edge_entries: one proposal per agent required");
    std::vector<int> entries;
    entries.reserve(g.edges().size());
    for (const auto& [i, j] : g.edges())
        entries.push_back(std::min(proposals[i], proposals[j]));
    return entries;
}

std::vector<Matrix> build_coordinated_consensus_weights(const DirectedGraph& g,
                                                        const std::vector<int>& edge_entries,
                                                        int n_entries) {
    if (!g.is_symmetric())
        throw ValidationError("build_coordinated_consensus_weights: edge set must be symmetric");
    if (edge_entries.size() != g.edges().size())
        throw ValidationError("build_coordinated_consensus_weights: one entry per edge required");
    const int n = g.n_agents();

    // Degree of each agent within the entry-k subgraph.
    std::vector<std::vector<int>> deg(n_entries, std::vector<int>(n, 0));
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        const int k = edge_entries[e];
        if (k < 0 || k >= n_entries)
            throw ValidationError("build_coordinated_consensus_weights: entry out of range");
        deg[k][g.edges()[e].first] += 1;
    }

    std::vector<Matrix> mats(n_entries, Matrix::Identity(n, n));
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        const auto& [i, j] = g.edges()[e];
        const int k = edge_entries[e];
        mats[k](j, i) = 1.0 / (1.0 + std::max(deg[k][i], deg[k][j]));
    }
    for (int k = 0; k < n_entries; ++k)
        for (int i = 0; i < n; ++i)
            mats[k](i, i) = 1.0 - (mats[k].row(i).sum() - mats[k](i, i));
    return mats;
}

Matrix build_block_matrix(const std::vector<Matrix>& mats) {
    if (mats.empty()) throw ValidationError("build_block_matrix: no matrices given");
    const int n = static_cast<int>(mats[0].rows());
    const int K = static_cast<int>(mats.size());
    for (const Matrix& m : mats)
        if (m.rows() != n || m.cols() != n)
            throw ValidationError("build_block_matrix: dimension mismatch");
    Matrix out = Matrix::Zero(static_cast<long>(n) * K, static_cast<long>(n) * K);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out(static_cast<long>(i) * K + k, static_cast<long>(j) * K + k) = mats[k](i, j);
    return out;
}

double spectral_norm(const Matrix& m) {
    if (m.rows() != m.cols()) throw ValidationError("spectral_norm: matrix must be square");
    const long n = m.rows();
    if (n == 0) return 0.0;
    // Seeded random start avoids starting orthogonal to the dominant eigenvector.
    Rng rng(0x5eedULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (long i = 0; i < n; ++i) v[i] = u(rng);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Vector w = m * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        w /= norm;
        const double next = std::abs(w.dot(m * w));
        if (std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next))) return next;
        lambda = next;
        v = w;
    }
    return lambda;
}

AssumptionReport check_weight_assumptions(const WeightSampler& sampler, int n_samples,
                                          double eta, double tol, std::uint64_t seed,
                                          const Matrix* exact_mean) {
    if (n_samples < 1) throw ValidationError("check_weight_assumptions: n_samples < 1");
    Rng rng(seed);
    AssumptionReport rep;
    rep.min_positive_entry = std::numeric_limits<double>::infinity();

    Matrix mean, quad;
    for (int s = 0; s < n_samples; ++s) {
        const Matrix c = sampler(rng);
        const long n = c.rows();
        if (s == 0) {
            mean = Matrix::Zero(n, n);
            quad = Matrix::Zero(n, n);
        }
        for (long i = 0; i < n; ++i) {
            rep.max_row_sum_dev = std::max(rep.max_row_sum_dev, std::abs(c.row(i).sum() - 1.0));
            for (long j = 0; j < n; ++j)
                if (c(i, j) > 0.0)
                    rep.min_positive_entry = std::min(rep.min_positive_entry, c(i, j));
        }
        mean += c;
        const Matrix centering =
            Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
        quad += c.transpose() * centering * c;
    }
    mean /= n_samples;
    quad /= n_samples;
    if (exact_mean) mean = *exact_mean;

    for (long j = 0; j < mean.cols(); ++j)
        rep.mean_col_sum_dev = std::max(rep.mean_col_sum_dev, std::abs(mean.col(j).sum() - 1.0));
    rep.mixing_spectral_norm = spectral_norm(quad);

    rep.row_stochastic_ok = rep.max_row_sum_dev <= tol;
    rep.min_entry_ok = rep.min_positive_entry >= eta;
    rep.mean_col_stochastic_ok = rep.mean_col_sum_dev <= tol;
    // Strictly-below-one with a tol margin, so a norm of exactly 1 computed
    // to rounding error still fails.
    rep.mixing_ok = rep.mixing_spectral_norm < 1.0 - tol;
    return rep;
}

void save_graph(const DirectedGraph& g, std::ostream& os) {
    os << g.n_agents() << "\n";
    for (const auto& [i, j] : g.edges()) os << i << " " << j << "\n";
}

DirectedGraph load_graph(std::istream& is) {
    int n;
    if (!(is >> n)) throw ValidationError("load_graph: missing node count");
    std::vector<std::pair<int, int>> e;
    int i, j;
    while (is >> i >> j) e.emplace_back(i, j);
    return DirectedGraph(n, std::move(e));
}

void save_graph_file(const DirectedGraph& g, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ValidationError("save_graph_file: cannot open " + path);
    save_graph(g, os);
}

DirectedGraph load_graph_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("load_graph_file: cannot open " + path);
    return load_graph(is);
}

}  // namespace pushac::graph

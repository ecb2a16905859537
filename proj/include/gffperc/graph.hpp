#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gffperc {

using Vertex = int;
using Edge = std::pair<Vertex, Vertex>;

// Graphs up to this size get dense eigensolves / dense covariance.
inline constexpr int kDenseThreshold = 4096;

struct Neighbor {
    Vertex vertex;
    int edge;  // canonical edge index
};

// Immutable simple connected undirected graph with unit conductances.
// Edges are stored canonically: (min, max) pairs sorted lexicographically,
// so edge indices are deterministic.
class Graph {
public:
    // Validates and canonicalizes. Throws Error on self-loops, duplicates,
    // out-of-range vertices, disconnection or n < 2.
    Graph(int n, std::vector<Edge> edges);

    int n() const { return n_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& deg() const { return deg_; }
    int deg(Vertex x) const { return deg_[x]; }
    long long two_m() const { return 2LL * num_edges(); }
    int d_max() const { return d_max_; }
    int d_min() const { return d_min_; }

    std::span<const Neighbor> neighbors(Vertex x) const {
        return {adj_.data() + offsets_[x], adj_.data() + offsets_[x + 1]};
    }

    Eigen::VectorXd degree_vector() const;
    Eigen::MatrixXd laplacian_dense() const;
    Eigen::SparseMatrix<double> laplacian_sparse() const;

    // Returns the same graph with vertex x renamed to perm[x].
    Graph relabeled(std::span<const int> perm) const;

    friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

private:
    int n_;
    std::vector<Edge> edges_;
    std::vector<int> deg_;
    int d_max_ = 0;
    int d_min_ = 0;
    std::vector<int> offsets_;
    std::vector<Neighbor> adj_;
};

// Edge-list document: one "u v" pair per line, '#' comments and blank lines ignored.
Graph build_from_edge_list(std::string_view text);
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& os, const Graph& g);

// Configuration model with full re-pairing on failure (self-loop, multi-edge
// or disconnected outcome). Deterministic given the seed.
Graph gen_random_regular(int n, int d, std::uint64_t seed, int max_attempts = 1000);

Graph gen_cycle(int n);
Graph gen_path(int n);
Graph gen_complete(int n);
Graph gen_torus(int side, int dim);

// family in {cycle, path, complete, torus}; params keys: n, side, dim.
Graph gen_named(std::string_view family, const std::map<std::string, int>& params);

enum class SpectralMethod { Auto, Dense, Iterative };

struct SpectralReport {
    double lambda_star = 0.0;
    SpectralMethod method = SpectralMethod::Dense;
    double residual = 0.0;          // ||L psi - lambda D psi||; 0 when no vector was formed
    Eigen::VectorXd eigenvector;    // minimizer of E(f,f) / sum d f^2 with D-mean zero (may be empty)
};

std::string_view to_string(SpectralMethod m);

// Second-smallest eigenvalue of L psi = lambda D psi.
// The dense route forms the eigenvector only when asked; the iterative route always does.
SpectralReport spectral_gap(const Graph& g, SpectralMethod method = SpectralMethod::Auto, bool with_vector = false);

// Smallest positive eigenvalue of the combinatorial Laplacian L (standard inner product).
double laplacian_fiedler_value(const Graph& g);

// Number of edges with exactly one endpoint in s.
long long edge_boundary(const Graph& g, std::span<const Vertex> s);

bool is_connected(int n, std::span<const Edge> edges);

}  // namespace gffperc

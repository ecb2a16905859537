#include "gffperc/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "gffperc/error.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

double open_probability(double a, double b, double h) {
    const double da = std::max(a - h, 0.0);
    const double db = std::max(b - h, 0.0);
    return -std::expm1(-2.0 * da * db);
}

int OpenEdgeSet::count() const { return static_cast<int>(std::count(open.begin(), open.end(), 1)); }

std::vector<double> edge_uniforms(const Graph& g, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::vector<double> u(g.num_edges());
    for (double& x : u) x = uniform01(rng);
    return u;
}

OpenEdgeSet percolate_with_uniforms(const Graph& g, const Eigen::VectorXd& phi, double h,
                                    const std::vector<double>& uniforms, std::uint64_t seed) {
    if (phi.size() != g.n() || static_cast<int>(uniforms.size()) != g.num_edges())
        throw Error(ErrorCode::DimensionMismatch, "field or uniform stream does not match the graph");
    OpenEdgeSet o;
    o.h = h;
    o.seed = seed;
    o.open.assign(g.num_edges(), 0);
    const auto& edges = g.edges();
    for (int e = 0; e < g.num_edges(); ++e) {
        auto [x, y] = edges[e];
        o.open[e] = uniforms[e] < open_probability(phi[x], phi[y], h);
    }
    return o;
}

OpenEdgeSet percolate(const Graph& g, const FieldSample& f, double h, std::uint64_t seed) {
    return percolate_with_uniforms(g, f.phi, h, edge_uniforms(g, seed), seed);
}

namespace {

struct UnionFind {
    std::vector<int> parent, size;
    explicit UnionFind(int n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

UnionFind build(const Graph& g, const OpenEdgeSet& o) {
    if (static_cast<int>(o.open.size()) != g.num_edges())
        throw Error(ErrorCode::DimensionMismatch, "open-edge mask does not match the graph");
    UnionFind uf(g.n());
    const auto& edges = g.edges();
    for (int e = 0; e < g.num_edges(); ++e)
        if (o.open[e]) uf.unite(edges[e].first, edges[e].second);
    return uf;
}

}  // namespace

std::vector<int> cluster_labels(const Graph& g, const OpenEdgeSet& o) {
    UnionFind uf = build(g, o);
    std::vector<int> id_of_root(g.n(), -1);
    std::vector<int> labels(g.n());
    int next = 0;
    for (int x = 0; x < g.n(); ++x) {
        int r = uf.find(x);
        if (id_of_root[r] < 0) id_of_root[r] = next++;
        labels[x] = id_of_root[r];
    }
    return labels;
}

ClusterStats clusters(const Graph& g, const OpenEdgeSet& o) {
    UnionFind uf = build(g, o);
    ClusterStats s;
    // Vertices are scanned in increasing order, so the first vertex seen for a
    // root is that cluster's smallest member.
    std::vector<char> seen(g.n(), 0);
    for (int x = 0; x < g.n(); ++x) {
        int r = uf.find(x);
        if (seen[r]) continue;
        seen[r] = 1;
        const int sz = uf.size[r];
        s.sizes.push_back(sz);
        if (sz > s.cmax) {
            s.cmax = sz;
            s.cmax_root = x;
        }
    }
    std::sort(s.sizes.begin(), s.sizes.end(), std::greater<>());
    s.num_clusters = static_cast<int>(s.sizes.size());
    s.second_cmax = s.sizes.size() > 1 ? s.sizes[1] : 0;
    return s;
}

void write_cluster_csv(std::ostream& os, const std::vector<int>& labels) {
    os << "vertex,cluster_id\n";
    for (size_t x = 0; x < labels.size(); ++x) os << x << ',' << labels[x] << '\n';
}

bool bridge_min_oracle(double a, double b, double h, int steps, std::uint64_t seed) {
    if (steps < 2) throw Error(ErrorCode::PreconditionError, "bridge oracle needs steps >= 2");
    if (a < h || b < h) return false;
    // X(t) = a + W(t) - t (W(1) - (b - a)) is a standard bridge from a to b.
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(steps)));
    std::vector<double> walk(steps + 1, 0.0);
    for (int k = 1; k <= steps; ++k) walk[k] = walk[k - 1] + normal(rng);
    const double drift = walk[steps] - (b - a);
    for (int k = 1; k < steps; ++k) {
        const double t = static_cast<double>(k) / steps;
        if (a + walk[k] - t * drift < h) return false;
    }
    return true;
}

}  // namespace gffperc

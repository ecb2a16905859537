#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "gffperc/error.hpp"
#include "gffperc/percolation.hpp"
#include "gffperc/rng.hpp"

using namespace gffperc;

namespace {

// Component sizes of the open subgraph by plain BFS, sorted descending.
std::vector<int> bfs_sizes(const Graph& g, const OpenEdgeSet& o) {
    std::vector<std::vector<int>> adj(g.n());
    for (size_t e = 0; e < g.edges().size(); ++e)
        if (o.open[e]) {
            adj[g.edges()[e].first].push_back(g.edges()[e].second);
            adj[g.edges()[e].second].push_back(g.edges()[e].first);
        }
    std::vector<char> seen(g.n(), 0);
    std::vector<int> sizes;
    for (int s = 0; s < g.n(); ++s) {
        if (seen[s]) continue;
        std::vector<int> stack = {s};
        seen[s] = 1;
        int count = 0;
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            ++count;
            for (int y : adj[x])
                if (!seen[y]) {
                    seen[y] = 1;
                    stack.push_back(y);
                }
        }
        sizes.push_back(count);
    }
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

OpenEdgeSet with_open(const Graph& g, std::initializer_list<Edge> edges) {
    OpenEdgeSet o;
    o.open.assign(g.num_edges(), 0);
    for (Edge e : edges) {
        auto it = std::find(g.edges().begin(), g.edges().end(), e);
        REQUIRE(it != g.edges().end());
        o.open[it - g.edges().begin()] = 1;
    }
    return o;
}

double bridge_frequency(double a, double b, double h, int runs, std::uint64_t base) {
    int hits = 0;
    for (int i = 0; i < runs; ++i) hits += bridge_min_oracle(a, b, h, 1000, derive_seed(base, {static_cast<std::uint64_t>(i)}));
    return static_cast<double>(hits) / runs;
}

}  // namespace

TEST_CASE("open probability examples") {
    CHECK(open_probability(0.3, 7.0, 0.3) == 0.0);
    CHECK(open_probability(1.5, 1.5, 0.5) == doctest::Approx(0.8646647167633873).epsilon(1e-15));
    CHECK(open_probability(-1.0, 5.0, 0.0) == 0.0);
    CHECK(open_probability(1.0, 2.0, 0.0) == doctest::Approx(1 - std::exp(-4.0)).epsilon(1e-15));
    // tiny products keep relative accuracy
    CHECK(open_probability(1e-9, 1e-9, 0.0) == doctest::Approx(2e-18).epsilon(1e-12));
    CHECK(open_probability(100.0, 100.0, 0.0) <= 1.0);
}

TEST_CASE("open probability is nonincreasing in h") {
    for (double h = -2.0; h < 2.0; h += 0.01) CHECK(open_probability(0.4, 1.1, h) >= open_probability(0.4, 1.1, h + 0.01));
}

TEST_CASE("extreme levels") {
    Graph g = gen_random_regular(200, 3, 5);
    Sampler s(g, SamplerRoute::Eigen);
    FieldSample f = s.sample(3);
    OpenEdgeSet none = percolate(g, f, 1e6, 9);
    CHECK(none.count() == 0);
    ClusterStats cs = clusters(g, none);
    CHECK(cs.cmax == 1);
    CHECK(cs.num_clusters == g.n());
    CHECK(cs.sizes == std::vector<int>(g.n(), 1));

    OpenEdgeSet all = percolate(g, f, -1e6, 9);
    CHECK(all.count() == g.num_edges());
    ClusterStats ca = clusters(g, all);
    CHECK(ca.cmax == g.n());
    CHECK(ca.num_clusters == 1);
    CHECK(ca.second_cmax == 0);
}

TEST_CASE("endpoint below the level closes the edge") {
    Graph k2 = gen_complete(2);
    Eigen::Vector2d phi(1.0, -1.0);
    std::vector<double> u = {0.0};
    CHECK(percolate_with_uniforms(k2, phi, 0.0, u).count() == 0);
}

TEST_CASE("C4 hand case") {
    Graph c4 = gen_cycle(4);
    ClusterStats cs = clusters(c4, with_open(c4, {{0, 1}, {2, 3}}));
    CHECK(cs.sizes == std::vector<int>{2, 2});
    CHECK(cs.cmax == 2);
    CHECK(cs.cmax_root == 0);
    CHECK(cs.second_cmax == 2);
    CHECK(cs.num_clusters == 2);

    ClusterStats cs2 = clusters(c4, with_open(c4, {{2, 3}}));
    CHECK(cs2.cmax_root == 2);
    CHECK(cs2.sizes == std::vector<int>{2, 1, 1});

    std::ostringstream os;
    write_cluster_csv(os, cluster_labels(c4, with_open(c4, {{1, 2}})));
    CHECK(os.str() == "vertex,cluster_id\n0,0\n1,1\n2,1\n3,2\n");
}

TEST_CASE("union-find agrees with BFS") {
    Rng rng = make_rng(2024);
    for (int t = 0; t < 1000; ++t) {
        const int n = 4 + 2 * static_cast<int>(rng() % 20);
        Graph g = gen_random_regular(n, 3, rng());
        OpenEdgeSet o;
        o.open.resize(g.num_edges());
        const double p = uniform01(rng);
        for (auto& b : o.open) b = uniform01(rng) < p;
        ClusterStats cs = clusters(g, o);
        std::vector<int> expect = bfs_sizes(g, o);
        CHECK(cs.sizes == expect);
        CHECK(cs.cmax == expect.front());
        CHECK(cs.num_clusters == static_cast<int>(expect.size()));
        CHECK(cs.second_cmax == (expect.size() > 1 ? expect[1] : 0));
        CHECK(std::accumulate(cs.sizes.begin(), cs.sizes.end(), 0) == n);
    }
}

TEST_CASE("open edges have both endpoints above the level, and shrink with h") {
    Graph g = gen_random_regular(300, 3, 8);
    Sampler s(g, SamplerRoute::Eigen);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        FieldSample f = s.sample(seed);
        std::vector<double> u = edge_uniforms(g, seed);
        OpenEdgeSet prev = percolate_with_uniforms(g, f.phi, -3.0, u);
        for (double h = -3.0; h <= 3.0; h += 0.05) {
            OpenEdgeSet o = percolate_with_uniforms(g, f.phi, h, u);
            for (size_t e = 0; e < o.open.size(); ++e) {
                if (!o.open[e]) continue;
                CHECK(f.phi(g.edges()[e].first) >= h);
                CHECK(f.phi(g.edges()[e].second) >= h);
                CHECK(prev.open[e]);
            }
            prev = o;
        }
        // percolate draws the same stream
        CHECK(percolate(g, f, 0.1, seed).open == percolate_with_uniforms(g, f.phi, 0.1, u).open);
    }
}

TEST_CASE("bridge oracle") {
    CHECK_FALSE(bridge_min_oracle(-0.1, 3.0, 0.0, 1000, 1));
    CHECK_FALSE(bridge_min_oracle(3.0, -0.1, 0.0, 1000, 1));
    try {
        bridge_min_oracle(1, 1, 0, 1, 1);
        FAIL("expected PreconditionError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PreconditionError);
    }
    CHECK(bridge_frequency(10.0, 10.0, 0.0, 10000, 4) >= 1 - 1e-6);
    CHECK(bridge_frequency(1.0, 1.0, 0.0, 100000, 5) == doctest::Approx(0.8647).epsilon(0.015 / 0.8647));
}

TEST_CASE("bridge oracle bias matches the discrete-monitoring correction") {
    // Monitoring on a grid of spacing 1/N shifts the effective barrier down by
    // about 0.5826/sqrt(N); with that shift the closed form tracks the oracle.
    const double shift = 0.5826 / std::sqrt(1000.0);
    for (auto [x, y] : {std::pair{0.5, 0.5}, std::pair{0.5, 2.0}, std::pair{2.0, 2.0}}) {
        const double freq = bridge_frequency(x, y, 0.0, 40000, 17);
        CHECK(std::abs(freq - open_probability(x + shift, y + shift, 0.0)) <= 0.01);
    }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "gffperc/error.hpp"
#include "gffperc/martingale.hpp"
#include "gffperc/potential.hpp"
#include "gffperc/rng.hpp"

using namespace gffperc;

namespace {

// a[x] = nu * sum_y d_y P_y[X_{H_K} = x] straight from the hitting matrix.
Eigen::VectorXd oracle_a(const Graph& g, const std::vector<Vertex>& k) {
    HittingDistribution hd = hitting_distribution(g, k);
    const double nu = capacity_dirichlet(g, k).nu;
    Eigen::VectorXd mass = hd.probabilities.transpose() * g.degree_vector();
    Eigen::VectorXd a = Eigen::VectorXd::Zero(g.n());
    for (size_t j = 0; j < k.size(); ++j) a(k[j]) = nu * mass(j);
    return a;
}

// Random nested pair K subset K' with K' != V.
std::pair<std::vector<Vertex>, std::vector<Vertex>> nested_pair(int n, Rng& rng) {
    std::vector<Vertex> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    const int outer = 2 + static_cast<int>(rng() % (n - 2));
    const int inner = 1 + static_cast<int>(rng() % (outer - 1));
    std::vector<Vertex> k(perm.begin(), perm.begin() + inner), kp(perm.begin(), perm.begin() + outer);
    std::sort(k.begin(), k.end());
    std::sort(kp.begin(), kp.end());
    return {k, kp};
}

}  // namespace

TEST_CASE("K2 coefficients") {
    Graph k2 = gen_complete(2);
    MartingaleCoefficients c = martingale_coefficients(k2, std::vector<Vertex>{0});
    CHECK(std::abs(c.a(0) - 4.0) <= 1e-12);
    CHECK(c.a(1) == 0.0);
    CHECK(std::abs(c.capacity() - 4.0) <= 1e-12);
    Covariance cov = covariance_matrix(k2);
    CHECK(std::abs(c.a.dot(cov.sigma * c.a) - 4.0) <= 1e-12);

    MartingaleValue v = evaluate_martingale(c, Eigen::Vector2d(0.7, -0.7));
    CHECK(std::abs(v.m - 2.8) <= 1e-12);
    CHECK(v.m == v.m_blk + v.m_bdr);
}

TEST_CASE("triangle bulk part") {
    MartingaleCoefficients c = martingale_coefficients(gen_complete(3), std::vector<Vertex>{0});
    Eigen::Vector3d phi(0.3, -0.1, -0.2);
    CHECK(std::abs(evaluate_martingale(c, phi).m_blk - 0.75 * 2 * 0.3) <= 1e-12);
    MartingaleValue zero = evaluate_martingale(c, Eigen::Vector3d::Zero());
    CHECK(zero.m == 0.0);
    CHECK(zero.m_blk == 0.0);
    CHECK(zero.m_bdr == 0.0);
    try {
        evaluate_martingale(c, Eigen::Vector2d(1, 2));
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("coefficients: oracle, mass, support") {
    Rng rng = make_rng(3);
    for (int t = 0; t < 30; ++t) {
        Graph g = gen_random_regular(10 + 2 * t, 3, rng());
        auto [k, kp] = nested_pair(g.n(), rng);
        MartingaleCoefficients c = martingale_coefficients(g, kp);
        CHECK((c.a - oracle_a(g, kp)).cwiseAbs().maxCoeff() <= 1e-9 * c.a.cwiseAbs().maxCoeff());
        CHECK(std::abs(c.a.sum() - c.capacity()) <= 1e-10 * (1 + c.capacity()));
        CHECK(c.a.minCoeff() >= 0.0);
        CHECK((c.a - c.a_blk - c.a_bdr).cwiseAbs().maxCoeff() == 0.0);
        std::vector<char> in(g.n(), 0);
        for (Vertex x : kp) in[x] = 1;
        for (Vertex x = 0; x < g.n(); ++x) {
            if (!in[x]) {
                CHECK(c.a(x) == 0.0);
                CHECK(c.a_bdr(x) == 0.0);
                continue;
            }
            bool boundary = false;
            for (const Neighbor& nb : g.neighbors(x)) boundary = boundary || !in[nb.vertex];
            if (!boundary) CHECK(c.a_bdr(x) == 0.0);
        }
    }
}

TEST_CASE("exact second-moment identities") {
    Rng rng = make_rng(17);
    for (int t = 0; t < 50; ++t) {
        Graph g = (t % 4 == 3) ? gen_cycle(8 + t) : gen_random_regular(8 + 2 * t, 3 + (t % 2), rng());
        Covariance cov = covariance_matrix(g);
        auto [k, kp] = nested_pair(g.n(), rng);
        MartingaleCoefficients c = martingale_coefficients(g, k);
        MartingaleCoefficients cp = martingale_coefficients(g, kp);
        const double var = c.a.dot(cov.sigma * c.a);
        const double varp = cp.a.dot(cov.sigma * cp.a);
        CHECK(std::abs(var - c.capacity()) <= 1e-8 * c.capacity());
        CHECK(std::abs(varp - cp.capacity()) <= 1e-8 * cp.capacity());
        const Eigen::VectorXd diff = cp.a - c.a;
        CHECK(std::abs(c.a.dot(cov.sigma * diff)) <= 1e-8 * std::sqrt(var * varp));
        const double dvar = diff.dot(cov.sigma * diff);
        const double dq = cp.capacity() - c.capacity();
        CHECK(std::abs(dvar - dq) <= 1e-8 * dq);
    }
}

TEST_CASE("level bound") {
    MartingaleCoefficients c = martingale_coefficients(gen_complete(2), std::vector<Vertex>{0});
    for (double h : {-1.0, 0.0, 0.4}) CHECK(level_bound_check(c, Eigen::Vector2d(h + 0.3, -h - 0.3), h));
    Graph g = gen_random_regular(60, 3, 1);
    Sampler s(g, SamplerRoute::Eigen);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        FieldSample f = s.sample(seed);
        std::vector<Vertex> above;
        for (Vertex x = 0; x < g.n() && above.size() < 10; ++x)
            if (f.phi(x) >= 0) above.push_back(x);
        if (above.empty()) continue;
        MartingaleCoefficients ca = martingale_coefficients(g, above);
        CHECK(evaluate_martingale(ca, f).m >= 0.0);
        CHECK(level_bound_check(ca, f.phi, 0.0));
        CHECK(level_bound_check(ca, f.phi, f.phi(above[0])));
    }
}

TEST_CASE("Monte Carlo martingale regression") {
    Graph g = gen_random_regular(40, 3, 7);
    std::vector<Vertex> k = {0, 1, 2}, kp = {0, 1, 2, 5, 9, 17, 30};
    MartingaleCoefficients c = martingale_coefficients(g, k);
    MartingaleCoefficients cp = martingale_coefficients(g, kp);
    Sampler s(g, SamplerRoute::Eigen);
    const int count = 100000;
    std::vector<double> xs(count), ys(count);
    for (int i = 0; i < count; ++i) {
        FieldSample f = s.sample(derive_seed(123, {static_cast<std::uint64_t>(i)}));
        xs[i] = evaluate_martingale(c, f).m;
        ys[i] = evaluate_martingale(cp, f).m - xs[i];
    }
    double mx = 0, my = 0;
    for (int i = 0; i < count; ++i) mx += xs[i], my += ys[i];
    mx /= count;
    my /= count;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < count; ++i) sxx += (xs[i] - mx) * (xs[i] - mx), sxy += (xs[i] - mx) * (ys[i] - my);
    const double slope = sxy / sxx;
    double sse = 0;
    for (int i = 0; i < count; ++i) {
        const double r = ys[i] - my - slope * (xs[i] - mx);
        sse += r * r;
    }
    const double se = std::sqrt(sse / (count - 2) / sxx);
    CHECK(std::abs(slope) <= 3 * se);
    CHECK(std::abs(sxx / (count - 1) - c.capacity()) <= 0.03 * c.capacity());
}

TEST_CASE("exploration with everything open") {
    Graph g = gen_random_regular(20, 3, 2);
    Sampler s(g, SamplerRoute::Eigen);
    FieldSample f = s.sample(1);
    OpenEdgeSet all = percolate(g, f, -1e6, 1);
    ExplorationTrace t = explore(g, f, all, 4);
    CHECK(t.steps.size() == 19);
    CHECK(t.held_out == 19);
    CHECK(t.steps[0].added_vertex == 4);
    CHECK(t.steps[0].q == 0.0);
    std::set<Vertex> seen;
    for (const TraceStep& st : t.steps) {
        CHECK(st.cluster_step);
        CHECK(st.added_vertex != t.held_out);
        seen.insert(st.added_vertex);
    }
    CHECK(seen.size() == 19);
    for (size_t i = 1; i < t.steps.size(); ++i) CHECK(t.steps[i].q >= t.steps[i - 1].q);
    // each step's values equal a fresh evaluation on K_i
    for (size_t i : {size_t(0), size_t(7), size_t(18)}) {
        MartingaleCoefficients c = martingale_coefficients(g, t.k_set(i));
        CHECK(std::abs(evaluate_martingale(c, f).m - t.steps[i].m) <= 1e-10);
    }
}

TEST_CASE("exploration with nothing open jumps along G") {
    Graph g = gen_cycle(8);
    FieldSample f;
    f.phi = Eigen::VectorXd::Zero(8);
    OpenEdgeSet none;
    none.open.assign(g.num_edges(), 0);
    ExplorationTrace t = explore(g, f, none, 7);
    CHECK(t.held_out == 6);
    std::vector<Vertex> order;
    for (const TraceStep& st : t.steps) order.push_back(st.added_vertex);
    CHECK(order == std::vector<Vertex>{7, 0, 1, 2, 3, 4, 5});
    for (size_t i = 1; i < t.steps.size(); ++i) CHECK_FALSE(t.steps[i].cluster_step);
}

TEST_CASE("open frontier is preferred over graph frontier") {
    Graph p = gen_path(5);
    FieldSample f;
    f.phi = Eigen::VectorXd::Ones(5);
    OpenEdgeSet o;
    o.open.assign(p.num_edges(), 0);
    o.open[2] = 1;  // edge (2,3)
    ExplorationTrace t = explore(p, f, o, 2);
    std::vector<Vertex> order;
    for (const TraceStep& st : t.steps) order.push_back(st.added_vertex);
    CHECK(order == std::vector<Vertex>{2, 3, 1, 0});
    CHECK(t.steps[1].cluster_step);
    CHECK_FALSE(t.steps[2].cluster_step);
}

TEST_CASE("time change and trace CSV") {
    Graph g = gen_complete(4);
    Sampler s(g, SamplerRoute::Eigen);
    FieldSample f = s.sample(2);
    ExplorationTrace t = explore(g, f, percolate(g, f, 0.0, 2), 0);
    auto tc = time_change(t);
    REQUIRE(tc.size() == t.steps.size());
    CHECK(tc[0].first == 0.0);
    for (size_t i = 1; i < tc.size(); ++i) CHECK(tc[i].first > tc[i - 1].first);

    ExplorationTrace single;
    single.steps.push_back(TraceStep{0, true, 0.0, 1.5, 1.0, 0.5});
    CHECK(time_change(single) == std::vector<std::pair<double, double>>{{0.0, 1.5}});
    std::ostringstream os;
    write_trace_csv(os, single);
    CHECK(os.str() == "step,added_vertex,cluster_step,q,m,m_blk,m_bdr\n0,0,1,0,1.5,1,0.5\n");
}

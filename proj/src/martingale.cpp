#include "gffperc/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <string>

#include "gffperc/error.hpp"
#include "gffperc/potential.hpp"

namespace gffperc {

namespace {

// One SPD solve w = L_{UU}^{-1} d_U gives both nu_K = 2|E| / d_U^T w and the
// hitting mass sum_{y in U} d_y P_y[X_{H_K} = x] = (A_{KU} w)_x.
MartingaleCoefficients coefficients_for(const Graph& g, const std::vector<Vertex>& k, const std::vector<char>& in_k) {
    const int n = g.n();
    std::vector<int> index(n, -1);
    std::vector<Vertex> outside;
    outside.reserve(n - k.size());
    for (Vertex x = 0; x < n; ++x)
        if (!in_k[x]) {
            index[x] = static_cast<int>(outside.size());
            outside.push_back(x);
        }
    const int u = static_cast<int>(outside.size());
    Eigen::MatrixXd lap_uu = Eigen::MatrixXd::Zero(u, u);
    Eigen::VectorXd d_u(u);
    for (int i = 0; i < u; ++i) {
        Vertex x = outside[i];
        lap_uu(i, i) = g.deg(x);
        d_u[i] = g.deg(x);
        for (const Neighbor& nb : g.neighbors(x))
            if (!in_k[nb.vertex]) lap_uu(i, index[nb.vertex]) -= 1.0;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(lap_uu);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "Dirichlet Laplacian not SPD");
    const Eigen::VectorXd w = llt.solve(d_u);

    MartingaleCoefficients c;
    c.k_set = k;
    c.two_m = static_cast<double>(g.two_m());
    c.nu = c.two_m / d_u.dot(w);
    c.a = Eigen::VectorXd::Zero(n);
    c.a_blk = Eigen::VectorXd::Zero(n);
    for (Vertex x : k) {
        double mass = g.deg(x);
        for (const Neighbor& nb : g.neighbors(x))
            if (!in_k[nb.vertex]) mass += w[index[nb.vertex]];
        c.a[x] = c.nu * mass;
        c.a_blk[x] = c.nu * g.deg(x);
    }
    c.a_bdr = c.a - c.a_blk;
    return c;
}

}  // namespace

MartingaleCoefficients martingale_coefficients(const Graph& g, std::span<const Vertex> k) {
    const std::vector<Vertex> set = normalize_vertex_set(g, k);
    std::vector<char> in_k(g.n(), 0);
    for (Vertex x : set) in_k[x] = 1;
    return coefficients_for(g, set, in_k);
}

MartingaleValue evaluate_martingale(const MartingaleCoefficients& c, const Eigen::VectorXd& phi) {
    if (phi.size() != c.a.size()) throw Error(ErrorCode::DimensionMismatch, "field length does not match coefficients");
    MartingaleValue v;
    v.m_blk = c.a_blk.dot(phi);
    v.m_bdr = c.a_bdr.dot(phi);
    v.m = v.m_blk + v.m_bdr;
    return v;
}

bool level_bound_check(const MartingaleCoefficients& c, const Eigen::VectorXd& phi, double h) {
    for (Vertex x : c.k_set)
        if (phi[x] < h) return true;
    const double m = evaluate_martingale(c, phi).m;
    const double bound = h * c.capacity();
    return m >= bound - 1e-9 * (1.0 + std::abs(m) + std::abs(bound));
}

std::vector<Vertex> ExplorationTrace::k_set(size_t i) const {
    if (i >= steps.size()) throw Error(ErrorCode::PreconditionError, "trace step out of range");
    std::vector<Vertex> k;
    k.reserve(i + 1);
    for (size_t j = 0; j <= i; ++j) k.push_back(steps[j].added_vertex);
    std::sort(k.begin(), k.end());
    return k;
}

ExplorationTrace explore(const Graph& g, const FieldSample& f, const OpenEdgeSet& o, Vertex v) {
    const int n = g.n();
    if (v < 0 || v >= n) throw Error(ErrorCode::PreconditionError, "start vertex out of range");
    if (f.phi.size() != n || static_cast<int>(o.open.size()) != g.num_edges())
        throw Error(ErrorCode::DimensionMismatch, "field or edge set does not match the graph");

    ExplorationTrace t;
    t.start = v;
    t.level = o.h;
    t.seed = f.seed;
    t.held_out = v == n - 1 ? n - 2 : n - 1;

    std::vector<char> in_k(n, 0);
    std::vector<Vertex> k;
    std::set<Vertex> open_frontier, graph_frontier;
    double initial_capacity = 0.0;

    auto add = [&](Vertex x, bool cluster_step) {
        in_k[x] = 1;
        k.insert(std::upper_bound(k.begin(), k.end(), x), x);
        open_frontier.erase(x);
        graph_frontier.erase(x);
        for (const Neighbor& nb : g.neighbors(x)) {
            if (in_k[nb.vertex] || nb.vertex == t.held_out) continue;
            graph_frontier.insert(nb.vertex);
            if (o.open[nb.edge]) open_frontier.insert(nb.vertex);
        }
        const MartingaleCoefficients c = coefficients_for(g, k, in_k);
        const MartingaleValue mv = evaluate_martingale(c, f.phi);
        TraceStep step;
        step.added_vertex = x;
        step.cluster_step = cluster_step;
        if (t.steps.empty()) initial_capacity = c.capacity();
        step.q = c.capacity() - initial_capacity;
        step.m = mv.m;
        step.m_blk = mv.m_blk;
        step.m_bdr = mv.m_bdr;
        t.steps.push_back(step);
    };

    add(v, true);
    while (static_cast<int>(k.size()) < n - 1) {
        if (!open_frontier.empty()) {
            add(*open_frontier.begin(), true);
        } else if (!graph_frontier.empty()) {
            add(*graph_frontier.begin(), false);
        } else {
            // Only reachable when the held-out vertex separates K from the rest.
            Vertex next = 0;
            while (in_k[next] || next == t.held_out) ++next;
            add(next, false);
        }
    }
    return t;
}

std::vector<std::pair<double, double>> time_change(const ExplorationTrace& t) {
    std::vector<std::pair<double, double>> out;
    out.reserve(t.steps.size());
    for (const TraceStep& s : t.steps) out.emplace_back(s.q, s.m);
    return out;
}

void write_trace_csv(std::ostream& os, const ExplorationTrace& t) {
    os << "step,added_vertex,cluster_step,q,m,m_blk,m_bdr\n";
    os.precision(17);
    for (size_t i = 0; i < t.steps.size(); ++i) {
        const TraceStep& s = t.steps[i];
        os << i << ',' << s.added_vertex << ',' << (s.cluster_step ? 1 : 0) << ',' << s.q << ',' << s.m << ','
           << s.m_blk << ',' << s.m_bdr << '\n';
    }
}

}  // namespace gffperc

#include "gffperc/potential.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "gffperc/error.hpp"
#include "gffperc/gff.hpp"
#include "gffperc/linalg.hpp"

namespace gffperc {

std::string_view to_string(CapacityRoute r) {
    return r == CapacityRoute::GreenSum ? "green-sum" : "dirichlet";
}

std::vector<Vertex> normalize_vertex_set(const Graph& g, std::span<const Vertex> k) {
    std::vector<Vertex> out(k.begin(), k.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.empty()) throw Error(ErrorCode::BadK, "K must be nonempty");
    if (out.front() < 0 || out.back() >= g.n()) throw Error(ErrorCode::BadK, "vertex in K out of range");
    if (static_cast<int>(out.size()) == g.n()) throw Error(ErrorCode::BadK, "K = V has infinite capacity");
    return out;
}

namespace {

struct Partition {
    std::vector<Vertex> inside, outside;
    std::vector<int> index;  // position within its own part
    std::vector<char> in_k;
};

Partition split(const Graph& g, const std::vector<Vertex>& k) {
    Partition p;
    p.in_k.assign(g.n(), 0);
    p.index.assign(g.n(), -1);
    for (Vertex x : k) p.in_k[x] = 1;
    for (Vertex x = 0; x < g.n(); ++x) {
        auto& part = p.in_k[x] ? p.inside : p.outside;
        p.index[x] = static_cast<int>(part.size());
        part.push_back(x);
    }
    return p;
}

// Laplacian restricted to V \ K (the Dirichlet Laplacian).
Eigen::MatrixXd dirichlet_laplacian(const Graph& g, const Partition& p) {
    const int u = static_cast<int>(p.outside.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(u, u);
    for (int i = 0; i < u; ++i) {
        Vertex x = p.outside[i];
        a(i, i) = g.deg(x);
        for (const Neighbor& nb : g.neighbors(x))
            if (!p.in_k[nb.vertex]) a(i, p.index[nb.vertex]) -= 1.0;
    }
    return a;
}

// Adjacency block A(V\K, K).
Eigen::MatrixXd boundary_coupling(const Graph& g, const Partition& p) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p.outside.size(), p.inside.size());
    for (size_t i = 0; i < p.outside.size(); ++i)
        for (const Neighbor& nb : g.neighbors(p.outside[i]))
            if (p.in_k[nb.vertex]) c(i, p.index[nb.vertex]) += 1.0;
    return c;
}

// Solves min f^T L f s.t. f|_K = values, deg^T f = 0. Returns f and nu with
// (L f)(x) = -nu d_x off K.
std::pair<Eigen::VectorXd, double> solve_kkt(const Graph& g, const std::vector<Vertex>& k,
                                             const Eigen::VectorXd& values) {
    const int n = g.n();
    const int nk = static_cast<int>(k.size());
    const int dim = n + nk + 1;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
    kkt.topLeftCorner(n, n) = 2.0 * g.laplacian_dense();
    for (int j = 0; j < nk; ++j) kkt(k[j], n + j) = kkt(n + j, k[j]) = 1.0;
    for (int x = 0; x < n; ++x) kkt(x, n + nk) = kkt(n + nk, x) = g.deg(x);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    rhs.segment(n, nk) = values;

    double rel_residual = 0.0;
    Eigen::VectorXd z = linalg::solve_refined(kkt, rhs, rel_residual);
    if (!z.allFinite() || rel_residual > 1e-11)
        throw Error(ErrorCode::SolverFailure, "KKT residual " + std::to_string(rel_residual) + " above 1e-11");
    return {z.head(n), 0.5 * z[n + nk]};
}

}  // namespace

KilledGreen killed_green(const Graph& g, std::span<const Vertex> k) {
    KilledGreen kg;
    kg.k_set = normalize_vertex_set(g, k);
    const Partition p = split(g, kg.k_set);
    Eigen::LLT<Eigen::MatrixXd> llt(dirichlet_laplacian(g, p));
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "Dirichlet Laplacian not SPD");
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p.outside.size(), p.outside.size()));
    kg.green = Eigen::MatrixXd::Zero(g.n(), g.n());
    for (size_t i = 0; i < p.outside.size(); ++i)
        for (size_t j = 0; j < p.outside.size(); ++j) kg.green(p.outside[i], p.outside[j]) = inv(i, j);
    kg.green = 0.5 * (kg.green + kg.green.transpose()).eval();
    return kg;
}

HittingDistribution hitting_distribution(const Graph& g, std::span<const Vertex> k) {
    HittingDistribution hd;
    hd.k_set = normalize_vertex_set(g, k);
    const Partition p = split(g, hd.k_set);
    double rel_residual = 0.0;
    const Eigen::MatrixXd off = linalg::solve_refined(dirichlet_laplacian(g, p), boundary_coupling(g, p), rel_residual);
    if (!off.allFinite() || rel_residual > 1e-11) throw Error(ErrorCode::SolverFailure, "harmonic solve failed");
    hd.probabilities = Eigen::MatrixXd::Zero(g.n(), hd.k_set.size());
    for (size_t j = 0; j < p.inside.size(); ++j) hd.probabilities(p.inside[j], j) = 1.0;
    for (size_t i = 0; i < p.outside.size(); ++i) hd.probabilities.row(p.outside[i]) = off.row(i);
    return hd;
}

HittingDistribution hitting_distribution_last_exit(const Graph& g, const KilledGreen& kg) {
    HittingDistribution hd;
    hd.k_set = kg.k_set;
    const int nk = static_cast<int>(kg.k_set.size());
    Eigen::MatrixXd adj_to_k = Eigen::MatrixXd::Zero(g.n(), nk);
    for (int j = 0; j < nk; ++j)
        for (const Neighbor& nb : g.neighbors(kg.k_set[j])) adj_to_k(nb.vertex, j) += 1.0;
    hd.probabilities = kg.green * adj_to_k;  // green vanishes on K rows and columns
    for (int j = 0; j < nk; ++j) {
        hd.probabilities.row(kg.k_set[j]).setZero();
        hd.probabilities(kg.k_set[j], j) = 1.0;
    }
    return hd;
}

CapacityResult capacity_green(const Graph& g, std::span<const Vertex> k) {
    const KilledGreen kg = killed_green(g, k);
    const Eigen::VectorXd deg = g.degree_vector();
    const Eigen::VectorXd green_deg = kg.green * deg;  // sum_y d_y g(y, x), by symmetry
    const double two_m = static_cast<double>(g.two_m());

    CapacityResult r;
    r.k_set = kg.k_set;
    r.route = CapacityRoute::GreenSum;
    r.nu = two_m / deg.dot(green_deg);
    r.cap = two_m * r.nu;
    r.f_k = Eigen::VectorXd::Ones(g.n()) - r.nu * green_deg;
    return r;
}

CapacityResult capacity_dirichlet(const Graph& g, std::span<const Vertex> k) {
    CapacityResult r;
    r.k_set = normalize_vertex_set(g, k);
    r.route = CapacityRoute::Dirichlet;
    r.f_k = solve_kkt(g, r.k_set, Eigen::VectorXd::Ones(r.k_set.size())).first;
    r.cap = dirichlet_pairing(g, r.f_k, r.f_k);
    r.nu = r.cap / static_cast<double>(g.two_m());
    return r;
}

HarmonicExtension harmonic_extension(const Graph& g, std::span<const Vertex> k, const std::map<Vertex, double>& boundary) {
    HarmonicExtension h;
    h.k_set = normalize_vertex_set(g, k);
    h.boundary.resize(h.k_set.size());
    for (size_t j = 0; j < h.k_set.size(); ++j) {
        auto it = boundary.find(h.k_set[j]);
        if (it == boundary.end())
            throw Error(ErrorCode::BadK, "boundary value missing for vertex " + std::to_string(h.k_set[j]));
        h.boundary[j] = it->second;
    }

    auto [f_kkt, nu_kkt] = solve_kkt(g, h.k_set, h.boundary);

    // Explicit route: f = -nu_phi * G d + E_x[phi(X_{H_K})].
    const KilledGreen kg = killed_green(g, h.k_set);
    const HittingDistribution hd = hitting_distribution(g, h.k_set);
    const Eigen::VectorXd deg = g.degree_vector();
    const Eigen::VectorXd green_deg = kg.green * deg;
    const Eigen::VectorXd harmonic = hd.probabilities * h.boundary;
    const double nu_formula = deg.dot(harmonic) / deg.dot(green_deg);
    const Eigen::VectorXd f_formula = harmonic - nu_formula * green_deg;

    const double scale = 1.0 + f_kkt.cwiseAbs().maxCoeff() + std::abs(nu_kkt);
    h.route_gap = std::max((f_kkt - f_formula).cwiseAbs().maxCoeff(), std::abs(nu_kkt - nu_formula));
    if (h.route_gap > kRouteTolerance * scale)
        throw Error(ErrorCode::RouteMismatch, "KKT and Green-formula extensions differ by " + std::to_string(h.route_gap));
    h.f_phi = std::move(f_kkt);
    h.nu_phi = nu_kkt;
    return h;
}

int component_count(const Graph& g, std::span<const Vertex> k) {
    std::vector<int> parent(g.n());
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<char> in(g.n(), 0);
    for (Vertex x : k) in[x] = 1;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    int components = 0;
    for (Vertex x = 0; x < g.n(); ++x) components += in[x];
    for (auto [u, v] : g.edges()) {
        if (!in[u] || !in[v]) continue;
        int ru = find(u), rv = find(v);
        if (ru != rv) {
            parent[ru] = rv;
            --components;
        }
    }
    return components;
}

}  // namespace gffperc

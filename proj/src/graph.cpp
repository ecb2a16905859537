#include "gffperc/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "gffperc/error.hpp"
#include "gffperc/linalg.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SelfLoop: return "SelfLoop";
        case ErrorCode::DuplicateEdge: return "DuplicateEdge";
        case ErrorCode::Disconnected: return "Disconnected";
        case ErrorCode::TooSmall: return "TooSmall";
        case ErrorCode::PreconditionError: return "PreconditionError";
        case ErrorCode::GenerationFailed: return "GenerationFailed";
        case ErrorCode::BadParams: return "BadParams";
        case ErrorCode::SolverFailure: return "SolverFailure";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::FactorizationFailure: return "FactorizationFailure";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::BadK: return "BadK";
        case ErrorCode::RouteMismatch: return "RouteMismatch";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::EmptyInput: return "EmptyInput";
    }
    return "Unknown";
}

std::string_view to_string(SpectralMethod m) {
    switch (m) {
        case SpectralMethod::Auto: return "auto";
        case SpectralMethod::Dense: return "dense-eigensolve";
        case SpectralMethod::Iterative: return "iterative";
    }
    return "unknown";
}

bool is_connected(int n, std::span<const Edge> edges) {
    if (n <= 0) return false;
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    int components = n;
    for (auto [u, v] : edges) {
        int ru = find(u), rv = find(v);
        if (ru != rv) {
            parent[ru] = rv;
            --components;
        }
    }
    return components == 1;
}

Graph::Graph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    if (n_ < 2) throw Error(ErrorCode::TooSmall, "graph needs at least 2 vertices, got " + std::to_string(n_));
    for (auto& [u, v] : edges_) {
        if (u < 0 || v < 0 || u >= n_ || v >= n_)
            throw Error(ErrorCode::ParseError, "vertex index out of range in edge (" + std::to_string(u) + "," +
                                                   std::to_string(v) + ")");
        if (u == v) throw Error(ErrorCode::SelfLoop, "self-loop at vertex " + std::to_string(u));
        if (u > v) std::swap(u, v);
    }
    std::sort(edges_.begin(), edges_.end());
    auto dup = std::adjacent_find(edges_.begin(), edges_.end());
    if (dup != edges_.end())
        throw Error(ErrorCode::DuplicateEdge,
                    "edge (" + std::to_string(dup->first) + "," + std::to_string(dup->second) + ") repeated");
    if (!is_connected(n_, edges_)) throw Error(ErrorCode::Disconnected, "graph is not connected");

    deg_.assign(n_, 0);
    for (auto [u, v] : edges_) {
        ++deg_[u];
        ++deg_[v];
    }
    d_max_ = *std::max_element(deg_.begin(), deg_.end());
    d_min_ = *std::min_element(deg_.begin(), deg_.end());

    offsets_.assign(n_ + 1, 0);
    for (int x = 0; x < n_; ++x) offsets_[x + 1] = offsets_[x] + deg_[x];
    adj_.resize(offsets_[n_]);
    std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
    for (int e = 0; e < num_edges(); ++e) {
        auto [u, v] = edges_[e];
        adj_[fill[u]++] = {v, e};
        adj_[fill[v]++] = {u, e};
    }
}

Eigen::VectorXd Graph::degree_vector() const {
    Eigen::VectorXd d(n_);
    for (int x = 0; x < n_; ++x) d[x] = deg_[x];
    return d;
}

Eigen::MatrixXd Graph::laplacian_dense() const {
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n_, n_);
    for (auto [u, v] : edges_) {
        lap(u, v) -= 1.0;
        lap(v, u) -= 1.0;
    }
    for (int x = 0; x < n_; ++x) lap(x, x) = deg_[x];
    return lap;
}

Eigen::SparseMatrix<double> Graph::laplacian_sparse() const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n_ + 2 * edges_.size());
    for (int x = 0; x < n_; ++x) trips.emplace_back(x, x, deg_[x]);
    for (auto [u, v] : edges_) {
        trips.emplace_back(u, v, -1.0);
        trips.emplace_back(v, u, -1.0);
    }
    Eigen::SparseMatrix<double> lap(n_, n_);
    lap.setFromTriplets(trips.begin(), trips.end());
    return lap;
}

Graph Graph::relabeled(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != n_) throw Error(ErrorCode::DimensionMismatch, "permutation size");
    std::vector<Edge> out;
    out.reserve(edges_.size());
    for (auto [u, v] : edges_) out.emplace_back(perm[u], perm[v]);
    return Graph(n_, std::move(out));
}

Graph build_from_edge_list(std::string_view text) {
    std::vector<Edge> edges;
    int max_vertex = -1;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
        size_t b = 0;
        while (b < line.size() && is_space(line[b])) ++b;
        line.remove_prefix(b);
        if (line.empty() || line.front() == '#') continue;

        int vals[2];
        const char* p = line.data();
        const char* last = line.data() + line.size();
        for (int i = 0; i < 2; ++i) {
            while (p < last && is_space(*p)) ++p;
            auto [next, ec] = std::from_chars(p, last, vals[i]);
            if (ec != std::errc() || vals[i] < 0)
                throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected two vertex indices");
            p = next;
        }
        while (p < last && is_space(*p)) ++p;
        if (p != last) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": trailing characters");
        if (vals[0] == vals[1]) throw Error(ErrorCode::SelfLoop, "line " + std::to_string(line_no));
        edges.emplace_back(vals[0], vals[1]);
        max_vertex = std::max({max_vertex, vals[0], vals[1]});
        if (end == text.size()) break;
    }
    return Graph(max_vertex + 1, std::move(edges));
}

Graph read_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return build_from_edge_list(ss.str());
}

void write_edge_list(std::ostream& os, const Graph& g) {
    os << "# n=" << g.n() << " m=" << g.num_edges() << "\n";
    for (auto [u, v] : g.edges()) os << u << ' ' << v << '\n';
}

Graph gen_random_regular(int n, int d, std::uint64_t seed, int max_attempts) {
    if (d < 3 || n <= d || (static_cast<long long>(n) * d) % 2 != 0)
        throw Error(ErrorCode::PreconditionError,
                    "random regular graph needs d >= 3, n > d and n*d even (n=" + std::to_string(n) +
                        ", d=" + std::to_string(d) + ")");
    Rng rng = make_rng(seed);
    std::vector<int> stubs(static_cast<size_t>(n) * d);
    for (int x = 0; x < n; ++x)
        for (int k = 0; k < d; ++k) stubs[static_cast<size_t>(x) * d + k] = x;

    std::vector<Edge> edges(stubs.size() / 2);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::shuffle(stubs.begin(), stubs.end(), rng);
        bool simple = true;
        for (size_t i = 0; i < edges.size(); ++i) {
            int u = stubs[2 * i], v = stubs[2 * i + 1];
            if (u == v) {
                simple = false;
                break;
            }
            edges[i] = {std::min(u, v), std::max(u, v)};
        }
        if (!simple) continue;
        std::vector<Edge> sorted = edges;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
        if (!is_connected(n, sorted)) continue;
        return Graph(n, std::move(sorted));
    }
    throw Error(ErrorCode::GenerationFailed,
                "no simple connected pairing after " + std::to_string(max_attempts) + " attempts");
}

Graph gen_cycle(int n) {
    if (n < 3) throw Error(ErrorCode::BadParams, "cycle needs n >= 3");
    std::vector<Edge> edges;
    for (int x = 0; x < n; ++x) edges.emplace_back(x, (x + 1) % n);
    return Graph(n, std::move(edges));
}

Graph gen_path(int n) {
    if (n < 2) throw Error(ErrorCode::BadParams, "path needs n >= 2");
    std::vector<Edge> edges;
    for (int x = 0; x + 1 < n; ++x) edges.emplace_back(x, x + 1);
    return Graph(n, std::move(edges));
}

Graph gen_complete(int n) {
    if (n < 2) throw Error(ErrorCode::BadParams, "complete graph needs n >= 2");
    std::vector<Edge> edges;
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) edges.emplace_back(x, y);
    return Graph(n, std::move(edges));
}

Graph gen_torus(int side, int dim) {
    if (side < 3 || dim < 1) throw Error(ErrorCode::BadParams, "torus needs side >= 3 and dim >= 1");
    long long total = 1;
    for (int k = 0; k < dim; ++k) {
        total *= side;
        if (total > (1LL << 28)) throw Error(ErrorCode::BadParams, "torus too large");
    }
    const int n = static_cast<int>(total);
    std::vector<Edge> edges;
    edges.reserve(static_cast<size_t>(n) * dim);
    for (int x = 0; x < n; ++x) {
        int stride = 1;
        for (int k = 0; k < dim; ++k) {
            int coord = (x / stride) % side;
            int y = x + (((coord + 1) % side) - coord) * stride;
            edges.emplace_back(x, y);
            stride *= side;
        }
    }
    return Graph(n, std::move(edges));
}

Graph gen_named(std::string_view family, const std::map<std::string, int>& params) {
    auto get = [&](const std::string& key) {
        auto it = params.find(key);
        if (it == params.end()) throw Error(ErrorCode::BadParams, std::string(family) + " requires parameter " + key);
        return it->second;
    };
    if (family == "cycle") return gen_cycle(get("n"));
    if (family == "path") return gen_path(get("n"));
    if (family == "complete") return gen_complete(get("n"));
    if (family == "torus") return gen_torus(get("side"), get("dim"));
    throw Error(ErrorCode::BadParams, "unknown graph family '" + std::string(family) + "'");
}

SpectralReport spectral_gap(const Graph& g, SpectralMethod method, bool with_vector) {
    if (method == SpectralMethod::Auto)
        method = g.n() <= kDenseThreshold ? SpectralMethod::Dense : SpectralMethod::Iterative;

    SpectralReport report;
    report.method = method;
    const Eigen::VectorXd deg = g.degree_vector();

    if (method == SpectralMethod::Dense) {
        // Symmetric normalization D^{-1/2} L D^{-1/2} has the same spectrum as (L, D).
        const Eigen::VectorXd inv_sqrt = deg.cwiseSqrt().cwiseInverse();
        const Eigen::MatrixXd normalized = inv_sqrt.asDiagonal() * g.laplacian_dense() * inv_sqrt.asDiagonal();
        if (!with_vector) {
            report.lambda_star = linalg::symmetric_eigenvalues(normalized)[1];
            return report;
        }
        Eigen::VectorXd values;
        Eigen::MatrixXd vectors;
        linalg::symmetric_eigen(normalized, values, vectors);
        report.lambda_star = values[1];
        Eigen::VectorXd psi = inv_sqrt.cwiseProduct(vectors.col(1));
        psi /= std::sqrt(psi.dot(deg.cwiseProduct(psi)));
        report.eigenvector = psi;
        report.residual = (g.laplacian_sparse() * psi - report.lambda_star * deg.cwiseProduct(psi)).norm();
        return report;
    }

    auto pair = linalg::smallest_nonzero_eigenpair(g.laplacian_sparse(), deg);
    if (!pair.converged)
        throw Error(ErrorCode::SolverFailure,
                    "Lanczos did not converge in " + std::to_string(pair.iterations) + " iterations");
    report.lambda_star = pair.value;
    report.residual = pair.residual;
    report.eigenvector = std::move(pair.vector);
    return report;
}

double laplacian_fiedler_value(const Graph& g) {
    if (g.n() <= 512) return linalg::symmetric_eigenvalues(g.laplacian_dense())[1];
    auto pair = linalg::smallest_nonzero_eigenpair(g.laplacian_sparse(), Eigen::VectorXd::Ones(g.n()), 1e-8);
    if (!pair.converged) throw Error(ErrorCode::SolverFailure, "Lanczos did not converge for Laplacian gap");
    return pair.value;
}

long long edge_boundary(const Graph& g, std::span<const Vertex> s) {
    std::vector<char> in(g.n(), 0);
    for (Vertex x : s) {
        if (x < 0 || x >= g.n()) throw Error(ErrorCode::BadParams, "vertex out of range");
        in[x] = 1;
    }
    long long count = 0;
    for (auto [u, v] : g.edges()) count += in[u] != in[v];
    return count;
}

}  // namespace gffperc

#include "gffperc/gff.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "gffperc/error.hpp"
#include "gffperc/linalg.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

std::string_view to_string(SamplerRoute r) {
    switch (r) {
        case SamplerRoute::Eigen: return "eigen";
        case SamplerRoute::Cholesky: return "cholesky";
        case SamplerRoute::Iterative: return "iterative";
    }
    return "unknown";
}

SamplerRoute parse_sampler_route(std::string_view s) {
    if (s == "eigen") return SamplerRoute::Eigen;
    if (s == "cholesky") return SamplerRoute::Cholesky;
    if (s == "iterative") return SamplerRoute::Iterative;
    throw Error(ErrorCode::BadParams, "unknown sampler route '" + std::string(s) + "'");
}

Covariance covariance_matrix(const Graph& g) {
    const int n = g.n();
    if (n > kDenseThreshold)
        throw Error(ErrorCode::TooLarge, "dense covariance limited to n <= " + std::to_string(kDenseThreshold));
    const Eigen::VectorXd deg = g.degree_vector();
    const double two_m = static_cast<double>(g.two_m());

    // L^+ = (L + J/n)^{-1} - J/n for a connected graph.
    Eigen::MatrixXd grounded = g.laplacian_dense().array() + 1.0 / n;
    Eigen::LLT<Eigen::MatrixXd> llt(grounded);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::FactorizationFailure, "grounded Laplacian not SPD");
    Eigen::MatrixXd pinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    pinv.array() -= 1.0 / n;

    // Q L^+ Q^T, Q = I - 1 deg^T / 2m.
    const Eigen::VectorXd u = pinv * deg / two_m;
    const double c = deg.dot(u) / two_m;
    Eigen::MatrixXd sigma = pinv;
    sigma.colwise() -= u;
    sigma.rowwise() -= u.transpose();
    sigma.array() += c;
    Covariance cov;
    cov.sigma = 0.5 * (sigma + sigma.transpose());
    return cov;
}

namespace {

Eigen::VectorXd chebyshev_coefficients(double lo, double hi, int degree) {
    const int nodes = degree + 1;
    Eigen::VectorXd fvals(nodes);
    for (int j = 0; j < nodes; ++j) {
        const double theta = std::numbers::pi * (j + 0.5) / nodes;
        const double x = 0.5 * (hi + lo) + 0.5 * (hi - lo) * std::cos(theta);
        fvals[j] = 1.0 / std::sqrt(x);
    }
    Eigen::VectorXd c(nodes);
    for (int k = 0; k < nodes; ++k) {
        double s = 0.0;
        for (int j = 0; j < nodes; ++j) s += fvals[j] * std::cos(k * std::numbers::pi * (j + 0.5) / nodes);
        c[k] = 2.0 * s / nodes;
    }
    c[0] *= 0.5;
    return c;
}

double chebyshev_eval(const Eigen::VectorXd& c, double lo, double hi, double x) {
    const double t = (2.0 * x - (hi + lo)) / (hi - lo);
    double b1 = 0.0, b2 = 0.0;
    for (Eigen::Index k = c.size() - 1; k >= 1; --k) {
        const double b0 = c[k] + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return c[0] + t * b1 - b2;
}

// Sup of the relative error |p(x) sqrt(x) - 1| on a grid dense near the low end.
double chebyshev_relative_error(const Eigen::VectorXd& c, double lo, double hi) {
    double worst = 0.0;
    const int samples = 4000;
    for (int i = 0; i <= samples; ++i) {
        const double frac = static_cast<double>(i) / samples;
        for (double x : {lo * std::pow(hi / lo, frac), lo + (hi - lo) * frac})
            worst = std::max(worst, std::abs(chebyshev_eval(c, lo, hi, x) * std::sqrt(x) - 1.0));
    }
    return worst;
}

}  // namespace

Sampler::Sampler(const Graph& g, SamplerRoute route)
    : route_(route), n_(g.n()), deg_(g.degree_vector()), two_m_(static_cast<double>(g.two_m())) {
    switch (route_) {
        case SamplerRoute::Eigen: {
            if (n_ > kDenseThreshold)
                throw Error(ErrorCode::TooLarge, "eigen sampler limited to n <= " + std::to_string(kDenseThreshold));
            Eigen::VectorXd values;
            Eigen::MatrixXd vectors;
            linalg::symmetric_eigen(g.laplacian_dense(), values, vectors);
            const double cutoff = 1e-9 * values[n_ - 1];
            int first = 0;
            while (first < n_ && values[first] <= cutoff) ++first;
            if (first != 1)
                throw Error(ErrorCode::FactorizationFailure,
                            "expected a one-dimensional Laplacian kernel, found " + std::to_string(first));
            eigenvalues_ = values.tail(n_ - 1);
            scaled_vectors_ = vectors.rightCols(n_ - 1) * eigenvalues_.cwiseSqrt().cwiseInverse().asDiagonal();
            break;
        }
        case SamplerRoute::Cholesky: {
            Covariance cov = covariance_matrix(g);
            const double ridge = 1e-12 * cov.sigma.trace() / n_;
            cov.sigma.diagonal().array() += ridge;
            Eigen::LLT<Eigen::MatrixXd> llt(cov.sigma);
            if (llt.info() != Eigen::Success)
                throw Error(ErrorCode::FactorizationFailure, "Cholesky of ridged covariance failed");
            chol_factor_ = llt.matrixL();
            break;
        }
        case SamplerRoute::Iterative: {
            lap_ = g.laplacian_sparse();
            lo_ = 0.999 * laplacian_fiedler_value(g);
            hi_ = 2.0 * g.d_max();  // Gershgorin bound on the largest Laplacian eigenvalue
            for (int degree = 8;; degree *= 2) {
                cheb_coeffs_ = chebyshev_coefficients(lo_, hi_, degree);
                cheb_error_ = chebyshev_relative_error(cheb_coeffs_, lo_, hi_);
                if (cheb_error_ <= kChebyshevTolerance) break;
                if (degree >= 16384)
                    throw Error(ErrorCode::FactorizationFailure,
                                "Chebyshev degree cap reached; spectral interval too wide");
            }
            break;
        }
    }
}

void Sampler::project_zero_average(Eigen::VectorXd& x) const { x.array() -= deg_.dot(x) / two_m_; }

Eigen::VectorXd Sampler::apply_chebyshev(const Eigen::VectorXd& v) const {
    // Clenshaw recurrence for p(T) v with T = (2L - (hi+lo) I) / (hi-lo).
    const double scale = 2.0 / (hi_ - lo_);
    const double offset = (hi_ + lo_) / (hi_ - lo_);
    auto apply_t = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return scale * (lap_ * x) - offset * x; };
    Eigen::VectorXd b1 = Eigen::VectorXd::Zero(v.size());
    Eigen::VectorXd b2 = Eigen::VectorXd::Zero(v.size());
    for (Eigen::Index k = cheb_coeffs_.size() - 1; k >= 1; --k) {
        Eigen::VectorXd b0 = cheb_coeffs_[k] * v + 2.0 * apply_t(b1) - b2;
        b2 = std::move(b1);
        b1 = std::move(b0);
    }
    return cheb_coeffs_[0] * v + apply_t(b1) - b2;
}

FieldSample Sampler::sample(std::uint64_t seed) const {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal;
    FieldSample out;
    out.seed = seed;
    out.route = route_;

    switch (route_) {
        case SamplerRoute::Eigen: {
            Eigen::VectorXd xi(n_ - 1);
            for (Eigen::Index k = 0; k < xi.size(); ++k) xi[k] = normal(rng);
            out.phi = scaled_vectors_ * xi;
            break;
        }
        case SamplerRoute::Cholesky: {
            Eigen::VectorXd xi(n_);
            for (int k = 0; k < n_; ++k) xi[k] = normal(rng);
            out.phi = chol_factor_ * xi;
            break;
        }
        case SamplerRoute::Iterative: {
            Eigen::VectorXd xi(n_);
            for (int k = 0; k < n_; ++k) xi[k] = normal(rng);
            xi.array() -= xi.mean();
            out.phi = apply_chebyshev(xi);
            break;
        }
    }
    project_zero_average(out.phi);
    return out;
}

double dirichlet_pairing(const Graph& g, std::span<const double> u, std::span<const double> v) {
    if (static_cast<int>(u.size()) != g.n() || static_cast<int>(v.size()) != g.n())
        throw Error(ErrorCode::DimensionMismatch, "vectors must have length n=" + std::to_string(g.n()));
    double total = 0.0;
    for (auto [x, y] : g.edges()) total += (u[x] - u[y]) * (v[x] - v[y]);
    return total;
}

double dirichlet_pairing(const Graph& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return dirichlet_pairing(g, std::span<const double>(u.data(), u.size()), std::span<const double>(v.data(), v.size()));
}

double degree_weighted_sum_variance(const Graph& g, const Covariance& cov, std::span<const Vertex> k,
                                    Vertex excluded) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(g.n());
    for (Vertex x : k)
        if (x != excluded) w[x] = g.deg(x);
    return w.dot(cov.sigma * w);
}

void write_field_csv(std::ostream& os, const FieldSample& f) {
    os << "vertex,phi\n";
    os.precision(17);
    for (Eigen::Index x = 0; x < f.phi.size(); ++x) os << x << ',' << f.phi[x] << '\n';
}

}  // namespace gffperc

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gffperc/graph.hpp"

namespace gffperc {

// Covariance of the zero-average free field: sigma = Q L^+ Q^T with
// Q = I - 1 deg^T / (2|E|). sigma * deg = 0 and, for deg^T f = 0,
// f^T L sigma L f = f^T L f.
struct Covariance {
    Eigen::MatrixXd sigma;
};

Covariance covariance_matrix(const Graph& g);

enum class SamplerRoute { Eigen, Cholesky, Iterative };

std::string_view to_string(SamplerRoute r);
SamplerRoute parse_sampler_route(std::string_view s);

struct FieldSample {
    Eigen::VectorXd phi;
    std::uint64_t seed = 0;
    SamplerRoute route = SamplerRoute::Eigen;
};

// Immutable after construction; sample() is reentrant.
class Sampler {
public:
    Sampler(const Graph& g, SamplerRoute route);

    SamplerRoute route() const { return route_; }
    int n() const { return n_; }

    FieldSample sample(std::uint64_t seed) const;

    // Eigen route: positive Laplacian eigenvalues kept by the sampler.
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    // Iterative route: polynomial degree and the spectral interval it covers.
    int chebyshev_degree() const { return static_cast<int>(cheb_coeffs_.size()) - 1; }
    double interval_low() const { return lo_; }
    double interval_high() const { return hi_; }
    double chebyshev_error() const { return cheb_error_; }

private:
    void project_zero_average(Eigen::VectorXd& x) const;
    Eigen::VectorXd apply_chebyshev(const Eigen::VectorXd& v) const;

    SamplerRoute route_;
    int n_;
    Eigen::VectorXd deg_;
    double two_m_;
    // eigen route: columns v_k / sqrt(lambda_k)
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd scaled_vectors_;
    // cholesky route
    Eigen::MatrixXd chol_factor_;
    // iterative route
    Eigen::SparseMatrix<double> lap_;
    Eigen::VectorXd cheb_coeffs_;
    double lo_ = 0.0, hi_ = 0.0, cheb_error_ = 0.0;
};

inline Sampler make_sampler(const Graph& g, SamplerRoute route) { return Sampler(g, route); }
inline FieldSample sample(const Sampler& s, std::uint64_t seed) { return s.sample(seed); }

// Sup over [lo, hi] of |p(x) sqrt(x) - 1| must not exceed this.
inline constexpr double kChebyshevTolerance = 1e-4;

// E(u, v) = sum over edges (u(x)-u(y))(v(x)-v(y)).
double dirichlet_pairing(const Graph& g, std::span<const double> u, std::span<const double> v);
double dirichlet_pairing(const Graph& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Var[sum_{x in K, x != excluded} d_x phi(x)] = w^T sigma w.
double degree_weighted_sum_variance(const Graph& g, const Covariance& cov, std::span<const Vertex> k,
                                    Vertex excluded = -1);

void write_field_csv(std::ostream& os, const FieldSample& f);

}  // namespace gffperc

#pragma once

#include <map>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gffperc/graph.hpp"

namespace gffperc {

// Sorted, duplicate-free vertex subset. Throws BadK unless empty != K != V.
std::vector<Vertex> normalize_vertex_set(const Graph& g, std::span<const Vertex> k);

// Green function of the walk killed on K: the inverse of the Laplacian
// restricted to V \ K, extended by zero on rows/columns in K.
struct KilledGreen {
    std::vector<Vertex> k_set;
    Eigen::MatrixXd green;  // n x n
};

KilledGreen killed_green(const Graph& g, std::span<const Vertex> k);

// probabilities(y, j) = P_y[X_{H_K} = k_set[j]].
struct HittingDistribution {
    std::vector<Vertex> k_set;
    Eigen::MatrixXd probabilities;  // n x |K|
};

// Solves the harmonic system with boundary data delta_x on K.
HittingDistribution hitting_distribution(const Graph& g, std::span<const Vertex> k);
// Last-exit decomposition: P_x[X_{H_K} = z] = sum_{y notin K} g(x,y) A(y,z).
HittingDistribution hitting_distribution_last_exit(const Graph& g, const KilledGreen& kg);

enum class CapacityRoute { GreenSum, Dirichlet };
std::string_view to_string(CapacityRoute r);

struct CapacityResult {
    std::vector<Vertex> k_set;
    double nu = 0.0;   // nu_K
    double cap = 0.0;  // 2|E| nu_K
    Eigen::VectorXd f_k;  // equilibrium potential: 1 on K, degree-weighted mean zero
    CapacityRoute route = CapacityRoute::GreenSum;
};

// nu_K = 2|E| / sum_{x,y} d_x d_y g_{K^c}(x,y); f_K = 1 - nu_K sum_y d_y g_{K^c}(y, .).
CapacityResult capacity_green(const Graph& g, std::span<const Vertex> k);
// min f^T L f subject to f|_K = 1 and deg^T f = 0, by a KKT solve.
CapacityResult capacity_dirichlet(const Graph& g, std::span<const Vertex> k);

struct HarmonicExtension {
    std::vector<Vertex> k_set;
    Eigen::VectorXd boundary;  // aligned with k_set
    Eigen::VectorXd f_phi;
    double nu_phi = 0.0;
    double route_gap = 0.0;  // max deviation between the KKT and explicit-formula routes
};

inline constexpr double kRouteTolerance = 1e-9;

// Energy-minimizing extension of the boundary data with degree-weighted mean
// zero. Computed by KKT and by the Green/hitting formula; throws RouteMismatch
// if the two disagree beyond kRouteTolerance (relative to the data scale).
HarmonicExtension harmonic_extension(const Graph& g, std::span<const Vertex> k, const std::map<Vertex, double>& boundary);

// Number of connected components of the subgraph of G induced on K.
int component_count(const Graph& g, std::span<const Vertex> k);

}  // namespace gffperc

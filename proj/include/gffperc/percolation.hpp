#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gffperc/gff.hpp"
#include "gffperc/graph.hpp"

namespace gffperc {

// Probability that the field, extended along a unit edge by a Brownian bridge
// between endpoint values a and b, stays >= h: 1 - exp(-2 (a-h)_+ (b-h)_+).
double open_probability(double a, double b, double h);

struct OpenEdgeSet {
    double h = 0.0;
    std::uint64_t seed = 0;
    std::vector<char> open;  // indexed by canonical edge index

    int count() const;
};

// One uniform per canonical edge, drawn from `seed`. Reusing the same stream
// across levels couples the edge sets monotonically in h.
std::vector<double> edge_uniforms(const Graph& g, std::uint64_t seed);

OpenEdgeSet percolate(const Graph& g, const FieldSample& f, double h, std::uint64_t seed);
OpenEdgeSet percolate_with_uniforms(const Graph& g, const Eigen::VectorXd& phi, double h,
                                    const std::vector<double>& uniforms, std::uint64_t seed = 0);

struct ClusterStats {
    std::vector<int> sizes;  // sorted descending
    int cmax = 0;
    int cmax_root = 0;  // smallest vertex index inside a maximum cluster
    int second_cmax = 0;  // 0 when there is a single cluster
    int num_clusters = 0;
};

// Dense cluster ids by first appearance in vertex order.
std::vector<int> cluster_labels(const Graph& g, const OpenEdgeSet& o);
ClusterStats clusters(const Graph& g, const OpenEdgeSet& o);

void write_cluster_csv(std::ostream& os, const std::vector<int>& labels);

// Discretized standard Brownian bridge on [0,1] from a to b with `steps`
// increments; true iff the minimum over the grid is >= h.
bool bridge_min_oracle(double a, double b, double h, int steps, std::uint64_t seed);

}  // namespace gffperc

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gffperc/gff.hpp"
#include "gffperc/graph.hpp"
#include "gffperc/percolation.hpp"

namespace gffperc {

// M_K = E(phi, f_K) written as a^T phi with a supported on K:
//   a[x] = nu_K * sum_y d_y P_y[X_{H_K} = x]         (x in K)
//   a_blk[x] = nu_K * d_x,  a_bdr = a - a_blk (supported on the inner boundary of K)
struct MartingaleCoefficients {
    std::vector<Vertex> k_set;
    double nu = 0.0;
    double two_m = 0.0;
    Eigen::VectorXd a;
    Eigen::VectorXd a_blk;
    Eigen::VectorXd a_bdr;

    double capacity() const { return two_m * nu; }
};

MartingaleCoefficients martingale_coefficients(const Graph& g, std::span<const Vertex> k);

struct MartingaleValue {
    double m = 0.0;
    double m_blk = 0.0;
    double m_bdr = 0.0;
};

MartingaleValue evaluate_martingale(const MartingaleCoefficients& c, const Eigen::VectorXd& phi);
inline MartingaleValue evaluate_martingale(const MartingaleCoefficients& c, const FieldSample& f) {
    return evaluate_martingale(c, f.phi);
}

// If phi >= h on all of K then M_K >= 2 h |E| nu_K must hold; returns whether it
// does (true when the premise fails).
bool level_bound_check(const MartingaleCoefficients& c, const Eigen::VectorXd& phi, double h);

struct TraceStep {
    Vertex added_vertex = 0;
    bool cluster_step = true;  // false for a jump to a G-neighbour outside the open cluster
    double q = 0.0;            // 2|E| (nu_{K_i} - nu_{K_0})
    double m = 0.0;
    double m_blk = 0.0;
    double m_bdr = 0.0;
};

// K_i is the first i+1 entries of the exploration order.
struct ExplorationTrace {
    Vertex start = 0;
    Vertex held_out = 0;
    double level = 0.0;
    std::uint64_t seed = 0;
    std::vector<TraceStep> steps;

    std::vector<Vertex> k_set(size_t i) const;
};

// Grows K from {v}: the smallest vertex joined to K by an open edge if any,
// otherwise the smallest G-neighbour of K. Stops at |K| = n-1; the largest
// index other than v is never added.
ExplorationTrace explore(const Graph& g, const FieldSample& f, const OpenEdgeSet& o, Vertex v);

// (q_i, m_i) pairs: the trace in capacity time.
std::vector<std::pair<double, double>> time_change(const ExplorationTrace& t);

void write_trace_csv(std::ostream& os, const ExplorationTrace& t);

}  // namespace gffperc

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gffperc/gff.hpp"
#include "gffperc/graph.hpp"
#include "gffperc/parallel.hpp"

namespace gffperc {

// A level is either in window units (h = A n^{-1/3}) or a fixed height h.
struct Level {
    bool fixed_h = false;
    double value = 0.0;

    double height(int n) const;
    double window(int n) const;
};

struct SweepSpec {
    std::string family = "rrg";  // rrg | cycle | path | complete | torus
    int d = 3;                   // rrg degree
    int dim = 2;                 // torus dimension; side = n^{1/dim}
    std::vector<int> n_list;
    std::vector<Level> levels;
    int trials = 1;
    std::uint64_t master_seed = 0;
    std::optional<SamplerRoute> route;  // default: eigen up to kDenseThreshold, iterative above
    bool record_timing = false;         // wall_ms stays 0 otherwise, keeping output byte-stable

    void validate() const;
};

struct SweepRow {
    std::string family;
    int n = 0;
    int d = 0;
    double A = 0.0;
    double h = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    int cmax = 0;
    int second_cmax = 0;
    int num_clusters = 0;
    double lambda_star = 0.0;
    double wall_ms = 0.0;
    std::string error;  // non-empty marks a failed cell; counts are then -1
};

inline constexpr const char* kSweepCsvHeader =
    "family,n,d,A,h,trial,seed,cmax,second_cmax,num_clusters,lambda_star,wall_ms";

// Seeds: graph = derive(master, {hash(family), n, 0}); trial =
// derive(master, {hash(family), n, trial + 1}). The trial seed drives one field
// and one edge-uniform stream shared by every level of that trial.
std::uint64_t sweep_graph_seed(const SweepSpec& s, int n);
std::uint64_t sweep_trial_seed(const SweepSpec& s, int n, int trial);

Graph sweep_graph(const SweepSpec& s, int n);

// Rows ordered by (n, level index, trial), independent of `jobs`.
std::vector<SweepRow> run_sweep(const SweepSpec& s, int jobs = 1);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct ExponentEstimate {
    double slope = 0.0;
    double stderr_ = 0.0;
    double intercept = 0.0;
    std::vector<int> n_values;
    std::vector<double> medians;
};

// Least-squares slope of log(median cmax) against log n over rows at the
// given level, with a bootstrap standard error.
ExponentEstimate estimate_exponent(const std::vector<SweepRow>& rows, const Level& level, int resamples = 1000,
                                   std::uint64_t seed = 1);

struct Quantiles {
    double q10 = 0.0, q50 = 0.0, q90 = 0.0, mean = 0.0;
};

struct SummaryRow {
    int n = 0;
    double A = 0.0;
    double h = 0.0;
    int count = 0;
    Quantiles cmax, cmax_over_n, cmax_over_n23, cmax_over_logn;
};

// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double p);

std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows);
std::string summary_json(const std::vector<SummaryRow>& table);

// Monte Carlo check of the capacity clock: for each step i, the variance of
// m_i - m_0 across traces against the mean of q_i.
struct ExplorationDiagnostics {
    std::vector<double> mean_q;
    std::vector<double> var_increment;
    double slope = 0.0;  // least squares through the origin
    int traces = 0;
};

ExplorationDiagnostics exploration_diagnostics(const Graph& g, const Sampler& sampler, double h, int traces,
                                               std::uint64_t master_seed, Vertex start = 0, int jobs = 1);

}  // namespace gffperc

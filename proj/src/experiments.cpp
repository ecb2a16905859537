#include "gffperc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include <json.hpp>

#include "gffperc/error.hpp"
#include "gffperc/martingale.hpp"
#include "gffperc/percolation.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

double Level::height(int n) const { return fixed_h ? value : value / std::cbrt(static_cast<double>(n)); }
double Level::window(int n) const { return fixed_h ? value * std::cbrt(static_cast<double>(n)) : value; }

void SweepSpec::validate() const {
    if (trials < 1) throw Error(ErrorCode::BadParams, "trials must be >= 1");
    if (n_list.empty()) throw Error(ErrorCode::BadParams, "n list is empty");
    if (levels.empty()) throw Error(ErrorCode::BadParams, "no levels (A or h) given");
    if (!std::is_sorted(n_list.begin(), n_list.end()) ||
        std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end())
        throw Error(ErrorCode::BadParams, "n list must be strictly ascending");
    static const char* known[] = {"rrg", "cycle", "path", "complete", "torus"};
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return family == k; }) == std::end(known))
        throw Error(ErrorCode::BadParams, "unknown family '" + family + "'");
}

std::uint64_t sweep_graph_seed(const SweepSpec& s, int n) {
    return derive_seed(s.master_seed, {stable_hash(s.family), static_cast<std::uint64_t>(n), 0});
}

std::uint64_t sweep_trial_seed(const SweepSpec& s, int n, int trial) {
    return derive_seed(s.master_seed,
                       {stable_hash(s.family), static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial) + 1});
}

Graph sweep_graph(const SweepSpec& s, int n) {
    if (s.family == "rrg") return gen_random_regular(n, s.d, sweep_graph_seed(s, n));
    if (s.family == "torus") {
        const int side = static_cast<int>(std::lround(std::pow(static_cast<double>(n), 1.0 / s.dim)));
        long long check = 1;
        for (int k = 0; k < s.dim; ++k) check *= side;
        if (check != n) throw Error(ErrorCode::BadParams, "torus size n must be side^dim");
        return gen_torus(side, s.dim);
    }
    return gen_named(s.family, {{"n", n}});
}

namespace {

// Levels of one trial evaluated on the same field and uniforms.
void run_trial(const SweepSpec& s, const Graph& g, const Sampler& sampler, double lambda_star, int trial,
               std::vector<SweepRow>& rows, size_t first_row, size_t level_stride) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = sweep_trial_seed(s, g.n(), trial);
    const FieldSample field = sampler.sample(derive_seed(seed, {1}));
    const std::vector<double> uniforms = edge_uniforms(g, derive_seed(seed, {2}));

    for (size_t li = 0; li < s.levels.size(); ++li) {
        const Level& level = s.levels[li];
        const double h = level.height(g.n());
        const OpenEdgeSet open = percolate_with_uniforms(g, field.phi, h, uniforms, seed);
        for (int e = 0; e < g.num_edges(); ++e) {
            auto [x, y] = g.edges()[e];
            if (open.open[e] && (field.phi[x] < h || field.phi[y] < h))
                throw Error(ErrorCode::PreconditionError, "open edge with an endpoint below the level");
        }
        const ClusterStats stats = clusters(g, open);
        SweepRow& row = rows[first_row + li * level_stride];
        row.family = s.family;
        row.n = g.n();
        row.d = g.d_max();
        row.A = level.window(g.n());
        row.h = h;
        row.trial = trial;
        row.seed = seed;
        row.cmax = stats.cmax;
        row.second_cmax = stats.second_cmax;
        row.num_clusters = stats.num_clusters;
        row.lambda_star = lambda_star;
    }
    if (s.record_timing) {
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        for (size_t li = 0; li < s.levels.size(); ++li) rows[first_row + li * level_stride].wall_ms = ms;
    }
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& s, int jobs) {
    s.validate();
    const size_t per_n = s.levels.size() * static_cast<size_t>(s.trials);
    std::vector<SweepRow> rows(s.n_list.size() * per_n);

    for (size_t ni = 0; ni < s.n_list.size(); ++ni) {
        const int n = s.n_list[ni];
        const size_t base = ni * per_n;
        try {
            const Graph g = sweep_graph(s, n);
            const double lambda_star = spectral_gap(g).lambda_star;
            const SamplerRoute route =
                s.route.value_or(n <= kDenseThreshold ? SamplerRoute::Eigen : SamplerRoute::Iterative);
            const Sampler sampler(g, route);
            parallel_for(s.trials, jobs, [&](int trial) {
                run_trial(s, g, sampler, lambda_star, trial, rows, base + trial, s.trials);
            });
        } catch (const Error& err) {
            for (size_t li = 0; li < s.levels.size(); ++li)
                for (int trial = 0; trial < s.trials; ++trial) {
                    SweepRow& row = rows[base + li * s.trials + trial];
                    row = SweepRow{};
                    row.family = s.family;
                    row.n = n;
                    row.d = s.family == "rrg" ? s.d : 0;
                    row.A = s.levels[li].window(n);
                    row.h = s.levels[li].height(n);
                    row.trial = trial;
                    row.seed = sweep_trial_seed(s, n, trial);
                    row.cmax = row.second_cmax = row.num_clusters = -1;
                    row.error = err.what();
                }
        }
    }
    return rows;
}

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << kSweepCsvHeader << '\n';
    for (const SweepRow& r : rows) {
        os << r.family << ',' << r.n << ',' << r.d << ',' << fmt_double(r.A) << ',' << fmt_double(r.h) << ','
           << r.trial << ',' << r.seed << ',' << r.cmax << ',' << r.second_cmax << ',' << r.num_clusters << ','
           << fmt_double(r.lambda_star) << ',' << fmt_double(r.wall_ms) << '\n';
    }
}

namespace {

bool row_at_level(const SweepRow& r, const Level& level) {
    const double target = level.fixed_h ? r.h : r.A;
    return std::abs(target - level.value) <= 1e-12 * std::max(1.0, std::abs(level.value));
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ExponentEstimate estimate_exponent(const std::vector<SweepRow>& rows, const Level& level, int resamples,
                                   std::uint64_t seed) {
    std::map<int, std::vector<double>> by_n;
    for (const SweepRow& r : rows)
        if (r.error.empty() && r.cmax > 0 && row_at_level(r, level)) by_n[r.n].push_back(r.cmax);
    if (by_n.size() < 3)
        throw Error(ErrorCode::InsufficientData,
                    "need at least 3 distinct n at this level, have " + std::to_string(by_n.size()));

    ExponentEstimate est;
    std::vector<double> logn, logmed;
    for (const auto& [n, values] : by_n) {
        est.n_values.push_back(n);
        est.medians.push_back(median(values));
        logn.push_back(std::log(static_cast<double>(n)));
        logmed.push_back(std::log(est.medians.back()));
    }
    std::tie(est.slope, est.intercept) = least_squares(logn, logmed);

    Rng rng = make_rng(seed);
    std::vector<double> slopes;
    slopes.reserve(resamples);
    for (int b = 0; b < resamples; ++b) {
        std::vector<double> boot_logmed;
        for (const auto& [n, values] : by_n) {
            std::uniform_int_distribution<size_t> pick(0, values.size() - 1);
            std::vector<double> resample(values.size());
            for (double& v : resample) v = values[pick(rng)];
            boot_logmed.push_back(std::log(median(std::move(resample))));
        }
        slopes.push_back(least_squares(logn, boot_logmed).first);
    }
    if (resamples > 1) {
        double mean = 0;
        for (double s : slopes) mean += s;
        mean /= resamples;
        double var = 0;
        for (double s : slopes) var += (s - mean) * (s - mean);
        est.stderr_ = std::sqrt(var / (resamples - 1));
    }
    return est;
}

namespace {

Quantiles quantiles_of(const std::vector<double>& v) {
    Quantiles q;
    q.q10 = quantile(v, 0.1);
    q.q50 = quantile(v, 0.5);
    q.q90 = quantile(v, 0.9);
    for (double x : v) q.mean += x;
    q.mean /= static_cast<double>(v.size());
    return q;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows) {
    if (rows.empty()) throw Error(ErrorCode::EmptyInput, "no rows to summarize");
    std::vector<std::pair<std::pair<int, double>, std::vector<const SweepRow*>>> groups;
    for (const SweepRow& r : rows) {
        if (!r.error.empty()) continue;
        auto key = std::make_pair(r.n, r.h);
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
            groups.push_back({key, {}});
            it = groups.end() - 1;
        }
        it->second.push_back(&r);
    }
    if (groups.empty()) throw Error(ErrorCode::EmptyInput, "every row is an error row");

    std::vector<SummaryRow> table;
    for (const auto& [key, members] : groups) {
        const double n = key.first;
        std::vector<double> c, cn, cn23, clog;
        for (const SweepRow* r : members) {
            c.push_back(r->cmax);
            cn.push_back(r->cmax / n);
            cn23.push_back(r->cmax / std::pow(n, 2.0 / 3.0));
            clog.push_back(r->cmax / std::log(n));
        }
        SummaryRow s;
        s.n = key.first;
        s.h = key.second;
        s.A = members.front()->A;
        s.count = static_cast<int>(members.size());
        s.cmax = quantiles_of(c);
        s.cmax_over_n = quantiles_of(cn);
        s.cmax_over_n23 = quantiles_of(cn23);
        s.cmax_over_logn = quantiles_of(clog);
        table.push_back(s);
    }
    return table;
}

std::string summary_json(const std::vector<SummaryRow>& table) {
    auto q = [](const Quantiles& x) {
        return nlohmann::json{{"q10", x.q10}, {"q50", x.q50}, {"q90", x.q90}, {"mean", x.mean}};
    };
    nlohmann::json out = nlohmann::json::array();
    for (const SummaryRow& s : table)
        out.push_back({{"n", s.n},
                       {"A", s.A},
                       {"h", s.h},
                       {"count", s.count},
                       {"cmax", q(s.cmax)},
                       {"cmax_over_n", q(s.cmax_over_n)},
                       {"cmax_over_n23", q(s.cmax_over_n23)},
                       {"cmax_over_logn", q(s.cmax_over_logn)}});
    return out.dump(2);
}

ExplorationDiagnostics exploration_diagnostics(const Graph& g, const Sampler& sampler, double h, int traces,
                                               std::uint64_t master_seed, Vertex start, int jobs) {
    if (traces < 2) throw Error(ErrorCode::InsufficientData, "need at least 2 traces");
    const size_t steps = static_cast<size_t>(g.n() - 1);
    std::vector<double> increments(static_cast<size_t>(traces) * steps);
    std::vector<double> clocks(static_cast<size_t>(traces) * steps);

    parallel_for(traces, jobs, [&](int t) {
        const std::uint64_t seed = derive_seed(master_seed, {static_cast<std::uint64_t>(t)});
        const FieldSample field = sampler.sample(derive_seed(seed, {1}));
        const OpenEdgeSet open = percolate(g, field, h, derive_seed(seed, {2}));
        const ExplorationTrace trace = explore(g, field, open, start);
        for (size_t i = 0; i < steps; ++i) {
            increments[t * steps + i] = trace.steps[i].m - trace.steps[0].m;
            clocks[t * steps + i] = trace.steps[i].q;
        }
    });

    ExplorationDiagnostics diag;
    diag.traces = traces;
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < steps; ++i) {
        double mean_inc = 0, mean_q = 0;
        for (int t = 0; t < traces; ++t) {
            mean_inc += increments[t * steps + i];
            mean_q += clocks[t * steps + i];
        }
        mean_inc /= traces;
        mean_q /= traces;
        double var = 0;
        for (int t = 0; t < traces; ++t) var += std::pow(increments[t * steps + i] - mean_inc, 2);
        var /= traces - 1;
        diag.mean_q.push_back(mean_q);
        diag.var_increment.push_back(var);
        sxy += mean_q * var;
        sxx += mean_q * mean_q;
    }
    diag.slope = sxx > 0 ? sxy / sxx : 0.0;
    return diag;
}

}  // namespace gffperc

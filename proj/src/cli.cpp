#include "gffperc/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gffperc/error.hpp"
#include "gffperc/experiments.hpp"
#include "gffperc/gff.hpp"
#include "gffperc/graph.hpp"
#include "gffperc/martingale.hpp"
#include "gffperc/percolation.hpp"
#include "gffperc/potential.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

namespace {

struct Options {
    std::string command;
    std::string family;
    std::string n;
    int d = 3;
    int side = 0;
    int dim = 2;
    std::string graph_path;
    std::uint64_t seed = 0;
    std::string h;
    std::string A;
    std::string k;
    int start = 0;
    int trials = 1;
    int jobs = 1;
    std::string out;
    std::string format;
    std::string route;
    std::string method = "auto";
    bool pretty = false;
    bool timing = false;
    std::string config;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            size_t used = 0;
            T value;
            if constexpr (std::is_same_v<T, int>)
                value = std::stoi(item, &used);
            else
                value = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(value);
        } catch (const std::logic_error&) {
            throw UsageError(std::string("bad value '") + item + "' for " + flag);
        }
    }
    return out;
}

int single_n(const Options& o) {
    auto ns = parse_list<int>(o.n, "--n");
    if (ns.size() != 1) throw UsageError("--n must be a single integer for this command");
    return ns.front();
}

// Shortest human-friendly rendering: 12 significant digits, always with a decimal point.
std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

nlohmann::json config_json(const Options& o) {
    return {{"command", o.command}, {"family", o.family}, {"n", o.n},         {"d", o.d},
            {"side", o.side},       {"dim", o.dim},       {"graph", o.graph_path}, {"seed", o.seed},
            {"h", o.h},             {"A", o.A},           {"k", o.k},         {"start", o.start},
            {"trials", o.trials},   {"jobs", o.jobs},     {"out", o.out},     {"format", o.format},
            {"route", o.route},     {"method", o.method}, {"pretty", o.pretty}, {"timing", o.timing}};
}

Graph resolve_graph(const Options& o) {
    if (!o.graph_path.empty()) return read_edge_list_file(o.graph_path);
    if (o.family.empty()) throw UsageError("either --graph or --family is required");
    if (o.family == "rrg") return gen_random_regular(single_n(o), o.d, derive_seed(o.seed, {0}));
    if (o.family == "torus") {
        if (o.side <= 0) throw UsageError("torus needs --side");
        return gen_torus(o.side, o.dim);
    }
    return gen_named(o.family, {{"n", single_n(o)}});
}

double resolve_level(const Options& o, int n) {
    if (!o.h.empty() && !o.A.empty()) throw UsageError("give either --h or --A, not both");
    if (!o.h.empty()) {
        auto v = parse_list<double>(o.h, "--h");
        if (v.size() != 1) throw UsageError("--h must be a single value for this command");
        return v.front();
    }
    if (!o.A.empty()) {
        auto v = parse_list<double>(o.A, "--A");
        if (v.size() != 1) throw UsageError("--A must be a single value for this command");
        return v.front() / std::cbrt(static_cast<double>(n));
    }
    return 0.0;
}

SamplerRoute resolve_route(const Options& o, int n) {
    if (o.route.empty()) return n <= kDenseThreshold ? SamplerRoute::Eigen : SamplerRoute::Iterative;
    try {
        return parse_sampler_route(o.route);
    } catch (const Error&) {
        throw UsageError("--route must be eigen, cholesky or iterative");
    }
}

// Writes CSV to --out (with a config sidecar) or to `out` (config to `err`).
template <class Writer>
void emit_csv(const Options& o, std::ostream& out, std::ostream& err, Writer&& write) {
    if (o.out.empty()) {
        write(out);
        err << "# config " << config_json(o).dump() << '\n';
        return;
    }
    std::ofstream file(o.out);
    if (!file) throw Error(ErrorCode::BadParams, "cannot write " + o.out);
    write(file);
    std::ofstream sidecar(o.out + ".config.json");
    sidecar << config_json(o).dump(2) << '\n';
}

void emit_json(const Options& o, std::ostream& out, nlohmann::json doc) {
    doc["config"] = config_json(o);
    if (o.out.empty()) {
        out << doc.dump(2) << '\n';
        return;
    }
    std::ofstream file(o.out);
    if (!file) throw Error(ErrorCode::BadParams, "cannot write " + o.out);
    file << doc.dump(2) << '\n';
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void cmd_gen(const Options& o, std::ostream& out, std::ostream& err) {
    const Graph g = resolve_graph(o);
    emit_csv(o, out, err, [&](std::ostream& os) { write_edge_list(os, g); });
}

void cmd_gap(const Options& o, std::ostream& out) {
    const Graph g = resolve_graph(o);
    SpectralMethod method = SpectralMethod::Auto;
    if (o.method == "dense") method = SpectralMethod::Dense;
    else if (o.method == "iterative") method = SpectralMethod::Iterative;
    else if (o.method != "auto") throw UsageError("--method must be auto, dense or iterative");
    const SpectralReport r = spectral_gap(g, method);
    if (o.format == "json") {
        emit_json(o, out, {{"lambda_star", r.lambda_star}, {"method", to_string(r.method)}, {"residual", r.residual}});
    } else if (o.pretty) {
        out << std::left << std::setw(14) << "lambda_star" << format_number(r.lambda_star) << '\n'
            << std::setw(14) << "method" << to_string(r.method) << '\n'
            << std::setw(14) << "n" << g.n() << '\n'
            << std::setw(14) << "d_max" << g.d_max() << '\n';
    } else {
        out << "lambda_star " << format_number(r.lambda_star) << '\n';
    }
}

void cmd_sample(const Options& o, std::ostream& out, std::ostream& err) {
    const Graph g = resolve_graph(o);
    const Sampler sampler(g, resolve_route(o, g.n()));
    const FieldSample f = sampler.sample(derive_seed(o.seed, {1}));
    emit_csv(o, out, err, [&](std::ostream& os) { write_field_csv(os, f); });
}

void cmd_percolate(const Options& o, std::ostream& out, std::ostream& err) {
    const Graph g = resolve_graph(o);
    const Sampler sampler(g, resolve_route(o, g.n()));
    const FieldSample f = sampler.sample(derive_seed(o.seed, {1}));
    const double h = resolve_level(o, g.n());
    const OpenEdgeSet open = percolate(g, f, h, derive_seed(o.seed, {2}));
    const ClusterStats stats = clusters(g, open);
    const std::vector<int> labels = cluster_labels(g, open);
    nlohmann::json doc = {{"h", h},
                          {"open_edges", open.count()},
                          {"cmax", stats.cmax},
                          {"cmax_root", stats.cmax_root},
                          {"second_cmax", stats.second_cmax},
                          {"num_clusters", stats.num_clusters}};
    if (o.format == "json") {
        emit_json(o, out, doc);
        return;
    }
    emit_csv(o, out, err, [&](std::ostream& os) { write_cluster_csv(os, labels); });
    if (!o.out.empty()) {
        doc["config"] = config_json(o);
        out << doc.dump(2) << '\n';
    }
}

void cmd_capacity(const Options& o, std::ostream& out) {
    const Graph g = resolve_graph(o);
    const std::vector<int> k = parse_list<int>(o.k, "--k");
    if (k.empty()) throw UsageError("--k is required for capacity");
    CapacityResult r;
    if (o.route.empty() || o.route == "green-sum") r = capacity_green(g, k);
    else if (o.route == "dirichlet") r = capacity_dirichlet(g, k);
    else throw UsageError("capacity --route must be green-sum or dirichlet");
    if (o.pretty) {
        out << "K      " << nlohmann::json(r.k_set).dump() << "\nnu     " << format_number(r.nu) << "\ncap    "
            << format_number(r.cap) << "\nroute  " << to_string(r.route) << "\nb0(K)  " << component_count(g, r.k_set)
            << '\n';
        return;
    }
    emit_json(o, out,
              {{"k", r.k_set}, {"nu", r.nu}, {"cap", r.cap}, {"route", to_string(r.route)}, {"f", to_std(r.f_k)}});
}

void cmd_explore(const Options& o, std::ostream& out, std::ostream& err) {
    const Graph g = resolve_graph(o);
    const Sampler sampler(g, resolve_route(o, g.n()));
    const FieldSample f = sampler.sample(derive_seed(o.seed, {1}));
    const double h = resolve_level(o, g.n());
    const OpenEdgeSet open = percolate(g, f, h, derive_seed(o.seed, {2}));
    const ExplorationTrace trace = explore(g, f, open, o.start);
    emit_csv(o, out, err, [&](std::ostream& os) { write_trace_csv(os, trace); });
}

void cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.family.empty()) throw UsageError("sweep needs --family");
    SweepSpec s;
    s.family = o.family;
    s.d = o.d;
    s.dim = o.dim;
    s.n_list = parse_list<int>(o.n, "--n");
    for (double a : parse_list<double>(o.A, "--A")) s.levels.push_back({false, a});
    for (double h : parse_list<double>(o.h, "--h")) s.levels.push_back({true, h});
    if (s.levels.empty()) s.levels.push_back({false, 0.0});
    s.trials = o.trials;
    s.master_seed = o.seed;
    if (!o.route.empty()) s.route = resolve_route(o, 0);
    s.record_timing = o.timing;
    try {
        s.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    const std::vector<SweepRow> rows = run_sweep(s, o.jobs);
    for (const SweepRow& r : rows)
        if (!r.error.empty()) {
            err << "sweep: n=" << r.n << " failed: " << r.error << '\n';
            break;
        }
    const std::vector<SummaryRow> table = summarize(rows);

    if (o.pretty) {
        auto cell = [](double x) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.5g", x);
            return std::string(buf);
        };
        out << std::left << std::setw(8) << "n" << std::setw(11) << "A" << std::setw(11) << "h" << std::setw(8) << "trials"
            << std::setw(10) << "median" << std::setw(11) << "med/n" << std::setw(11) << "med/n^2/3" << "med/log n\n";
        for (const SummaryRow& r : table)
            out << std::setw(8) << r.n << std::setw(11) << cell(r.A) << std::setw(11) << cell(r.h) << std::setw(8)
                << r.count << std::setw(10) << cell(r.cmax.q50) << std::setw(11) << cell(r.cmax_over_n.q50)
                << std::setw(11) << cell(r.cmax_over_n23.q50) << cell(r.cmax_over_logn.q50) << '\n';
        return;
    }
    if (o.format == "json") {
        emit_json(o, out, {{"summary", nlohmann::json::parse(summary_json(table))}});
        return;
    }
    emit_csv(o, out, err, [&](std::ostream& os) { write_sweep_csv(os, rows); });
    if (!o.out.empty()) {
        std::ofstream summary(o.out + ".summary.json");
        summary << summary_json(table) << '\n';
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Zero-average Gaussian free field level-set percolation toolkit", "gffperc"};
    Options o;
    app.set_help_flag("--help", "print this help message and exit");
    app.add_option("command", o.command, "gen | gap | sample | percolate | capacity | explore | sweep")
        ->required()
        ->check(CLI::IsMember({"gen", "gap", "sample", "percolate", "capacity", "explore", "sweep"}));
    app.add_option("--family", o.family, "rrg | cycle | path | complete | torus");
    app.add_option("--n", o.n, "vertex count (comma-separated list for sweep)");
    app.add_option("--d", o.d, "degree for rrg");
    app.add_option("--side", o.side, "torus side length");
    app.add_option("--dim", o.dim, "torus dimension");
    app.add_option("--graph", o.graph_path, "edge-list file instead of --family");
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--h", o.h, "level(s) h");
    app.add_option("--A", o.A, "window level(s), h = A n^{-1/3}");
    app.add_option("--k", o.k, "vertex set K, comma-separated");
    app.add_option("--start", o.start, "exploration start vertex");
    app.add_option("--trials", o.trials, "trials per (n, level)");
    app.add_option("--jobs", o.jobs, "worker threads for sweep")->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "output path (default: stdout)");
    app.add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--route", o.route, "sampler route eigen | cholesky | iterative (capacity: green-sum | dirichlet)");
    app.add_option("--method", o.method, "spectral gap method auto | dense | iterative");
    app.add_flag("--pretty", o.pretty, "human-readable tables");
    app.add_flag("--timing", o.timing, "record wall_ms in sweep rows");
    app.set_config("--config", "", "flat key = value file mirroring the flags (flags win)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        err << app.help();
        return 1;
    }

    try {
        if (o.command == "gen") cmd_gen(o, out, err);
        else if (o.command == "gap") cmd_gap(o, out);
        else if (o.command == "sample") cmd_sample(o, out, err);
        else if (o.command == "percolate") cmd_percolate(o, out, err);
        else if (o.command == "capacity") cmd_capacity(o, out);
        else if (o.command == "explore") cmd_explore(o, out, err);
        else if (o.command == "sweep") cmd_sweep(o, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n\n" << app.help();
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

}  // namespace gffperc

#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "gffperc/error.hpp"
#include "gffperc/experiments.hpp"

using namespace gffperc;

namespace {

std::vector<SweepRow> synthetic(const std::vector<int>& ns, double A, auto cmax_of) {
    std::vector<SweepRow> rows;
    for (int n : ns)
        for (int trial = 0; trial < 5; ++trial) {
            SweepRow r;
            r.family = "rrg";
            r.n = n;
            r.A = A;
            r.h = A / std::cbrt(double(n));
            r.trial = trial;
            r.cmax = cmax_of(n);
            rows.push_back(r);
        }
    return rows;
}

SweepSpec small_spec() {
    SweepSpec s;
    s.n_list = {64, 128};
    s.levels = {Level{false, -2.0}, Level{false, 0.0}, Level{false, 2.0}};
    s.trials = 12;
    s.master_seed = 99;
    return s;
}

}  // namespace

TEST_CASE("levels in window units") {
    Level a{false, 2.0};
    CHECK(a.height(1000) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(a.window(1000) == 2.0);
    Level h{true, -0.5};
    CHECK(h.height(1000) == -0.5);
    CHECK(h.window(1000) == doctest::Approx(-5.0).epsilon(1e-14));
}

TEST_CASE("exponent of exact power laws") {
    // Integer cmax makes n^{2/3} exact only for perfect cubes.
    std::vector<int> cubes = {512, 1000, 4096, 8000, 32768};
    ExponentEstimate e = estimate_exponent(
        synthetic(cubes, 0.0, [](int n) { return static_cast<int>(std::lround(std::pow(n, 2.0 / 3.0))); }), Level{false, 0.0});
    CHECK(std::abs(e.slope - 2.0 / 3.0) <= 1e-12);
    CHECK(e.stderr_ <= 1e-12);
    CHECK(e.n_values == cubes);

    ExponentEstimate lin = estimate_exponent(synthetic({100, 200, 400, 800}, 0.0, [](int n) { return 3 * n; }), Level{false, 0.0});
    CHECK(std::abs(lin.slope - 1.0) <= 1e-12);
    CHECK(std::abs(lin.intercept - std::log(3.0)) <= 1e-10);

    try {
        estimate_exponent(synthetic({100, 200}, 0.0, [](int n) { return n; }), Level{false, 0.0});
        FAIL("expected InsufficientData");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::InsufficientData);
    }
    // rows at other levels do not count
    try {
        estimate_exponent(synthetic({100, 200, 400}, 1.0, [](int n) { return n; }), Level{false, 0.0});
        FAIL("expected InsufficientData");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::InsufficientData);
    }
}

TEST_CASE("quantiles") {
    CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile({0, 10}, 0.1) == doctest::Approx(1.0));
    CHECK(quantile({7}, 0.9) == 7.0);
    try {
        quantile({}, 0.5);
        FAIL("expected EmptyInput");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::EmptyInput);
    }
}

TEST_CASE("summary of a single row") {
    SweepRow r;
    r.n = 100;
    r.A = 0.5;
    r.h = 0.1;
    r.cmax = 17;
    std::vector<SummaryRow> t = summarize({r});
    REQUIRE(t.size() == 1);
    CHECK(t[0].count == 1);
    for (const Quantiles& q : {t[0].cmax}) {
        CHECK(q.q10 == 17.0);
        CHECK(q.q50 == 17.0);
        CHECK(q.q90 == 17.0);
        CHECK(q.mean == 17.0);
    }
    CHECK(t[0].cmax_over_n.q50 == doctest::Approx(0.17));
    CHECK(t[0].cmax_over_logn.q10 == doctest::Approx(17 / std::log(100.0)));
    auto j = nlohmann::json::parse(summary_json(t));
    CHECK(j[0]["cmax"]["q90"] == 17.0);
    CHECK(j[0]["n"] == 100);
    try {
        summarize({});
        FAIL("expected EmptyInput");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::EmptyInput);
    }
}

TEST_CASE("sweep at a very low level percolates everything") {
    SweepSpec s;
    s.n_list = {50, 80};
    s.levels = {Level{false, -1e6}};
    s.trials = 4;
    s.master_seed = 3;
    for (const SweepRow& r : run_sweep(s)) {
        CHECK(r.error.empty());
        CHECK(r.cmax == r.n);
        CHECK(r.num_clusters == 1);
    }
}

TEST_CASE("sweep shape, determinism and level coupling") {
    SweepSpec s = small_spec();
    std::vector<SweepRow> rows = run_sweep(s, 1);
    CHECK(rows.size() == 2 * 3 * 12);
    std::ostringstream one, four;
    write_sweep_csv(one, rows);
    write_sweep_csv(four, run_sweep(s, 4));
    CHECK(one.str() == four.str());
    CHECK(one.str().rfind(std::string(kSweepCsvHeader) + "\n", 0) == 0);

    for (size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        CHECK(r.error.empty());
        CHECK(r.wall_ms == 0.0);
        CHECK(r.cmax >= r.second_cmax);
        CHECK(r.cmax >= 1);
        CHECK(r.lambda_star > 0.0);
        // (n, level, trial) order
        CHECK(r.trial == static_cast<int>(i % 12));
        CHECK(r.n == s.n_list[i / 36]);
        CHECK(r.A == s.levels[(i / 12) % 3].value);
    }
    for (size_t ni = 0; ni < 2; ++ni)
        for (int t = 0; t < 12; ++t) {
            const SweepRow& lo = rows[ni * 36 + t];
            const SweepRow& mid = rows[ni * 36 + 12 + t];
            const SweepRow& hi = rows[ni * 36 + 24 + t];
            CHECK(lo.seed == hi.seed);
            CHECK(lo.cmax >= mid.cmax);
            CHECK(mid.cmax >= hi.cmax);
        }

    SweepSpec single = small_spec();
    single.n_list = {64};
    single.levels = {Level{false, 0.0}};
    single.trials = 1;
    CHECK(run_sweep(single).size() == 1);
}

TEST_CASE("sweep seeds are independent of the level list") {
    SweepSpec a = small_spec(), b = small_spec();
    b.levels = {Level{true, 0.3}};
    CHECK(sweep_trial_seed(a, 64, 5) == sweep_trial_seed(b, 64, 5));
    CHECK(sweep_trial_seed(a, 64, 5) != sweep_trial_seed(a, 64, 6));
    CHECK(sweep_trial_seed(a, 64, 5) != sweep_trial_seed(a, 128, 5));
    CHECK(sweep_graph(a, 64) == sweep_graph(b, 64));
}

TEST_CASE("sweep validation and error rows") {
    SweepSpec s = small_spec();
    s.n_list = {128, 64};
    CHECK_THROWS_AS(run_sweep(s), Error);
    s = small_spec();
    s.family = "hypercube";
    CHECK_THROWS_AS(run_sweep(s), Error);
    s = small_spec();
    s.trials = 0;
    CHECK_THROWS_AS(run_sweep(s), Error);

    // n*d odd cannot be generated: the cell becomes error rows, others survive.
    s = small_spec();
    s.n_list = {63, 64};
    std::vector<SweepRow> rows = run_sweep(s);
    REQUIRE(rows.size() == 72);
    CHECK_FALSE(rows[0].error.empty());
    CHECK(rows[0].cmax == -1);
    CHECK(rows[40].error.empty());

    SweepSpec torus;
    torus.family = "torus";
    torus.n_list = {16, 25};
    torus.levels = {Level{true, -1e3}};
    for (const SweepRow& r : run_sweep(torus)) CHECK(r.cmax == r.n);
}

TEST_CASE("exploration diagnostics") {
    Graph g = gen_random_regular(16, 3, 2);
    Sampler s(g, SamplerRoute::Eigen);
    ExplorationDiagnostics d = exploration_diagnostics(g, s, 0.0, 400, 5);
    CHECK(d.traces == 400);
    REQUIRE(d.mean_q.size() == 15);
    CHECK(d.mean_q[0] == 0.0);
    CHECK(d.var_increment[0] == 0.0);
    for (size_t i = 1; i < d.mean_q.size(); ++i) CHECK(d.mean_q[i] >= d.mean_q[i - 1]);
    CHECK(d.slope > 0.0);
    ExplorationDiagnostics d2 = exploration_diagnostics(g, s, 0.0, 400, 5, 0, 3);
    CHECK(d2.slope == d.slope);
}

TEST_CASE("critical median sits in the n^{2/3} bracket") {
    SweepSpec s;
    s.n_list = {1024};
    s.levels = {Level{false, 0.0}};
    s.trials = 200;
    s.master_seed = 11;
    std::vector<double> c;
    for (const SweepRow& r : run_sweep(s)) c.push_back(r.cmax);
    const double scale = std::pow(1024.0, 2.0 / 3.0);
    const double med = quantile(c, 0.5);
    MESSAGE("median cmax / n^{2/3} = " << med / scale);
    CHECK(med >= 0.1 * scale);
    CHECK(med <= 10 * scale);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "branchtail/dists.hpp"
#include "branchtail/error.hpp"
#include "branchtail/tailstats.hpp"

using namespace branchtail;

TEST_CASE("empirical ccdf uses strict exceedance") {
    std::vector<double> s = {1.0, 2.0, 3.0};
    CHECK(empirical_ccdf(s, 2.0) == doctest::Approx(1.0 / 3.0));
    CHECK(empirical_ccdf(s, 0.5) == doctest::Approx(1.0));
    CHECK(empirical_ccdf(s, 3.0) == 0.0);
    CHECK(empirical_ccdf(s, 10.0) == 0.0);
    CHECK_THROWS_AS((void)empirical_ccdf(std::vector<double>{}, 1.0), Error);
}

TEST_CASE("empirical ccdf is nonincreasing and right-continuous on the sample grid") {
    RandomStream rng(7, 0);
    std::vector<double> s(5000);
    for (double& v : s) v = std::floor(10.0 * rng.uniform());  // heavy ties
    std::sort(s.begin(), s.end());
    double prev = 1.0;
    for (double x : {0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 9.0, 12.0}) {
        double cur = empirical_ccdf(s, x);
        CHECK(cur <= prev + 1e-15);
        // right-continuity: approaching from above changes nothing
        CHECK(empirical_ccdf(s, std::nextafter(x, 1e9)) == doctest::Approx(cur).epsilon(1e-3));
        prev = cur;
    }
}

TEST_CASE("hill estimator: geometric sample evaluates in closed form") {
    // X_(j) = 2^j: k / sum_{j<=k} ln(X_(n-j+1)/X_(n-k)) telescopes to
    // 2/((k+1) ln 2).
    std::vector<double> s;
    for (int j = 1; j <= 40; ++j) s.push_back(std::pow(2.0, j));
    for (std::size_t k : {2, 4, 10}) {
        const double expect = 2.0 / ((static_cast<double>(k) + 1.0) * std::log(2.0));
        CHECK(hill_estimator(s, k) == doctest::Approx(expect).epsilon(1e-12));
    }
    // Sample with top log-gaps ln2/j reproduces a flat estimate 1/ln2 at all k.
    std::vector<double> flat(40);
    double logv = 0.0;
    for (int j = 0; j < 40; ++j) {
        flat[39 - j] = std::exp(logv);  // descending logs from the top
        logv -= std::log(2.0) / (j + 1.0);
    }
    for (std::size_t k : {2, 5, 20}) {
        CHECK(hill_estimator(flat, k) == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-10));
    }
    CHECK_THROWS_AS((void)hill_estimator(s, 40), Error);
    CHECK_THROWS_AS((void)hill_estimator(s, 1), Error);
}

TEST_CASE("hill estimator recovers the Pareto index") {
    ScalarDist d = ParetoDist{1.5, 1.0};
    RandomStream rng(15, 0);
    std::vector<double> s(100000);
    for (double& v : s) v = sample(d, rng);
    std::sort(s.begin(), s.end());
    const double a = hill_estimator(s, 1000);
    CHECK(a >= 1.40);
    CHECK(a <= 1.60);
}

TEST_CASE("hill estimator is scale invariant") {
    RandomStream rng(16, 0);
    std::vector<double> s(5000);
    for (double& v : s) v = std::pow(rng.uniform(), -0.8);
    std::sort(s.begin(), s.end());
    std::vector<double> scaled = s;
    for (double& v : scaled) v *= 37.5;
    for (std::size_t k : {10, 100, 1000})
        CHECK(hill_estimator(scaled, k) == doctest::Approx(hill_estimator(s, k)).epsilon(1e-12));
}

TEST_CASE("two-sample KS basics") {
    std::vector<double> a = {1.0, 2.0, 3.0};
    CHECK(ks_two_sample(a, a) == 0.0);
    std::vector<double> zero = {0.0}, one = {1.0};
    CHECK(ks_two_sample(zero, one) == doctest::Approx(1.0));
    CHECK(ks_two_sample(one, zero) == doctest::Approx(1.0));  // symmetric

    ScalarDist d = ParetoDist{1.5, 1.0};
    RandomStream r1(21, 0), r2(22, 0);
    std::vector<double> x(100000), y(100000);
    for (double& v : x) v = sample(d, r1);
    for (double& v : y) v = sample(d, r2);
    double ks = ks_two_sample(x, y);
    CHECK(ks <= 0.01);
    CHECK(ks == doctest::Approx(ks_two_sample(y, x)));
}

TEST_CASE("ratio diagnostic: self-comparison gives unit ratios") {
    RandomStream rng(33, 0);
    std::vector<double> s(50000);
    for (double& v : s) v = std::pow(rng.uniform(), -2.0 / 3.0);
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    auto self = [&sorted](double x) { return empirical_ccdf(sorted, x); };
    const double grid[3] = {0.9, 0.99, 0.999};
    TailReport report = ratio_diagnostic(s, self, grid);
    REQUIRE(report.rows.size() == 3);
    double prev_x = 0.0;
    for (const auto& row : report.rows) {
        CHECK(row.ratio == doctest::Approx(1.0));
        CHECK(row.x >= prev_x);
        CHECK(row.ci_halfwidth > 0.0);
        prev_x = row.x;
    }
}

TEST_CASE("ratio diagnostic flags zero predictions and serializes as CSV") {
    std::vector<double> s = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
    const double grid[1] = {0.5};
    TailReport report = ratio_diagnostic(s, [](double) { return 0.0; }, grid);
    CHECK(report.rows[0].flagged);
    std::string csv = report.to_csv();
    CHECK(csv.rfind("x,empirical,predicted,ratio,ci\n", 0) == 0);
    CHECK(csv.find("nan") != std::string::npos);
}

TEST_CASE("ratio trend moves toward 1 as the quantile deepens") {
    // Pareto sample against its asymptote-with-offset prediction: the ratio
    // error shrinks monotonically in the quantile (regression-style check).
    RandomStream rng(44, 0);
    const std::uint64_t n = 400000;
    std::vector<double> s(n);
    for (double& v : s) v = std::pow(rng.uniform(), -2.0 / 3.0) + 5.0;  // shifted Pareto
    auto pred = [](double x) { return std::pow(x, -1.5); };             // ignores the shift
    const double grid[3] = {0.9, 0.99, 0.999};
    TailReport report = ratio_diagnostic(s, pred, grid);
    double err_prev = std::fabs(report.rows[0].ratio - 1.0);
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        double err = std::fabs(report.rows[i].ratio - 1.0);
        CHECK(err <= err_prev + 0.02);
        err_prev = err;
    }
}

TEST_CASE("wilson half-width shrinks like 1/sqrt(n) and stays valid at tiny counts") {
    CHECK(wilson_halfwidth(0.5, 100.0) > wilson_halfwidth(0.5, 10000.0));
    CHECK(wilson_halfwidth(0.0, 50.0) > 0.0);  // still informative with zero hits
    CHECK(wilson_halfwidth(0.5, 10000.0) == doctest::Approx(0.0098).epsilon(0.01));
}

TEST_CASE("empirical angular: single-ray data gives one unit atom") {
    std::vector<double> data;
    RandomStream rng(3, 0);
    for (int i = 0; i < 40000; ++i) {
        double r = std::pow(rng.uniform(), -2.0 / 3.0);
        data.push_back(0.3 * r);
        data.push_back(0.7 * r);
    }
    AngularMeasure est = empirical_angular(data, 2, 10.0);
    REQUIRE(est.atoms.size() >= 1);
    // dominant atom carries (almost) all mass at theta = (0.3, 0.7)
    const auto major =
        std::max_element(est.atoms.begin(), est.atoms.end(),
                         [](const AngularAtom& a, const AngularAtom& b) { return a.weight < b.weight; });
    CHECK(major->weight >= 0.999);
    CHECK(std::fabs(major->theta[0] - 0.3) + std::fabs(major->theta[1] - 0.7) <= 0.01);
}

TEST_CASE("empirical angular needs enough exceedances") {
    std::vector<double> data = {1.0, 1.0, 2.0, 2.0};
    CHECK_THROWS_AS((void)empirical_angular(data, 2, 0.5), Error);
}

TEST_CASE("empirical angular weights are scale invariant and sum to 1") {
    RandomStream rng(8, 0);
    std::vector<double> data;
    for (int i = 0; i < 30000; ++i) {
        double r = std::pow(rng.uniform(), -2.0 / 3.0);
        bool left = rng.uniform() < 0.3;
        data.push_back(left ? r : 0.2 * r);
        data.push_back(left ? 0.0 : 0.8 * r);
    }
    AngularMeasure a = empirical_angular(data, 2, 8.0);
    std::vector<double> scaled = data;
    for (double& v : scaled) v *= 4.0;
    AngularMeasure b = empirical_angular(scaled, 2, 32.0);
    REQUIRE(a.atoms.size() == b.atoms.size());
    double total = 0.0;
    for (std::size_t i = 0; i < a.atoms.size(); ++i) {
        CHECK(a.atoms[i].weight == doctest::Approx(b.atoms[i].weight).epsilon(1e-12));
        total += a.atoms[i].weight;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compound vector (Q, N, S) keeps a stable angular estimate across thresholds") {
    // Exceedance directions of the extended vector settle as the threshold
    // grows: total variation between the 99% and 99.9% estimates <= 0.1.
    RandomStream rng(55, 0);
    ScalarDist ndist = ParetoIntDist{1.5, 0.4};
    ScalarDist zdist = ParetoDist{1.5, 1.0};
    const std::uint64_t n = 1000000;
    std::vector<double> data(3 * n);
    std::vector<double> norms(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        double q = std::pow(rng.uniform(), -2.0 / 3.0);
        double nv = sample(ndist, rng);
        double s = 0.0;
        for (std::uint64_t j = 0; j < static_cast<std::uint64_t>(nv); ++j) s += sample(zdist, rng);
        data[3 * i] = q;
        data[3 * i + 1] = nv;
        data[3 * i + 2] = s;
        norms[i] = q + nv + s;
    }
    std::sort(norms.begin(), norms.end());
    const double t99 = norms[static_cast<std::size_t>(0.99 * n)];
    const double t999 = norms[static_cast<std::size_t>(0.999 * n)];
    // Limiting directions of the three jump mechanisms: big Q, big N (which
    // drags S ~ zbar N along), single big Z.
    AngularMeasure directions{
        {{1.0 / 3, {1.0, 0.0, 0.0}}, {1.0 / 3, {0.0, 0.25, 0.75}}, {1.0 / 3, {0.0, 0.0, 1.0}}}};
    AngularMeasure lo = empirical_angular(data, 3, t99, &directions);
    AngularMeasure hi = empirical_angular(data, 3, t999, &directions);
    CHECK(measure_total_variation(lo, hi) <= 0.1);
}

TEST_CASE("compound pair (N, S) angular atoms sit at the two jump directions") {
    // N ~ ParetoInt(1.5, 0.4), Z ~ Pareto(1.5, 1): bulk atom at
    // (1/(1+zbar), zbar/(1+zbar)) = (0.25, 0.75) and a single-jump atom at
    // (0, 1). Conditioning on the L1 norm exceeding the threshold weights the
    // bulk atom by (1+zbar)^alpha relative to the marginal constant.
    RandomStream rng(66, 0);
    ScalarDist ndist = ParetoIntDist{1.5, 0.4};
    ScalarDist zdist = ParetoDist{1.5, 1.0};
    const std::uint64_t n = 2000000;
    std::vector<double> data(2 * n);
    std::vector<double> norms(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        double nv = sample(ndist, rng);
        double s = 0.0;
        for (std::uint64_t j = 0; j < static_cast<std::uint64_t>(nv); ++j) s += sample(zdist, rng);
        data[2 * i] = nv;
        data[2 * i + 1] = s;
        norms[i] = nv + s;
    }
    std::sort(norms.begin(), norms.end());
    const double threshold = norms[static_cast<std::size_t>(0.9999 * n)];

    AngularMeasure declared{{{0.5, {0.25, 0.75}}, {0.5, {0.0, 1.0}}}};
    AngularMeasure est = empirical_angular(data, 2, threshold, &declared);
    REQUIRE(est.atoms.size() == 2);
    CHECK(std::fabs(est.atoms[0].theta[0] - 0.25) + std::fabs(est.atoms[0].theta[1] - 0.75) <= 0.05);
    CHECK(std::fabs(est.atoms[1].theta[0] - 0.0) + std::fabs(est.atoms[1].theta[1] - 1.0) <= 0.05);

    const double alpha = 1.5;
    const double c_n = std::pow(0.4, alpha);
    const double nbar = mean(ndist);
    const double zbar = 3.0;
    const double bulk = c_n * std::pow(1.0 + zbar, alpha);
    CHECK(est.atoms[0].weight == doctest::Approx(bulk / (bulk + nbar)).epsilon(0.07));
    CHECK(est.atoms[1].weight == doctest::Approx(nbar / (bulk + nbar)).epsilon(0.25));
}

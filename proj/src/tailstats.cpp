#include "branchtail/tailstats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include "branchtail/error.hpp"

namespace branchtail {

double empirical_ccdf(std::span<const double> sample, double x) {
    if (sample.empty()) fail(errc::empty_sample, "empirical ccdf of an empty sample");
    auto it = std::upper_bound(sample.begin(), sample.end(), x);
    return static_cast<double>(sample.end() - it) / static_cast<double>(sample.size());
}

double quantile(std::span<const double> sample, double q) {
    if (sample.empty()) fail(errc::empty_sample, "quantile of an empty sample");
    if (!(q > 0.0 && q < 1.0)) fail(errc::invalid_argument, "quantile level must lie in (0,1)");
    const auto n = static_cast<double>(sample.size());
    auto idx = static_cast<std::size_t>(std::ceil(q * n)) - 1;
    if (idx >= sample.size()) idx = sample.size() - 1;
    return sample[idx];
}

double hill_estimator(std::span<const double> sample, std::size_t k) {
    const std::size_t n = sample.size();
    if (k < 2 || k >= n) fail(errc::insufficient_data, "hill estimator needs 2 <= k < n");
    const double base = sample[n - k - 1];
    if (base <= 0.0) fail(errc::insufficient_data, "hill estimator needs positive order statistics");
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
        const double v = sample[n - j];
        if (v <= 0.0) fail(errc::insufficient_data, "hill estimator needs positive order statistics");
        s += std::log(v) - std::log(base);
    }
    if (s <= 0.0) fail(errc::insufficient_data, "degenerate top order statistics");
    return static_cast<double>(k) / s;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) fail(errc::empty_sample, "KS statistic of an empty sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] <= v) ++i;
        while (j < sb.size() && sb[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double wilson_halfwidth(double phat, double n, double z) {
    if (n <= 0.0) return 1.0;
    const double z2 = z * z;
    return z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
}

namespace {

void append_number(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

} // namespace

std::string TailReport::to_csv() const {
    std::string out = "x,empirical,predicted,ratio,ci\n";
    for (const auto& row : rows) {
        append_number(out, row.x);
        out.push_back(',');
        append_number(out, row.empirical);
        out.push_back(',');
        append_number(out, row.predicted);
        out.push_back(',');
        if (row.flagged)
            out.append("nan");
        else
            append_number(out, row.ratio);
        out.push_back(',');
        append_number(out, row.ci_halfwidth);
        out.push_back('\n');
    }
    return out;
}

TailReport ratio_diagnostic(std::vector<double> sample,
                            const std::function<double(double)>& predicted,
                            std::span<const double> quantile_grid) {
    if (sample.empty()) fail(errc::empty_sample, "ratio diagnostic of an empty sample");
    std::sort(sample.begin(), sample.end());
    TailReport report;
    report.rows.reserve(quantile_grid.size());
    const double n = static_cast<double>(sample.size());
    for (double q : quantile_grid) {
        TailRow row;
        row.x = quantile(sample, q);
        row.empirical = empirical_ccdf(sample, row.x);
        row.predicted = predicted(row.x);
        row.ci_halfwidth = wilson_halfwidth(row.empirical, n);
        if (row.predicted > 0.0) {
            row.ratio = row.empirical / row.predicted;
        } else {
            row.ratio = std::numeric_limits<double>::quiet_NaN();
            row.flagged = true;
        }
        report.rows.push_back(row);
    }
    std::sort(report.rows.begin(), report.rows.end(),
              [](const TailRow& a, const TailRow& b) { return a.x < b.x; });
    return report;
}

AngularMeasure empirical_angular(std::span<const double> data, std::size_t dim, double threshold,
                                 const AngularMeasure* declared) {
    if (dim < 1 || data.size() % dim != 0) fail(errc::dimension_mismatch, "bad vector data shape");
    if (declared != nullptr && declared->dimension() != dim)
        fail(errc::dimension_mismatch, "declared atoms do not match the data dimension");
    const std::size_t n = data.size() / dim;

    // Group index per exceedance direction; directions are stored per group
    // for the median pass.
    std::map<std::size_t, std::vector<std::vector<double>>> groups;
    std::size_t exceedances = 0;
    std::vector<double> theta(dim, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        double norm = 0.0;
        for (std::size_t c = 0; c < dim; ++c) norm += std::fabs(data[r * dim + c]);
        if (!(norm > threshold)) continue;
        ++exceedances;
        for (std::size_t c = 0; c < dim; ++c) theta[c] = std::fabs(data[r * dim + c]) / norm;

        std::size_t key = 0;
        if (declared != nullptr) {
            double best = 1e300;
            for (std::size_t a = 0; a < declared->atoms.size(); ++a) {
                double dist = 0.0;
                for (std::size_t c = 0; c < dim; ++c)
                    dist += std::fabs(theta[c] - declared->atoms[a].theta[c]);
                if (dist < best) {
                    best = dist;
                    key = a;
                }
            }
        } else {
            // Grid cells of side 0.05 on the first dim-1 free coordinates,
            // centered on multiples of 0.05 so that exact atom directions do
            // not straddle a cell boundary.
            for (std::size_t c = 0; c + 1 < dim; ++c) {
                auto cell = static_cast<std::size_t>(
                    std::min(20.0, std::floor(theta[c] / 0.05 + 0.5)));
                key = key * 21 + cell;
            }
        }
        groups[key].push_back(theta);
    }
    if (exceedances < 100)
        fail(errc::too_few_exceedances, "angular estimation needs at least 100 exceedances");

    AngularMeasure estimate;
    estimate.atoms.reserve(groups.size());
    for (auto& [key, members] : groups) {
        AngularAtom atom;
        atom.weight = static_cast<double>(members.size()) / static_cast<double>(exceedances);
        atom.theta.assign(dim, 0.0);
        // Coordinate-wise median, robust against the heavy-tailed drift of
        // secondary coordinates at finite thresholds; renormalized onto the
        // simplex.
        std::vector<double> coord(members.size());
        double total = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            for (std::size_t i = 0; i < members.size(); ++i) coord[i] = members[i][c];
            auto mid = coord.begin() + static_cast<std::ptrdiff_t>(coord.size() / 2);
            std::nth_element(coord.begin(), mid, coord.end());
            atom.theta[c] = *mid;
            total += *mid;
        }
        if (total > 0.0)
            for (double& t : atom.theta) t /= total;
        estimate.atoms.push_back(std::move(atom));
    }
    return estimate;
}

} // namespace branchtail

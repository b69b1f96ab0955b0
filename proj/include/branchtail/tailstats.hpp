#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "branchtail/measures.hpp"

namespace branchtail {

// #{s > x} / n by binary search; `sample` must be sorted ascending.
double empirical_ccdf(std::span<const double> sample, double x);

// Order statistic at level q in (0,1): smallest value with at least a q
// fraction of the sample at or below it.
double quantile(std::span<const double> sample, double q);

// Hill tail index estimate from the top k order statistics of a sorted
// sample: k / sum_{j=1..k} ln(X_(n-j+1) / X_(n-k)).
double hill_estimator(std::span<const double> sample, std::size_t k);

// sup-distance between the two empirical CDFs (inputs need not be sorted).
double ks_two_sample(std::span<const double> a, std::span<const double> b);

struct TailRow {
    double x = 0.0;
    double empirical = 0.0;
    double predicted = 0.0;
    double ratio = 0.0;  // empirical / predicted when predicted > 0, else NaN
    double ci_halfwidth = 0.0;
    bool flagged = false;  // predicted <= 0
};

struct TailReport {
    std::vector<TailRow> rows;
    std::string to_csv() const;  // header: x,empirical,predicted,ratio,ci
};

// Evaluates predicted vs empirical tails at the sample's own quantiles so
// every model is probed in its tail regime. Confidence half-widths are
// Wilson intervals at z = 1.96.
TailReport ratio_diagnostic(std::vector<double> sample,
                            const std::function<double(double)>& predicted,
                            std::span<const double> quantile_grid);

// Angular measure estimate from L1-norm exceedances. Directions v/||v|| are
// grouped by nearest declared atom when `declared` is given, otherwise by
// grid cells of side 0.05; each group reports its coordinate-wise median
// direction (renormalized) and its frequency. `data` is row-major with
// `dim` columns. Throws too_few_exceedances below 100 exceedances.
AngularMeasure empirical_angular(std::span<const double> data, std::size_t dim, double threshold,
                                 const AngularMeasure* declared = nullptr);

double wilson_halfwidth(double phat, double n, double z = 1.96);

} // namespace branchtail

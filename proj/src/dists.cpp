#include "branchtail/dists.hpp"

#include <cmath>
#include <cstdio>

#include "branchtail/error.hpp"

namespace branchtail {

double RVTail::ccdf(double x) const {
    if (x < xm) return std::min(1.0, b);
    return std::min(1.0, b * std::pow(xm / x, alpha));
}

double RVTail::mean() const {
    if (alpha <= 1.0)
        fail(errc::infinite_mean, "RV tail with alpha <= 1 has no finite mean");
    return b * alpha * xm / (alpha - 1.0);
}

double zeta_tail_sum(double s, double a) {
    if (s <= 1.0) fail(errc::infinite_mean, "zeta tail sum diverges for s <= 1");
    // Direct sum up to a+n, then Euler-Maclaurin for the remainder.
    const int n = 32;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += std::pow(a + j, -s);
    const double m = a + n;
    const double mk = std::pow(m, -s);
    sum += m * mk / (s - 1.0);  // m^(1-s)/(s-1)
    sum += 0.5 * mk;
    sum += s * mk / m / 12.0;
    sum -= s * (s + 1.0) * (s + 2.0) * mk / (m * m * m) / 720.0;
    return sum;
}

double pareto_floor_mean(double alpha, double xm) {
    if (alpha <= 1.0) fail(errc::infinite_mean, "Pareto mean is infinite for alpha <= 1");
    if (xm <= 0.0) return 0.0;
    // E floor(X) = sum_{k>=1} P(X >= k); the first floor(xm) terms equal 1.
    double whole = std::floor(xm);
    return whole + std::pow(xm, alpha) * zeta_tail_sum(alpha, whole + 1.0);
}

namespace {

double pareto_ccdf(double alpha, double xm, double x) {
    if (x <= xm) return 1.0;
    return std::pow(xm / x, alpha);
}

// P(Poisson(lambda) > x). Sums whichever side of the pmf is smaller.
double poisson_ccdf(double lambda, double x) {
    if (x < 0.0) return 1.0;
    if (lambda == 0.0) return 0.0;
    const double k = std::floor(x);  // want P(X >= k+1)
    double log_head = (k + 1.0) * std::log(lambda) - lambda - std::lgamma(k + 2.0);
    if (k + 1.0 >= lambda || log_head < -30.0) {
        // Upper sum starting at k+1.
        double term = std::exp(log_head);
        double total = 0.0;
        double j = k + 2.0;
        while (term > total * 1e-18 + 1e-300) {
            total += term;
            term *= lambda / j;
            j += 1.0;
        }
        return std::min(1.0, total);
    }
    // Lower sum 0..k, complemented.
    double term = std::exp(-lambda);
    double total = term;
    for (double j = 1.0; j <= k; j += 1.0) {
        term *= lambda / j;
        total += term;
    }
    return std::max(0.0, 1.0 - total);
}

} // namespace

double sample_poisson(double mean, RandomStream& rng) {
    if (mean <= 0.0) return 0.0;
    // Knuth's product-of-uniforms method, in chunks so exp(-chunk) stays
    // well inside the normal double range for large means.
    double remaining = mean;
    double count = 0.0;
    while (remaining > 0.0) {
        double chunk = std::min(remaining, 500.0);
        remaining -= chunk;
        const double limit = std::exp(-chunk);
        double prod = rng.uniform();
        while (prod > limit) {
            count += 1.0;
            prod *= rng.uniform();
        }
    }
    return count;
}

double tail(const ScalarDist& dist, double x) {
    struct Visitor {
        double x;
        double operator()(const ParetoDist& d) const { return pareto_ccdf(d.alpha, d.xm, x); }
        double operator()(const ParetoIntDist& d) const {
            // floor(X) > x  <=>  X >= floor(x)+1
            return pareto_ccdf(d.alpha, d.xm, std::floor(x) + 1.0);
        }
        double operator()(const ExponentialDist& d) const { return std::exp(-d.rate * x); }
        double operator()(const PoissonDist& d) const { return poisson_ccdf(d.mean, x); }
        double operator()(const ConstantDist& d) const { return x < d.value ? 1.0 : 0.0; }
        double operator()(const BernoulliDist& d) const {
            if (x < 0.0) return 1.0;
            return x < 1.0 ? d.p : 0.0;
        }
        double operator()(const EmpiricalDist&) const {
            fail(errc::unsupported_analytic, "empirical distribution has no analytic tail");
        }
    };
    if (x < 0.0) fail(errc::invalid_argument, "tail evaluated at negative x");
    return std::visit(Visitor{x}, dist);
}

double sample(const ScalarDist& dist, RandomStream& rng) {
    struct Visitor {
        RandomStream& rng;
        double operator()(const ParetoDist& d) const {
            return d.xm * std::pow(rng.uniform(), -1.0 / d.alpha);
        }
        double operator()(const ParetoIntDist& d) const {
            return std::floor(d.xm * std::pow(rng.uniform(), -1.0 / d.alpha));
        }
        double operator()(const ExponentialDist& d) const {
            return -std::log(rng.uniform()) / d.rate;
        }
        double operator()(const PoissonDist& d) const { return sample_poisson(d.mean, rng); }
        double operator()(const ConstantDist& d) const { return d.value; }
        double operator()(const BernoulliDist& d) const {
            return rng.uniform() < d.p ? 1.0 : 0.0;
        }
        double operator()(const EmpiricalDist& d) const {
            if (d.values.empty()) fail(errc::empty_sample, "empirical distribution has no values");
            return d.values[rng.below(d.values.size())];
        }
    };
    return std::visit(Visitor{rng}, dist);
}

double mean(const ScalarDist& dist) {
    struct Visitor {
        double operator()(const ParetoDist& d) const {
            if (d.alpha <= 1.0)
                fail(errc::infinite_mean, "Pareto mean is infinite for alpha <= 1");
            return d.alpha * d.xm / (d.alpha - 1.0);
        }
        double operator()(const ParetoIntDist& d) const { return pareto_floor_mean(d.alpha, d.xm); }
        double operator()(const ExponentialDist& d) const { return 1.0 / d.rate; }
        double operator()(const PoissonDist& d) const { return d.mean; }
        double operator()(const ConstantDist& d) const { return d.value; }
        double operator()(const BernoulliDist& d) const { return d.p; }
        double operator()(const EmpiricalDist& d) const {
            if (d.values.empty()) fail(errc::empty_sample, "empirical distribution has no values");
            double s = 0.0;
            for (double v : d.values) s += v;
            return s / static_cast<double>(d.values.size());
        }
    };
    return std::visit(Visitor{}, dist);
}

bool integer_valued(const ScalarDist& dist) {
    struct Visitor {
        bool operator()(const ParetoDist&) const { return false; }
        bool operator()(const ParetoIntDist&) const { return true; }
        bool operator()(const ExponentialDist&) const { return false; }
        bool operator()(const PoissonDist&) const { return true; }
        bool operator()(const ConstantDist& d) const { return d.value == std::floor(d.value); }
        bool operator()(const BernoulliDist&) const { return true; }
        bool operator()(const EmpiricalDist&) const { return false; }
    };
    return std::visit(Visitor{}, dist);
}

std::string describe(const ScalarDist& dist) {
    char buf[96];
    struct Visitor {
        char* buf;
        std::string operator()(const ParetoDist& d) const {
            std::snprintf(buf, 96, "pareto(alpha=%g, xm=%g)", d.alpha, d.xm);
            return buf;
        }
        std::string operator()(const ParetoIntDist& d) const {
            std::snprintf(buf, 96, "pareto_int(alpha=%g, xm=%g)", d.alpha, d.xm);
            return buf;
        }
        std::string operator()(const ExponentialDist& d) const {
            std::snprintf(buf, 96, "exponential(rate=%g)", d.rate);
            return buf;
        }
        std::string operator()(const PoissonDist& d) const {
            std::snprintf(buf, 96, "poisson(mean=%g)", d.mean);
            return buf;
        }
        std::string operator()(const ConstantDist& d) const {
            std::snprintf(buf, 96, "constant(%g)", d.value);
            return buf;
        }
        std::string operator()(const BernoulliDist& d) const {
            std::snprintf(buf, 96, "bernoulli(p=%g)", d.p);
            return buf;
        }
        std::string operator()(const EmpiricalDist& d) const {
            std::snprintf(buf, 96, "empirical(%zu values)", d.values.size());
            return buf;
        }
    };
    return std::visit(Visitor{buf}, dist);
}

} // namespace branchtail

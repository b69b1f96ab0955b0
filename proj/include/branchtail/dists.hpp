#pragma once

#include <string>
#include <variant>
#include <vector>

#include "branchtail/rng.hpp"

namespace branchtail {

// Regularly varying reference tail: F̄(x) = b * (xm/x)^alpha for x >= xm.
// With b = 1 this is the tail of an exact Pareto(alpha, xm); b in [0,1]
// also has a sampling interpretation (mass 1-b at zero, Pareto otherwise);
// general b >= 0 is a purely analytic object used in tail arithmetic.
struct RVTail {
    double alpha = 1.5;
    double xm = 1.0;
    double b = 1.0;

    double ccdf(double x) const;
    // Finite only for alpha > 1: b * alpha * xm / (alpha - 1).
    double mean() const;
};

struct ParetoDist {
    double alpha;
    double xm;
};

// floor of a continuous Pareto draw; regularly varying with the same alpha.
struct ParetoIntDist {
    double alpha;
    double xm;
};

struct ExponentialDist {
    double rate;
};

struct PoissonDist {
    double mean;
};

struct ConstantDist {
    double value;
};

struct BernoulliDist {
    double p;
};

// Plain bag of values, sampled uniformly. Supports sampling and an exact
// bag mean but no analytic tail.
struct EmpiricalDist {
    std::vector<double> values;
};

using ScalarDist = std::variant<ParetoDist, ParetoIntDist, ExponentialDist, PoissonDist,
                                ConstantDist, BernoulliDist, EmpiricalDist>;

// Exact P(X > x) for x >= 0. Throws unsupported_analytic for EmpiricalDist.
double tail(const ScalarDist& dist, double x);

// One draw by inverse transform (or direct construction for the discrete
// variants). Integer-valued variants return whole numbers.
double sample(const ScalarDist& dist, RandomStream& rng);

// Exact mean. Throws infinite_mean for Pareto variants with alpha <= 1.
double mean(const ScalarDist& dist);

bool integer_valued(const ScalarDist& dist);

std::string describe(const ScalarDist& dist);

// sum_{k=a}^inf k^-s for s > 1, a >= 1 (Euler-Maclaurin; ~1e-14 accurate).
double zeta_tail_sum(double s, double a);

// Exact mean of floor(X) for X ~ Pareto(alpha, xm), alpha > 1:
// sum_{k>=1} P(X >= k).
double pareto_floor_mean(double alpha, double xm);

double sample_poisson(double mean, RandomStream& rng);

} // namespace branchtail

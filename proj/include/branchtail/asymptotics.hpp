#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "branchtail/linalg.hpp"
#include "branchtail/models.hpp"

namespace branchtail {

// Perron root of a nonnegative matrix by power iteration on M + eps*I
// (eps = 1e-9 breaks periodic/reducible cases). Relative tolerance 1e-10,
// at most 1e5 iterations; throws no_convergence past that.
double spectral_radius(const Matrix& m);

struct MeanSolution {
    std::vector<double> rbar;
    std::vector<double> qbar;
    Matrix m;
    double residual = 0.0;  // max_i |rbar_i - qbar_i - (M rbar)_i|
};

// rbar = (I - M)^-1 qbar. Throws supercritical when rho(M) >= 1.
MeanSolution solve_means(const Matrix& m, std::vector<double> qbar);

// b * sum_atoms w * (a . theta)^alpha with the positive-part power.
double angular_tail_constant(double b, const AngularMeasure& mu, std::span<const double> a,
                             double alpha);

struct TailSolution {
    std::vector<double> d;
    std::vector<double> c;
    double residual = 0.0;
};

// d = (I - M)^-1 c.
TailSolution solve_tail_constants(const Matrix& m, std::vector<double> c);

// Tail multiplier of the compound sum S = Z_1 + ... + Z_N relative to the
// reference tail: cN * zbar^alpha + cZ * nbar.
double compound_tail_constant(double cN, double cZ, double nbar, double zbar, double alpha);

// c_0 = c_1 E N_1 + ... + c_p E N_p: the single-big-summand part of the
// vector compound tail. The full prediction adds P(zbar_1 N_1 + ... > x),
// which angular_tail_constant supplies for the N-vector's measure.
double compound_vector_constant(std::span<const double> c, std::span<const double> en);

struct ReducedMeans {
    Matrix m;                   // (K-1) x (K-1)
    std::vector<double> qbar;   // length K-1
};

// Eliminates the highest-indexed type at the level of means:
//   m~_ik = m_ik + m_iK * m_Kk / (1 - m_KK)
//   q~_i  = q_i  + m_iK * q_K  / (1 - m_KK)
// Throws degenerate_subtree when m_KK >= 1.
ReducedMeans reduce_means(const Matrix& m, std::span<const double> qbar);

// Optional reorder before elimination; `order` is a permutation of 0..K-1
// giving the new type order.
void permute_system(Matrix& m, std::vector<double>& qbar, std::span<const std::size_t> order);

// Predicted P(R > x) ~ (1/(1-nbar)) P(Q + rbar*N > x) for a single-class
// model. The pair tail is closed-form for MG1 and AtomicMRV and estimated by
// Monte Carlo on the pair law otherwise. `rbar_override` substitutes the
// weight used for N in the prediction (sensitivity diagnostics).
double predicted_tail_single(const JointModel& model, double x, std::uint64_t nsamples = 1000000,
                             std::uint64_t seed = 0x51a7e5,
                             std::optional<double> rbar_override = std::nullopt);

} // namespace branchtail

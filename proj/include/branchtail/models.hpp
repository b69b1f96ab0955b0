#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "branchtail/dists.hpp"
#include "branchtail/linalg.hpp"
#include "branchtail/measures.hpp"

namespace branchtail {

// ---------------------------------------------------------------------------
// Joint generators for the dependent pair (Q, N).

struct IndependentPair {
    ScalarDist q;
    ScalarDist n;
};

// Busy-period dependence: N is Poisson(lambda * q) given Q = q.
struct MG1Pair {
    ScalarDist q;
    double lambda = 0.0;
};

// N = floor(slope * Q + noise) with independent nonnegative noise.
struct LinkedFloor {
    ScalarDist q;
    double slope = 0.0;
    ScalarDist noise;
};

// Jointly regularly varying vector: radial draw times a random simplex atom,
// with the count coordinates floored to integers. Works in any dimension;
// as a pair model the atoms live on the 2-simplex (theta = (theta_q, theta_n)).
struct AtomicMRV {
    RVTail radial;
    AngularMeasure angular;
};

using JointModel = std::variant<IndependentPair, MG1Pair, LinkedFloor, AtomicMRV>;

struct PairSample {
    double q = 0.0;
    double n = 0.0;
};

struct VectorSample {
    double q = 0.0;
    std::vector<double> n;
    bool truncated = false;  // only reduced models can set this
};

PairSample sample_pair(const JointModel& model, RandomStream& rng);

enum class MeanMethod { automatic, analytic, monte_carlo };

struct PairMeans {
    double qbar = 0.0;
    double nbar = 0.0;
    // Standard errors; zero on the analytic path.
    double qbar_se = 0.0;
    double nbar_se = 0.0;
    bool analytic = true;
};

// Exact means where the model admits them (MG1 uses nbar = lambda * qbar),
// Monte Carlo with reported standard errors otherwise. Throws supercritical
// when nbar >= 1 and infinite_mean propagates from the marginals.
PairMeans pair_means(const JointModel& model, MeanMethod method = MeanMethod::automatic,
                     std::uint64_t mc_samples = 200000, std::uint64_t seed = 0x9e3779b9);

// Predicted multiplier for P(a0*Q + a1*N > x) relative to the tail of Q:
// (a0 + a1*lambda)^alpha. Requires a continuous Pareto Q.
double mg1_tail_constant(const MG1Pair& model, double a0, double a1);

// Tail metadata of a pair model against a reference tail (xm/x)^alpha:
// radial multiplier b and the limiting angular measure on the 2-simplex.
struct PairTailInfo {
    RVTail reference;  // b field is 1; per-model multiplier lives in `b`
    double b = 0.0;
    AngularMeasure angular;
};

// Derives (b, mu) for models whose joint tail is known in closed form.
// Returns nullopt when the pair has no regularly varying component.
std::optional<PairTailInfo> pair_tail_info(const JointModel& model);

// ---------------------------------------------------------------------------
// Multiclass models: K types, type i drawing (Q(i), N^(1)(i), ..., N^(K)(i)).

struct PairType {
    JointModel pair;  // only valid when K == 1
};

struct IndependentVec {
    ScalarDist q;
    std::vector<ScalarDist> n;  // one offspring distribution per type
};

// Shares the model-wide radial tail; per-type multiplier b and angular
// measure on the (K+1)-simplex. Count coordinates are floored.
struct AtomicMRVVec {
    double b = 1.0;
    AngularMeasure angular;
};

class MulticlassModel;

// Type whose (Q~, N~) law is the type-K-eliminated reduction of a parent
// model; draws run the parent's direct-line subtree simulation.
struct ReducedType {
    std::shared_ptr<const MulticlassModel> parent;
    std::uint64_t subtree_cap = 10000000;
};

using TypeModel = std::variant<PairType, IndependentVec, AtomicMRVVec, ReducedType>;

class MulticlassModel {
public:
    // Validates dimensions, computes the derived mean matrix M and mean
    // vector qbar, and enforces subcriticality (spectral radius < 1).
    static MulticlassModel from_classes(std::vector<TypeModel> classes,
                                        std::optional<RVTail> radial = std::nullopt);

    static MulticlassModel single(JointModel pair);

    // (K-1)-class model whose types draw reduced pairs from `parent`.
    static MulticlassModel reduced_from(std::shared_ptr<const MulticlassModel> parent,
                                        std::uint64_t subtree_cap);

    std::size_t type_count() const { return classes_.size(); }
    VectorSample sample_vector(std::size_t type, RandomStream& rng) const;

    const Matrix& mean_matrix() const { return m_; }
    const std::vector<double>& qbar() const { return qbar_; }
    double rho() const { return rho_; }

    // Reference tail F̄(x) = (xm/x)^alpha shared by every type; present when
    // at least one type carries a regularly varying component.
    const std::optional<RVTail>& reference() const { return reference_; }
    double tail_multiplier(std::size_t type) const { return b_[type]; }
    // Null for types with zero tail multiplier.
    const AngularMeasure* angular(std::size_t type) const;

    const std::vector<TypeModel>& classes() const { return classes_; }
    const JointModel* single_pair() const;  // non-null when K==1 and pair-backed

private:
    MulticlassModel() = default;

    std::vector<TypeModel> classes_;
    Matrix m_;
    std::vector<double> qbar_;
    double rho_ = 0.0;
    std::optional<RVTail> reference_;
    std::vector<double> b_;
    std::vector<std::optional<AngularMeasure>> angular_;
};

} // namespace branchtail

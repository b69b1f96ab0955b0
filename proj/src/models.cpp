#include "branchtail/models.hpp"

#include <cmath>
#include <cstdio>

#include "branchtail/asymptotics.hpp"
#include "branchtail/error.hpp"
#include "branchtail/simulate.hpp"

namespace branchtail {

namespace {

// Radial draw against the reference Pareto(alpha, xm), thinned by the tail
// multiplier b in [0,1]: zero with probability 1-b, Pareto otherwise.
double sample_radial(const RVTail& radial, double b, RandomStream& rng) {
    if (b <= 0.0) return 0.0;
    if (b < 1.0 && rng.uniform() >= b) return 0.0;
    return radial.xm * std::pow(rng.uniform(), -1.0 / radial.alpha);
}

std::size_t pick_atom(const AngularMeasure& mu, RandomStream& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < mu.atoms.size(); ++i) {
        acc += mu.atoms[i].weight;
        if (u < acc) return i;
    }
    return mu.atoms.size() - 1;
}

// Exact mean of floor(theta * X) for the thinned radial law.
double floored_component_mean(const RVTail& radial, double b, double theta) {
    if (b <= 0.0 || theta <= 0.0) return 0.0;
    return b * pareto_floor_mean(radial.alpha, theta * radial.xm);
}

double pareto_tail_constant(const ScalarDist& dist, double* alpha_out) {
    if (const auto* p = std::get_if<ParetoDist>(&dist)) {
        *alpha_out = p->alpha;
        return std::pow(p->xm, p->alpha);
    }
    if (const auto* p = std::get_if<ParetoIntDist>(&dist)) {
        *alpha_out = p->alpha;
        return std::pow(p->xm, p->alpha);
    }
    return 0.0;
}

} // namespace

PairSample sample_pair(const JointModel& model, RandomStream& rng) {
    struct Visitor {
        RandomStream& rng;
        PairSample operator()(const IndependentPair& m) const {
            double q = sample(m.q, rng);
            return {q, sample(m.n, rng)};
        }
        PairSample operator()(const MG1Pair& m) const {
            double q = sample(m.q, rng);
            return {q, sample_poisson(m.lambda * q, rng)};
        }
        PairSample operator()(const LinkedFloor& m) const {
            double q = sample(m.q, rng);
            double noise = sample(m.noise, rng);
            return {q, std::floor(m.slope * q + noise)};
        }
        PairSample operator()(const AtomicMRV& m) const {
            std::size_t j = pick_atom(m.angular, rng);
            double r = sample_radial(m.radial, m.radial.b, rng);
            const auto& theta = m.angular.atoms[j].theta;
            return {r * theta[0], std::floor(r * theta[1])};
        }
    };
    return std::visit(Visitor{rng}, model);
}

PairMeans pair_means(const JointModel& model, MeanMethod method, std::uint64_t mc_samples,
                     std::uint64_t seed) {
    PairMeans out;
    bool have_analytic = false;
    if (method != MeanMethod::monte_carlo) {
        if (const auto* m = std::get_if<IndependentPair>(&model)) {
            out.qbar = mean(m->q);
            out.nbar = mean(m->n);
            have_analytic = true;
        } else if (const auto* m = std::get_if<MG1Pair>(&model)) {
            out.qbar = mean(m->q);
            out.nbar = m->lambda * out.qbar;
            have_analytic = true;
        } else if (const auto* m = std::get_if<AtomicMRV>(&model)) {
            if (m->angular.dimension() != 2)
                fail(errc::dimension_mismatch, "pair model needs 2-dimensional atoms");
            // RVTail::mean() already includes the thinning multiplier b.
            double radial_mean = m->radial.b <= 0.0 ? 0.0 : m->radial.mean();
            out.qbar = 0.0;
            out.nbar = 0.0;
            for (const auto& atom : m->angular.atoms) {
                out.qbar += atom.weight * atom.theta[0] * radial_mean;
                out.nbar += atom.weight * floored_component_mean(m->radial, m->radial.b, atom.theta[1]);
            }
            have_analytic = true;
        }
        if (!have_analytic && method == MeanMethod::analytic)
            fail(errc::unsupported_analytic, "model has no closed-form means");
    }
    if (!have_analytic) {
        RandomStream rng(seed, 0);
        double sq = 0.0, sq2 = 0.0, sn = 0.0, sn2 = 0.0;
        for (std::uint64_t i = 0; i < mc_samples; ++i) {
            PairSample s = sample_pair(model, rng);
            sq += s.q;
            sq2 += s.q * s.q;
            sn += s.n;
            sn2 += s.n * s.n;
        }
        const double n = static_cast<double>(mc_samples);
        out.qbar = sq / n;
        out.nbar = sn / n;
        out.qbar_se = std::sqrt(std::max(0.0, sq2 / n - out.qbar * out.qbar) / n);
        out.nbar_se = std::sqrt(std::max(0.0, sn2 / n - out.nbar * out.nbar) / n);
        out.analytic = false;
    }
    if (out.nbar >= 1.0) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "supercritical pair model: nbar = %.6f >= 1", out.nbar);
        fail(errc::supercritical, buf);
    }
    return out;
}

double mg1_tail_constant(const MG1Pair& model, double a0, double a1) {
    const auto* q = std::get_if<ParetoDist>(&model.q);
    if (q == nullptr)
        fail(errc::unsupported_analytic, "mg1_tail_constant needs a continuous Pareto Q");
    if (a0 < 0.0 || a1 < 0.0) fail(errc::invalid_argument, "coefficients must be nonnegative");
    return std::pow(a0 + a1 * model.lambda, q->alpha);
}

std::optional<PairTailInfo> pair_tail_info(const JointModel& model) {
    PairTailInfo info;
    if (const auto* m = std::get_if<AtomicMRV>(&model)) {
        info.reference = RVTail{m->radial.alpha, m->radial.xm, 1.0};
        info.b = m->radial.b;
        info.angular = m->angular;
        return info;
    }
    if (const auto* m = std::get_if<MG1Pair>(&model)) {
        const auto* q = std::get_if<ParetoDist>(&m->q);
        if (q == nullptr) return std::nullopt;
        // Large Q drags N ~ lambda*Q along: one atom in direction (1, lambda).
        double s = 1.0 + m->lambda;
        info.reference = RVTail{q->alpha, q->xm, 1.0};
        info.b = std::pow(s, q->alpha);
        info.angular.atoms = {{1.0, {1.0 / s, m->lambda / s}}};
        return info;
    }
    if (const auto* m = std::get_if<LinkedFloor>(&model)) {
        const auto* q = std::get_if<ParetoDist>(&m->q);
        if (q == nullptr) return std::nullopt;
        double s = 1.0 + m->slope;
        info.reference = RVTail{q->alpha, q->xm, 1.0};
        info.b = std::pow(s, q->alpha);
        info.angular.atoms = {{1.0, {1.0 / s, m->slope / s}}};
        return info;
    }
    const auto* m = std::get_if<IndependentPair>(&model);
    double alpha_q = 0.0, alpha_n = 0.0;
    double cq = pareto_tail_constant(m->q, &alpha_q);
    double cn = pareto_tail_constant(m->n, &alpha_n);
    if (cq == 0.0 && cn == 0.0) return std::nullopt;
    if (cq > 0.0 && (cn == 0.0 || alpha_q < alpha_n)) {
        info.reference = RVTail{alpha_q, 1.0, 1.0};
        info.b = cq;
        info.angular.atoms = {{1.0, {1.0, 0.0}}};
    } else if (cn > 0.0 && (cq == 0.0 || alpha_n < alpha_q)) {
        info.reference = RVTail{alpha_n, 1.0, 1.0};
        info.b = cn;
        info.angular.atoms = {{1.0, {0.0, 1.0}}};
    } else {
        // Equally heavy marginals: independence puts the mass on the axes.
        info.reference = RVTail{alpha_q, 1.0, 1.0};
        info.b = cq + cn;
        info.angular.atoms = {{cq / info.b, {1.0, 0.0}}, {cn / info.b, {0.0, 1.0}}};
    }
    return info;
}

// ---------------------------------------------------------------------------

MulticlassModel MulticlassModel::from_classes(std::vector<TypeModel> classes,
                                              std::optional<RVTail> radial) {
    if (classes.empty()) fail(errc::config, "model needs at least one class");
    const std::size_t k = classes.size();

    MulticlassModel model;
    model.classes_ = std::move(classes);
    model.m_ = Matrix(k, k);
    model.qbar_.assign(k, 0.0);
    model.b_.assign(k, 0.0);
    model.angular_.assign(k, std::nullopt);

    // Reduced classes all derive their means from the parent in one shot.
    const MulticlassModel* reduced_parent = nullptr;

    for (std::size_t i = 0; i < k; ++i) {
        const TypeModel& cls = model.classes_[i];
        if (const auto* pt = std::get_if<PairType>(&cls)) {
            if (k != 1) fail(errc::config, "pair models are only valid in single-class mode");
            PairMeans pm = pair_means(pt->pair);
            model.qbar_[0] = pm.qbar;
            model.m_(0, 0) = pm.nbar;
            if (auto info = pair_tail_info(pt->pair)) {
                model.reference_ = info->reference;
                model.b_[0] = info->b;
                model.angular_[0] = info->angular;
            }
        } else if (const auto* iv = std::get_if<IndependentVec>(&cls)) {
            if (iv->n.size() != k)
                fail(errc::config, "independent class needs one offspring distribution per type");
            model.qbar_[i] = mean(iv->q);
            for (std::size_t kk = 0; kk < k; ++kk) model.m_(i, kk) = mean(iv->n[kk]);
        } else if (const auto* av = std::get_if<AtomicMRVVec>(&cls)) {
            if (!radial.has_value())
                fail(errc::config, "atomic classes need a shared radial tail");
            av->angular.validate();
            if (av->angular.dimension() != k + 1)
                fail(errc::dimension_mismatch, "atomic class atoms need dimension K+1");
            if (av->b < 0.0 || av->b > 1.0)
                fail(errc::config, "per-class tail multiplier must lie in [0,1] for sampling");
            const double radial_mean = av->b <= 0.0 ? 0.0 : av->b * radial->mean();
            for (const auto& atom : av->angular.atoms) {
                model.qbar_[i] += atom.weight * atom.theta[0] * radial_mean;
                for (std::size_t kk = 0; kk < k; ++kk)
                    model.m_(i, kk) +=
                        atom.weight * floored_component_mean(*radial, av->b, atom.theta[kk + 1]);
            }
            model.b_[i] = av->b;
            model.angular_[i] = av->angular;
        } else if (const auto* rt = std::get_if<ReducedType>(&cls)) {
            if (!rt->parent) fail(errc::config, "reduced class needs a parent model");
            if (rt->parent->type_count() != k + 1)
                fail(errc::dimension_mismatch, "reduced model must have one type fewer than parent");
            reduced_parent = rt->parent.get();
        }
    }
    if (reduced_parent != nullptr) {
        ReducedMeans rm = reduce_means(reduced_parent->mean_matrix(), reduced_parent->qbar());
        for (std::size_t i = 0; i < k; ++i) {
            if (!std::holds_alternative<ReducedType>(model.classes_[i])) continue;
            model.qbar_[i] = rm.qbar[i];
            for (std::size_t kk = 0; kk < k; ++kk) model.m_(i, kk) = rm.m(i, kk);
        }
    }

    if (radial.has_value()) model.reference_ = RVTail{radial->alpha, radial->xm, 1.0};

    model.rho_ = spectral_radius(model.m_);
    if (model.rho_ >= 1.0) {
        char buf[96];
        if (k == 1)
            std::snprintf(buf, sizeof buf, "supercritical model: nbar = %.6f >= 1", model.m_(0, 0));
        else
            std::snprintf(buf, sizeof buf, "supercritical model: rho = %.6f >= 1", model.rho_);
        fail(errc::supercritical, buf);
    }
    return model;
}

MulticlassModel MulticlassModel::single(JointModel pair) {
    return from_classes({PairType{std::move(pair)}});
}

MulticlassModel MulticlassModel::reduced_from(std::shared_ptr<const MulticlassModel> parent,
                                              std::uint64_t subtree_cap) {
    if (!parent) fail(errc::invalid_argument, "reduced_from needs a parent model");
    const std::size_t k = parent->type_count();
    if (k < 2) fail(errc::config, "nothing to reduce: model has a single type");
    std::vector<TypeModel> classes;
    classes.reserve(k - 1);
    for (std::size_t i = 0; i + 1 < k; ++i) classes.push_back(ReducedType{parent, subtree_cap});
    return from_classes(std::move(classes));
}

VectorSample MulticlassModel::sample_vector(std::size_t type, RandomStream& rng) const {
    if (type >= classes_.size()) fail(errc::index_out_of_range, "type index out of range");
    const std::size_t k = classes_.size();
    struct Visitor {
        const MulticlassModel& model;
        std::size_t type;
        std::size_t k;
        RandomStream& rng;
        VectorSample operator()(const PairType& t) const {
            PairSample p = sample_pair(t.pair, rng);
            VectorSample out;
            out.q = p.q;
            out.n = {p.n};
            return out;
        }
        VectorSample operator()(const IndependentVec& t) const {
            VectorSample out;
            out.q = sample(t.q, rng);
            out.n.reserve(k);
            for (const auto& dist : t.n) out.n.push_back(sample(dist, rng));
            return out;
        }
        VectorSample operator()(const AtomicMRVVec& t) const {
            std::size_t j = pick_atom(t.angular, rng);
            double r = sample_radial(*model.reference_, t.b, rng);
            const auto& theta = t.angular.atoms[j].theta;
            VectorSample out;
            out.q = r * theta[0];
            out.n.reserve(k);
            for (std::size_t kk = 0; kk < k; ++kk) out.n.push_back(std::floor(r * theta[kk + 1]));
            return out;
        }
        VectorSample operator()(const ReducedType& t) const {
            ReducedDraw draw = simulate_reduced_pair(*t.parent, type, rng, t.subtree_cap);
            VectorSample out;
            out.q = draw.q;
            out.n = std::move(draw.n);
            out.truncated = draw.truncated;
            return out;
        }
    };
    return std::visit(Visitor{*this, type, k, rng}, classes_[type]);
}

const AngularMeasure* MulticlassModel::angular(std::size_t type) const {
    if (type >= angular_.size() || !angular_[type].has_value()) return nullptr;
    return &*angular_[type];
}

const JointModel* MulticlassModel::single_pair() const {
    if (classes_.size() != 1) return nullptr;
    const auto* pt = std::get_if<PairType>(&classes_.front());
    return pt == nullptr ? nullptr : &pt->pair;
}

} // namespace branchtail

#include "branchtail/simulate.hpp"

#include <atomic>

#include "branchtail/error.hpp"

namespace branchtail {

SimOutcome simulate_R_multi(const MulticlassModel& model, std::size_t type, RandomStream& rng,
                            std::uint64_t cap) {
    if (type >= model.type_count()) fail(errc::index_out_of_range, "ancestor type out of range");
    return simulate_R_multi_t(model, type, rng, cap);
}

ReducedDraw simulate_reduced_pair(const MulticlassModel& model, std::size_t type,
                                  RandomStream& rng, std::uint64_t cap) {
    if (model.type_count() < 2) fail(errc::config, "reduction needs at least two types");
    if (type >= model.type_count() - 1)
        fail(errc::index_out_of_range, "reduced pairs exist for types below the eliminated one");
    const double m_kk = model.mean_matrix()(model.type_count() - 1, model.type_count() - 1);
    if (m_kk >= 1.0) fail(errc::degenerate_subtree, "eliminated type is itself supercritical");
    return simulate_reduced_pair_t(model, type, rng, cap);
}

namespace {

// Shared single-class walk: processes nodes in first-passage order, adding
// phi(q) per node. tau, R and V are all instances of this loop.
template <class Phi>
SimOutcome walk_single(const JointModel& model, RandomStream& rng, std::uint64_t cap, Phi phi) {
    SimOutcome out;
    std::uint64_t alive = 1;
    while (alive > 0) {
        if (out.tree_size >= cap) {
            out.truncated = true;
            break;
        }
        PairSample draw = sample_pair(model, rng);
        out.value += phi(draw.q);
        ++out.tree_size;
        alive += static_cast<std::uint64_t>(draw.n);
        --alive;
    }
    return out;
}

} // namespace

SimOutcome simulate_R_single(const JointModel& model, RandomStream& rng, std::uint64_t cap) {
    return walk_single(model, rng, cap, [](double q) { return q; });
}

SimOutcome simulate_tau(const JointModel& model, RandomStream& rng, std::uint64_t cap) {
    return walk_single(model, rng, cap, [](double) { return 1.0; });
}

SimOutcome simulate_V(const JointModel& model, double k0, double k1, RandomStream& rng,
                      std::uint64_t cap) {
    if (k0 < 0.0 || k1 < 0.0 || k0 + k1 <= 0.0)
        fail(errc::invalid_argument, "weight coefficients must be nonnegative with k0+k1 > 0");
    return walk_single(model, rng, cap, [k0, k1](double q) { return k0 + k1 * q; });
}

RunResult run_replications(const MulticlassModel& model, const SimTask& task,
                           const SimConfig& cfg) {
    if (cfg.replications < 1) fail(errc::config, "replications must be >= 1");
    if (cfg.cap < 1) fail(errc::config, "cap must be >= 1");
    if (task.kind != SimKind::progeny && model.single_pair() == nullptr)
        fail(errc::config, "tau/weight runs need a single-class model");
    if (task.type >= model.type_count()) fail(errc::index_out_of_range, "ancestor type out of range");

    RunResult out;
    out.values.assign(cfg.replications, 0.0);
    std::atomic<std::uint64_t> truncated{0};

    const JointModel* pair = model.single_pair();
    parallel_for_streams(cfg.replications, cfg.seed, cfg.workers,
                         [&](std::uint64_t rep, RandomStream& rng) {
                             SimOutcome o;
                             switch (task.kind) {
                                 case SimKind::progeny:
                                     o = simulate_R_multi_t(model, task.type, rng, cfg.cap);
                                     break;
                                 case SimKind::tau:
                                     o = simulate_tau(*pair, rng, cfg.cap);
                                     break;
                                 case SimKind::weight:
                                     o = simulate_V(*pair, task.k0, task.k1, rng, cfg.cap);
                                     break;
                             }
                             out.values[rep] = o.value;
                             if (o.truncated) truncated.fetch_add(1, std::memory_order_relaxed);
                         });
    out.truncated = truncated.load();
    return out;
}

} // namespace branchtail

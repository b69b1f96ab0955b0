#include "branchtail/asymptotics.hpp"

#include <cmath>
#include <cstdio>

#include "branchtail/error.hpp"

namespace branchtail {

double spectral_radius(const Matrix& m) {
    const std::size_t n = m.rows();
    if (n == 0 || m.cols() != n) fail(errc::dimension_mismatch, "spectral radius needs a square matrix");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (m(i, j) < 0.0) fail(errc::invalid_argument, "matrix entries must be nonnegative");
    if (n == 1) return m(0, 0);

    const double eps = 1e-9;  // shift keeps periodic/reducible cases moving
    std::vector<double> v(n, 1.0 / static_cast<double>(n));
    double lambda = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        std::vector<double> w = m.multiply(v);
        for (std::size_t i = 0; i < n; ++i) w[i] += eps * v[i];
        double norm = 0.0;
        for (double x : w) norm += std::fabs(x);
        if (norm == 0.0) return 0.0;
        double next = norm;  // v had L1 norm 1
        for (std::size_t i = 0; i < n; ++i) w[i] /= norm;
        v = std::move(w);
        if (iter > 0 && std::fabs(next - lambda) <= 1e-10 * std::max(1.0, std::fabs(next)))
            return std::max(0.0, next - eps);
        lambda = next;
    }
    fail(errc::no_convergence, "power iteration did not converge");
}

MeanSolution solve_means(const Matrix& m, std::vector<double> qbar) {
    const std::size_t n = m.rows();
    if (qbar.size() != n) fail(errc::dimension_mismatch, "qbar length must match matrix size");
    double rho = spectral_radius(m);
    if (rho >= 1.0) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "supercritical mean system: rho = %.6f >= 1", rho);
        fail(errc::supercritical, buf);
    }
    Matrix a = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) -= m(i, j);

    MeanSolution out;
    out.rbar = lu_solve(a, qbar);
    out.qbar = std::move(qbar);
    out.m = m;
    std::vector<double> mr = m.multiply(out.rbar);
    for (std::size_t i = 0; i < n; ++i)
        out.residual = std::max(out.residual, std::fabs(out.rbar[i] - out.qbar[i] - mr[i]));
    return out;
}

double angular_tail_constant(double b, const AngularMeasure& mu, std::span<const double> a,
                             double alpha) {
    mu.validate();
    if (a.size() != mu.dimension())
        fail(errc::dimension_mismatch, "coefficient vector must match atom dimension");
    for (double coef : a)
        if (coef < 0.0) fail(errc::invalid_argument, "coefficients must be nonnegative");
    if (b < 0.0) fail(errc::invalid_argument, "tail multiplier must be nonnegative");
    double total = 0.0;
    for (const auto& atom : mu.atoms) {
        double dot = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * atom.theta[j];
        if (dot > 0.0) total += atom.weight * std::pow(dot, alpha);
    }
    return b * total;
}

TailSolution solve_tail_constants(const Matrix& m, std::vector<double> c) {
    const std::size_t n = m.rows();
    if (c.size() != n) fail(errc::dimension_mismatch, "constant vector length must match matrix size");
    for (double v : c)
        if (v < 0.0) fail(errc::invalid_argument, "tail constants must be nonnegative");
    double rho = spectral_radius(m);
    if (rho >= 1.0) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "supercritical tail system: rho = %.6f >= 1", rho);
        fail(errc::supercritical, buf);
    }
    Matrix a = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) -= m(i, j);

    TailSolution out;
    out.d = lu_solve(a, c);
    out.c = std::move(c);
    std::vector<double> md = m.multiply(out.d);
    for (std::size_t i = 0; i < n; ++i)
        out.residual = std::max(out.residual, std::fabs(out.d[i] - out.c[i] - md[i]));
    return out;
}

double compound_tail_constant(double cN, double cZ, double nbar, double zbar, double alpha) {
    if (cN < 0.0 || cZ < 0.0 || nbar < 0.0 || zbar < 0.0)
        fail(errc::invalid_argument, "compound tail inputs must be nonnegative");
    if (cN + cZ <= 0.0) fail(errc::invalid_argument, "at least one tail constant must be positive");
    return cN * std::pow(zbar, alpha) + cZ * nbar;
}

double compound_vector_constant(std::span<const double> c, std::span<const double> en) {
    if (c.size() != en.size()) fail(errc::dimension_mismatch, "vectors must have equal length");
    double total = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] < 0.0 || en[i] < 0.0)
            fail(errc::invalid_argument, "compound vector inputs must be nonnegative");
        total += c[i] * en[i];
    }
    return total;
}

ReducedMeans reduce_means(const Matrix& m, std::span<const double> qbar) {
    const std::size_t n = m.rows();
    if (n < 2) fail(errc::config, "nothing to reduce: need at least two types");
    if (qbar.size() != n) fail(errc::dimension_mismatch, "qbar length must match matrix size");
    const std::size_t last = n - 1;
    const double m_kk = m(last, last);
    if (m_kk >= 1.0) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "degenerate subtree: m_KK = %.6f >= 1", m_kk);
        fail(errc::degenerate_subtree, buf);
    }
    // Expected size of each absorbed direct-line subtree.
    const double subtree = 1.0 / (1.0 - m_kk);

    ReducedMeans out;
    out.m = Matrix(last, last);
    out.qbar.assign(last, 0.0);
    for (std::size_t i = 0; i < last; ++i) {
        out.qbar[i] = qbar[i] + m(i, last) * subtree * qbar[last];
        for (std::size_t k = 0; k < last; ++k)
            out.m(i, k) = m(i, k) + m(i, last) * subtree * m(last, k);
    }
    return out;
}

void permute_system(Matrix& m, std::vector<double>& qbar, std::span<const std::size_t> order) {
    const std::size_t n = m.rows();
    if (order.size() != n || qbar.size() != n)
        fail(errc::dimension_mismatch, "permutation must cover every type");
    std::vector<bool> seen(n, false);
    for (std::size_t idx : order) {
        if (idx >= n || seen[idx]) fail(errc::invalid_argument, "order is not a permutation");
        seen[idx] = true;
    }
    Matrix pm(n, n);
    std::vector<double> pq(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        pq[i] = qbar[order[i]];
        for (std::size_t j = 0; j < n; ++j) pm(i, j) = m(order[i], order[j]);
    }
    m = std::move(pm);
    qbar = std::move(pq);
}

double predicted_tail_single(const JointModel& model, double x, std::uint64_t nsamples,
                             std::uint64_t seed, std::optional<double> rbar_override) {
    PairMeans means = pair_means(model);
    const double prefactor = 1.0 / (1.0 - means.nbar);
    const double rbar = rbar_override.value_or(means.qbar * prefactor);

    if (const auto* mg1 = std::get_if<MG1Pair>(&model)) {
        if (const auto* q = std::get_if<ParetoDist>(&mg1->q)) {
            double c = mg1_tail_constant(*mg1, 1.0, rbar);
            return std::min(1.0, prefactor * c * std::pow(q->xm / std::max(q->xm, x), q->alpha));
        }
    }
    if (const auto* mrv = std::get_if<AtomicMRV>(&model)) {
        const double a[2] = {1.0, rbar};
        double c = angular_tail_constant(mrv->radial.b, mrv->angular, a, mrv->radial.alpha);
        return std::min(1.0, prefactor * c *
                                 std::pow(mrv->radial.xm / std::max(mrv->radial.xm, x),
                                          mrv->radial.alpha));
    }
    // Monte Carlo on the pair law.
    RandomStream rng(seed, 0);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < nsamples; ++i) {
        PairSample s = sample_pair(model, rng);
        if (s.q + rbar * s.n > x) ++hits;
    }
    return prefactor * static_cast<double>(hits) / static_cast<double>(nsamples);
}

} // namespace branchtail

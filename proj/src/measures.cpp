#include "branchtail/measures.hpp"

#include <cmath>

#include "branchtail/error.hpp"

namespace branchtail {

void AngularMeasure::validate() const {
    if (atoms.empty()) fail(errc::config, "angular measure needs at least one atom");
    const std::size_t dim = atoms.front().theta.size();
    if (dim < 1) fail(errc::config, "angular atoms need at least one coordinate");
    double total = 0.0;
    for (const auto& atom : atoms) {
        if (atom.weight < 0.0) fail(errc::config, "angular atom weight must be nonnegative");
        if (atom.theta.size() != dim) fail(errc::config, "angular atoms have mixed dimensions");
        double coord_sum = 0.0;
        for (double t : atom.theta) {
            if (t < 0.0) fail(errc::config, "angular atom coordinates must be nonnegative");
            coord_sum += t;
        }
        if (std::fabs(coord_sum - 1.0) > 1e-12)
            fail(errc::config, "angular atom is not on the L1 unit simplex");
        total += atom.weight;
    }
    if (std::fabs(total - 1.0) > 1e-12) fail(errc::config, "angular weights must sum to 1");
}

double measure_total_variation(const AngularMeasure& reference, const AngularMeasure& estimate) {
    std::vector<double> aligned(reference.atoms.size(), 0.0);
    for (const auto& atom : estimate.atoms) {
        std::size_t best = 0;
        double best_dist = 1e300;
        for (std::size_t i = 0; i < reference.atoms.size(); ++i) {
            const auto& ref = reference.atoms[i].theta;
            double dist = 0.0;
            for (std::size_t j = 0; j < ref.size() && j < atom.theta.size(); ++j)
                dist += std::fabs(ref[j] - atom.theta[j]);
            if (dist < best_dist) {
                best_dist = dist;
                best = i;
            }
        }
        aligned[best] += atom.weight;
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < reference.atoms.size(); ++i)
        tv += std::fabs(reference.atoms[i].weight - aligned[i]);
    return 0.5 * tv;
}

} // namespace branchtail

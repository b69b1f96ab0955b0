#pragma once

#include <cstddef>
#include <vector>

namespace branchtail {

struct AngularAtom {
    double weight = 0.0;
    std::vector<double> theta;  // point on the L1 unit simplex
};

// Finite atomic measure on the L1 unit simplex. Total weight 1; every atom
// has nonnegative coordinates summing to 1 (both within 1e-12).
struct AngularMeasure {
    std::vector<AngularAtom> atoms;

    std::size_t dimension() const { return atoms.empty() ? 0 : atoms.front().theta.size(); }

    // Throws errc::config when the normalization invariants fail.
    void validate() const;
};

// Aligns `estimate` onto the support of `reference` (each estimated atom is
// assigned to the nearest reference atom in L1) and returns the total
// variation distance between the aligned weights.
double measure_total_variation(const AngularMeasure& reference, const AngularMeasure& estimate);

} // namespace branchtail

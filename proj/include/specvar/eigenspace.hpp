#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "specvar/trigpoly.hpp"

namespace specvar {

// Distinct eigenvalues closer than this (relatively) are treated as one
// eigenspace; exact lattice or branch coincidences land far inside it.
inline constexpr double eigenvalue_merge_rel_tol = 1e-9;

namespace detail {

inline bool nearly_equal_eigenvalue(double x, double y) {
    return std::abs(x - y) <= eigenvalue_merge_rel_tol * std::max({std::abs(x), std::abs(y), 1e-300});
}

// Orthonormal single-frequency basis element.
template <class Dom>
TrigPoly<Dom> unit_basis_function(const Dom& d, const typename Dom::Freq& f) {
    TrigPoly<Dom> p(d);
    p.add_term(f, 1.0 / std::sqrt(term_norm_sq(d, f)));
    return p;
}

} // namespace detail

// One distinct eigenvalue together with an orthonormal basis of eigenfunctions
// given as boundary/surface trigonometric data. `label` is the position of the
// eigenvalue inside whichever (partial) spectrum list the space belongs to.
template <class Dom>
struct Eigenspace {
    double eigenvalue = 0.0;
    std::vector<TrigPoly<Dom>> basis;
    int label = 0;

    int dimension() const { return static_cast<int>(basis.size()); }
};

} // namespace specvar

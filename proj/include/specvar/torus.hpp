#pragma once

// Laplace spectrum of the flat torus R^2 / (Z(1,0) + Z(a,b)).
//
// The dual lattice is spanned by e1* = (1, -a/b) and e2* = (0, 1/b); the
// eigenvalue of the frequency gamma* = m e1* + n e2* is 4 pi^2 |gamma*|^2 with
// |gamma*|^2 = m^2 + (n - m a)^2 / b^2. Enumeration works on integer boxes and
// stops only once the box provably covers everything up to the requested
// eigenvalue, so multiplicities are exact.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "specvar/eigenspace.hpp"
#include "specvar/errors.hpp"
#include "specvar/trigpoly.hpp"

namespace specvar {

inline void validate_moduli(const TorusDomain& d) {
    if (!(d.b > 0.0)) throw InvalidModuli("torus moduli: b must be positive");
    if (!(d.a >= 0.0 && d.a <= 0.5))
        throw InvalidModuli("torus moduli: a must lie in [0, 1/2]");
    // Tolerance admits boundary points like the equilateral torus, whose
    // a^2 + b^2 lands a rounding error below 1.
    if (!(d.a * d.a + d.b * d.b >= 1.0 - 1e-12))
        throw InvalidModuli("torus moduli: need a^2 + b^2 >= 1 (fundamental domain)");
    if (!(d.metric_scale > 0.0)) throw InvalidModuli("torus moduli: metric scale must be positive");
}

inline double torus_area(const TorusDomain& d) { return d.metric_scale * d.b; }

inline double dual_norm_sq(const TorusDomain& d, int m, int n) {
    const double t = (n - m * d.a) / d.b;
    return static_cast<double>(m) * m + t * t;
}

inline double laplace_eigenvalue(const TorusDomain& d, const TorusFreq& f) {
    return two_pi * two_pi * dual_norm_sq(d, f.m, f.n) / d.metric_scale;
}

// First `count` distinct eigenvalues (eigenvalue 0 included, label 0), each
// with a full orthonormal eigenbasis.
inline std::vector<Eigenspace<TorusDomain>> enumerate_spectrum(const TorusDomain& d, int count) {
    validate_moduli(d);
    if (count < 1) throw Error("enumerate_spectrum: count must be >= 1");

    for (int radius = 4;; radius *= 2) {
        // Canonical representatives only: m > 0, or m == 0 and n >= 0.
        std::vector<std::pair<double, std::pair<int, int>>> pts;
        for (int m = 0; m <= radius; ++m) {
            const int n_lo = (m == 0) ? 0 : -radius;
            for (int n = n_lo; n <= radius; ++n)
                pts.emplace_back(dual_norm_sq(d, m, n), std::make_pair(m, n));
        }
        std::sort(pts.begin(), pts.end());

        // Any dual-lattice point outside the box has |gamma*|^2 at least this.
        const double m_bound = static_cast<double>(radius + 1) * (radius + 1);
        const double n_excess = (radius + 1) - radius * d.a;
        const double n_bound = n_excess * n_excess / (d.b * d.b);
        const double certified_below = std::min(m_bound, n_bound);

        std::vector<std::vector<std::pair<int, int>>> groups;
        std::vector<double> group_norm;
        for (const auto& [nr, mn] : pts) {
            if (!groups.empty() && detail::nearly_equal_eigenvalue(nr, group_norm.back())) {
                groups.back().push_back(mn);
            } else {
                groups.push_back({mn});
                group_norm.push_back(nr);
            }
        }

        int certified = 0;
        while (certified < static_cast<int>(groups.size()) &&
               group_norm[static_cast<std::size_t>(certified)] < certified_below)
            ++certified;
        if (certified < count) continue;

        std::vector<Eigenspace<TorusDomain>> out;
        out.reserve(static_cast<std::size_t>(count));
        for (int k = 0; k < count; ++k) {
            Eigenspace<TorusDomain> space;
            space.label = k;
            space.eigenvalue = two_pi * two_pi * group_norm[static_cast<std::size_t>(k)] / d.metric_scale;
            for (const auto& [m, n] : groups[static_cast<std::size_t>(k)]) {
                if (m == 0 && n == 0) {
                    space.basis.push_back(detail::unit_basis_function(d, TorusFreq{0, 0, Wave::cos}));
                } else {
                    space.basis.push_back(detail::unit_basis_function(d, TorusFreq{m, n, Wave::cos}));
                    space.basis.push_back(detail::unit_basis_function(d, TorusFreq{m, n, Wave::sin}));
                }
            }
            out.push_back(std::move(space));
        }
        return out;
    }
}

// lambda_k * area: the scale-invariant functional.
inline double normalized_eigenvalue(const TorusDomain& d, int k) {
    if (k < 0) throw Error("normalized_eigenvalue: k must be >= 0");
    const auto spectrum = enumerate_spectrum(d, k + 1);
    return spectrum.back().eigenvalue * torus_area(d);
}

// The two-dimensional lambda_1 eigenspace spanned by the lowest transverse
// harmonics sin(2 pi y / b), cos(2 pi y / b). Requires a^2 + b^2 > 1; on the
// boundary circle of the moduli domain the multiplicity jumps above 2, which
// the enumerated spectrum detects directly.
inline Eigenspace<TorusDomain> lambda1_eigenspace(const TorusDomain& d) {
    validate_moduli(d);
    const auto spectrum = enumerate_spectrum(d, 2);
    if (spectrum[1].dimension() != 2)
        throw MultiplicityNotTwo("lambda1_eigenspace: multiplicity is " +
                                 std::to_string(spectrum[1].dimension()) +
                                 "; need a^2 + b^2 > 1 for multiplicity 2");
    Eigenspace<TorusDomain> space;
    space.label = 1;
    space.eigenvalue = laplace_eigenvalue(d, TorusFreq{0, 1, Wave::cos});
    space.basis.push_back(detail::unit_basis_function(d, TorusFreq{0, 1, Wave::sin}));
    space.basis.push_back(detail::unit_basis_function(d, TorusFreq{0, 1, Wave::cos}));
    return space;
}

// The stock perturbation sqrt(2) sin(2 pi y / b): the lowest transverse sine,
// scaled so its L^2 norm squared equals the area of g_{a,b}.
inline TorusPoly axial_perturbation(const TorusDomain& d) {
    TorusPoly p(d);
    p.add_term(TorusFreq{0, 1, Wave::sin}, std::sqrt(2.0));
    return p;
}

} // namespace specvar

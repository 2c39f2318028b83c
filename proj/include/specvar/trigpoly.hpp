#pragma once

// Finite real Fourier series with exact coefficient arithmetic, on two
// domains:
//
//  * a flat torus R^2 / (Z(1,0) + Z(a,b)), frequencies indexed by the dual
//    lattice integers (m, n): the basis function for (m, n) is
//    cos/sin(2*pi*(m*s + n*r)) in lattice coordinates, which in Cartesian
//    coordinates is cos/sin(2*pi*<m*e1* + n*e2*, x>);
//  * the boundary of a flat cylinder S^1 x [-T, T] (circle length 2*pi),
//    frequencies indexed by the angular mode n together with a longitudinal
//    parity: even traces take the same values on both boundary circles, odd
//    traces flip sign.
//
// Products are coefficient convolutions (product-to-sum identities), so they
// are exact: no truncation happens anywhere in this header.

#include <cmath>
#include <compare>
#include <cstdlib>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "specvar/errors.hpp"

namespace specvar {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class Wave { cos, sin };
enum class Sym { even, odd };

struct TorusFreq {
    int m = 0;
    int n = 0;
    Wave w = Wave::cos;
    friend auto operator<=>(const TorusFreq&, const TorusFreq&) = default;
};

struct BoundaryFreq {
    int n = 0;
    Wave w = Wave::cos;
    Sym s = Sym::even;
    friend auto operator<=>(const BoundaryFreq&, const BoundaryFreq&) = default;
};

// The metric tensor is metric_scale * g_{a,b}; scale 1/b gives the unit-area
// representative of the conformal class.
struct TorusDomain {
    double a = 0.0;
    double b = 1.0;
    double metric_scale = 1.0;
    using Freq = TorusFreq;
    friend bool operator==(const TorusDomain&, const TorusDomain&) = default;
};

// Metric tensor is metric_scale * g_T; boundary lengths pick up a factor
// sqrt(metric_scale).
struct CylinderDomain {
    double half_length = 1.0;
    double metric_scale = 1.0;
    using Freq = BoundaryFreq;
    friend bool operator==(const CylinderDomain&, const CylinderDomain&) = default;
};

// --- canonical representatives -------------------------------------------

template <class Freq>
struct FoldedFreq {
    Freq f;
    double factor; // 0 when the term vanishes identically
};

inline FoldedFreq<TorusFreq> fold(TorusFreq f) {
    if (f.m < 0 || (f.m == 0 && f.n < 0)) {
        f.m = -f.m;
        f.n = -f.n;
        return {f, f.w == Wave::sin ? -1.0 : 1.0};
    }
    if (f.m == 0 && f.n == 0 && f.w == Wave::sin) return {TorusFreq{0, 0, Wave::cos}, 0.0};
    return {f, 1.0};
}

inline FoldedFreq<BoundaryFreq> fold(BoundaryFreq f) {
    if (f.n < 0) {
        f.n = -f.n;
        return {f, f.w == Wave::sin ? -1.0 : 1.0};
    }
    if (f.n == 0 && f.w == Wave::sin) return {BoundaryFreq{0, Wave::cos, f.s}, 0.0};
    return {f, 1.0};
}

// --- L^2 weights ----------------------------------------------------------

inline double term_norm_sq(const TorusDomain& d, const TorusFreq& f) {
    const double area = d.metric_scale * d.b;
    return (f.m == 0 && f.n == 0) ? area : 0.5 * area;
}

inline double term_norm_sq(const CylinderDomain& d, const BoundaryFreq& f) {
    const double len_scale = std::sqrt(d.metric_scale);
    return len_scale * (f.n == 0 ? 2.0 * two_pi : two_pi);
}

inline int domain_bandwidth(const TorusFreq& f) { return std::max(std::abs(f.m), std::abs(f.n)); }
inline int domain_bandwidth(const BoundaryFreq& f) { return f.n; }

// --- product-to-sum expansion ---------------------------------------------

namespace detail {

inline Wave product_wave_sum(Wave a, Wave b) { return a == b ? Wave::cos : Wave::sin; }

// f * g expands into two terms on the sum and difference frequencies.
template <class Freq, class MakeFreq, class Emit>
void expand_product(const Freq& f, const Freq& g, MakeFreq make, Emit emit) {
    const auto sum = make(f, g, +1);
    const auto dif = make(f, g, -1);
    if (f.w == Wave::cos && g.w == Wave::cos) {
        emit(dif, 0.5);
        emit(sum, 0.5);
    } else if (f.w == Wave::sin && g.w == Wave::sin) {
        emit(dif, 0.5);
        emit(sum, -0.5);
    } else if (f.w == Wave::sin && g.w == Wave::cos) {
        emit(sum, 0.5);
        emit(dif, 0.5);
    } else { // cos * sin
        emit(sum, 0.5);
        emit(dif, -0.5);
    }
}

} // namespace detail

template <class Emit>
void product_terms(const TorusDomain&, const TorusFreq& f, const TorusFreq& g, Emit emit) {
    detail::expand_product(
        f, g,
        [](const TorusFreq& x, const TorusFreq& y, int sign) {
            return TorusFreq{x.m + sign * y.m, x.n + sign * y.n,
                             detail::product_wave_sum(x.w, y.w)};
        },
        emit);
}

template <class Emit>
void product_terms(const CylinderDomain&, const BoundaryFreq& f, const BoundaryFreq& g, Emit emit) {
    const Sym s = (f.s == g.s) ? Sym::even : Sym::odd;
    detail::expand_product(
        f, g,
        [s](const BoundaryFreq& x, const BoundaryFreq& y, int sign) {
            return BoundaryFreq{x.n + sign * y.n, detail::product_wave_sum(x.w, y.w), s};
        },
        emit);
}

// --- the polynomial type ----------------------------------------------------

inline constexpr double coeff_cleanup_threshold = 1e-14;

template <class Dom>
class TrigPoly {
public:
    using Domain = Dom;
    using Freq = typename Dom::Freq;
    using TermMap = std::map<Freq, double>;

    explicit TrigPoly(Dom d) : dom_(d) {}

    static TrigPoly constant(Dom d, double c) {
        TrigPoly p(d);
        p.add_term(Freq{}, c);
        return p;
    }

    const Dom& domain() const { return dom_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(Freq f, double coeff) {
        const auto folded = fold(f);
        const double c = folded.factor * coeff;
        if (c == 0.0) return;
        auto [it, inserted] = terms_.try_emplace(folded.f, c);
        if (!inserted) it->second += c;
        if (std::abs(it->second) < coeff_cleanup_threshold) terms_.erase(it);
    }

    double coefficient(const Freq& f) const {
        const auto folded = fold(f);
        auto it = terms_.find(folded.f);
        if (it == terms_.end()) return 0.0;
        return folded.factor == 0.0 ? 0.0 : it->second / folded.factor;
    }

    int bandwidth() const {
        int bw = 0;
        for (const auto& [f, c] : terms_) bw = std::max(bw, domain_bandwidth(f));
        return bw;
    }

    TrigPoly& operator+=(const TrigPoly& o) {
        require_same_domain(o);
        for (const auto& [f, c] : o.terms_) add_term(f, c);
        return *this;
    }
    TrigPoly& operator-=(const TrigPoly& o) {
        require_same_domain(o);
        for (const auto& [f, c] : o.terms_) add_term(f, -c);
        return *this;
    }
    TrigPoly& operator*=(double s) {
        if (s == 0.0) {
            terms_.clear();
            return *this;
        }
        for (auto it = terms_.begin(); it != terms_.end();) {
            it->second *= s;
            if (std::abs(it->second) < coeff_cleanup_threshold)
                it = terms_.erase(it);
            else
                ++it;
        }
        return *this;
    }

    friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
    friend TrigPoly operator-(TrigPoly a, const TrigPoly& b) { return a -= b; }
    friend TrigPoly operator*(double s, TrigPoly p) { return p *= s; }
    friend TrigPoly operator*(TrigPoly p, double s) { return p *= s; }

    void require_same_domain(const TrigPoly& o) const {
        if (!(dom_ == o.dom_)) throw DomainMismatch("trig polynomials live on different domains");
    }

private:
    Dom dom_;
    TermMap terms_;
};

using TorusPoly = TrigPoly<TorusDomain>;
using BoundaryPoly = TrigPoly<CylinderDomain>;

// Exact product by coefficient convolution.
template <class Dom>
TrigPoly<Dom> multiply(const TrigPoly<Dom>& f, const TrigPoly<Dom>& g) {
    f.require_same_domain(g);
    TrigPoly<Dom> out(f.domain());
    for (const auto& [ff, fc] : f.terms())
        for (const auto& [gf, gc] : g.terms())
            product_terms(f.domain(), ff, gf,
                          [&](const typename Dom::Freq& h, double w) { out.add_term(h, fc * gc * w); });
    return out;
}

// L^2 inner product; distinct canonical frequencies are orthogonal, so this is
// a weighted dot product over the common support.
template <class Dom>
double inner(const TrigPoly<Dom>& f, const TrigPoly<Dom>& g) {
    f.require_same_domain(g);
    const auto& small = f.terms().size() <= g.terms().size() ? f : g;
    const auto& large = f.terms().size() <= g.terms().size() ? g : f;
    double s = 0.0;
    for (const auto& [freq, c] : small.terms()) {
        auto it = large.terms().find(freq);
        if (it != large.terms().end()) s += c * it->second * term_norm_sq(f.domain(), freq);
    }
    return s;
}

template <class Dom>
double norm_sq(const TrigPoly<Dom>& f) {
    return inner(f, f);
}

template <class Dom>
struct Projection {
    std::vector<double> coefficients;
    TrigPoly<Dom> residual;
};

template <class Dom>
bool is_orthonormal(const std::vector<TrigPoly<Dom>>& basis, double tol = 1e-12) {
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = i; j < basis.size(); ++j) {
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(inner(basis[i], basis[j]) - want) > tol) return false;
        }
    return true;
}

// Orthogonal projection onto the span of an orthonormal basis; the residual is
// computed by exact subtraction.
template <class Dom>
Projection<Dom> project(const TrigPoly<Dom>& f, const std::vector<TrigPoly<Dom>>& basis) {
    for (const auto& b : basis) f.require_same_domain(b);
    if (!is_orthonormal(basis))
        throw BasisNotOrthonormal("project: basis is not orthonormal to 1e-12");
    Projection<Dom> out{{}, f};
    out.coefficients.reserve(basis.size());
    for (const auto& b : basis) {
        const double c = inner(f, b);
        out.coefficients.push_back(c);
        out.residual -= c * b;
    }
    return out;
}

// Same coefficients, different metric: used to move a fixed perturbation
// function between scalings of the same underlying flat metric.
template <class Dom>
TrigPoly<Dom> with_domain(const TrigPoly<Dom>& p, const Dom& d) {
    TrigPoly<Dom> out(d);
    for (const auto& [f, c] : p.terms()) out.add_term(f, c);
    return out;
}

inline std::string describe(const TorusFreq& f) {
    return std::string(f.w == Wave::cos ? "cos" : "sin") + "(" + std::to_string(f.m) + "," +
           std::to_string(f.n) + ")";
}

inline std::string describe(const BoundaryFreq& f) {
    return std::string(f.w == Wave::cos ? "cos" : "sin") + "(" + std::to_string(f.n) +
           (f.s == Sym::even ? ",even)" : ",odd)");
}

// --- pointwise evaluation ---------------------------------------------------

// Torus polynomials evaluate in lattice coordinates (s, r) in [0,1)^2; the
// Cartesian point is s*(1,0) + r*(a,b).
inline double evaluate_lattice(const TorusPoly& p, double s, double r) {
    double v = 0.0;
    for (const auto& [f, c] : p.terms()) {
        const double phase = two_pi * (f.m * s + f.n * r);
        v += c * (f.w == Wave::cos ? std::cos(phase) : std::sin(phase));
    }
    return v;
}

enum class BoundaryCircle { upper, lower }; // t = +T and t = -T

inline double evaluate_circle(const BoundaryPoly& p, double theta, BoundaryCircle circle) {
    double v = 0.0;
    for (const auto& [f, c] : p.terms()) {
        const double sgn = (f.s == Sym::odd && circle == BoundaryCircle::lower) ? -1.0 : 1.0;
        const double phase = f.n * theta;
        v += sgn * c * (f.w == Wave::cos ? std::cos(phase) : std::sin(phase));
    }
    return v;
}

} // namespace specvar

#pragma once

// Dense symmetric eigensolvers, scalar root finding and periodic quadrature.
// Everything here is self-contained; matrix orders stay small enough (<= ~1000)
// that cyclic Jacobi is the right tool.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "specvar/errors.hpp"

namespace specvar {

// Symmetric matrix, full row-major storage. Symmetry is enforced by the
// mutators: set/add always write both triangles.
class SymMatrix {
public:
    explicit SymMatrix(int order) : n_(order), a_(static_cast<std::size_t>(order) * order, 0.0) {
        if (order < 1) throw Error("SymMatrix: order must be >= 1");
    }

    static SymMatrix identity(int order) {
        SymMatrix m(order);
        for (int i = 0; i < order; ++i) m.set(i, i, 1.0);
        return m;
    }

    static SymMatrix diagonal(std::span<const double> d) {
        SymMatrix m(static_cast<int>(d.size()));
        for (int i = 0; i < m.order(); ++i) m.set(i, i, d[static_cast<std::size_t>(i)]);
        return m;
    }

    int order() const { return n_; }

    double operator()(int i, int j) const { return a_[idx(i, j)]; }

    void set(int i, int j, double v) {
        a_[idx(i, j)] = v;
        a_[idx(j, i)] = v;
    }

    void add(int i, int j, double v) {
        a_[idx(i, j)] += v;
        if (i != j) a_[idx(j, i)] += v;
    }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < n_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }

    const std::vector<double>& data() const { return a_; }

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j);
    }

    int n_;
    std::vector<double> a_;
};

struct Eigenpair {
    double value = 0.0;
    std::vector<double> vector;
};

namespace detail {

inline double off_diagonal_norm(const std::vector<double>& a, int n) {
    double s = 0.0;
    for (int p = 0; p < n - 1; ++p)
        for (int q = p + 1; q < n; ++q) {
            double v = a[static_cast<std::size_t>(p) * n + q];
            s += 2.0 * v * v;
        }
    return std::sqrt(s);
}

} // namespace detail

// Cyclic Jacobi with rotation threshold. Converges when the off-diagonal
// Frobenius norm drops below 1e-12 of its initial value; more than 100 sweeps
// is a hard failure, not a silent return.
inline std::vector<Eigenpair> sym_eigen(const SymMatrix& m) {
    const int n = m.order();
    std::vector<double> a = m.data();
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

    auto at = [&](std::vector<double>& buf, int i, int j) -> double& {
        return buf[static_cast<std::size_t>(i) * n + j];
    };

    const double initial_off = detail::off_diagonal_norm(a, n);
    const double target = 1e-12 * m.frobenius_norm();
    const int max_sweeps = 100;

    if (initial_off > target && initial_off > 0.0) {
        int sweep = 0;
        for (; sweep < max_sweeps; ++sweep) {
            double off = detail::off_diagonal_norm(a, n);
            if (off <= target) break;
            // Early sweeps skip elements far below the mean off-diagonal mass;
            // later sweeps rotate everything so quadratic convergence kicks in.
            const double thresh = (sweep < 3) ? 0.2 * off / (static_cast<double>(n) * n) : 0.0;
            for (int p = 0; p < n - 1; ++p) {
                for (int q = p + 1; q < n; ++q) {
                    const double apq = at(a, p, q);
                    if (apq == 0.0 || std::abs(apq) <= thresh) continue;
                    const double app = at(a, p, p);
                    const double aqq = at(a, q, q);
                    const double theta = 0.5 * (aqq - app) / apq;
                    double t;
                    if (std::abs(theta) > 1e15) {
                        t = 0.5 / theta;
                    } else {
                        t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                        if (theta < 0.0) t = -t;
                    }
                    const double c = 1.0 / std::sqrt(1.0 + t * t);
                    const double s = t * c;
                    const double tau = s / (1.0 + c);
                    const double h = t * apq;

                    at(a, p, p) = app - h;
                    at(a, q, q) = aqq + h;
                    at(a, p, q) = 0.0;
                    at(a, q, p) = 0.0;
                    for (int i = 0; i < n; ++i) {
                        if (i == p || i == q) continue;
                        const double aip = at(a, i, p);
                        const double aiq = at(a, i, q);
                        at(a, i, p) = aip - s * (aiq + tau * aip);
                        at(a, p, i) = at(a, i, p);
                        at(a, i, q) = aiq + s * (aip - tau * aiq);
                        at(a, q, i) = at(a, i, q);
                    }
                    for (int i = 0; i < n; ++i) {
                        const double vip = at(v, i, p);
                        const double viq = at(v, i, q);
                        at(v, i, p) = vip - s * (viq + tau * vip);
                        at(v, i, q) = viq + s * (vip - tau * viq);
                    }
                }
            }
        }
        if (sweep == max_sweeps && detail::off_diagonal_norm(a, n) > target)
            throw ConvergenceFailure("sym_eigen: Jacobi did not converge within 100 sweeps");
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        return at(a, i, i) < at(a, j, j);
    });

    std::vector<Eigenpair> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const int col = order[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(k)].value = at(a, col, col);
        auto& vec = out[static_cast<std::size_t>(k)].vector;
        vec.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) vec[static_cast<std::size_t>(i)] = at(v, i, col);
    }
    return out;
}

struct GeneralizedPencil {
    GeneralizedPencil(SymMatrix k, SymMatrix m) : stiffness(std::move(k)), mass(std::move(m)) {
        if (stiffness.order() != mass.order())
            throw Error("GeneralizedPencil: stiffness and mass orders differ");
    }
    SymMatrix stiffness;
    SymMatrix mass;
};

namespace detail {

// Lower Cholesky factor of an SPD matrix; throws NotPositiveDefinite.
inline std::vector<double> cholesky(const SymMatrix& m) {
    const int n = m.order();
    std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
    auto at = [&](int i, int j) -> double& {
        return l[static_cast<std::size_t>(i) * n + j];
    };
    double max_diag = 0.0;
    for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(m(i, i)));
    for (int j = 0; j < n; ++j) {
        double d = m(j, j);
        for (int k = 0; k < j; ++k) d -= at(j, k) * at(j, k);
        if (!(d > 1e-14 * std::max(max_diag, 1e-300)))
            throw NotPositiveDefinite("gen_eigen: mass matrix is not positive definite (pivot " +
                                      std::to_string(d) + " at row " + std::to_string(j) + ")");
        const double ljj = std::sqrt(d);
        at(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= at(i, k) * at(j, k);
            at(i, j) = s / ljj;
        }
    }
    return l;
}

} // namespace detail

// Generalized symmetric problem K v = lambda M v via the Cholesky reduction
// M = L L^T, B = L^-1 K L^-T. Eigenvectors come back M-orthonormal.
inline std::vector<Eigenpair> gen_eigen(const GeneralizedPencil& p) {
    const int n = p.stiffness.order();
    const std::vector<double> l = detail::cholesky(p.mass);
    auto lat = [&](int i, int j) { return l[static_cast<std::size_t>(i) * n + j]; };

    // Y = L^-1 K (forward substitution on each column of K).
    std::vector<double> y(static_cast<std::size_t>(n) * n, 0.0);
    for (int col = 0; col < n; ++col) {
        for (int i = 0; i < n; ++i) {
            double s = p.stiffness(i, col);
            for (int k = 0; k < i; ++k) s -= lat(i, k) * y[static_cast<std::size_t>(k) * n + col];
            y[static_cast<std::size_t>(i) * n + col] = s / lat(i, i);
        }
    }
    // B = Y L^-T, i.e. solve B L^T = Y row by row.
    SymMatrix b(n);
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = y[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k) s -= lat(j, k) * row[static_cast<std::size_t>(k)];
            row[static_cast<std::size_t>(j)] = s / lat(j, j);
        }
        for (int j = i; j < n; ++j) b.set(i, j, row[static_cast<std::size_t>(j)]);
    }

    std::vector<Eigenpair> pairs = sym_eigen(b);
    // Map eigenvectors back: v = L^-T w.
    for (auto& pr : pairs) {
        std::vector<double>& w = pr.vector;
        for (int i = n - 1; i >= 0; --i) {
            double s = w[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < n; ++k) s -= lat(k, i) * w[static_cast<std::size_t>(k)];
            w[static_cast<std::size_t>(i)] = s / lat(i, i);
        }
    }
    return pairs;
}

// Plain bisection. Bracket width <= tol on return.
inline double find_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(lo < hi)) throw Error("find_root: need lo < hi");
    if (!(tol > 0.0)) throw Error("find_root: tol must be positive");
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw NoSignChange("find_root: f(lo) and f(hi) have the same sign");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // bracket at rounding limit
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

// Trapezoidal rule over one period == rectangle rule on equispaced samples;
// spectrally accurate for smooth periodic integrands, exact for trigonometric
// polynomials of degree < n/2.
inline double periodic_quadrature(const std::function<double(double)>& f, double period, int n) {
    if (n < 2) throw Error("periodic_quadrature: need at least 2 samples");
    if (!(period > 0.0)) throw Error("periodic_quadrature: period must be positive");
    double s = 0.0;
    const double h = period / n;
    for (int i = 0; i < n; ++i) s += f(i * h);
    return s * h;
}

} // namespace specvar

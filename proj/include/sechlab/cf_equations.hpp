#pragma once

// Characteristic-function identities that single out the hyperbolic secant
// law, and a doubling solver that reconstructs the fixed point numerically.
//
// A symmetric CF f satisfies the mixture identity
//
//   f(t) = f(t/2)^2 (f(t) + 1) / 2                        (residual_polya)
//
// iff it also satisfies the two-variable factorization behind the
// independence of the random-coefficient forms
//
//   f((s+t)/2) f((s-t)/2) (f(s)+f(t))/2 = m(s) m(t),       (joint = product)
//   m(s) = f(s/2)^2 (f(s)+1)/2,                            (marginal)
//
// whose diagonal s = t reduces to f(s)^2 = m(s)^2. Rearranged, the mixture
// identity becomes the doubling step f(2t) = f(t)^2 / (2 - f(t)^2), which
// propagates a Taylor seed at a tiny t up a dyadic grid.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sechlab/distributions.hpp"

namespace sechlab {

class divergence_error : public std::runtime_error {
public:
    explicit divergence_error(double t)
        : std::runtime_error("doubling step diverged near t = " + std::to_string(t)),
          t_(t) {}

    double where() const noexcept { return t_; }

private:
    double t_;
};

// --- pointwise residuals -------------------------------------------------

inline double residual_polya(const CharFn& f, double t) {
    const double h = f(t / 2.0);
    const double v = f(t);
    return v - h * h * (v + 1.0) / 2.0;
}

inline double joint_cf(const CharFn& f, double s, double t) {
    return f((s + t) / 2.0) * f((s - t) / 2.0) * (f(s) + f(t)) / 2.0;
}

inline double marginal_cf(const CharFn& f, double s) {
    const double h = f(s / 2.0);
    return h * h * (f(s) + 1.0) / 2.0;
}

inline double factorization_residual(const CharFn& f, double s, double t) {
    return joint_cf(f, s, t) - marginal_cf(f, s) * marginal_cf(f, t);
}

inline double diag_residual(const CharFn& f, double s) {
    const double v = f(s);
    const double m = marginal_cf(f, s);
    return v * v - m * m;
}

// --- dyadic grid functions ------------------------------------------------

struct GridFn {
    double t_max = 0.0;
    int depth = 0; // 2^depth intervals, 2^depth + 1 nodes
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double node(std::size_t k) const {
        return t_max * static_cast<double>(k) /
               static_cast<double>(static_cast<std::size_t>(1) << depth);
    }
    double step() const {
        return t_max / static_cast<double>(static_cast<std::size_t>(1) << depth);
    }
};

inline constexpr int kMaxGridDepth = 24;

inline GridFn make_grid(const CharFn& f, double t_max, int depth) {
    require(t_max > 0.0, "make_grid: t_max must be positive");
    require(depth >= 1 && depth <= kMaxGridDepth, "make_grid: depth out of range");
    GridFn g;
    g.t_max = t_max;
    g.depth = depth;
    const std::size_t nodes = (static_cast<std::size_t>(1) << depth) + 1;
    g.values.resize(nodes);
    for (std::size_t k = 0; k < nodes; ++k) g.values[k] = f(g.node(k));
    return g;
}

namespace detail {

// Cubic interpolation at the half-integer position m + 1/2 of a uniformly
// sampled sequence, with one-sided stencils at the ends.
inline double interp_half(const std::vector<double>& v, std::size_t m) {
    const std::size_t last = v.size() - 1;
    if (m >= 1 && m + 2 <= last) {
        return (-v[m - 1] + 9.0 * v[m] + 9.0 * v[m + 1] - v[m + 2]) / 16.0;
    }
    if (m == 0) {
        return (5.0 * v[0] + 15.0 * v[1] - 5.0 * v[2] + v[3]) / 16.0;
    }
    // m == last - 1: mirrored one-sided stencil
    return (v[last - 3] - 5.0 * v[last - 2] + 15.0 * v[last - 1] + 5.0 * v[last]) / 16.0;
}

} // namespace detail

// One application of the mixture map on a grid:
// (A g)(t) = g(t/2)^2 (g(t)+1)/2, with g(t/2) read off the same grid
// (cubic interpolation at odd nodes).
inline GridFn apply_A(const GridFn& g) {
    require(g.values.size() >= 5, "apply_A: grid too coarse");
    GridFn out;
    out.t_max = g.t_max;
    out.depth = g.depth;
    out.values.resize(g.values.size());
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        double half;
        if (k % 2 == 0) {
            half = g.values[k / 2];
        } else {
            half = detail::interp_half(g.values, (k - 1) / 2);
        }
        out.values[k] = half * half * (g.values[k] + 1.0) / 2.0;
    }
    return out;
}

inline double grid_sup_distance(const GridFn& a, const GridFn& b) {
    require(a.values.size() == b.values.size() && a.t_max == b.t_max,
            "grid_sup_distance: incompatible grids");
    double sup = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        sup = std::max(sup, std::fabs(a.values[k] - b.values[k]));
    return sup;
}

// --- doubling solver --------------------------------------------------

// Reconstructs the even fixed point with curvature sigma^2 at 0 (i.e. the
// solution with f''(0) = -sigma^2) on a dyadic grid over [0, t_max].
//
// Each node value is obtained by seeding the second-order Taylor value at
// s = t / 2^j <= t_max / 2^seed_depth and applying the doubling step j
// times. The iteration runs on the complement d = 1 - f,
//
//   d(2t) = 2 d (2 - d) / (1 + 2d - d^2),
//
// because the f-form loses the seed outright in double precision once
// 1 - sigma^2 s^2 / 2 rounds to 1 (seed_depth around 27 and beyond).
inline GridFn solve_doubling(double sigma, double t_max, int seed_depth,
                             int grid_depth = 12) {
    require(sigma > 0.0, "solve_doubling: sigma must be positive");
    require(t_max > 0.0, "solve_doubling: t_max must be positive");
    require(seed_depth >= 10 && seed_depth <= 60, "solve_doubling: seed depth out of range");
    require(grid_depth >= 1 && grid_depth <= kMaxGridDepth,
            "solve_doubling: grid depth out of range");

    GridFn g;
    g.t_max = t_max;
    g.depth = grid_depth;
    const std::size_t nodes = (static_cast<std::size_t>(1) << grid_depth) + 1;
    g.values.resize(nodes);
    g.values[0] = 1.0;

    const double t0 = t_max / std::ldexp(1.0, seed_depth);
    for (std::size_t k = 1; k < nodes; ++k) {
        double s = g.node(k);
        int levels = 0;
        while (s > t0 * (1.0 + 1e-12)) {
            s *= 0.5;
            ++levels;
        }
        double d = 0.5 * sigma * sigma * s * s;
        for (int j = 0; j < levels; ++j) {
            const double fv = 1.0 - d;
            if (fv * fv >= 2.0 - 1e-9)
                throw divergence_error(s * std::ldexp(1.0, j));
            d = 2.0 * d * (2.0 - d) / (1.0 + 2.0 * d - d * d);
        }
        const double fv = 1.0 - d;
        if (fv * fv >= 2.0 - 1e-9) throw divergence_error(g.node(k));
        g.values[k] = fv;
    }
    return g;
}

// --- zero-freeness ----------------------------------------------------

struct ZeroFreeReport {
    bool zero_free = true;
    std::optional<double> first_violation;
};

inline ZeroFreeReport zero_free_check(const GridFn& g, double eps = 1e-12) {
    require(eps > 0.0, "zero_free_check: eps must be positive");
    ZeroFreeReport rep;
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        if (std::fabs(g.values[k]) < eps) {
            rep.zero_free = false;
            rep.first_violation = g.node(k);
            return rep;
        }
        if (k + 1 < g.values.size() && g.values[k] * g.values[k + 1] < 0.0) {
            rep.zero_free = false;
            rep.first_violation = 0.5 * (g.node(k) + g.node(k + 1));
            return rep;
        }
    }
    return rep;
}

} // namespace sechlab

#pragma once

// Monte-Carlo constructions used by the experiments. Draw order within each
// construction is pinned (and X3 is always consumed, even when its Bernoulli
// weight is 0) so that sample streams are reproducible functions of the
// stream key alone.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "sechlab/chebyshev.hpp"
#include "sechlab/distributions.hpp"
#include "sechlab/rng.hpp"

namespace sechlab {

// --- mixture identity ----------------------------------------------------
//
// Y = (X1 + X2)/2 + e X3 with e Bernoulli{0,1}(1/2); distributed like X
// exactly when the law of X is hyperbolic secant. Draw order per sample:
// X1, X2, X3, e.
inline SampleBatch sample_mixture(RngStream& rng, const Sampler& s, std::size_t n) {
    require(n >= 1, "sample_mixture: n must be positive");
    SampleBatch out;
    out.source = "mixture[" + s.name + "]";
    out.stream_key = rng.key();
    out.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = s(rng);
        const double x2 = s(rng);
        const double x3 = s(rng);
        const bool e = rng.next_bool();
        out.values.push_back(0.5 * (x1 + x2) + (e ? x3 : 0.0));
    }
    return out;
}

// --- random-coefficient linear forms ---------------------------------------
//
// L1 = (X1 + X2)/2 + e X3,  L2 = (X1 - X2)/2 + (1 - e) X3, with one shared
// Bernoulli e per sample. Independent of each other exactly when the law is
// hyperbolic secant. Draw order per sample: X1, X2, X3, e.
inline PairedBatch sample_forms(RngStream& rng, const Sampler& s, std::size_t n) {
    require(n >= 1, "sample_forms: n must be positive");
    PairedBatch out;
    out.source = "forms[" + s.name + "]";
    out.stream_key = rng.key();
    out.l1.reserve(n);
    out.l2.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = s(rng);
        const double x2 = s(rng);
        const double x3 = s(rng);
        const bool e = rng.next_bool();
        out.l1.push_back(0.5 * (x1 + x2) + (e ? x3 : 0.0));
        out.l2.push_back(0.5 * (x1 - x2) + (e ? 0.0 : x3));
    }
    return out;
}

// --- random-index sums ---------------------------------------------------

enum class BaseKind { coin, uniform, normal };

inline const char* base_name(BaseKind k) {
    switch (k) {
        case BaseKind::coin: return "coin";
        case BaseKind::uniform: return "uniform";
        case BaseKind::normal: return "normal";
    }
    throw std::invalid_argument("base_name: unknown base kind");
}

inline BaseKind base_from_name(const std::string& name) {
    if (name == "coin") return BaseKind::coin;
    if (name == "uniform") return BaseKind::uniform;
    if (name == "normal") return BaseKind::normal;
    throw std::invalid_argument("unknown base distribution: " + name);
}

// Unit-variance base laws for the random-index sums.
inline Sampler make_base_sampler(BaseKind kind) {
    switch (kind) {
        case BaseKind::coin:
            return {"coin", 1.0, [](RngStream& r) { return r.next_bool() ? 1.0 : -1.0; }};
        case BaseKind::uniform: {
            const double h = std::sqrt(3.0);
            return {"uniform", 1.0,
                    [h](RngStream& r) { return h * (2.0 * r.next_unit() - 1.0); }};
        }
        case BaseKind::normal:
            return {"normal", 1.0, [](RngStream& r) { return normal_draw(r, 1.0); }};
    }
    throw std::invalid_argument("make_base_sampler: unknown base kind");
}

enum class Normalization { inv_n, inv_sqrt_n };

inline const char* normalization_name(Normalization n) {
    return n == Normalization::inv_n ? "inv-n" : "inv-sqrt-n";
}

inline Normalization normalization_from_name(const std::string& name) {
    if (name == "inv-n" || name == "inv_n") return Normalization::inv_n;
    if (name == "inv-sqrt-n" || name == "inv_sqrt_n") return Normalization::inv_sqrt_n;
    throw std::invalid_argument("unknown normalization: " + name);
}

// m draws of c * sum_{i<=nu} xi_i, where nu is a fresh index draw each time
// and c is 1/n (limit law: sech with scale 2 sigma_base / pi) or 1/sqrt(n)
// (diverging variance, kept for comparison). Draw order per sample: nu,
// then its nu base variables.
inline SampleBatch sample_random_sum(RngStream& rng, IndexDistribution& dist,
                                     const Sampler& base, Normalization norm,
                                     std::size_t m) {
    require(m >= 1, "sample_random_sum: m must be positive");
    const double n = static_cast<double>(dist.order());
    const double c = norm == Normalization::inv_n ? 1.0 / n : 1.0 / std::sqrt(n);
    SampleBatch out;
    out.source = std::string("random_sum[n=") + std::to_string(dist.order()) + "," +
                 base.name + "," + normalization_name(norm) + "]";
    out.stream_key = rng.key();
    out.values.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::int64_t nu = index_sample(rng, dist);
        double acc = 0.0;
        for (std::int64_t j = 0; j < nu; ++j) acc += base(rng);
        out.values.push_back(c * acc);
    }
    return out;
}

} // namespace sechlab

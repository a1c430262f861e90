#pragma once

// The hyperbolic secant distribution and the control distributions used as
// negative controls in the experiments. All densities are symmetric about 0;
// `scale` multiplies the standard variate, so the characteristic function of
// the scaled law is f(scale * t) in terms of the standard one.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sechlab/rng.hpp"

namespace sechlab {

inline constexpr double kPi = std::numbers::pi_v<double>;

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// --- hyperbolic secant law -------------------------------------------------
//
//   pdf      p(x)  = (1/pi) sech(x/a) / a
//   cdf      F(x)  = (2/pi) atan(exp(x/a))
//   quantile q(u)  = a log tan(pi u / 2)
//   cf       f(t)  = sech(pi a t / 2)
//   variance       = a^2 pi^2 / 4

inline double sech_pdf(double x, double scale = 1.0) {
    require(scale > 0.0, "sech_pdf: scale must be positive");
    const double z = std::fabs(x) / scale;
    // cosh overflows near 710; the density is exactly 0 in double there.
    if (z > 709.0) return 0.0;
    return 1.0 / (kPi * scale * std::cosh(z));
}

inline double sech_cdf(double x, double scale = 1.0) {
    require(scale > 0.0, "sech_cdf: scale must be positive");
    const double z = x / scale;
    // Evaluate on the side where exp() decays so the result keeps full
    // relative precision in both tails and F(-x) = 1 - F(x) holds exactly.
    if (z <= 0.0) return (2.0 / kPi) * std::atan(std::exp(z));
    return 1.0 - (2.0 / kPi) * std::atan(std::exp(-z));
}

inline double sech_quantile(double u, double scale = 1.0) {
    require(scale > 0.0, "sech_quantile: scale must be positive");
    require(u > 0.0 && u < 1.0, "sech_quantile: u must lie in (0,1)");
    // Split at 1/2 so q(1-u) = -q(u) holds exactly in floating point
    // whenever 1-u is itself exact; tan(pi/4) rounds below 1, so the median
    // needs its own branch to come out as an exact zero.
    if (u == 0.5) return 0.0;
    if (u < 0.5) return scale * std::log(std::tan(kPi * u / 2.0));
    return -scale * std::log(std::tan(kPi * (1.0 - u) / 2.0));
}

inline double sech_cf(double t, double scale = 1.0) {
    require(scale > 0.0, "sech_cf: scale must be positive");
    const double z = kPi * scale * t / 2.0;
    if (std::fabs(z) > 709.0) return 0.0;
    return 1.0 / std::cosh(z);
}

inline double sech_variance(double scale = 1.0) {
    require(scale > 0.0, "sech_variance: scale must be positive");
    return scale * scale * kPi * kPi / 4.0;
}

// --- control laws ------------------------------------------------------

enum class DistKind { sech, normal, laplace, uniform };

inline const char* dist_name(DistKind k) {
    switch (k) {
        case DistKind::sech: return "sech";
        case DistKind::normal: return "normal";
        case DistKind::laplace: return "laplace";
        case DistKind::uniform: return "uniform";
    }
    throw std::invalid_argument("dist_name: unknown distribution kind");
}

inline DistKind dist_from_name(const std::string& name) {
    if (name == "sech") return DistKind::sech;
    if (name == "normal") return DistKind::normal;
    if (name == "laplace") return DistKind::laplace;
    if (name == "uniform") return DistKind::uniform;
    throw std::invalid_argument("unknown distribution: " + name);
}

// Characteristic functions of the controls, parameterised so that `scale`
// multiplies the standard variate: normal exp(-(st)^2/2), Laplace
// 1/(1+(st)^2), uniform on [-s, s] sin(st)/(st).
inline double control_cf(DistKind kind, double t, double scale = 1.0) {
    require(scale > 0.0, "control_cf: scale must be positive");
    const double st = scale * t;
    switch (kind) {
        case DistKind::normal: return std::exp(-0.5 * st * st);
        case DistKind::laplace: return 1.0 / (1.0 + st * st);
        case DistKind::uniform: return st == 0.0 ? 1.0 : std::sin(st) / st;
        case DistKind::sech: break;
    }
    throw std::invalid_argument("control_cf: kind must be a control distribution");
}

// --- characteristic function handle -----------------------------------

struct CharFn {
    std::string name;
    std::function<double(double)> eval;

    double operator()(double t) const { return eval(t); }
};

inline CharFn make_char_fn(DistKind kind, double scale = 1.0) {
    require(scale > 0.0, "make_char_fn: scale must be positive");
    if (kind == DistKind::sech)
        return {std::string("sech(") + std::to_string(scale) + ")",
                [scale](double t) { return sech_cf(t, scale); }};
    return {std::string(dist_name(kind)) + "(" + std::to_string(scale) + ")",
            [kind, scale](double t) { return control_cf(kind, t, scale); }};
}

// --- samplers ----------------------------------------------------------

struct Sampler {
    std::string name;
    double variance = 1.0;
    std::function<double(RngStream&)> draw;

    double operator()(RngStream& rng) const { return draw(rng); }
};

inline double sech_draw(RngStream& rng, double scale = 1.0) {
    return sech_quantile(rng.next_unit(), scale);
}

inline double normal_draw(RngStream& rng, double scale = 1.0) {
    // Box-Muller, cosine branch: exactly two uniforms per draw, which keeps
    // the stream layout independent of rejection outcomes.
    const double u1 = rng.next_unit();
    const double u2 = rng.next_unit();
    return scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

inline double laplace_draw(RngStream& rng, double scale = 1.0) {
    // Difference of two exponentials: b log(u2/u1) is Laplace(b).
    const double u1 = rng.next_unit();
    const double u2 = rng.next_unit();
    return scale * std::log(u2 / u1);
}

inline double uniform_draw(RngStream& rng, double scale = 1.0) {
    return scale * (2.0 * rng.next_unit() - 1.0);
}

inline Sampler make_sampler(DistKind kind, double scale = 1.0) {
    require(scale > 0.0, "make_sampler: scale must be positive");
    const std::string nm = std::string(dist_name(kind)) + "(" + std::to_string(scale) + ")";
    switch (kind) {
        case DistKind::sech:
            return {nm, sech_variance(scale),
                    [scale](RngStream& r) { return sech_draw(r, scale); }};
        case DistKind::normal:
            return {nm, scale * scale,
                    [scale](RngStream& r) { return normal_draw(r, scale); }};
        case DistKind::laplace:
            return {nm, 2.0 * scale * scale,
                    [scale](RngStream& r) { return laplace_draw(r, scale); }};
        case DistKind::uniform:
            return {nm, scale * scale / 3.0,
                    [scale](RngStream& r) { return uniform_draw(r, scale); }};
    }
    throw std::invalid_argument("make_sampler: unknown distribution kind");
}

// --- sample containers --------------------------------------------------

struct SampleBatch {
    std::vector<double> values;
    std::string source;       // sampler or construction name
    std::uint64_t stream_key = 0;
};

struct PairedBatch {
    std::vector<double> l1;
    std::vector<double> l2;
    std::string source;
    std::uint64_t stream_key = 0;
};

inline SampleBatch sample_batch(RngStream& rng, const Sampler& s, std::size_t n) {
    require(n >= 1, "sample_batch: n must be positive");
    SampleBatch out;
    out.source = s.name;
    out.stream_key = rng.key();
    out.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.values.push_back(s(rng));
    return out;
}

inline SampleBatch sech_sample(RngStream& rng, std::size_t n, double scale = 1.0) {
    return sample_batch(rng, make_sampler(DistKind::sech, scale), n);
}

inline SampleBatch control_sample(RngStream& rng, DistKind kind, std::size_t n,
                                  double scale = 1.0) {
    require(kind != DistKind::sech, "control_sample: kind must be a control distribution");
    return sample_batch(rng, make_sampler(kind, scale), n);
}

} // namespace sechlab

#pragma once

// Chebyshev-polynomial machinery and the random-index distribution with
// probability generating function P_n(z) = 1 / T_n(1/z).
//
// Writing T_n(1/z) z^n = Q_n(z^2) with integer coefficients q_0..q_m
// (q_0 = 2^(n-1), m = floor(n/2)) gives P_n(z) = sum_k beta_k z^(n+2k),
// where the beta_k follow the series-inversion recurrence
//
//   beta_0 = 1/q_0,   beta_k = -(1/q_0) sum_j q_j beta_(k-j).
//
// The recurrence is run exactly on the scaled integers
// gamma_k = beta_k q_0^(k+1) in 128-bit arithmetic for as long as they fit.
// Beyond that the coefficients continue via the partial-fraction form over
// the roots cos(theta_r), theta_r = (2r-1) pi / (2n), of Q_n:
//
//   p_(n+2k) = (1/n) sum_r (-1)^(r-1) sin(theta_r) cos(theta_r)^(n+2k-1),
//
// which is uniformly accurate near machine precision. (The floating-point
// form of the recurrence itself is violently unstable for large n and is not
// used: with n = 50 it accumulates coefficient mass around -2e5 before the
// tail target is reached, and with n = 64 it overflows.)

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sechlab/distributions.hpp"
#include "sechlab/rng.hpp"

namespace sechlab {

class truncation_error : public std::runtime_error {
public:
    truncation_error(int n, std::size_t terms, double mass)
        : std::runtime_error("index distribution for n=" + std::to_string(n) +
                             " exceeded " + std::to_string(terms) +
                             " terms at accumulated mass " + std::to_string(mass)),
          n_(n), terms_(terms), mass_(mass) {}

    int order() const noexcept { return n_; }
    std::size_t terms() const noexcept { return terms_; }
    double mass() const noexcept { return mass_; }

private:
    int n_;
    std::size_t terms_;
    double mass_;
};

// T_n(x) by the three-term recurrence; stable for |x| >= 1, which is the
// only regime used here (PGF arguments have 1/z >= 1).
inline double cheb_T(int n, double x) {
    require(n >= 0, "cheb_T: order must be non-negative");
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

// T_n'(1) = n^2 by the exact integer recurrence
// T'_(k+1)(1) = 2 + 2 T'_k(1) - T'_(k-1)(1).
inline std::int64_t cheb_T_prime_at_1(int n) {
    require(n >= 0, "cheb_T_prime_at_1: order must be non-negative");
    require(n <= 3000000000LL, "cheb_T_prime_at_1: order too large for exact arithmetic");
    if (n == 0) return 0;
    std::int64_t prev = 0;
    std::int64_t cur = 1;
    for (int k = 1; k < n; ++k) {
        const std::int64_t next = 2 + 2 * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

// Mean of the index distribution: P_n'(1) = T_n'(1) / T_n(1)^2 = n^2.
inline double index_mean(int n) {
    require(n >= 1, "index_mean: order must be positive");
    return static_cast<double>(cheb_T_prime_at_1(n));
}

inline double pgf_eval(int n, double z) {
    require(n >= 1, "pgf_eval: order must be positive");
    require(z > 0.0 && z <= 1.0, "pgf_eval: z must lie in (0,1]");
    const double denom = cheb_T(n, 1.0 / z);
    // The recurrence overflows through inf - inf for tiny z; the true value
    // of T_n(1/z) is +inf there, so the reciprocal underflows to 0.
    if (!std::isfinite(denom)) return 0.0;
    return 1.0 / denom;
}

namespace detail {

using int128 = __int128;

inline constexpr int kMaxExactOrder = 90; // T_90 coefficients still fit in int128

// Coefficients q_j of Q_n(w) = sum_j q_j w^j, i.e. q_j is the coefficient of
// x^(n-2j) in T_n(x). Built from the full integer coefficient vectors of the
// three-term recurrence.
inline std::vector<int128> cheb_q_coeffs(int n) {
    require(n >= 1, "cheb_q_coeffs: order must be positive");
    require(n <= kMaxExactOrder, "cheb_q_coeffs: order exceeds exact coefficient range");
    // c[k][i] = coefficient of x^i in T_k.
    std::vector<int128> prev(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int128> cur(static_cast<std::size_t>(n) + 1, 0);
    prev[0] = 1; // T_0
    cur[1] = 1;  // T_1
    for (int k = 1; k < n; ++k) {
        std::vector<int128> next(static_cast<std::size_t>(n) + 1, 0);
        for (int i = 0; i <= k; ++i) {
            if (cur[static_cast<std::size_t>(i)] != 0)
                next[static_cast<std::size_t>(i) + 1] += 2 * cur[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i <= k - 1; ++i)
            next[static_cast<std::size_t>(i)] -= prev[static_cast<std::size_t>(i)];
        prev = std::move(cur);
        cur = std::move(next);
    }
    std::vector<int128> q;
    for (int j = 0; n - 2 * j >= 0; ++j)
        q.push_back(cur[static_cast<std::size_t>(n - 2 * j)]);
    return q;
}

inline double int128_to_double(int128 v) {
    return static_cast<double>(v);
}

} // namespace detail

// The law of the random index nu_n. Value type: copies are independent, so
// concurrent trials each take a private copy and extend it on demand.
class IndexDistribution {
public:
    static constexpr std::size_t kHardCap = 10'000'000;

    IndexDistribution(int n, double tail_eps) : n_(n), tail_eps_(tail_eps) {
        require(n >= 1, "IndexDistribution: order must be positive");
        require(n <= detail::kMaxExactOrder,
                "IndexDistribution: order exceeds exact coefficient range");
        require(tail_eps > 0.0 && tail_eps < 1.0,
                "IndexDistribution: tail_eps must lie in (0, 1)");

        q_ = detail::cheb_q_coeffs(n);
        gamma_.assign(q_.size(), 0);
        gamma_[0] = 1;

        // Closed-form tables.
        sign_weight_.resize(static_cast<std::size_t>(n));
        cos_.resize(static_cast<std::size_t>(n));
        for (int r = 1; r <= n; ++r) {
            const double theta = (2.0 * r - 1.0) * kPi / (2.0 * n);
            const double s = std::sin(theta);
            const double c = std::cos(theta);
            sign_weight_[static_cast<std::size_t>(r - 1)] = ((r - 1) % 2 == 0 ? 1.0 : -1.0) * s / n;
            cos_[static_cast<std::size_t>(r - 1)] = c;
        }

        extend_until_tail(tail_eps_);
    }

    int order() const noexcept { return n_; }
    double tail_eps() const noexcept { return tail_eps_; }
    const std::vector<std::int64_t>& support() const noexcept { return support_; }
    const std::vector<double>& probs() const noexcept { return probs_; }
    const std::vector<double>& cumulative() const noexcept { return cumulative_; }
    double tail_bound() const noexcept {
        return cumulative_.empty() ? 1.0 : std::max(0.0, 1.0 - cumulative_.back());
    }
    double coeff_floor() const noexcept { return coeff_floor_; }
    std::size_t exact_terms() const noexcept { return exact_terms_; }

    // Appends coefficients until the accumulated mass reaches `target`.
    void extend_until_mass(double target) {
        while (cumulative_.empty() || cumulative_.back() < target) append_term();
    }

    void extend_until_tail(double eps) { extend_until_mass(1.0 - eps); }

private:
    void append_term() {
        if (support_.size() >= kHardCap)
            throw truncation_error(n_, support_.size(),
                                   cumulative_.empty() ? 0.0 : cumulative_.back());
        const std::size_t k = support_.size();
        double beta;
        if (exact_ok_ && try_exact_term(k, beta)) {
            ++exact_terms_;
        } else {
            exact_ok_ = false;
            beta = closed_form_term(k);
        }
        if (beta < coeff_floor_) coeff_floor_ = beta;
        if (beta < 0.0) beta = 0.0; // roundoff dip; recorded in coeff_floor

        support_.push_back(static_cast<std::int64_t>(n_) + 2 * static_cast<std::int64_t>(k));
        probs_.push_back(beta);
        // Kahan-compensated cumulative sum so the recorded tail bound is
        // trustworthy over ~1e5 terms.
        const double y = beta - kahan_c_;
        const double t = kahan_sum_ + y;
        kahan_c_ = (t - kahan_sum_) - y;
        kahan_sum_ = t;
        cumulative_.push_back(kahan_sum_);
    }

    // gamma_k = -(sum_j q_j 2^((n-1)(j-1)) gamma_(k-j)); false on overflow.
    bool try_exact_term(std::size_t k, double& beta_out) {
        using detail::int128;
        const std::size_t m = q_.size() - 1;
        if (k > 0) {
            int128 acc = 0;
            const std::size_t jmax = std::min(m, k);
            for (std::size_t j = 1; j <= jmax; ++j) {
                int128 term = q_[j];
                const int shift = (n_ - 1) * static_cast<int>(j - 1);
                if (shift >= 127) return false;
                if (__builtin_mul_overflow(term, static_cast<int128>(1) << shift, &term))
                    return false;
                if (__builtin_mul_overflow(term, gamma_ring(k - j), &term)) return false;
                if (__builtin_add_overflow(acc, term, &acc)) return false;
            }
            gamma_set(k, -acc);
        }
        const int down = (n_ - 1) * (static_cast<int>(k) + 1);
        beta_out = std::ldexp(detail::int128_to_double(gamma_ring(k)), -down);
        return true;
    }

    detail::int128 gamma_ring(std::size_t k) const { return gamma_[k % gamma_.size()]; }
    void gamma_set(std::size_t k, detail::int128 v) { gamma_[k % gamma_.size()] = v; }

    double closed_form_term(std::size_t k) const {
        // p_(n+2k) = sum_r sign_weight_r cos(theta_r)^(n+2k-1)
        const double e = static_cast<double>(n_) + 2.0 * static_cast<double>(k) - 1.0;
        double acc = 0.0;
        for (std::size_t r = 0; r < sign_weight_.size(); ++r) {
            const double a = std::fabs(cos_[r]);
            double p;
            if (a == 0.0) {
                p = (e == 0.0) ? 1.0 : 0.0;
            } else {
                p = std::exp(e * std::log(a));
                if (cos_[r] < 0.0 && (n_ - 1) % 2 != 0) p = -p;
            }
            acc += sign_weight_[r] * p;
        }
        return acc;
    }

    int n_;
    double tail_eps_;
    std::vector<detail::int128> q_;
    std::vector<detail::int128> gamma_; // ring buffer of the last m+1 values
    bool exact_ok_ = true;
    std::size_t exact_terms_ = 0;

    std::vector<double> sign_weight_;
    std::vector<double> cos_;

    std::vector<std::int64_t> support_;
    std::vector<double> probs_;
    std::vector<double> cumulative_;
    double kahan_sum_ = 0.0;
    double kahan_c_ = 0.0;
    double coeff_floor_ = 0.0;
};

inline IndexDistribution index_pmf(int n, double tail_eps) {
    return IndexDistribution(n, tail_eps);
}

// One draw of nu_n by inversion. A uniform landing beyond the accumulated
// mass extends the table on demand; truncation is never silent. The
// degenerate n = 1 law (nu == 1) consumes no randomness, so downstream
// streams align with plain base sampling.
inline std::int64_t index_sample(RngStream& rng, IndexDistribution& dist) {
    const auto& cum = dist.cumulative();
    if (cum.size() == 1 && cum.front() >= 1.0) return dist.support().front();
    const double u = rng.next_unit();
    if (u > cum.back()) dist.extend_until_mass(u);
    const auto& c = dist.cumulative();
    std::size_t lo = 0;
    std::size_t hi = c.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (c[mid] >= u)
            hi = mid;
        else
            lo = mid + 1;
    }
    if (lo == c.size()) lo = c.size() - 1;
    return dist.support()[lo];
}

} // namespace sechlab

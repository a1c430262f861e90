#pragma once

// Test statistics: empirical CF, Kolmogorov-Smirnov (one- and two-sample)
// with the asymptotic Kolmogorov tail, and a permutation test of
// independence based on distance covariance.
//
// The distance-covariance statistic for scalar pairs is computed in
// O(n log n) with a Fenwick tree over y-ranks (partial sums of 1, y, x, xy),
// which makes permutation p-values affordable at the sample sizes the
// independence experiment needs. The naive O(n^2) double-centering formula
// lives in the test suite as an independent oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "sechlab/distributions.hpp"
#include "sechlab/rng.hpp"

namespace sechlab {

struct TestReport {
    std::string test_name;
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    std::size_t m = 0;
    double alpha = 0.05;
    bool reject = false;
    std::map<std::string, std::string> config;
};

// --- empirical characteristic function -------------------------------------

// Real part of the empirical CF; for the symmetric laws studied here the
// imaginary part is pure noise, so the cosine average is the estimator.
inline double ecf(const std::vector<double>& xs, double t) {
    require(!xs.empty(), "ecf: batch must be non-empty");
    double acc = 0.0;
    for (const double x : xs) acc += std::cos(t * x);
    return acc / static_cast<double>(xs.size());
}

inline double ecf(const SampleBatch& batch, double t) { return ecf(batch.values, t); }

// --- Kolmogorov-Smirnov ------------------------------------------------

// Tail of the Kolmogorov distribution: Q(lambda) = 2 sum (-1)^(k-1)
// exp(-2 k^2 lambda^2), truncated once terms drop below 1e-12.
inline double kolmogorov_p(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100000; ++k) {
        const double term = std::exp(-2.0 * lambda * lambda * static_cast<double>(k) *
                                     static_cast<double>(k));
        if (term < 1e-12) break;
        sum += sign * term;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline TestReport ks_two_sample(const std::vector<double>& a,
                                const std::vector<double>& b, double alpha = 0.01) {
    require(!a.empty() && !b.empty(), "ks_two_sample: batches must be non-empty");
    require(alpha > 0.0 && alpha < 1.0, "ks_two_sample: alpha must lie in (0,1)");
    std::vector<double> as(a), bs(b);
    std::sort(as.begin(), as.end());
    std::sort(bs.begin(), bs.end());
    const double n = static_cast<double>(as.size());
    const double m = static_cast<double>(bs.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < as.size() && j < bs.size()) {
        // advance past every copy of the smaller value in both samples, so
        // ties contribute the jump of the full tie block
        const double v = std::min(as[i], bs[j]);
        while (i < as.size() && as[i] == v) ++i;
        while (j < bs.size() && bs[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    TestReport rep;
    rep.test_name = "ks_two_sample";
    rep.statistic = d;
    rep.n = as.size();
    rep.m = bs.size();
    rep.alpha = alpha;
    rep.p_value = kolmogorov_p(d * std::sqrt(n * m / (n + m)));
    rep.reject = rep.p_value <= alpha;
    return rep;
}

template <typename Cdf>
inline TestReport ks_one_sample(const std::vector<double>& a, Cdf&& cdf,
                                double alpha = 0.01) {
    require(!a.empty(), "ks_one_sample: batch must be non-empty");
    require(alpha > 0.0 && alpha < 1.0, "ks_one_sample: alpha must lie in (0,1)");
    std::vector<double> xs(a);
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    double prev = -1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        if (!(F >= -1e-12 && F <= 1.0 + 1e-12) || F < prev - 1e-12)
            throw std::invalid_argument("ks_one_sample: cdf probe is not a monotone cdf");
        prev = F;
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - F);
        d = std::max(d, F - static_cast<double>(i) / n);
    }
    TestReport rep;
    rep.test_name = "ks_one_sample";
    rep.statistic = d;
    rep.n = xs.size();
    rep.alpha = alpha;
    rep.p_value = kolmogorov_p(d * std::sqrt(n));
    rep.reject = rep.p_value <= alpha;
    return rep;
}

// --- distance covariance ----------------------------------------------

namespace detail {

// Four parallel Fenwick trees indexed by rank: counts, sum y, sum x, sum xy.
class Fenwick4 {
public:
    explicit Fenwick4(std::size_t n) : n_(n), tree_(4 * (n + 1), 0.0) {}

    void reset() { std::fill(tree_.begin(), tree_.end(), 0.0); }

    void add(std::size_t i, double y, double x, double xy) {
        for (std::size_t k = i + 1; k <= n_; k += k & (0 - k)) {
            double* cell = &tree_[4 * k];
            cell[0] += 1.0;
            cell[1] += y;
            cell[2] += x;
            cell[3] += xy;
        }
    }

    // prefix over ranks [0, i]
    void query(std::size_t i, double out[4]) const {
        out[0] = out[1] = out[2] = out[3] = 0.0;
        for (std::size_t k = i + 1; k > 0; k -= k & (0 - k)) {
            const double* cell = &tree_[4 * k];
            out[0] += cell[0];
            out[1] += cell[1];
            out[2] += cell[2];
            out[3] += cell[3];
        }
    }

private:
    std::size_t n_;
    std::vector<double> tree_;
};

// Row sums sum_i |v_j - v_i| for every element, returned in the original
// index order.
inline std::vector<double> abs_row_sums(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> ord(n);
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t p = 0; p < n; ++p) prefix[p + 1] = prefix[p] + v[ord[p]];
    std::vector<double> row(n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        const double x = v[ord[p]];
        const double left = x * static_cast<double>(p) - prefix[p];
        const double right = (prefix[n] - prefix[p + 1]) -
                             x * static_cast<double>(n - 1 - p);
        row[ord[p]] = left + right;
    }
    return row;
}

// Shared machinery for one dataset x plus many rearrangements of y.
class DcovEngine {
public:
    DcovEngine(const std::vector<double>& x, const std::vector<double>& y)
        : n_(x.size()), fen_(x.size()), x_(x), y_(y) {
        require(n_ >= 2, "dcov: need at least two pairs");
        require(x.size() == y.size(), "dcov: coordinate lengths differ");
        xorder_.resize(n_);
        std::iota(xorder_.begin(), xorder_.end(), 0);
        std::sort(xorder_.begin(), xorder_.end(),
                  [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
        yrank_.resize(n_);
        std::vector<std::size_t> yord(n_);
        std::iota(yord.begin(), yord.end(), 0);
        std::sort(yord.begin(), yord.end(),
                  [&](std::size_t a, std::size_t b) {
                      return y[a] < y[b] || (y[a] == y[b] && a < b);
                  });
        for (std::size_t p = 0; p < n_; ++p) yrank_[yord[p]] = p;
        arow_ = abs_row_sums(x);
        brow_ = abs_row_sums(y);
        agrand_ = std::accumulate(arow_.begin(), arow_.end(), 0.0);
        bgrand_ = std::accumulate(brow_.begin(), brow_.end(), 0.0);
        ys_.resize(n_);
        rs_.resize(n_);
    }

    // V^2 for pairs (x_i, y_perm(i)); perm == nullptr means identity.
    double stat(const std::vector<std::size_t>* perm) {
        const double n = static_cast<double>(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t orig = xorder_[j];
            const std::size_t src = perm ? (*perm)[orig] : orig;
            ys_[j] = y_[src];
            rs_[j] = yrank_[src];
        }
        fen_.reset();
        double D = 0.0;
        double totY = 0.0, totX = 0.0, totXY = 0.0;
        double q[4];
        for (std::size_t j = 0; j < n_; ++j) {
            const double xj = x_[xorder_[j]];
            const double yj = ys_[j];
            fen_.query(rs_[j], q);
            const double cLe = q[0], SyLe = q[1], SxLe = q[2], SxyLe = q[3];
            const double cGt = static_cast<double>(j) - cLe;
            const double SyGt = totY - SyLe;
            const double SxGt = totX - SxLe;
            const double SxyGt = totXY - SxyLe;
            D += xj * (yj * cLe - SyLe) - (yj * SxLe - SxyLe);
            D += xj * (SyGt - yj * cGt) + (yj * SxGt - SxyGt);
            fen_.add(rs_[j], yj, xj, xj * yj);
            totY += yj;
            totX += xj;
            totXY += xj * yj;
        }
        double s2 = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            s2 += arow_[i] * brow_[perm ? (*perm)[i] : i];
        const double S1 = 2.0 * D / (n * n);
        const double S2 = s2 / (n * n * n);
        const double S3 = agrand_ * bgrand_ / (n * n * n * n);
        return S1 - 2.0 * S2 + S3;
    }

private:
    std::size_t n_;
    Fenwick4 fen_;
    std::vector<double> x_, y_;
    std::vector<std::size_t> xorder_;
    std::vector<std::size_t> yrank_;
    std::vector<double> arow_, brow_;
    double agrand_ = 0.0, bgrand_ = 0.0;
    std::vector<double> ys_;
    std::vector<std::size_t> rs_;
};

} // namespace detail

// Squared sample distance covariance of scalar pairs.
inline double dcov_stat(const std::vector<double>& x, const std::vector<double>& y) {
    detail::DcovEngine eng(x, y);
    return eng.stat(nullptr);
}

// Permutation test of independence: the second coordinate is permuted,
// p = (1 + #{perm stats >= observed}) / (permutations + 1).
inline TestReport dcov_test(const PairedBatch& pairs, std::size_t permutations,
                            RngStream& rng, double alpha = 0.05) {
    require(pairs.l1.size() >= 20, "dcov_test: need at least 20 pairs");
    require(permutations >= 99, "dcov_test: need at least 99 permutations");
    require(alpha > 0.0 && alpha < 1.0, "dcov_test: alpha must lie in (0,1)");
    detail::DcovEngine eng(pairs.l1, pairs.l2);
    const double obs = eng.stat(nullptr);
    const std::size_t n = pairs.l1.size();
    std::vector<std::size_t> perm(n);
    std::size_t at_least = 0;
    for (std::size_t p = 0; p < permutations; ++p) {
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
            std::swap(perm[i], perm[j]);
        }
        if (eng.stat(&perm) >= obs) ++at_least;
    }
    TestReport rep;
    rep.test_name = "dcov_perm";
    rep.statistic = obs;
    rep.n = n;
    rep.alpha = alpha;
    rep.p_value = static_cast<double>(1 + at_least) /
                  static_cast<double>(permutations + 1);
    rep.reject = rep.p_value <= alpha;
    rep.config["permutations"] = std::to_string(permutations);
    return rep;
}

// Unbiased sample variance.
inline double sample_variance(const std::vector<double>& xs) {
    require(xs.size() >= 2, "sample_variance: need at least two values");
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (const double x : xs) mean += x;
    mean /= n;
    double acc = 0.0;
    for (const double x : xs) acc += (x - mean) * (x - mean);
    return acc / (n - 1.0);
}

} // namespace sechlab

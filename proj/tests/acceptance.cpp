// Acceptance gate for the verification lab. Each numbered criterion prints
// exactly one PASS/FAIL line; the process exits nonzero if any criterion
// fails. Criterion 10 exercises the installed CLI binary, whose path is
// argv[1]; everything else runs in-process.

#include <sechlab/sechlab.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace sechlab;

namespace {

int g_failures = 0;

void verdict(int id, bool pass, const std::string& title, const std::string& detail) {
    std::printf("criterion %02d %s  %s (%s)\n", id, pass ? "PASS" : "FAIL",
                title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void note(const std::string& text) {
    std::printf("             note: %s\n", text.c_str());
    std::fflush(stdout);
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

ExperimentConfig make_config(ExperimentKind kind, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.experiment = kind;
    cfg.seed = seed;
    return cfg;
}

std::size_t count_p_above(const ExperimentReport& rep, double threshold) {
    std::size_t c = 0;
    for (const auto& t : rep.trials)
        if (t.p_value > threshold) ++c;
    return c;
}

std::vector<double> trial_stats(const ExperimentReport& rep) {
    std::vector<double> v;
    for (const auto& t : rep.trials) v.push_back(t.statistic);
    return v;
}

// --- criteria ------------------------------------------------------------

void criterion_1_mixture_identity() {
    const CharFn f = make_char_fn(DistKind::sech);
    double sup = 0.0;
    const std::size_t nodes = (std::size_t{1} << 12) + 1;
    for (std::size_t k = 0; k < nodes; ++k) {
        const double t = 8.0 * static_cast<double>(k) / static_cast<double>(nodes - 1);
        sup = std::max(sup, std::fabs(residual_polya(f, t)));
    }
    verdict(1, sup < 1e-12, "mixture identity residual on [0,8]",
            "sup=" + sci(sup) + ", limit 1e-12");
}

void criterion_2_factorization_identity() {
    const CharFn f = make_char_fn(DistKind::sech);
    double sup = 0.0;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j)
            sup = std::max(sup,
                           std::fabs(factorization_residual(f, 0.04 * i, 0.04 * j)));
    bool diag_exact = true;
    for (int i = 0; i <= 100; ++i) {
        const double s = 0.04 * i;
        if (diag_residual(f, s) != factorization_residual(f, s, s)) diag_exact = false;
    }
    verdict(2, sup < 1e-12 && diag_exact, "joint factorization residual on [0,4]^2",
            "sup=" + sci(sup) + ", diagonal bitwise equal: " +
                (diag_exact ? "yes" : "no"));
}

void criterion_3_control_residual_oracles() {
    // Frozen reference values from 50-digit evaluation of the closed forms.
    const double rn = residual_polya(make_char_fn(DistKind::normal), 2.0);
    const double fr = factorization_residual(make_char_fn(DistKind::normal), 2.0, 2.0);
    const double rl = residual_polya(make_char_fn(DistKind::laplace), 2.0);
    const bool ok = std::fabs(rn - (-0.0734979715330404404)) < 1e-6 &&
                    std::fabs(fr - (-0.0252956894089526724)) < 1e-6 &&
                    std::fabs(rl - 0.05) < 1e-6;
    verdict(3, ok, "control residuals match high-precision oracles",
            "normal mix=" + sci(rn) + ", normal joint=" + sci(fr) +
                ", laplace mix=" + sci(rl) + ", each within 1e-6");
}

void criterion_4_doubling_solver() {
    double prev = 1e9;
    bool monotone = true;
    double final_sup = 1e9;
    std::string sups;
    for (int depth : {15, 20, 25, 30}) {
        const GridFn g = solve_doubling(kPi / 2.0, 4.0, depth, 12);
        double sup = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
            sup = std::max(sup, std::fabs(g.values[k] - sech_cf(g.node(k))));
        if (sup >= prev) monotone = false;
        prev = sup;
        final_sup = sup;
        if (!sups.empty()) sups += " > ";
        sups += sci(sup);
    }
    verdict(4, final_sup <= 1e-6 && monotone, "doubling solver reconstruction",
            "sup at depth 30 = " + sci(final_sup) + " (<= 1e-6), depth sweep " + sups);
}

void criterion_5_index_distribution() {
    bool ok = true;
    std::string why;

    IndexDistribution d2(2, 1e-9);
    for (std::size_t k = 0; k < d2.probs().size(); ++k) {
        if (std::fabs(d2.probs()[k] - std::ldexp(1.0, -(static_cast<int>(k) + 1))) >
            1e-12) {
            ok = false;
            why = "n=2 entry " + std::to_string(k);
        }
    }
    IndexDistribution d3(3, 1e-9);
    const double first3[3] = {0.25, 0.1875, 0.140625};
    for (std::size_t k = 0; k < 3; ++k) {
        if (std::fabs(d3.probs()[k] - first3[k]) > 1e-12) {
            ok = false;
            why = "n=3 entry " + std::to_string(k);
        }
    }
    double worst_mean = 0.0;
    for (int n = 1; n <= 20; ++n) {
        if (cheb_T_prime_at_1(n) != static_cast<std::int64_t>(n) * n) {
            ok = false;
            why = "exact mean at n=" + std::to_string(n);
        }
        IndexDistribution d(n, 1e-12);
        long double mean = 0.0L;
        for (std::size_t k = 0; k < d.probs().size(); ++k)
            mean += static_cast<long double>(d.support()[k]) *
                    static_cast<long double>(d.probs()[k]);
        const double rel = std::fabs(static_cast<double>(mean) - n * n) /
                           (static_cast<double>(n) * n);
        worst_mean = std::max(worst_mean, rel);
        if (rel > 1e-9) {
            ok = false;
            why = "pmf mean at n=" + std::to_string(n);
        }
    }
    double floor = 0.0;
    for (int n = 1; n <= 50; ++n) {
        IndexDistribution d(n, 1e-9);
        floor = std::min(floor, d.coeff_floor());
    }
    if (floor < -1e-14) {
        ok = false;
        why = "coefficient floor";
    }
    verdict(5, ok, "index pmf values, means, nonnegativity",
            ok ? "geometric laws exact, worst mean rel err " + sci(worst_mean) +
                     ", coeff floor " + sci(floor)
               : ("first failure: " + why));
}

void criterion_6_mixture_monte_carlo() {
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentConfig cfg = make_config(ExperimentKind::theorem1, 42);
    cfg.n_samples = 100000;
    cfg.trials = 20;

    ExperimentReport sech_rep = run_theorem1(cfg);
    const std::size_t sech_pass = count_p_above(sech_rep, 0.01);

    cfg.dist = DistKind::normal;
    ExperimentReport norm_rep = run_theorem1(cfg);
    std::size_t norm_low = 0;
    for (const auto& t : norm_rep.trials)
        if (t.p_value < 1e-3) ++norm_low;

    cfg.dist = DistKind::laplace;
    ExperimentReport lap_rep = run_theorem1(cfg);
    std::size_t lap_low = 0;
    for (const auto& t : lap_rep.trials)
        if (t.p_value < 1e-3) ++lap_low;

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = sech_pass >= 17 && norm_low >= 19 && lap_low >= 19 && secs <= 60.0;
    verdict(6, ok, "mixture distributional Monte Carlo",
            "sech p>0.01 in " + std::to_string(sech_pass) + "/20, normal p<1e-3 in " +
                std::to_string(norm_low) + "/20, laplace in " + std::to_string(lap_low) +
                "/20, " + sci(secs) + " s");
}

void criterion_7_independence_monte_carlo() {
    // Level under the sech law at the published sample size.
    ExperimentConfig cfg = make_config(ExperimentKind::theorem2, 42);
    cfg.n_samples = 2000;
    cfg.trials = 20;
    cfg.permutations = 200;
    cfg.alpha = 0.05;
    ExperimentReport level = run_theorem2(cfg);
    const double level_rate = level.aggregates.at("reject_rate");

    // Power against the normal law at the pilot-calibrated sample size.
    // Pilot (seeds 1/42/777, 20 trials, 200 permutations): power 0.60 at
    // n=4000, 0.95 at 6000, and 1.00/0.95/1.00 at 8000, so N* = 8000.
    const std::size_t n_star = 8000;
    cfg.dist = DistKind::normal;
    cfg.n_samples = n_star;
    ExperimentReport power = run_theorem2(cfg);
    const double power_rate = power.aggregates.at("reject_rate");

    const bool ok = level_rate <= 0.10 && n_star <= 50000 && power_rate >= 0.8;
    verdict(7, ok, "form independence Monte Carlo",
            "sech rejection rate " + sci(level_rate) + " (<= 0.10), normal power " +
                sci(power_rate) + " at N*=" + std::to_string(n_star));
}

void criterion_8_random_sum_limit() {
    // Clause 1: coin base at m = 1e5 must pass the KS limit check in >= 14/20
    // trials. The coin sum at n = 64 lives on the lattice (2/64)Z with
    // largest atom about 0.016, so the empirical cdf sits half an atom away
    // from the continuous limit: D >= 0.008 for every trial, while the 1%
    // KS cutoff at m = 1e5 is 1.63/sqrt(m) = 0.0052. The clause therefore
    // fails for structural reasons; it is reported honestly below, with a
    // continuous-base diagnostic showing the limit itself is fine.
    ExperimentConfig cfg = make_config(ExperimentKind::random_sum, 42);
    cfg.n_param = 64;
    cfg.base = BaseKind::coin;
    cfg.m = 100000;
    cfg.trials = 20;
    ExperimentReport coin64 = run_random_sum(cfg);
    const std::size_t coin_pass = count_p_above(coin64, 0.01);
    const double coin_median_d = detail::median(trial_stats(coin64));

    // Clause 2: median KS statistic non-increasing over n_param {4,16,64}.
    cfg.n_param = 4;
    ExperimentReport coin4 = run_random_sum(cfg);
    cfg.n_param = 16;
    ExperimentReport coin16 = run_random_sum(cfg);
    const double d4 = detail::median(trial_stats(coin4));
    const double d16 = detail::median(trial_stats(coin16));
    const bool trend_ok = d4 >= d16 && d16 >= coin_median_d;

    // Clause 3: the diverging normalization reports variance ratio near n.
    cfg.n_param = 64;
    cfg.normalization = Normalization::inv_sqrt_n;
    cfg.m = 20000;
    cfg.trials = 10;
    ExperimentReport div = run_random_sum(cfg);
    const double ratio = div.aggregates.at("variance_ratio_median");
    const bool ratio_ok = ratio >= 32.0 && ratio <= 128.0;

    // Diagnostic only: a continuous base at the same order converges.
    ExperimentConfig diag = make_config(ExperimentKind::random_sum, 42);
    diag.n_param = 64;
    diag.base = BaseKind::normal;
    diag.m = 20000;
    diag.trials = 10;
    ExperimentReport normal64 = run_random_sum(diag);
    const std::size_t normal_pass = count_p_above(normal64, 0.01);

    const bool coin_ok = coin_pass >= 14;
    verdict(8, coin_ok && trend_ok && ratio_ok, "random-index sum limit",
            "coin KS pass " + std::to_string(coin_pass) +
                "/20 (need 14), median D trend " + sci(d4) + " >= " + sci(d16) +
                " >= " + sci(coin_median_d) + (trend_ok ? " ok" : " BROKEN") +
                ", variance ratio " + sci(ratio) + " in [32,128] " +
                (ratio_ok ? "ok" : "BROKEN"));
    if (!coin_ok) {
        note("coin clause: every trial's D is pinned near half the largest lattice "
             "atom, about " + sci(coin_median_d) +
             ", above the 1% KS cutoff 0.00515 at m=1e5; no seed can pass");
        note("continuous-base control: normal base at m=2e4 passes KS (p>0.01) in " +
             std::to_string(normal_pass) + "/10 trials, so the distributional "
             "limit itself holds; the failure is discreteness, not convergence");
    }
}

void criterion_9_sampler_fidelity() {
    RngStream rng(42);
    const std::size_t n = 1000000;
    std::vector<double> xs;
    xs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) xs.push_back(sech_draw(rng));
    const double var = sample_variance(xs);
    const double target = kPi * kPi / 4.0;
    const bool var_ok = std::fabs(var - target) / target <= 0.03;

    bool ecf_ok = true;
    std::string worst;
    for (double t : {0.5, 1.0, 2.0}) {
        const double est = ecf(xs, t);
        const double diff = std::fabs(est - sech_cf(t));
        if (diff > 3.0 / std::sqrt(static_cast<double>(n))) ecf_ok = false;
        if (worst.empty() || diff > std::stod(worst)) worst = sci(diff);
    }
    verdict(9, var_ok && ecf_ok, "sampler fidelity at one million draws",
            "variance " + sci(var) + " vs " + sci(target) + " (3% band), worst ecf gap " +
                worst + " (band " + sci(3.0 / std::sqrt(static_cast<double>(n))) + ")");
}

int run_cli(const std::string& bin, const std::string& args) {
    const std::string cmd = "\"" + bin + "\" " + args + " >/dev/null 2>&1";
    const int ret = std::system(cmd.c_str());
    if (ret == -1) return -1;
    return (ret >> 8) & 0xff;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_10_determinism(const std::string& bin) {
    struct Job {
        std::string args;
        std::string out1, out8;
    };
    std::vector<Job> jobs = {
        {"theorem1 --seed 42 --n 5000 --trials 8 --format json",
         "/tmp/sechlab_acc_a1.json", "/tmp/sechlab_acc_a8.json"},
        {"random-sum --seed 11 --n-param 8 --base uniform --m 2000 --trials 6 "
         "--format csv",
         "/tmp/sechlab_acc_b1.csv", "/tmp/sechlab_acc_b8.csv"},
    };
    bool ok = true;
    std::string why = "1-thread and 8-thread report files byte-identical; reruns too";
    for (const auto& j : jobs) {
        const int c1 = run_cli(bin, j.args + " --threads 1 --out " + j.out1);
        const int c8 = run_cli(bin, j.args + " --threads 8 --out " + j.out8);
        if (c1 < 0 || c8 < 0 || c1 != c8) {
            ok = false;
            why = "exit codes differ for: " + j.args;
            break;
        }
        const std::string b1 = slurp(j.out1);
        if (b1.empty() || b1 != slurp(j.out8)) {
            ok = false;
            why = "thread counts changed bytes for: " + j.args;
            break;
        }
        // run-to-run stability with the same flags
        const int c1b = run_cli(bin, j.args + " --threads 1 --out " + j.out8);
        if (c1b != c1 || b1 != slurp(j.out8)) {
            ok = false;
            why = "rerun changed bytes for: " + j.args;
            break;
        }
    }
    verdict(10, ok, "byte-identical reports across threads and reruns", why);
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-cli-binary>\n");
        return 2;
    }
    criterion_1_mixture_identity();
    criterion_2_factorization_identity();
    criterion_3_control_residual_oracles();
    criterion_4_doubling_solver();
    criterion_5_index_distribution();
    criterion_6_mixture_monte_carlo();
    criterion_7_independence_monte_carlo();
    criterion_8_random_sum_limit();
    criterion_9_sampler_fidelity();
    criterion_10_determinism(argv[1]);

    if (g_failures) {
        std::printf("%d of 10 criteria failed\n", g_failures);
        return 1;
    }
    std::printf("all 10 criteria passed\n");
    return 0;
}

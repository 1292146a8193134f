#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <memory>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "corrbias/config.hpp"
#include "corrbias/density.hpp"
#include "corrbias/errors.hpp"
#include "corrbias/estimators.hpp"
#include "corrbias/normal.hpp"

namespace corrbias {

/// Trial plan for the sampling harness. Every trial draws n pairs from the
/// bivariate normal with the given moments; each trial's stream is derived
/// from (seed, trial index), so results are reproducible under any degree
/// of parallelism.
struct MCConfig {
  long long trials;
  int n;
  double mu1 = 0.0, mu2 = 0.0;
  double sigma1 = 1.0, sigma2 = 1.0;
  double rho;
  std::uint64_t seed = 0;

  void validate() const {
    if (trials < 1) throw DomainError("MCConfig: require trials >= 1");
    if (n < 3) throw DomainError("MCConfig: require integer n >= 3");
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
      throw DomainError("MCConfig: require positive sigmas");
    if (!std::isfinite(mu1) || !std::isfinite(mu2))
      throw DomainError("MCConfig: means must be finite");
    if (!(std::fabs(rho) < 1.0))
      throw DomainError("MCConfig: require -1 < rho < 1");
  }
};

/// Point estimate with a +-3-sigma half-width.
struct MCReport {
  double estimate;
  double half_width;
  long long trials;
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// SplitMix64 stream; the per-trial start state is a mix of (seed, trial).
struct SplitMix {
  std::uint64_t state;

  static SplitMix for_trial(std::uint64_t seed, std::uint64_t trial) {
    return SplitMix{mix64(mix64(seed) ^ mix64(trial + kGolden))};
  }
  std::uint64_t next() {
    state += kGolden;
    return mix64(state);
  }
  double uniform01() {  // strictly inside (0,1)
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal() { return normal_quantile(uniform01()); }
};

/// Runs fn(block_index) over ceil(total/block) blocks on the given number
/// of threads (0 = hardware). Blocks are independent and indexed, so any
/// combination done per-block and merged in index order is deterministic.
template <class Fn>
void run_blocks(long long blocks, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<long long>(threads, std::max<long long>(blocks, 1)));
  if (threads <= 1) {
    for (long long b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::atomic<long long> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (long long b = next.fetch_add(1); b < blocks;
             b = next.fetch_add(1))
          fn(b);
      } catch (...) {
        errors[w] = std::current_exception();
        next.store(blocks);  // drain remaining work
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline constexpr long long kTrialBlock = 1024;

/// Monotone piecewise-linear tabulation of r_hat -> transform_apply on
/// Chebyshev-extrema nodes (clustered at +-1 where the quantile map is
/// steepest). Only used on the Monte Carlo hot path; interpolation error
/// is orders of magnitude below the binomial half-width it feeds.
class TransformTable {
 public:
  TransformTable(const EstimatorTransform& t, const NumericConfig& cfg,
                 unsigned threads, int nodes = 1025) {
    x_.resize(nodes);
    y_.resize(nodes);
    // exact endpoints; interior nodes stay 1e-3 away from +-1, where the
    // quantile solve would push the series ratio |2 rho r| -> 2. The map is
    // boundary-fixed and Lipschitz there, so the first segment's linear
    // interpolation error is ~1e-6 and only reachable with r_hat within
    // 1e-3 of +-1, far outside the statistically relevant range.
    for (int j = 0; j < nodes; ++j)
      x_[j] = -(1.0 - 1e-3) * std::cos(std::numbers::pi * j / (nodes - 1));
    x_.front() = -1.0;
    x_.back() = 1.0;
    const long long blocks = (nodes + 63) / 64;
    run_blocks(blocks, threads, [&](long long b) {
      const int lo = static_cast<int>(b) * 64;
      const int hi = std::min(nodes, lo + 64);
      for (int j = lo; j < hi; ++j) y_[j] = transform_apply(t, x_[j], cfg);
    });
  }

  double operator()(double r) const {
    if (r <= x_.front()) return y_.front();
    if (r >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const double w = (r - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return y_[i - 1] + w * (y_[i] - y_[i - 1]);
  }

 private:
  std::vector<double> x_, y_;
};

}  // namespace detail

/// One seeded draw of n pairs: x = mu1 + sigma1 z1,
/// y = mu2 + sigma2 (rho z1 + sqrt(1-rho^2) z2).
inline BivariateSample sample_bivariate(const MCConfig& cfg,
                                        std::uint64_t trial = 0) {
  cfg.validate();
  auto rng = detail::SplitMix::for_trial(cfg.seed, trial);
  const double mix = std::sqrt(1.0 - cfg.rho * cfg.rho);
  Eigen::ArrayX2d xy(cfg.n, 2);
  for (int i = 0; i < cfg.n; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    xy(i, 0) = cfg.mu1 + cfg.sigma1 * z1;
    xy(i, 1) = cfg.mu2 + cfg.sigma2 * (cfg.rho * z1 + mix * z2);
  }
  return BivariateSample{std::move(xy)};
}

namespace detail {

/// r_hat of trial `t` under cfg; shared by all harness entry points.
inline double trial_pearson_r(const MCConfig& cfg, std::uint64_t t) {
  auto rng = SplitMix::for_trial(cfg.seed, t);
  const double mix = std::sqrt(1.0 - cfg.rho * cfg.rho);
  Eigen::ArrayXd xs(cfg.n), ys(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    xs[i] = cfg.mu1 + cfg.sigma1 * z1;
    ys[i] = cfg.mu2 + cfg.sigma2 * (cfg.rho * z1 + mix * z2);
  }
  return pearson_r(xs, ys);
}

}  // namespace detail

/// Fraction of trials with transform_apply(t, r_hat) strictly below rho,
/// with a 3-sigma binomial half-width. Deterministic for fixed (seed, cfg)
/// at any thread count.
inline MCReport empirical_underestimation(const EstimatorTransform& t,
                                          const MCConfig& cfg,
                                          const NumericConfig& numcfg = {},
                                          unsigned threads = 0) {
  cfg.validate();
  validate_transform(t);

  const bool tabulated = std::holds_alternative<QuantileBias>(t);
  const detail::TransformTable* table = nullptr;
  std::unique_ptr<detail::TransformTable> storage;
  if (tabulated) {
    storage = std::make_unique<detail::TransformTable>(t, numcfg, threads);
    table = storage.get();
  }

  const long long blocks =
      (cfg.trials + detail::kTrialBlock - 1) / detail::kTrialBlock;
  std::vector<long long> counts(static_cast<std::size_t>(blocks), 0);
  detail::run_blocks(blocks, threads, [&](long long b) {
    const long long lo = b * detail::kTrialBlock;
    const long long hi = std::min(cfg.trials, lo + detail::kTrialBlock);
    long long cnt = 0;
    for (long long trial = lo; trial < hi; ++trial) {
      try {
        const double r = detail::trial_pearson_r(cfg, trial);
        const double rt =
            table ? (*table)(r) : transform_apply(t, r, numcfg);
        if (rt < cfg.rho) ++cnt;
      } catch (const ConvergenceError& e) {
        throw ConvergenceError("trial " + std::to_string(trial) + ": " +
                                   e.what(),
                               e.partial(), e.tail_bound(), e.iterations());
      } catch (const std::exception& e) {
        throw DomainError("trial " + std::to_string(trial) + ": " + e.what());
      }
    }
    counts[static_cast<std::size_t>(b)] = cnt;
  });

  long long hits = 0;
  for (long long c : counts) hits += c;
  const double p = static_cast<double>(hits) / static_cast<double>(cfg.trials);
  const double hw =
      3.0 * std::sqrt(std::max(p * (1.0 - p), 0.0) /
                      static_cast<double>(cfg.trials));
  return {p, hw, cfg.trials};
}

/// Sample mean of r_hat across trials with a 3-standard-error half-width.
inline MCReport empirical_mean_r(const MCConfig& cfg,
                                 const NumericConfig& numcfg = {},
                                 unsigned threads = 0) {
  (void)numcfg;
  cfg.validate();
  const long long blocks =
      (cfg.trials + detail::kTrialBlock - 1) / detail::kTrialBlock;
  std::vector<double> sums(static_cast<std::size_t>(blocks), 0.0);
  std::vector<double> sqsums(static_cast<std::size_t>(blocks), 0.0);
  detail::run_blocks(blocks, threads, [&](long long b) {
    const long long lo = b * detail::kTrialBlock;
    const long long hi = std::min(cfg.trials, lo + detail::kTrialBlock);
    double s = 0, s2 = 0;
    for (long long trial = lo; trial < hi; ++trial) {
      const double r = detail::trial_pearson_r(cfg, trial);
      s += r;
      s2 += r * r;
    }
    sums[static_cast<std::size_t>(b)] = s;
    sqsums[static_cast<std::size_t>(b)] = s2;
  });

  double total = 0, total2 = 0;
  for (std::size_t b = 0; b < sums.size(); ++b) {
    total += sums[b];
    total2 += sqsums[b];
  }
  const double m = total / static_cast<double>(cfg.trials);
  const double var =
      cfg.trials > 1
          ? std::max(0.0, (total2 - m * total) /
                              static_cast<double>(cfg.trials - 1))
          : 0.0;
  const double hw = 3.0 * std::sqrt(var / static_cast<double>(cfg.trials));
  return {m, hw, cfg.trials};
}

/// One-sample Kolmogorov-Smirnov statistic of the empirical r_hat
/// distribution against the analytic CDF at (n, rho).
inline double ks_statistic(const MCConfig& cfg,
                           const NumericConfig& numcfg = {},
                           unsigned threads = 0) {
  cfg.validate();
  const long long N = cfg.trials;
  std::vector<double> rs(static_cast<std::size_t>(N));
  const long long blocks = (N + detail::kTrialBlock - 1) / detail::kTrialBlock;
  detail::run_blocks(blocks, threads, [&](long long b) {
    const long long lo = b * detail::kTrialBlock;
    const long long hi = std::min(N, lo + detail::kTrialBlock);
    for (long long trial = lo; trial < hi; ++trial)
      rs[static_cast<std::size_t>(trial)] = detail::trial_pearson_r(cfg, trial);
  });
  std::sort(rs.begin(), rs.end());

  std::vector<double> Fs(static_cast<std::size_t>(N));
  detail::run_blocks(blocks, threads, [&](long long b) {
    const DensityEvaluator ev({static_cast<double>(cfg.n), cfg.rho}, numcfg);
    const long long lo = b * detail::kTrialBlock;
    const long long hi = std::min(N, lo + detail::kTrialBlock);
    for (long long i = lo; i < hi; ++i)
      Fs[static_cast<std::size_t>(i)] = ev.cdf(rs[static_cast<std::size_t>(i)]);
  });

  double d = 0.0;
  const double dn = static_cast<double>(N);
  for (long long i = 0; i < N; ++i) {
    const double F = Fs[static_cast<std::size_t>(i)];
    d = std::max(d, std::max(F - static_cast<double>(i) / dn,
                             static_cast<double>(i + 1) / dn - F));
  }
  return d;
}

}  // namespace corrbias

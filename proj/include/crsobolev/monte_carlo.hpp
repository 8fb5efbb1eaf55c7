#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "crsobolev/errors.hpp"
#include "crsobolev/random.hpp"

namespace crsobolev {

/// Monte Carlo configuration shared by every estimator.
struct McConfig {
  std::int64_t samples = 200000;
  std::uint64_t seed = 1;
  /// Number of batches. Each batch owns the stream (seed, batch index) and
  /// the standard error is computed from the spread of batch means.
  int chunk = 32;
  /// Concentration exponent beta of the near-diagonal pair proposal.
  /// Unset means the default Q - 1.
  std::optional<double> importance_exponent;
  /// Pairs closer than this CR distance are skipped and replaced by an
  /// analytic tail bound; 0 disables the cutoff.
  double diagonal_cutoff = 0.0;
  /// Worker threads; 0 means hardware concurrency.
  int threads = 1;

  double beta(int q_dim) const { return importance_exponent.value_or(q_dim - 1.0); }

  void validate(int q_dim) const {
    if (samples < 1) throw ArgumentError("McConfig: samples must be >= 1");
    if (chunk < 2) throw ArgumentError("McConfig: chunk must be >= 2 for batch-means errors");
    if (chunk > samples) throw ArgumentError("McConfig: chunk exceeds sample count");
    const double b = beta(q_dim);
    if (!(b >= 0.0 && b < q_dim)) throw ArgumentError("McConfig: importance_exponent must lie in [0, Q)");
    if (!(diagonal_cutoff >= 0.0)) throw ArgumentError("McConfig: diagonal_cutoff must be >= 0");
  }
};

/// Result of a Monte Carlo (or deterministic) estimate.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  /// Analytic bound on near-diagonal mass excluded by the cutoff.
  double tail_bound = 0.0;
};

/// Standard error of the difference of two independent estimates.
inline double combined_se(const Estimate& a, const Estimate& b) {
  return std::hypot(a.std_error, b.std_error);
}

inline bool agree_within(const Estimate& a, const Estimate& b, double k_sigma) {
  return std::abs(a.value - b.value) <= k_sigma * combined_se(a, b);
}

/// Per-batch sums of a vector-valued sample. Row b holds the sums of batch b.
class BatchTable {
 public:
  BatchTable(int batches, std::size_t components)
      : components_(components),
        counts_(static_cast<std::size_t>(batches), 0),
        sums_(static_cast<std::size_t>(batches) * components, 0.0) {}

  int batches() const { return static_cast<int>(counts_.size()); }
  std::size_t components() const { return components_; }
  std::int64_t count(int b) const { return counts_[static_cast<std::size_t>(b)]; }

  std::int64_t total_count() const {
    std::int64_t total = 0;
    for (auto c : counts_) total += c;
    return total;
  }

  std::span<double> row(int b) {
    return {sums_.data() + static_cast<std::size_t>(b) * components_, components_};
  }
  std::span<const double> row(int b) const {
    return {sums_.data() + static_cast<std::size_t>(b) * components_, components_};
  }
  void set_count(int b, std::int64_t c) { counts_[static_cast<std::size_t>(b)] = c; }

  /// Mean of component k over all samples.
  double mean(std::size_t k) const {
    double s = 0.0;
    for (int b = 0; b < batches(); ++b) s += row(b)[k];
    return s / static_cast<double>(total_count());
  }

  /// Means of every component over all samples.
  std::vector<double> means() const {
    std::vector<double> out(components_);
    for (std::size_t k = 0; k < components_; ++k) out[k] = mean(k);
    return out;
  }

  /// Means of every component within batch b.
  std::vector<double> batch_means(int b) const {
    std::vector<double> out(components_);
    const auto r = row(b);
    const double c = static_cast<double>(count(b));
    for (std::size_t k = 0; k < components_; ++k) out[k] = r[k] / c;
    return out;
  }

  /// Estimate of f(component means). The value uses all samples; the error is
  /// the batch-means standard error of f evaluated per batch.
  Estimate transform(const std::function<double(std::span<const double>)>& f) const {
    const auto all = means();
    Estimate e;
    e.value = f(all);
    e.samples = total_count();
    const int nb = batches();
    std::vector<double> per(static_cast<std::size_t>(nb));
    double avg = 0.0;
    for (int b = 0; b < nb; ++b) {
      per[static_cast<std::size_t>(b)] = f(batch_means(b));
      avg += per[static_cast<std::size_t>(b)];
    }
    avg /= nb;
    double ss = 0.0;
    for (double v : per) ss += (v - avg) * (v - avg);
    e.std_error = std::sqrt(ss / (nb - 1) / nb);
    if (!std::isfinite(e.std_error)) e.std_error = 0.0;
    return e;
  }

  /// Estimate of scale * mean of component k.
  Estimate component(std::size_t k, double scale = 1.0) const {
    return transform([k, scale](std::span<const double> m) { return scale * m[k]; });
  }

 private:
  std::size_t components_;
  std::vector<std::int64_t> counts_;
  std::vector<double> sums_;
};

/// Side-by-side join of two tables drawn from the same batch streams, so
/// that functions of both share one batch-means error.
inline BatchTable concat(const BatchTable& a, const BatchTable& b) {
  if (a.batches() != b.batches()) throw ArgumentError("concat: batch counts differ");
  BatchTable out(a.batches(), a.components() + b.components());
  for (int k = 0; k < a.batches(); ++k) {
    if (a.count(k) != b.count(k)) throw ArgumentError("concat: batch sizes differ");
    out.set_count(k, a.count(k));
    auto r = out.row(k);
    std::copy(a.row(k).begin(), a.row(k).end(), r.begin());
    std::copy(b.row(k).begin(), b.row(k).end(), r.begin() + static_cast<std::ptrdiff_t>(a.components()));
  }
  return out;
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs `cfg.samples` draws split across `cfg.chunk` batches. `draw(stream, out)`
/// adds one sample's contributions into `out` (length `components`). Batches
/// are distributed over worker threads; the result does not depend on the
/// thread count.
template <class Draw>
BatchTable run_batches(const McConfig& cfg, std::uint64_t seed, std::size_t components, Draw&& draw) {
  BatchTable table(cfg.chunk, components);
  const std::int64_t per = cfg.samples / cfg.chunk;
  const std::int64_t extra = cfg.samples % cfg.chunk;

  auto run_batch = [&](int b) {
    const std::int64_t count = per + (b < extra ? 1 : 0);
    Stream stream(seed, static_cast<std::uint64_t>(b));
    std::vector<double> acc(components, 0.0);
    std::vector<double> sample(components, 0.0);
    for (std::int64_t i = 0; i < count; ++i) {
      std::fill(sample.begin(), sample.end(), 0.0);
      draw(stream, std::span<double>(sample));
      for (std::size_t k = 0; k < components; ++k) acc[k] += sample[k];
    }
    auto row = table.row(b);
    std::copy(acc.begin(), acc.end(), row.begin());
    table.set_count(b, count);
  };

  const int workers = std::min(resolve_threads(cfg.threads), cfg.chunk);
  if (workers <= 1) {
    for (int b = 0; b < cfg.chunk; ++b) run_batch(b);
    return table;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int b = w; b < cfg.chunk; b += workers) run_batch(b);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return table;
}

}  // namespace crsobolev

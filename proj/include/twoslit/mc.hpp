// Copyright 2026 The twoslit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file mc.hpp
 * Batched trials, frequency summaries and comparison with exact distributions.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "random.hpp"
#include "scenarios.hpp"

namespace twoslit {

/// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;
/// Statistical checks pass within this many standard errors.
inline constexpr double kSigmaThreshold = 5.0;

/// Wilson score interval half-width for `count` successes out of `total`.
inline double wilson_halfwidth(std::int64_t count, std::int64_t total, double z = kZ95) {
  if (total <= 0) {
    return 0.0;
  }
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(count) / n;
  const double z2 = z * z;
  return z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

struct StatSummary {
  std::map<std::string, std::int64_t> counts;
  std::int64_t total = 0;
  std::map<std::string, double> freqs;
  std::map<std::string, double> ci_halfwidth;

  static StatSummary from_counts(std::map<std::string, std::int64_t> counts) {
    StatSummary s;
    s.counts = std::move(counts);
    for (const auto &[label, c] : s.counts) {
      s.total += c;
    }
    for (const auto &[label, c] : s.counts) {
      s.freqs[label] = static_cast<double>(c) / static_cast<double>(s.total);
      s.ci_halfwidth[label] = wilson_halfwidth(c, s.total);
    }
    return s;
  }

  [[nodiscard]] std::int64_t count(const std::string &label) const {
    auto it = counts.find(label);
    return it == counts.end() ? 0 : it->second;
  }

  [[nodiscard]] double freq(const std::string &label) const {
    return total == 0 ? 0.0 : static_cast<double>(count(label)) / static_cast<double>(total);
  }

  friend bool operator==(const StatSummary &, const StatSummary &) = default;
};

/// Runs trials [0, trials) with per-trial streams derived from `master_seed`.
/// Counts do not depend on `threads`; 0 means hardware concurrency.
inline StatSummary run_many(const Scenario &s, std::int64_t trials, std::uint64_t master_seed,
                            unsigned threads = 0) {
  if (trials < 1) {
    throw ScenarioError("trials must be >= 1");
  }
  const TrialRunner runner(s);
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, trials));

  std::vector<std::map<std::string, std::int64_t>> partial(threads);
  auto work = [&](unsigned worker) {
    const std::int64_t begin = trials * worker / threads;
    const std::int64_t end = trials * (worker + 1) / threads;
    auto &counts = partial[worker];
    for (std::int64_t i = begin; i < end; ++i) {
      auto rng = derive_stream(master_seed, static_cast<std::uint64_t>(i));
      ++counts[flatten_key(key_of(runner(rng)))];
    }
  };

  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back(work, w);
    }
    for (auto &t : pool) {
      t.join();
    }
  }

  std::map<std::string, std::int64_t> merged;
  for (const auto &counts : partial) {
    for (const auto &[label, c] : counts) {
      merged[label] += c;
    }
  }
  return StatSummary::from_counts(std::move(merged));
}

struct OracleCell {
  std::string label;
  double exact = 0.0;
  double freq = 0.0;
  std::int64_t count = 0;
  /// (freq - p) / sqrt(p (1 - p) / N); zero for degenerate cells.
  double z = 0.0;
  bool degenerate = false;
  bool pass = true;
};

struct OracleReport {
  std::vector<OracleCell> cells;
  std::int64_t total = 0;

  [[nodiscard]] bool all_pass() const {
    return std::all_of(cells.begin(), cells.end(), [](const OracleCell &c) { return c.pass; });
  }
};

/// Per-cell z-scores against the exact distribution. Cells whose probability is
/// 0 or 1 (within 1e-12) pass only if the count is exactly 0 or N.
inline OracleReport compare_to_oracle(const StatSummary &summary, const Distribution &exact,
                                      double sigma = kSigmaThreshold) {
  for (const auto &[label, c] : summary.counts) {
    const bool known = std::any_of(exact.cells().begin(), exact.cells().end(),
                                   [&](const auto &cell) { return flatten_key(cell.key) == label; });
    if (!known) {
      throw LayoutError("observed outcome '" + label + "' is not in the exact distribution");
    }
  }
  OracleReport report;
  report.total = summary.total;
  const double n = static_cast<double>(summary.total);
  for (const auto &cell : exact.cells()) {
    OracleCell oc;
    oc.label = flatten_key(cell.key);
    oc.exact = cell.probability;
    oc.count = summary.count(oc.label);
    oc.freq = summary.freq(oc.label);
    if (oc.exact <= kStorageTol) {
      oc.degenerate = true;
      oc.pass = oc.count == 0;
    } else if (oc.exact >= 1.0 - kStorageTol) {
      oc.degenerate = true;
      oc.pass = oc.count == summary.total;
    } else {
      oc.z = (oc.freq - oc.exact) / std::sqrt(oc.exact * (1.0 - oc.exact) / n);
      oc.pass = std::abs(oc.z) <= sigma;
    }
    report.cells.push_back(std::move(oc));
  }
  return report;
}

} // namespace twoslit

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "roi_nbv/analysis.hpp"
#include "roi_nbv/error.hpp"

namespace roi_nbv {

namespace {

constexpr std::size_t kExactLimit = 12;

struct Ranked {
  std::vector<double> ranks;  // pooled order: a first, then b
  double tie_term = 0.0;      // sum of t^3 - t over tie groups
};

Ranked midranks(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() + b.size();
  std::vector<double> pooled;
  pooled.reserve(n);
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });

  Ranked out;
  out.ranks.assign(n, 0.0);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = rank;
    const double t = static_cast<double>(j - i + 1);
    out.tie_term += t * t * t - t;
    i = j + 1;
  }
  return out;
}

void check(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidInput("mann_whitney: both samples must be non-empty");
  for (double v : a)
    if (!std::isfinite(v)) throw InvalidInput("mann_whitney: non-finite sample");
  for (double v : b)
    if (!std::isfinite(v)) throw InvalidInput("mann_whitney: non-finite sample");
}

double u_statistic(const Ranked& r, std::size_t na) {
  const double rank_sum = std::accumulate(r.ranks.begin(), r.ranks.begin() + static_cast<long>(na), 0.0);
  return rank_sum - 0.5 * static_cast<double>(na) * static_cast<double>(na + 1);
}

}  // namespace

MannWhitneyResult mann_whitney_exact(std::span<const double> a, std::span<const double> b) {
  check(a, b);
  const std::size_t na = a.size();
  const std::size_t n = na + b.size();
  if (n > 24) throw InvalidInput("mann_whitney_exact: samples too large for enumeration");
  const Ranked r = midranks(a, b);

  MannWhitneyResult res;
  res.exact = true;
  res.u = u_statistic(r, na);
  const double null_mean = 0.5 * static_cast<double>(na) * static_cast<double>(b.size());
  if (res.u == null_mean) return res;

  // Enumerate every na-subset of the pooled ranks (lexicographic index
  // combinations) and count statistics at least as large as the observed one.
  const double offset = 0.5 * static_cast<double>(na) * static_cast<double>(na + 1);
  std::vector<std::size_t> idx(na);
  std::iota(idx.begin(), idx.end(), 0);
  std::size_t total = 0;
  std::size_t extreme = 0;
  const double eps = 1e-9;
  while (true) {
    double sum = 0.0;
    for (std::size_t i : idx) sum += r.ranks[i];
    ++total;
    if (sum - offset >= res.u - eps) ++extreme;

    std::size_t pos = na;
    while (pos > 0 && idx[pos - 1] == n - na + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t k = pos; k < na; ++k) idx[k] = idx[k - 1] + 1;
  }
  res.p_value = static_cast<double>(extreme) / static_cast<double>(total);
  return res;
}

MannWhitneyResult mann_whitney_normal(std::span<const double> a, std::span<const double> b) {
  check(a, b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;
  const Ranked r = midranks(a, b);

  MannWhitneyResult res;
  res.u = u_statistic(r, a.size());
  const double mean = 0.5 * na * nb;
  const double var = na * nb / 12.0 * ((n + 1.0) - r.tie_term / (n * (n - 1.0)));
  if (!(var > 0.0) || res.u == mean) return res;
  // Upper-tail continuity correction: P(U >= u) ~ P(Z > u - 0.5).
  const double z = (res.u - 0.5 - mean) / std::sqrt(var);
  res.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
  return res;
}

MannWhitneyResult mann_whitney_u_one_sided(std::span<const double> a, std::span<const double> b) {
  if (a.size() + b.size() <= kExactLimit) return mann_whitney_exact(a, b);
  return mann_whitney_normal(a, b);
}

SampleStats sample_stats(std::span<const double> values) {
  SampleStats s;
  s.n = values.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

}  // namespace roi_nbv

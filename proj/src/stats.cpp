#include "wtseq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wtseq/rng.hpp"

namespace wtseq::stats {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw DomainError("incomplete_beta: continued fraction did not converge");
}

void require_same_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("samples must have equal length");
  if (x.size() < 3) throw std::invalid_argument("correlation needs at least 3 observations");
}

TestResult correlation_test(double r, std::size_t n, const char* method) {
  const double df = static_cast<double>(n) - 2.0;
  TestResult t{0.0, 1.0, df, method};
  if (std::abs(r) >= 1.0) {
    t.statistic = std::copysign(std::numeric_limits<double>::infinity(), r);
    t.p = 0.0;
    return t;
  }
  t.statistic = r * std::sqrt(df / (1.0 - r * r));
  t.p = student_t_two_sided_p(t.statistic, df);
  return t;
}

double raw_pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The continued fraction converges fast for x < (a + 1) / (a + b + 2).
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  if (!(df > 0.0)) throw DomainError("student t: degrees of freedom must be positive");
  return std::clamp(incomplete_beta(0.5 * df, 0.5, df / (df + t * t)), 0.0, 1.0);
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("variance needs at least 2 observations");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  const double r = raw_pearson(x, y);
  if (std::isnan(r)) return {std::nullopt, {0.0, 1.0, static_cast<double>(x.size()) - 2.0, "pearson"}};
  return {r, correlation_test(r, x.size(), "pearson")};
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double r = raw_pearson(rx, ry);
  if (std::isnan(r)) return {std::nullopt, {0.0, 1.0, static_cast<double>(x.size()) - 2.0, "spearman"}};
  return {r, correlation_test(r, x.size(), "spearman")};
}

double spearman_permutation_p(std::span<const double> x, std::span<const double> y, int permutations,
                              std::uint64_t seed) {
  require_same_length(x, y);
  const auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  const double observed = raw_pearson(rx, ry);
  if (std::isnan(observed)) return 1.0;
  const double threshold = std::abs(observed) - 1e-12;
  if (x.size() <= 8) {
    std::vector<std::size_t> perm(ry.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> permuted(ry.size());
    std::uint64_t hits = 0, total = 0;
    do {
      for (std::size_t i = 0; i < perm.size(); ++i) permuted[i] = ry[perm[i]];
      if (std::abs(raw_pearson(rx, permuted)) >= threshold) ++hits;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
  }
  Rng rng(seed);
  std::uint64_t hits = 0;
  for (int p = 0; p < permutations; ++p) {
    for (std::size_t i = ry.size(); i > 1; --i) std::swap(ry[i - 1], ry[rng.below(i)]);
    if (std::abs(raw_pearson(rx, ry)) >= threshold) ++hits;
  }
  // add-one estimator keeps the Monte Carlo p strictly positive
  return (static_cast<double>(hits) + 1.0) / (permutations + 1.0);
}

TestResult ttest(std::span<const double> a, std::span<const double> b, TTestVariant variant, bool paired) {
  if (paired) {
    if (a.size() != b.size()) throw std::invalid_argument("paired t-test needs equal lengths");
    if (a.size() < 2) throw std::invalid_argument("t-test needs at least 2 observations per sample");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double md = mean(d), vd = variance(d);
    const double df = static_cast<double>(d.size()) - 1.0;
    TestResult res{0.0, 1.0, df, "paired t-test"};
    if (vd == 0.0) {
      res.statistic = md == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), md);
      res.p = md == 0.0 ? 1.0 : 0.0;
      return res;
    }
    res.statistic = md / std::sqrt(vd / static_cast<double>(d.size()));
    res.p = student_t_two_sided_p(res.statistic, df);
    return res;
  }
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("t-test needs at least 2 observations per sample");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b), va = variance(a), vb = variance(b);
  TestResult res;
  double se2 = 0.0;
  if (variant == TTestVariant::Student) {
    res.method = "student t-test";
    res.df = na + nb - 2.0;
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / res.df;
    se2 = pooled * (1.0 / na + 1.0 / nb);
  } else {
    res.method = "welch t-test";
    const double qa = va / na, qb = vb / nb;
    se2 = qa + qb;
    res.df = se2 > 0.0 ? se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0)) : na + nb - 2.0;
  }
  const double diff = ma - mb;
  if (se2 == 0.0) {
    res.statistic = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    res.p = diff == 0.0 ? 1.0 : 0.0;
    return res;
  }
  res.statistic = diff / std::sqrt(se2);
  res.p = student_t_two_sided_p(res.statistic, res.df);
  return res;
}

}  // namespace wtseq::stats

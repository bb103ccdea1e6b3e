#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wtseq::stats {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct TestResult {
  double statistic = 0.0;
  double p = 1.0;  // two-sided
  double df = 0.0;
  std::string method;
};

struct Correlation {
  std::optional<double> r;  // missing when either variable has zero variance
  TestResult test;
};

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability of Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Two-sided tail probability of the standard normal.
double normal_two_sided_p(double z);

double mean(std::span<const double> x);
/// Sample variance (divisor n - 1).
double variance(std::span<const double> x);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

Correlation pearson(std::span<const double> x, std::span<const double> y);
Correlation spearman(std::span<const double> x, std::span<const double> y);

/// Permutation p-value for Spearman's R: exact enumeration when n <= 8,
/// otherwise `permutations` seeded random relabelings.
double spearman_permutation_p(std::span<const double> x, std::span<const double> y,
                              int permutations = 10000, std::uint64_t seed = 0);

enum class TTestVariant { Student, Welch };

/// Two-sided t-test. Paired tests the mean difference a - b against zero.
/// Zero variance: p = 1 if the means agree, p = 0 otherwise.
TestResult ttest(std::span<const double> a, std::span<const double> b,
                 TTestVariant variant = TTestVariant::Student, bool paired = false);

}  // namespace wtseq::stats

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wtseq/ingest.hpp"
#include "wtseq/rng.hpp"

namespace wtseq::testing {

// Six work runs (3,2,3,2,3,1) and five talk runs (2,3,2,2,2): 25 activities
// with WW=8, WT=5, TW=5, TT=6.
inline constexpr const char* kFigureOneSequence = "WWWTTWWTTTWWWTTWWTTWWWTTW";

inline WtSequence random_sequence(std::size_t n, double p_work, std::uint64_t seed) {
  Rng rng(seed);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += rng.bernoulli(p_work) ? 'W' : 'T';
  return WtSequence::from_string(s);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("wtseq-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Textbook Pearson r in long double, straight from the definition.
inline double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<long double>(x.size());
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Spearman for tie-free data: 1 - 6 sum d^2 / (n (n^2 - 1)), ranks by counting.
inline double spearman_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double d2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double rx = 1, ry = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (x[j] < x[i]) ++rx;
      if (y[j] < y[i]) ++ry;
    }
    d2 += (rx - ry) * (rx - ry);
  }
  const auto nn = static_cast<long double>(n);
  return static_cast<double>(1.0L - 6.0L * d2 / (nn * (nn * nn - 1.0L)));
}

}  // namespace wtseq::testing

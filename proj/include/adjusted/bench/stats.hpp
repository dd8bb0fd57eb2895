#pragma once

#include <stdexcept>
#include <vector>

namespace adjusted::bench {

class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Sample Pearson correlation. Throws std::invalid_argument on length
/// mismatch or fewer than two points, UndefinedCorrelation on zero variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

struct Summary {
  double mean = 0;
  double stddev = 0;  // sample standard deviation, 0 for one sample
  double min = 0;
  double max = 0;
};

Summary summarize(const std::vector<double>& xs);

}  // namespace adjusted::bench

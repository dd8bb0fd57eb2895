#pragma once

#include <cstdint>
#include <random>

namespace adjusted::bench {

/// Workload skew alpha in (0, 1] maps to the Zipf exponent alpha * 1.2, so
/// alpha = 1 is strongly biased and alpha near 0 is close to uniform.
inline constexpr double kZipfExponentScale = 1.2;

inline double zipf_exponent(double alpha) { return alpha * kZipfExponentScale; }

/// Rejection-inversion sampler (Hörmann & Derflinger) over ranks 1..n with
/// P(k) proportional to k^-exponent.
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double exponent);

  template <class Rng>
  std::uint64_t operator()(Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (true) {
      const double u = h_integral_n_ + unit(rng) * (h_integral_x1_ - h_integral_n_);
      const double x = h_integral_inverse(u);
      auto k = static_cast<std::int64_t>(x + 0.5);
      if (k < 1) k = 1;
      if (k > static_cast<std::int64_t>(n_)) k = static_cast<std::int64_t>(n_);
      const double kd = static_cast<double>(k);
      if (kd - x <= s_ || u >= h_integral(kd + 0.5) - h(kd)) return static_cast<std::uint64_t>(k);
    }
  }

  std::uint64_t n() const { return n_; }
  double exponent() const { return exponent_; }

  /// Exact probability of rank k (by direct normalisation, O(n) once).
  double probability(std::uint64_t k) const;

 private:
  double h(double x) const;
  double h_integral(double x) const;
  double h_integral_inverse(double x) const;

  std::uint64_t n_;
  double exponent_;
  double h_integral_x1_;
  double h_integral_n_;
  double s_;
  double norm_ = 0;
};

/// Lamping & Veach jump consistent hash: bucket in [0, buckets).
std::int32_t jump_consistent_hash(std::uint64_t key, std::int32_t buckets);

}  // namespace adjusted::bench

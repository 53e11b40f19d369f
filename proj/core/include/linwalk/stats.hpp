// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace linwalk {

/// Neumaier-compensated accumulator; keeps deterministic reductions accurate
/// enough for the 1e-10 oracle tolerances.
class KahanSum {
  public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;

    static double abs(double x) { return x < 0 ? -x : x; }
};

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t count = 0;
};

/// Sample mean and standard error of the mean.
MeanStderr mean_stderr(const std::vector<double>& xs);

/// Binomial proportion with its standard error.
MeanStderr proportion_stderr(std::size_t hits, std::size_t trials);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    std::size_t count = 0;
};

/// Ordinary least squares y = a + b x with the usual residual-based slope
/// standard error.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample KS acceptance threshold at significance alpha.
double ks_threshold(std::size_t n_a, std::size_t n_b, double alpha);

/// Two-sided two-sample KS test; true if the null (same law) is NOT rejected
/// at level alpha.
bool ks_two_sample_pass(std::vector<double> a, std::vector<double> b, double alpha);

} // namespace linwalk

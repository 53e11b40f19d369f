// SPDX-License-Identifier: Apache-2.0
#include "linwalk/stats.hpp"

#include <algorithm>
#include <cmath>

namespace linwalk {

MeanStderr mean_stderr(const std::vector<double>& xs)
{
    MeanStderr out;
    out.count = xs.size();
    if (xs.empty()) {
        return out;
    }
    KahanSum s;
    for (double x : xs) {
        s.add(x);
    }
    out.mean = s.value() / static_cast<double>(xs.size());
    if (xs.size() < 2) {
        return out;
    }
    KahanSum sq;
    for (double x : xs) {
        const double d = x - out.mean;
        sq.add(d * d);
    }
    const double var = sq.value() / static_cast<double>(xs.size() - 1);
    out.stderr_ = std::sqrt(std::max(var, 0.0) / static_cast<double>(xs.size()));
    return out;
}

MeanStderr proportion_stderr(std::size_t hits, std::size_t trials)
{
    MeanStderr out;
    out.count = trials;
    if (trials == 0) {
        return out;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    out.mean = p;
    out.stderr_ = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    LinearFit fit;
    const std::size_t n = std::min(x.size(), y.size());
    fit.count = n;
    if (n < 2) {
        return fit;
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        fit.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

double ks_statistic(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0;
    std::size_t ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] <= b[ib]) {
            ++ia;
        } else {
            ++ib;
        }
        const double fa = static_cast<double>(ia) / na;
        const double fb = static_cast<double>(ib) / nb;
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

double ks_threshold(std::size_t n_a, std::size_t n_b, double alpha)
{
    const double na = static_cast<double>(n_a);
    const double nb = static_cast<double>(n_b);
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt((na + nb) / (na * nb));
}

bool ks_two_sample_pass(std::vector<double> a, std::vector<double> b, double alpha)
{
    const double thresh = ks_threshold(a.size(), b.size(), alpha);
    return ks_statistic(std::move(a), std::move(b)) <= thresh;
}

} // namespace linwalk

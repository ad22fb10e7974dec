#include "cgn/metrics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace cgn::metrics {

namespace {

double poly(const double* c, int order, double x) {
    double r = c[order - 1];
    for (int k = order - 2; k >= 0; --k) r = r * x + c[k];
    return r;
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }
double normal_upper_tail(double z) { return boost::math::cdf(boost::math::complement(boost::math::normal(), z)); }

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sample_sd(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

ShapiroWilk shapiro_wilk(std::vector<double> x) {
    const std::size_t n = x.size();
    if (n < 3 || n > 5000) throw std::invalid_argument("shapiro_wilk: sample size must be within [3, 5000]");
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (range < 1e-19) throw std::invalid_argument("shapiro_wilk: all values identical");

    static const double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static const double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static const double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static const double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static const double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static const double c6[] = {-0.4803, -0.082676, 0.0030302};
    static const double g[] = {-2.273, 0.459};

    const std::size_t half = n / 2;
    const double an = static_cast<double>(n);
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
    } else {
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, 6, rsn) - m[0] / ssumm2;
        std::size_t first;
        double fac;
        if (n > 5) {
            first = 2;
            const double a2 = -m[1] / ssumm2 + poly(c2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
        } else {
            first = 1;
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
    }

    const double mean = mean_of(x);
    double ssq = 0.0;
    for (double v : x) ssq += (v - mean) * (v - mean);
    double num = 0.0;
    for (std::size_t i = 0; i < half; ++i) num += a[i] * (x[n - 1 - i] - x[i]);
    ShapiroWilk out;
    out.w = std::min(1.0, num * num / ssq);

    const double w1 = 1.0 - out.w;
    if (n == 3) {
        const double pi6 = 1.90985931710274;
        const double stqr = 1.04719755119660;
        out.p_value = std::max(0.0, pi6 * (std::asin(std::sqrt(out.w)) - stqr));
        return out;
    }
    if (w1 <= 0.0) {
        out.p_value = 1.0;
        return out;
    }
    double y = std::log(w1);
    double m, s;
    if (n <= 11) {
        const double gamma = poly(g, 2, an);
        if (y >= gamma) {
            out.p_value = 1e-99;
            return out;
        }
        y = -std::log(gamma - y);
        m = poly(c3, 4, an);
        s = std::exp(poly(c4, 4, an));
    } else {
        const double xx = std::log(an);
        m = poly(c5, 4, xx);
        s = std::exp(poly(c6, 3, xx));
    }
    out.p_value = normal_upper_tail((y - m) / s);
    return out;
}

double boxcox(double x, double lambda) { return lambda == 0.0 ? std::log(x) : (std::pow(x, lambda) - 1.0) / lambda; }

double inverse_boxcox(double y, double lambda) {
    if (lambda == 0.0) return std::exp(y);
    const double base = lambda * y + 1.0;
    if (base <= 0.0) return lambda > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::pow(base, 1.0 / lambda);
}

double boxcox_lambda(const std::vector<double>& x, double lo, double hi, double step) {
    if (x.size() < 2) throw std::invalid_argument("boxcox_lambda: need at least two values");
    double log_sum = 0.0;
    for (double v : x) {
        if (!(v > 0.0)) throw std::invalid_argument("boxcox_lambda: values must be positive");
        log_sum += std::log(v);
    }
    const double n = static_cast<double>(x.size());
    const auto steps = static_cast<long>(std::floor((hi - lo) / step + 0.5));
    double best_lambda = lo;
    double best_llf = -std::numeric_limits<double>::infinity();
    std::vector<double> y(x.size());
    for (long k = 0; k <= steps; ++k) {
        double lambda = lo + static_cast<double>(k) * step;
        if (std::abs(lambda) < step * 1e-6) lambda = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = boxcox(x[i], lambda);
        const double m = mean_of(y);
        double var = 0.0;
        for (double v : y) var += (v - m) * (v - m);
        var /= n;
        if (!(var > 0.0) || !std::isfinite(var)) continue;
        const double llf = (lambda - 1.0) * log_sum - 0.5 * n * std::log(var);
        if (llf > best_llf) {
            best_llf = llf;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

double t_quantile(double probability, double dof) {
    return boost::math::quantile(boost::math::students_t(dof), probability);
}

SeedSummary summarize_runs(const std::vector<double>& values, double alpha) {
    if (values.empty()) throw std::invalid_argument("summarize_runs: no values");
    SeedSummary s;
    s.values = values;
    s.mean = mean_of(values);
    s.ci_low = s.ci_high = s.mean;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    if (values.size() < 2 || *lo_it == *hi_it) return s;

    const double n = static_cast<double>(values.size());
    const double t = t_quantile(1.0 - alpha / 2.0, n - 1.0);
    if (values.size() >= 3) s.normality_p = shapiro_wilk(values).p_value;
    if (s.normality_p >= alpha) {
        const double half = t * sample_sd(values) / std::sqrt(n);
        s.ci_low = s.mean - half;
        s.ci_high = s.mean + half;
        return s;
    }

    const double offset = *lo_it <= 0.0 ? 1e-6 - *lo_it : 0.0;
    std::vector<double> shifted(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) shifted[i] = values[i] + offset;
    s.transformed = true;
    s.lambda = boxcox_lambda(shifted);
    std::vector<double> y(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) y[i] = boxcox(shifted[i], s.lambda);
    const double my = mean_of(y);
    const double half = t * sample_sd(y) / std::sqrt(n);
    s.ci_low = std::min(inverse_boxcox(my - half, s.lambda) - offset, s.mean);
    s.ci_high = std::max(inverse_boxcox(my + half, s.lambda) - offset, s.mean);
    return s;
}

}  // namespace cgn::metrics

#pragma once

#include <vector>

namespace cgn::metrics {

struct ShapiroWilk {
    double w = 1.0;
    double p_value = 1.0;
};

/// Shapiro-Wilk normality test (Royston's approximation), 3 <= n <= 5000.
ShapiroWilk shapiro_wilk(std::vector<double> values);

/// Box-Cox parameter maximizing the profile log-likelihood on a grid.
double boxcox_lambda(const std::vector<double>& positive_values, double lo = -5.0, double hi = 5.0, double step = 0.01);
double boxcox(double x, double lambda);
double inverse_boxcox(double y, double lambda);

/// Two-sided Student t quantile.
double t_quantile(double probability, double dof);

struct SeedSummary {
    std::vector<double> values;
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    /// Shapiro-Wilk p-value of the raw values.
    double normality_p = 1.0;
    bool transformed = false;
    /// Box-Cox parameter used; 1 means the identity transform.
    double lambda = 1.0;
};

/// Mean with a 95% confidence interval. Normal samples get a t-interval;
/// others a t-interval in Box-Cox space mapped back. The interval is widened
/// to contain the mean if the back-transform moves it past the mean.
SeedSummary summarize_runs(const std::vector<double>& values, double alpha = 0.05);

}  // namespace cgn::metrics

#include "spear/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "spear/errors.hpp"

namespace spear::stats {

namespace {

constexpr double kDegenerateEps = 1e-12;

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for I_x(a,b), modified Lentz algorithm.
double beta_cf(double a, double b, double x) {
    constexpr double eps = 3e-16;
    constexpr double tiny = 1e-300;
    constexpr int max_iter = 10000;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw NumericError("reg_incomplete_beta: continued fraction did not converge (a=" +
                       std::to_string(a) + ", b=" + std::to_string(b) + ", x=" + std::to_string(x) + ")");
}

}  // namespace

double reg_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw NumericError("reg_incomplete_beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw NumericError("reg_incomplete_beta: x must be in [0,1], got " + std::to_string(x));
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int dof) {
    if (dof < 1) throw NumericError("student_t_two_sided_p: dof must be >= 1");
    if (std::isnan(t)) throw NumericError("student_t_two_sided_p: t is NaN");
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    const double v = static_cast<double>(dof);
    return reg_incomplete_beta(v / 2.0, 0.5, v / (v + t * t));
}

double f_upper_tail_p(double f, int d1, int d2) {
    if (d1 < 1 || d2 < 1) throw NumericError("f_upper_tail_p: dofs must be >= 1");
    if (!(f >= 0.0)) throw NumericError("f_upper_tail_p: f must be >= 0");
    if (std::isinf(f)) return 0.0;
    if (f == 0.0) return 1.0;
    const double n1 = static_cast<double>(d1);
    const double n2 = static_cast<double>(d2);
    return reg_incomplete_beta(n2 / 2.0, n1 / 2.0, n2 / (n2 + n1 * f));
}

RegressionFit linreg_slope_test(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 3) throw DataError("linreg_slope_test: need T >= 3, got " + std::to_string(n));

    const double t_mean = (static_cast<double>(n) + 1.0) / 2.0;  // time index 1..T
    double y_mean = 0.0;
    for (double v : values) y_mean += v;
    y_mean /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = (static_cast<double>(i) + 1.0) - t_mean;
        const double dy = values[i] - y_mean;
        sxx += dt * dt;
        sxy += dt * dy;
        syy += dy * dy;
    }

    RegressionFit fit;
    fit.dof = static_cast<int>(n) - 2;
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * t_mean;

    double sse = syy - fit.slope * sxy;
    if (sse < 0.0) sse = 0.0;  // cancellation guard

    if (sse <= kDegenerateEps * syy + 1e-300) {
        // Exact fit: infinite evidence unless the line is flat.
        fit.slope_se = 0.0;
        if (std::fabs(fit.slope) > 0.0) {
            fit.t_stat = fit.slope > 0 ? std::numeric_limits<double>::infinity()
                                       : -std::numeric_limits<double>::infinity();
            fit.p_value = 0.0;
        } else {
            fit.t_stat = 0.0;
            fit.p_value = 1.0;
        }
        return fit;
    }

    const double resid_var = sse / static_cast<double>(fit.dof);
    fit.slope_se = std::sqrt(resid_var / sxx);
    fit.t_stat = fit.slope / fit.slope_se;
    fit.p_value = student_t_two_sided_p(fit.t_stat, fit.dof);
    return fit;
}

namespace {

struct MeanVar {
    double mean;
    double sample_var;  // denominator n-1
};

MeanVar mean_var(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, ss / (n - 1.0)};
}

}  // namespace

TestResult two_sample_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw DataError("two_sample_t_test: each group needs >= 2 observations");
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const auto [ma, va] = mean_var(a);
    const auto [mb, vb] = mean_var(b);
    const int dof = static_cast<int>(n1 + n2) - 2;
    const double pooled_var = ((n1 - 1.0) * va + (n2 - 1.0) * vb) / static_cast<double>(dof);

    const double scale = std::max({std::fabs(ma), std::fabs(mb), 1.0});
    TestResult res;
    if (pooled_var <= kDegenerateEps * kDegenerateEps * scale * scale) {
        if (std::fabs(ma - mb) <= kDegenerateEps * scale) {
            res.statistic = 0.0;
            res.p_value = 1.0;
        } else {
            res.statistic = (ma > mb ? 1.0 : -1.0) * std::numeric_limits<double>::infinity();
            res.p_value = 0.0;
        }
        return res;
    }
    res.statistic = (ma - mb) / std::sqrt(pooled_var * (1.0 / n1 + 1.0 / n2));
    res.p_value = student_t_two_sided_p(res.statistic, dof);
    return res;
}

TestResult levene_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw DataError("levene_test: each group needs >= 2 observations");
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const double n_tot = n1 + n2;

    auto abs_devs = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        std::vector<double> z(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) z[i] = std::fabs(xs[i] - mean);
        return z;
    };
    const std::vector<double> za = abs_devs(a);
    const std::vector<double> zb = abs_devs(b);

    double za_mean = 0.0, zb_mean = 0.0;
    for (double z : za) za_mean += z;
    for (double z : zb) zb_mean += z;
    za_mean /= n1;
    zb_mean /= n2;
    const double z_mean = (za_mean * n1 + zb_mean * n2) / n_tot;

    double between = n1 * (za_mean - z_mean) * (za_mean - z_mean) +
                     n2 * (zb_mean - z_mean) * (zb_mean - z_mean);
    double within = 0.0;
    for (double z : za) within += (z - za_mean) * (z - za_mean);
    for (double z : zb) within += (z - zb_mean) * (z - zb_mean);

    const double scale = std::max({za_mean, zb_mean, 1.0});
    TestResult res;
    if (within <= kDegenerateEps * kDegenerateEps * scale * scale) {
        // No within-group spread of the deviations: the statistic is either
        // exactly 0 (groups look identical) or infinite evidence.
        if (std::fabs(za_mean - zb_mean) <= kDegenerateEps * scale) {
            res.statistic = 0.0;
            res.p_value = 1.0;
        } else {
            res.statistic = std::numeric_limits<double>::infinity();
            res.p_value = 0.0;
        }
        return res;
    }
    res.statistic = (n_tot - 2.0) * between / within;
    res.p_value = f_upper_tail_p(res.statistic, 1, static_cast<int>(n_tot) - 2);
    return res;
}

}  // namespace spear::stats

#pragma once

#include <vector>

namespace spear::stats {

/// Ordinary least squares of x_t on t = 1..T with a two-sided slope test.
struct RegressionFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    int dof = 0;
};

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Regularized incomplete beta I_x(a,b), continued-fraction evaluation with
/// the symmetry switch at x = (a+1)/(a+b+2). Absolute error <= 1e-10.
double reg_incomplete_beta(double a, double b, double x);

/// P(|T_dof| >= |t|) via I_x with x = dof/(dof + t^2).
double student_t_two_sided_p(double t, int dof);

/// P(F_{d1,d2} >= f) via I_x with x = d2/(d2 + d1*f).
double f_upper_tail_p(double f, int d1, int d2);

/// OLS slope test; requires T >= 3. Exact fits resolve to p in {0,1}.
RegressionFit linreg_slope_test(const std::vector<double>& values);

/// Pooled-variance two-sample Student t-test, dof = |a|+|b|-2.
/// Zero pooled variance: equal means -> t=0, p=1; unequal means -> p=0.
TestResult two_sample_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// Classic mean-centered Levene variance-equality test for two groups.
/// W ~ F(1, N-2). Degenerate zero within-group spread: equal group mean
/// deviations -> p=1, unequal -> p=0.
TestResult levene_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace spear::stats

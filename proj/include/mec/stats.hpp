#pragma once

#include <vector>

namespace mec {

double mean(const std::vector<double>& xs);       // throws on empty
double sample_sd(const std::vector<double>& xs);  // n-1 denominator, needs n>=2

// Regularized incomplete beta I_x(a, b) for a,b > 0, x in [0,1], via the
// Lentz continued fraction. Backs the Student-t tail probability.
double regularized_incomplete_beta(double a, double b, double x);

// Upper-tail probability P(T > t) for Student's t with dof degrees of freedom.
double student_t_upper_tail(double t, int dof);

struct PairedTestResult {
  double mean_diff = 0.0;  // mean(a - b)
  double t_stat = 0.0;
  int dof = 0;
  double p_value = 1.0;  // against H1: mean(a - b) > 0
};

// Paired one-sided t-test of H1: mean(a) > mean(b). Requires equal lengths
// and at least two pairs. Zero-variance differences degenerate to p = 0 when
// the mean difference is positive and p = 1 otherwise.
PairedTestResult paired_t_test_greater(const std::vector<double>& a,
                                       const std::vector<double>& b);

}  // namespace mec

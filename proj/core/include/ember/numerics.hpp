#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ember {

/// Dense 64-bit float vector. All public operations keep entries finite.
using Vec = std::vector<double>;

/// Row-major dense 64-bit float matrix.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  void fill(double v) { data.assign(rows * cols, v); }
};

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);

/// Cosine similarity, clamped to [-1, 1] against rounding.
/// Throws ZeroNorm if either norm < 1e-12, LengthMismatch on unequal sizes.
double cosine(const Vec& a, const Vec& b);

/// Gradient of cosine(a, b) with respect to a.
Vec cosine_grad_a(const Vec& a, const Vec& b);

/// max(xs) + ln(sum exp(x - max)); stable for |x| <= 700. Throws EmptyInput.
double log_sum_exp(const Vec& xs);

/// Central-difference gradient oracle: (f(x+h*e_i) - f(x-h*e_i)) / 2h.
/// Throws NonFinite if f evaluates to a non-finite value near x.
Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x,
                     double h = 1e-5);

/// Gradient-check normalization used throughout the test suites:
/// |a - b| / max(1, |a|, |b|).
double rel_error(double analytic, double numeric);

}  // namespace ember

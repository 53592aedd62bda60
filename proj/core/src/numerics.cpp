#include "ember/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ember/errors.hpp"

namespace ember {

namespace {
constexpr double kNormFloor = 1e-12;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::length_mismatch,
                "dot: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double cosine(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::length_mismatch,
                "cosine: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na < kNormFloor || nb < kNormFloor) {
    throw Error(ErrorCode::zero_norm, "cosine: vector norm below 1e-12");
  }
  const double c = dot(a, b) / (na * nb);
  if (!std::isfinite(c)) {
    throw Error(ErrorCode::non_finite, "cosine: non-finite result");
  }
  return std::clamp(c, -1.0, 1.0);
}

Vec cosine_grad_a(const Vec& a, const Vec& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na < kNormFloor || nb < kNormFloor) {
    throw Error(ErrorCode::zero_norm, "cosine_grad_a: vector norm below 1e-12");
  }
  const double d = dot(a, b);
  const double inv = 1.0 / (na * nb);
  const double c = d * inv;
  Vec g(a.size());
  // d cos/d a_i = b_i/(|a||b|) - cos * a_i/|a|^2
  for (std::size_t i = 0; i < a.size(); ++i) {
    g[i] = b[i] * inv - c * a[i] / (na * na);
  }
  return g;
}

double log_sum_exp(const Vec& xs) {
  if (xs.empty()) {
    throw Error(ErrorCode::empty_input, "log_sum_exp: empty input");
  }
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) {
    throw Error(ErrorCode::non_finite, "log_sum_exp: non-finite input");
  }
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x,
                     double h) {
  Vec grad(x.size());
  Vec probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double fp = f(probe);
    probe[i] = orig - h;
    const double fm = f(probe);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Error(ErrorCode::non_finite,
                  "finite_diff_grad: non-finite evaluation at coordinate " +
                      std::to_string(i));
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

double rel_error(double analytic, double numeric) {
  const double denom =
      std::max(1.0, std::max(std::abs(analytic), std::abs(numeric)));
  return std::abs(analytic - numeric) / denom;
}

}  // namespace ember

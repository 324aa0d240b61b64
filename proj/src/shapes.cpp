#include "occstereo/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "occstereo/level_set.hpp"

namespace occstereo {

std::array<double, kShapeTerms> shape_basis(double xn, double yn) {
  return {xn * xn, xn * yn, yn * yn, xn, yn, 1.0};
}

double GlobalShape::raw(double xn, double yn) const {
  const auto u = shape_basis(xn, yn);
  double v = 0.0;
  for (int i = 0; i < kShapeTerms; ++i) v += coeffs[i] * u[i];
  return v;
}

bool GlobalShape::finite() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return std::isfinite(c); });
}

double ShapeFrame::eval(const GlobalShape& s, double x, double y) const {
  return std::clamp(s.raw(norm_x(x), norm_y(y)), 0.0, d_max);
}

Field ShapeFrame::evaluate(const GlobalShape& s) const {
  Field out(width, height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out(x, y) = eval(s, x, y);
  }
  return out;
}

std::optional<GlobalShape> fit_shape_wls(const Consensus& consensus, const RegionMask& mask, const ShapeFrame& frame,
                                         double ridge) {
  require_same_shape(consensus.mean, mask, "fit_shape_wls");
  require_same_shape(consensus.sigma, mask, "fit_shape_wls");
  using Mat6 = Eigen::Matrix<double, kShapeTerms, kShapeTerms>;
  using Vec6 = Eigen::Matrix<double, kShapeTerms, 1>;

  // Per-row partial sums keep the accumulation order fixed for any thread count.
  const int h = mask.height();
  std::vector<Mat6> row_a(h, Mat6::Zero());
  std::vector<Vec6> row_b(h, Vec6::Zero());
  std::vector<long> row_n(h, 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y) || !consensus.informative(x, y)) continue;
      const double d = consensus.mean(x, y);
      if (!std::isfinite(d)) continue;
      const double s = consensus.sigma(x, y);
      const double w = 1.0 / (2.0 * s * s);
      const auto ub = shape_basis(frame.norm_x(x), frame.norm_y(y));
      const Eigen::Map<const Vec6> u(ub.data());
      row_a[y].selfadjointView<Eigen::Lower>().rankUpdate(u, w);
      row_b[y] += w * d * u;
      ++row_n[y];
    }
  }
  Mat6 a = Mat6::Zero();
  Vec6 b = Vec6::Zero();
  long n = 0;
  for (int y = 0; y < h; ++y) {
    a += row_a[y];
    b += row_b[y];
    n += row_n[y];
  }
  if (n < kShapeTerms) return std::nullopt;
  a = a.selfadjointView<Eigen::Lower>();

  // Jacobi scaling makes the ridge and the conditioning test independent of
  // the overall σ scale.
  Vec6 scale;
  for (int i = 0; i < kShapeTerms; ++i) {
    if (!(a(i, i) > 0.0)) return std::nullopt;
    scale(i) = 1.0 / std::sqrt(a(i, i));
  }
  const Mat6 an = scale.asDiagonal() * a * scale.asDiagonal();
  const Vec6 bn = scale.asDiagonal() * b;

  Eigen::SelfAdjointEigenSolver<Mat6> eig(an, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxShapeCondition) return std::nullopt;

  // Ridge-regularized solve plus iterative refinement toward the unregularized
  // normal equations.
  const Eigen::LDLT<Mat6> ldlt(an + ridge * Mat6::Identity());
  Vec6 c = ldlt.solve(bn);
  for (int it = 0; it < 3; ++it) c += ldlt.solve(bn - an * c);

  GlobalShape out;
  for (int i = 0; i < kShapeTerms; ++i) out.coeffs[i] = c(i) * scale(i);
  if (!out.finite()) return std::nullopt;
  return out;
}

DisparityMap compose_disparity(const Field& phi, const GlobalShape& theta1, const GlobalShape& theta2,
                               const ShapeFrame& frame) {
  DisparityMap d(phi.width(), phi.height());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < phi.height(); ++y) {
    for (int x = 0; x < phi.width(); ++x) {
      d(x, y) = frame.eval(is_foreground(phi(x, y)) ? theta1 : theta2, x, y);
    }
  }
  return d;
}

}  // namespace occstereo

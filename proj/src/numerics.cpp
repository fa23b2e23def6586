#include "ipc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ipc {
namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kRankRatio = 1e-12;

void check_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw Error(ErrorCode::NonSymmetric, "matrix must be square and non-empty");
  }
  if (!a.allFinite()) {
    throw Error(ErrorCode::NonFinite, "matrix contains non-finite entries");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    throw Error(ErrorCode::NonSymmetric,
                "asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
}

void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double v = std::abs(vectors(r, k));
      if (v > best) {
        best = v;
        arg = r;
      }
    }
    if (vectors(arg, k) < 0.0) vectors.col(k) *= -1.0;
  }
}

}  // namespace

SymEigen sym_eigh(const Eigen::MatrixXd& a) {
  return sym_eigh_top(a, a.rows());
}

SymEigen sym_eigh_top(const Eigen::MatrixXd& a, Eigen::Index k) {
  check_symmetric(a);
  const Eigen::Index m = a.rows();
  k = std::clamp<Eigen::Index>(k, 0, m);
  // Symmetrize exactly so that the solver sees the intended matrix.
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonFinite, "symmetric eigensolver failed to converge");
  }
  // Eigen returns ascending order.
  SymEigen out;
  out.values = solver.eigenvalues().tail(k).reverse();
  out.vectors = solver.eigenvectors().rightCols(k).rowwise().reverse();
  normalize_signs(out.vectors);
  return out;
}

double gram_condition_ratio(const Eigen::MatrixXd& gram) {
  if (gram.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (gram + gram.transpose()),
                                                        Eigen::EigenvaluesOnly);
  const double hi = solver.eigenvalues().maxCoeff();
  const double lo = solver.eigenvalues().minCoeff();
  if (!(hi > 0.0)) return 0.0;
  return lo / hi;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& f) {
  if (f.cols() == 0) return Eigen::MatrixXd(f.rows(), 0);
  if (!f.allFinite()) throw Error(ErrorCode::NonFinite, "factor matrix has non-finite entries");
  if (f.cols() > f.rows()) {
    throw Error(ErrorCode::RankDeficient, "more columns than rows");
  }
  const Eigen::MatrixXd gram = f.transpose() * f;
  if (gram_condition_ratio(gram) <= kRankRatio) {
    throw Error(ErrorCode::RankDeficient, "F'F is numerically singular");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(f);
  return qr.householderQ() * Eigen::MatrixXd::Identity(f.rows(), f.cols());
}

Eigen::MatrixXd annihilator_apply(const Eigen::MatrixXd& f, const Eigen::MatrixXd& v) {
  if (f.rows() != v.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "F and V must have the same number of rows");
  }
  if (f.cols() == 0) return v;
  const Eigen::MatrixXd q = orthonormal_basis(f);
  Eigen::MatrixXd out = v - q * (q.transpose() * v);
  // A second pass restores orthogonality lost to cancellation when V is
  // nearly inside span(F).
  out -= q * (q.transpose() * out);
  return out;
}

Eigen::MatrixXd projector(const Eigen::MatrixXd& f) {
  if (f.cols() == 0) return Eigen::MatrixXd::Zero(f.rows(), f.rows());
  const Eigen::MatrixXd q = orthonormal_basis(f);
  return q * q.transpose();
}

Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, ErrorCode code,
                          const char* what) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": shape mismatch");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw Error(ErrorCode::NonFinite, std::string(what) + ": non-finite input");
  }
  if (gram_condition_ratio(a) <= kRankRatio) {
    throw Error(code, std::string(what) + " is numerically singular");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (a + a.transpose()));
  if (llt.info() != Eigen::Success) {
    throw Error(code, std::string(what) + " is not positive definite");
  }
  return llt.solve(b);
}

namespace {

// Series expansion of the regularized lower incomplete gamma P(a, x).
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x).
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw Error(ErrorCode::InvalidDomain, "regularized_gamma_q requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_continued_fraction(a, x), 0.0, 1.0);
}

double chi2_sf(double x, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidDomain, "chi2_sf requires k >= 1");
  if (!(x >= 0.0)) throw Error(ErrorCode::InvalidDomain, "chi2_sf requires x >= 0");
  return regularized_gamma_q(0.5 * k, 0.5 * x);
}

}  // namespace ipc

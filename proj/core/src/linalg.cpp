#include "flowbm/linalg.hpp"

#include <cmath>
#include <string>

#include "flowbm/errors.hpp"

namespace flowbm {

namespace {

using Solver = Eigen::SelfAdjointEigenSolver<Mat>;

Solver decompose_spd(const Mat& m) {
  if (!m.allFinite()) throw NotSpdError("matrix has non-finite entries");
  Solver es(m);
  if (es.info() != Eigen::Success) throw NotSpdError("eigen-decomposition failed");
  if (es.eigenvalues()[0] <= 0.0) {
    throw NotSpdError("matrix is not positive definite (smallest eigenvalue " +
                      std::to_string(es.eigenvalues()[0]) + ")");
  }
  return es;
}

}  // namespace

Mat sym_sqrt(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 1) {
    if (!(m(0, 0) > 0.0)) throw NotSpdError("matrix is not positive definite");
    return Mat::Constant(1, 1, std::sqrt(m(0, 0)));
  }
  Solver es = decompose_spd(m);
  const Vec root = es.eigenvalues().cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Mat inv_sym_sqrt(const Mat& m) {
  Solver es = decompose_spd(m);
  const Vec root = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Vec g_self_adjoint_eigenvalues(const Mat& g, const Mat& a) {
  const Mat s = inv_sym_sqrt(g);
  Mat sym = s * a * s;
  sym = 0.5 * (sym + sym.transpose()).eval();
  Solver es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace flowbm

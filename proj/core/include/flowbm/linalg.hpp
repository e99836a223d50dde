#pragma once

#include "flowbm/types.hpp"

namespace flowbm {

/// Symmetric positive-definite square root. Throws NotSpdError when the
/// smallest eigenvalue is not positive.
Mat sym_sqrt(const Mat& m);

/// (M^{-1})^{1/2} for symmetric positive-definite M.
Mat inv_sym_sqrt(const Mat& m);

/// Ascending eigenvalues of the g-self-adjoint operator g^{-1} A, computed on
/// the congruent symmetric matrix g^{-1/2} A g^{-1/2}.
Vec g_self_adjoint_eigenvalues(const Mat& g, const Mat& a);

/// Largest absolute entry.
inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Largest absolute entry of U^T G U - I.
inline double gram_defect(const Mat& frame, const Mat& g) {
  return max_abs(frame.transpose() * g * frame - Mat::Identity(frame.cols(), frame.cols()));
}

}  // namespace flowbm

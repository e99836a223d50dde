#pragma once

#include <memory>
#include <string>

#include "flowbm/flow_solver.hpp"
#include "flowbm/geometry.hpp"

namespace flowbm {

/// Everything needed to build a family from a config section.
struct FamilySpec {
  /// euclidean, sphere, hyperbolic, cigar, torus_nrf or static_custom.
  std::string name = "sphere";
  int dim = 2;
  double kappa = 2.0;
  double radius = 1.0;

  // Torus families.
  int grid_n = 32;
  /// Saved flow snapshot; when set, the flow is loaded instead of solved.
  std::string snapshot;
  /// Initial conformal factor u0 = amplitude cos(k1 x1 + k2 x2)
  ///                              + amplitude2 cos(m1 x1 + m2 x2).
  double amplitude = 0.2;
  int mode_k1 = 1;
  int mode_k2 = 0;
  double amplitude2 = 0.0;
  int mode2_k1 = 1;
  int mode2_k2 = 2;
  /// Keep u0 frozen (static torus) instead of running the flow.
  bool frozen = false;
  double flow_t_end = 1.0;
  /// 0 picks min(1e-3, 0.9 * the stability bound).
  double flow_dt = 0.0;
};

/// u0 of a torus spec on its grid.
Field2D initial_conformal_factor(const FamilySpec& spec);

/// Static conformal torus exp(u0) delta as a single-sample flow solution.
TorusFlowSolution static_torus_solution(const Field2D& u0);

/// Flow solution described by a torus spec (snapshot, frozen or solved).
TorusFlowSolution torus_solution(const FamilySpec& spec);

std::shared_ptr<const TorusNrfFamily> make_torus_family(const FamilySpec& spec);

/// Throws ConfigError for unknown names or invalid parameters.
FamilyPtr make_family(const FamilySpec& spec);

}  // namespace flowbm

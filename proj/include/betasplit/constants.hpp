#pragma once

namespace betasplit {

// Reference constants for the critical beta-splitting model.  Everything here
// is either a mathematical constant or derived from one by the formulas below;
// c0 and c1_ref are numerically-estimated reference values used only in
// comparisons and reports, never inside a computation path.
struct ReferenceConstants {
  static constexpr double pi = 3.14159265358979323846;
  static constexpr double zeta2 = pi * pi / 6.0;
  static constexpr double zeta3 = 1.2020569031595942854;
  static constexpr double gamma_euler = 0.57721566490153286061;

  // mu = 1/zeta(2): coefficient of log n in the mean leaf depth.
  static constexpr double mu = 1.0 / zeta2;
  // sigma2 = 2 zeta(3): limit of the per-step log-variance sum b(j).
  static constexpr double sigma2 = 2.0 * zeta3;
  // Limit correlation of two random leaf heights in the same tree.
  static constexpr double r_inf = gamma_euler * zeta2 / (2.0 * zeta3);
  // Estimated depth-expansion constant: E[depth] = mu log n + c0 - 1/(2 zeta2 n) + O(n^-2).
  static constexpr double c0 = 0.7951556604;
  // Estimated second-order fringe-occupancy constant (report-only).
  static constexpr double c1_ref = 0.58;
  // Conjectured max-height constant: max leaf height ~ c_height * log n.
  static constexpr double c_height = 1.0 + mu + mu * mu * mu * sigma2 / 2.0;
  // CLT variance slope: var(depth) ~ var_const * log n.
  static constexpr double var_const = 2.0 * zeta3 / (zeta2 * zeta2 * zeta2);
};

}  // namespace betasplit

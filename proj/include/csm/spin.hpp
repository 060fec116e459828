#pragma once

#include "csm/core.hpp"

namespace csm::spin {

/// Polarizing beam-splitter rotated by theta (radians). Uses the real 2-dim
/// rotation representation, so the transition probability between contexts
/// at relative angle d is cos²(d) — not cos²(d/2). The spin-1/2 spinor
/// representation (cos²(d/2)) lives in spin_direction_context; both pictures
/// coexist deliberately.
struct PolarizerContextSpec {
  double theta = 0.0;
};

/// Stern-Gerlach style direction measurement for a spin-j system.
/// theta/phi are standard spherical coordinates of the field gradient axis.
struct SpinDirectionSpec {
  double j = 0.5;  // half-integer >= 1/2
  double theta = 0.0;
  double phi = 0.0;
};

/// Outcome 0 = transmitted (H_theta), outcome 1 = reflected (V_theta).
Context polarization_context(const PolarizerContextSpec& spec);

struct AngularMomentumOps {
  Matrix jx;
  Matrix jy;
  Matrix jz;
};

/// Ladder-operator construction in the basis |j,m>, m = j..-j descending.
/// Satisfies [Jx,Jy] = i Jz and Jx²+Jy²+Jz² = j(j+1)·I.
AngularMomentumOps angular_momentum_operators(double j);

/// Context of the 2j+1 eigenprojectors of n̂·J, outcomes ordered by
/// descending eigenvalue m = j..-j.
Context spin_direction_context(const SpinDirectionSpec& spec);

/// exp(-i·angle·(axis·J)) via spectral decomposition of the generator;
/// exact at these sizes, no series truncation. The axis is normalized
/// internally (zero axis is an error).
ContextTransformation rotation_transformation(double j,
                                              const Eigen::Vector3d& axis,
                                              double angle);

}  // namespace csm::spin

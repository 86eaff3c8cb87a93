#pragma once

// Geometry of a 1-type over a finite set C. Every realization of the type has
// the same projection onto span(C) (fixed by the prescribed distances), so the
// realizations form a 2-sphere of radius rho in the 3 coordinates adjoined
// orthogonally to span(C).

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "fraisse/metric_core.hpp"
#include "fraisse/rng.hpp"
#include "fraisse/snapping.hpp"

namespace fraisse {

struct TypeSphere {
  SpaceDistances base_space;           // C
  std::vector<Rational> dists_to_base;  // prescribed d^2 to each point of C
  EmbeddedSpace base;                   // C in R^{|C|+3}, last three columns zero
  Eigen::VectorXd center;               // projection of every realization onto span(C)
  double radius_sq = 0.0;               // rho^2, the last exact LDL^T pivot of C + {x}
  Eigen::Matrix<double, Eigen::Dynamic, 3> orth_basis;
  double tol = 1e-9;

  double radius() const;
  std::size_t ambient_dim() const { return static_cast<std::size_t>(center.size()); }
  std::size_t base_size() const { return base_space.size(); }
};

TypeSphere type_sphere(const SpaceDistances& base, std::span<const Rational> dists_to_base,
                       double tol = 1e-9);

/// center + rho * orth_basis * direction. `direction` must be a unit vector.
Eigen::VectorXd realize_type(const TypeSphere& ts, const Eigen::Vector3d& direction);

/// Coordinates of (p - center) in orth_basis. Throws PreconditionError if p is
/// not on the sphere within tolerance.
Eigen::Vector3d sphere_offset(const TypeSphere& ts, const Eigen::VectorXd& p);

/// Angle between two points of the sphere, seen from its center.
double sphere_angle(const TypeSphere& ts, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Two realizations at exactly the prescribed squared distance (0 < sq < 4 rho^2).
std::pair<Eigen::VectorXd, Eigen::VectorXd> realize_pair(const TypeSphere& ts, const Rational& sq_xy);

/// Image of x under the rotation by theta about the axis through y.
/// Right-handed with respect to orth_basis: the tangent part t of x moves
/// towards axis x t.
Eigen::VectorXd rotate_about_axis(const TypeSphere& ts, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, double theta);

/// |x(pi) - x|.
double epsilon_threshold(const TypeSphere& ts, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct ThetaSolution {
  double theta = 0.0;
  Eigen::VectorXd point;           // x(theta)
  double sq_dist_error = 0.0;      // | |x(theta)-x|^2 - target |
  SpaceDistances configuration;    // C + {x, y, x(theta)}, exact
  GramMatrix certificate;
};

/// Bisection for |x(theta) - x|^2 = target_sq on (0, pi); requires 0 < target < eps^2.
ThetaSolution solve_theta_for_distance(const TypeSphere& ts, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& y, const SquaredDistance& target_sq,
                                       const SnapPolicy& policy = {});

struct ConnectednessWitness {
  Eigen::VectorXd z;
  SpaceDistances configuration;  // C + {a, b, z}, or C + {a, z} when a == b
  GramMatrix certificate;
  double angle_a = 0.0;
  double angle_b = 0.0;
  double half_angle_bound = 0.0;  // phi / 2
  double chord_bound = 0.0;       // 2 rho sin(phi / 4)
  double dist_a = 0.0;
  double dist_b = 0.0;
  double span_residual = 0.0;
  std::size_t attempts = 0;
};

/// Rejection sampling for z with both angles below phi/2, z outside
/// span(C + {a, b}) and all squared distances in S with an exact certificate.
ConnectednessWitness connectedness_witness(const TypeSphere& ts, const Eigen::VectorXd& a,
                                           const Eigen::VectorXd& b, double phi, CounterRng& rng,
                                           const SnapPolicy& policy = {},
                                           std::size_t max_attempts = 10000);

struct TypeChain {
  std::vector<Eigen::VectorXd> points;
  std::vector<Rational> link_sq;                // exact squared length of each jump
  std::vector<GramMatrix> link_certificates;    // C + {p_i, p_{i+1}}
};

/// Great-circle chain from a to b with every jump of squared length <= step_sq.
TypeChain connect_by_chain(const TypeSphere& ts, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                           const SquaredDistance& step_sq, const SnapPolicy& policy = {});

}  // namespace fraisse

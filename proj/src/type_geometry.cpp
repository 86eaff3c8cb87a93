#include "fraisse/type_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fraisse/errors.hpp"

namespace fraisse {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSpanResidualFloor = 1e-6;

double on_sphere_tol(const TypeSphere& ts) { return 100.0 * ts.tol; }

// C followed by new realizations of the type; `among` holds the exact squared
// distances between the new points (row-major, size m*m, diagonal ignored).
SpaceDistances type_configuration(const TypeSphere& ts, const std::vector<std::string>& names,
                                  const std::vector<Rational>& among) {
  const std::size_t c = ts.base_size();
  const std::size_t m = names.size();
  RationalMatrix sq(c + m);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) sq(i, j) = ts.base_space.sq(i, j);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < c; ++i) sq(c + k, i) = sq(i, c + k) = ts.dists_to_base[i];
    for (std::size_t l = 0; l < m; ++l)
      if (l != k) sq(c + k, c + l) = among[k * m + l];
  }
  auto labels = ts.base_space.labels();
  labels.insert(labels.end(), names.begin(), names.end());
  return SpaceDistances::from_matrix(std::move(labels), std::move(sq));
}

Eigen::Vector3d any_orthogonal(const Eigen::Vector3d& u) {
  Eigen::Index k;
  u.cwiseAbs().minCoeff(&k);
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e[k] = 1.0;
  return u.cross(e).normalized();
}

}  // namespace

double TypeSphere::radius() const { return std::sqrt(radius_sq); }

TypeSphere type_sphere(const SpaceDistances& base, std::span<const Rational> dists_to_base,
                       double tol) {
  const std::size_t n = base.size();
  if (dists_to_base.size() != n) throw PreconditionError("type_sphere: one distance per base point");
  if (!certify_membership(base).is_member())
    throw PreconditionError("type_sphere: base set is not a certified member");
  for (const Rational& d : dists_to_base)
    if (d <= 0 || d >= 4) throw PreconditionError("type_sphere: prescribed distance outside (0,4)");
  const SpaceDistances extended = base.with_point("x", dists_to_base);
  const Certification cert = certify_membership(extended);
  if (!cert.is_member())
    throw PreconditionError("type_sphere: type unrealizable (extended Gram not positive definite)");

  TypeSphere ts;
  ts.base_space = base;
  ts.dists_to_base.assign(dists_to_base.begin(), dists_to_base.end());
  ts.tol = tol;

  const EmbeddedSpace emb = embed(base, tol);
  ts.base.tol = tol;
  ts.base.coords = Eigen::MatrixXd::Zero(n, n + 3);
  ts.base.coords.leftCols(n) = emb.coords;

  ts.center = Eigen::VectorXd::Zero(n + 3);
  if (n > 0) {
    const std::vector<double> g = gram_from_distances(base).g.to_doubles();
    const Eigen::MatrixXd gram =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            g.data(), n, n);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = 1.0 - 0.5 * to_double(dists_to_base[i]);
    const Eigen::VectorXd w = gram.llt().solve(rhs);
    ts.center.head(n) = emb.coords.transpose() * w;
  }
  ts.radius_sq = to_double(cert.gram.pd_certificate->back());
  const double float_radius_sq = 1.0 - ts.center.squaredNorm();
  if (std::abs(float_radius_sq - ts.radius_sq) > tol)
    throw PrecisionError("type_sphere: float projection disagrees with exact radius");

  ts.orth_basis = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(n + 3, 3);
  ts.orth_basis.bottomRows(3) = Eigen::Matrix3d::Identity();
  return ts;
}

Eigen::VectorXd realize_type(const TypeSphere& ts, const Eigen::Vector3d& direction) {
  if (std::abs(direction.norm() - 1.0) > ts.tol)
    throw PreconditionError("realize_type: direction is not a unit vector");
  return ts.center + ts.radius() * (ts.orth_basis * direction);
}

Eigen::Vector3d sphere_offset(const TypeSphere& ts, const Eigen::VectorXd& p) {
  if (p.size() != ts.center.size()) throw PreconditionError("point has the wrong ambient dimension");
  const Eigen::VectorXd diff = p - ts.center;
  const Eigen::Vector3d off = ts.orth_basis.transpose() * diff;
  const double in_span = (diff - ts.orth_basis * off).norm();
  if (in_span > on_sphere_tol(ts) || std::abs(off.norm() - ts.radius()) > on_sphere_tol(ts))
    throw PreconditionError("point does not lie on the type sphere");
  return off;
}

double sphere_angle(const TypeSphere& ts, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Vector3d ra = sphere_offset(ts, a);
  const Eigen::Vector3d rb = sphere_offset(ts, b);
  // atan2 form stays accurate near 0 and pi
  return std::atan2(ra.cross(rb).norm(), ra.dot(rb));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> realize_pair(const TypeSphere& ts, const Rational& sq_xy) {
  const double s = to_double(sq_xy);
  if (!(s > 0.0) || !(s < 4.0 * ts.radius_sq))
    throw PreconditionError("realize_pair: need 0 < d^2 < 4 rho^2");
  const double cos_alpha = 1.0 - s / (2.0 * ts.radius_sq);
  const double sin_alpha = std::sqrt(std::max(0.0, 1.0 - cos_alpha * cos_alpha));
  return {realize_type(ts, Eigen::Vector3d(1.0, 0.0, 0.0)),
          realize_type(ts, Eigen::Vector3d(cos_alpha, sin_alpha, 0.0))};
}

Eigen::VectorXd rotate_about_axis(const TypeSphere& ts, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, double theta) {
  const Eigen::Vector3d rx = sphere_offset(ts, x);
  const Eigen::Vector3d axis = sphere_offset(ts, y).normalized();
  const Eigen::Vector3d along = rx.dot(axis) * axis;
  const Eigen::Vector3d tangent = rx - along;
  if (tangent.norm() <= on_sphere_tol(ts))
    throw PreconditionError("rotate_about_axis: x lies on the axis through y (coincident or antipodal)");
  const Eigen::Vector3d turned =
      along + std::cos(theta) * tangent + std::sin(theta) * axis.cross(tangent);
  return ts.center + ts.orth_basis * turned;
}

double epsilon_threshold(const TypeSphere& ts, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return (rotate_about_axis(ts, x, y, kPi) - x).norm();
}

ThetaSolution solve_theta_for_distance(const TypeSphere& ts, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& y, const SquaredDistance& target_sq,
                                       const SnapPolicy& policy) {
  const double eps = epsilon_threshold(ts, x, y);
  const double target = to_double(target_sq.value);
  if (!(target_sq.value > 0)) throw PreconditionError("solve_theta: target must be positive");
  // the boundary eps^2 itself is only known to float accuracy
  if (!(target < eps * eps - ts.tol))
    throw PreconditionError("solve_theta: target must lie strictly below eps^2");

  auto gap = [&](double theta) { return (rotate_about_axis(ts, x, y, theta) - x).squaredNorm(); };
  double lo = 0.0, hi = kPi;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < target ? lo : hi) = mid;
  }
  ThetaSolution out;
  out.theta = 0.5 * (lo + hi);
  out.point = rotate_about_axis(ts, x, y, out.theta);
  out.sq_dist_error = std::abs(gap(out.theta) - target);
  if (out.sq_dist_error > ts.tol) throw PrecisionError("solve_theta: bisection missed the target");

  // x(theta) keeps x's distances to C and to y (the rotation fixes both), so the
  // configuration is exact once d(x,y)^2 is pinned in S.
  const double xy = (x - y).squaredNorm();
  auto attempt = [&](unsigned bits) -> std::optional<ThetaSolution> {
    const auto s_xy = snap_sq_dist(xy, bits);
    if (!s_xy) return std::nullopt;
    const Rational& t = target_sq.value;
    const Rational z(0);
    SpaceDistances cfg = type_configuration(ts, {"x", "y", "x_theta"},
                                            {z, *s_xy, t, *s_xy, z, *s_xy, t, *s_xy, z});
    Certification cert = certify_membership(cfg);
    if (!cert.is_member()) return std::nullopt;
    ThetaSolution sol = out;
    sol.configuration = std::move(cfg);
    sol.certificate = std::move(cert.gram);
    return sol;
  };
  return snap_with_retries(policy, attempt, "solve_theta_for_distance");
}

ConnectednessWitness connectedness_witness(const TypeSphere& ts, const Eigen::VectorXd& a,
                                           const Eigen::VectorXd& b, double phi, CounterRng& rng,
                                           const SnapPolicy& policy, std::size_t max_attempts) {
  if (!(phi > 0.0 && phi < kPi)) throw PreconditionError("connectedness_witness: need 0 < phi < pi");
  const Eigen::Vector3d ra = sphere_offset(ts, a);
  const Eigen::Vector3d rb = sphere_offset(ts, b);
  const double ab = std::atan2(ra.cross(rb).norm(), ra.dot(rb));
  if (!(ab < phi)) throw PreconditionError("connectedness_witness: angle(a,b) must be below phi");
  const bool same = (a - b).norm() <= on_sphere_tol(ts);

  // Sample inside the cap around the bisector whose radius keeps both angles below phi/2.
  const Eigen::Vector3d axis = same ? ra.normalized() : (ra.normalized() + rb.normalized()).normalized();
  const Eigen::Vector3d e1 = any_orthogonal(axis);
  const Eigen::Vector3d e2 = axis.cross(e1);
  const double cap = phi / 2.0 - ab / 2.0;
  const double cos_cap = std::cos(cap);

  const std::size_t c = ts.base_size();
  const std::size_t dim = ts.ambient_dim();
  Eigen::MatrixXd span(dim, c + (same ? 1 : 2));
  for (std::size_t i = 0; i < c; ++i) span.col(i) = ts.base.coords.row(i).transpose();
  span.col(c) = a;
  if (!same) span.col(c + 1) = b;
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(span);

  const double a_b = (a - b).squaredNorm();
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    const double cos_t = 1.0 - rng.uniform() * (1.0 - cos_cap);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double az = 2.0 * kPi * rng.uniform();
    const Eigen::Vector3d dir =
        (cos_t * axis + sin_t * (std::cos(az) * e1 + std::sin(az) * e2)).normalized();
    const Eigen::VectorXd z = realize_type(ts, dir);
    const Eigen::Vector3d rz = ts.orth_basis.transpose() * (z - ts.center);
    const double angle_a = std::atan2(ra.cross(rz).norm(), ra.dot(rz));
    const double angle_b = std::atan2(rb.cross(rz).norm(), rb.dot(rz));
    if (!(angle_a < phi / 2.0 && angle_b < phi / 2.0)) continue;
    const double residual = (span * qr.solve(z) - z).norm();
    if (!(residual > kSpanResidualFloor)) continue;

    const double z_a = (z - a).squaredNorm();
    const double z_b = (z - b).squaredNorm();
    auto snap = [&](unsigned bits) -> std::optional<ConnectednessWitness> {
      const auto sa = snap_sq_dist(z_a, bits);
      const auto sb = snap_sq_dist(z_b, bits);
      const auto sab = snap_sq_dist(a_b, bits);
      if (!sa || !sb || (!same && !sab)) return std::nullopt;
      const Rational zero(0);
      SpaceDistances cfg =
          same ? type_configuration(ts, {"a", "z"}, {zero, *sa, *sa, zero})
               : type_configuration(ts, {"a", "b", "z"},
                                    {zero, *sab, *sa, *sab, zero, *sb, *sa, *sb, zero});
      Certification cert = certify_membership(cfg);
      if (!cert.is_member()) return std::nullopt;
      ConnectednessWitness w;
      w.z = z;
      w.configuration = std::move(cfg);
      w.certificate = std::move(cert.gram);
      w.angle_a = angle_a;
      w.angle_b = angle_b;
      w.half_angle_bound = phi / 2.0;
      w.chord_bound = 2.0 * ts.radius() * std::sin(phi / 4.0);
      w.dist_a = std::sqrt(z_a);
      w.dist_b = std::sqrt(z_b);
      w.span_residual = residual;
      return w;
    };
    try {
      ConnectednessWitness w = snap_with_retries(policy, snap, "connectedness_witness");
      w.attempts = attempt;
      return w;
    } catch (const SearchFailure&) {
      continue;
    }
  }
  throw SearchFailure("connectedness_witness: no admissible z after " +
                      std::to_string(max_attempts) + " attempts (phi too tight for the grid?)");
}

TypeChain connect_by_chain(const TypeSphere& ts, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                           const SquaredDistance& step_sq, const SnapPolicy& policy) {
  if (!(step_sq.value > 0)) throw PreconditionError("connect_by_chain: step must be positive");
  const Eigen::Vector3d ra = sphere_offset(ts, a);
  const Eigen::Vector3d rb = sphere_offset(ts, b);
  TypeChain chain;
  chain.points.push_back(a);
  if ((a - b).norm() <= on_sphere_tol(ts)) return chain;

  const double rho = ts.radius();
  const double step = std::sqrt(to_double(step_sq.value));
  const double alpha = std::atan2(ra.cross(rb).norm(), ra.dot(rb));
  const Eigen::Vector3d u = ra.normalized();
  Eigen::Vector3d v = rb - rb.dot(u) * u;
  v = v.norm() > on_sphere_tol(ts) ? Eigen::Vector3d(v.normalized()) : any_orthogonal(u);

  // chord of angle beta is 2 rho sin(beta/2); leave room for the snapping error
  const double beta = step >= 2.0 * rho ? kPi : 2.0 * std::asin(step / (2.0 * rho));
  std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(alpha / beta)));
  const double margin = std::ldexp(1.0, -static_cast<int>(std::min(policy.denom_bits, 60u)) + 2);
  auto chord_sq = [&](std::size_t parts) {
    const double s = 2.0 * rho * std::sin(alpha / (2.0 * static_cast<double>(parts)));
    return s * s;
  };
  while (chord_sq(m) > to_double(step_sq.value) - margin) ++m;

  for (std::size_t i = 1; i < m; ++i) {
    const double t = alpha * static_cast<double>(i) / static_cast<double>(m);
    const Eigen::Vector3d dir = std::cos(t) * u + std::sin(t) * v;
    chain.points.push_back(realize_type(ts, dir.normalized()));
  }
  chain.points.push_back(b);

  for (std::size_t i = 0; i + 1 < chain.points.size(); ++i) {
    const double link = (chain.points[i] - chain.points[i + 1]).squaredNorm();
    auto attempt = [&](unsigned bits) -> std::optional<std::pair<Rational, GramMatrix>> {
      const auto s = snap_sq_dist(link, bits);
      if (!s || *s > step_sq.value) return std::nullopt;
      const Rational zero(0);
      Certification cert =
          certify_membership(type_configuration(ts, {"p", "q"}, {zero, *s, *s, zero}));
      if (!cert.is_member()) return std::nullopt;
      return std::make_pair(*s, std::move(cert.gram));
    };
    auto [sq, gram] = snap_with_retries(policy, attempt, "connect_by_chain");
    chain.link_sq.push_back(std::move(sq));
    chain.link_certificates.push_back(std::move(gram));
  }
  return chain;
}

}  // namespace fraisse

#include "virac/orientation.hpp"

#include <algorithm>
#include <cmath>

namespace virac {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_unit(const Quaternion& q, const char* who) {
  if (!is_finite(q)) {
    throw InvalidInputError(std::string(who) + ": non-finite quaternion component");
  }
  if (!is_unit(q, 1e-6)) {
    throw InvalidInputError(std::string(who) + ": quaternion is not unit norm");
  }
}

}  // namespace

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 normalized(const Vec3& a) {
  if (!is_finite(a)) {
    throw InvalidInputError("normalized: non-finite vector component");
  }
  const double n = norm(a);
  if (n < 1e-12) {
    throw InvalidInputError("normalized: zero-length vector");
  }
  return a * (1.0 / n);
}

bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quaternion conjugate(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

double dot(const Quaternion& a, const Quaternion& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

double norm(const Quaternion& q) { return std::sqrt(dot(q, q)); }

Quaternion normalized(const Quaternion& q) {
  if (!is_finite(q)) {
    throw InvalidInputError("normalized: non-finite quaternion component");
  }
  const double n = norm(q);
  if (n < 1e-12) {
    throw InvalidInputError("normalized: zero-norm quaternion");
  }
  const double inv = 1.0 / n;
  return {q.w * inv, q.x * inv, q.y * inv, q.z * inv};
}

bool is_finite(const Quaternion& q) {
  return std::isfinite(q.w) && std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(q.z);
}

bool is_unit(const Quaternion& q, double tol) {
  return is_finite(q) && std::abs(dot(q, q) - 1.0) <= tol;
}

Vec3 rotate(const Quaternion& q, const Vec3& v) {
  // v + 2w (qv x v) + 2 qv x (qv x v), cheaper than the full sandwich product.
  const Vec3 qv{q.x, q.y, q.z};
  const Vec3 t = cross(qv, v) * 2.0;
  return v + t * q.w + cross(qv, t);
}

Quaternion from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 u = normalized(axis);
  const double h = 0.5 * angle;
  const double s = std::sin(h);
  return {std::cos(h), u.x * s, u.y * s, u.z * s};
}

Quaternion heading_quaternion(double yaw) {
  // Leftward-positive heading: forward (0,1,0) maps to (sin yaw, cos yaw, 0),
  // which is a right-hand rotation about +Z by -yaw.
  return from_axis_angle({0.0, 0.0, 1.0}, -yaw);
}

Vec3 bearing_direction(double azimuth, double elevation) {
  const double c = std::cos(elevation);
  return {std::sin(azimuth) * c, std::cos(azimuth) * c, std::sin(elevation)};
}

double angular_distance(const Quaternion& q1, const Quaternion& q2) {
  if (!is_finite(q1) || !is_finite(q2)) {
    throw InvalidInputError("angular_distance: non-finite quaternion component");
  }
  const double d = std::clamp(std::abs(dot(q1, q2)), 0.0, 1.0);
  return 2.0 * std::acos(d);
}

Quaternion slerp(const Quaternion& a, const Quaternion& b, double u) {
  Quaternion q = b;
  double d = dot(a, b);
  if (d < 0.0) {
    q = {-b.w, -b.x, -b.y, -b.z};
    d = -d;
  }
  d = std::clamp(d, -1.0, 1.0);
  const double omega = std::acos(d);
  if (omega < 1e-10) {
    // Orientations effectively coincide; lerp + renormalize is exact enough.
    Quaternion r{a.w + (q.w - a.w) * u, a.x + (q.x - a.x) * u,
                 a.y + (q.y - a.y) * u, a.z + (q.z - a.z) * u};
    return normalized(r);
  }
  const double so = std::sin(omega);
  const double ka = std::sin((1.0 - u) * omega) / so;
  const double kb = std::sin(u * omega) / so;
  return normalized(Quaternion{a.w * ka + q.w * kb, a.x * ka + q.x * kb,
                               a.y * ka + q.y * kb, a.z * ka + q.z * kb});
}

Quaternion slerp_step(const Quaternion& current, const Quaternion& target,
                      double max_step) {
  require_unit(current, "slerp_step");
  require_unit(target, "slerp_step");
  if (!(max_step >= 0.0)) {
    throw InvalidInputError("slerp_step: max_step must be >= 0");
  }
  const double d = angular_distance(current, target);
  if (d <= max_step) {
    return target;
  }
  return slerp(current, target, max_step / d);
}

Bearing bearing_of(const Quaternion& head_orientation, const Vec3& world_point,
                   const Vec3& head_position) {
  require_unit(head_orientation, "bearing_of");
  if (!is_finite(world_point) || !is_finite(head_position)) {
    throw InvalidInputError("bearing_of: non-finite position");
  }
  const Vec3 v = world_point - head_position;
  if (norm(v) < 1e-12) {
    throw InvalidInputError("bearing_of: point coincides with head position");
  }
  const Vec3 local = rotate(conjugate(head_orientation), v);
  double az = std::atan2(local.x, local.y);
  if (az <= -kPi) {
    az += 2.0 * kPi;  // keep azimuth in (-pi, pi]
  }
  const double horiz = std::hypot(local.x, local.y);
  const double el = std::atan2(local.z, horiz);
  return {az, el};
}

namespace {

// Orthonormal basis (columns = world images of local left/forward/up) to a
// unit quaternion; Shepperd's method.
Quaternion from_basis(const Vec3& left, const Vec3& fwd, const Vec3& up) {
  const double m00 = left.x, m01 = fwd.x, m02 = up.x;
  const double m10 = left.y, m11 = fwd.y, m12 = up.y;
  const double m20 = left.z, m21 = fwd.z, m22 = up.z;
  const double trace = m00 + m11 + m22;
  Quaternion q;
  if (trace > 0.0) {
    const double s = std::sqrt(trace + 1.0) * 2.0;
    q.w = 0.25 * s;
    q.x = (m21 - m12) / s;
    q.y = (m02 - m20) / s;
    q.z = (m10 - m01) / s;
  } else if (m00 > m11 && m00 > m22) {
    const double s = std::sqrt(1.0 + m00 - m11 - m22) * 2.0;
    q.w = (m21 - m12) / s;
    q.x = 0.25 * s;
    q.y = (m01 + m10) / s;
    q.z = (m02 + m20) / s;
  } else if (m11 > m22) {
    const double s = std::sqrt(1.0 + m11 - m00 - m22) * 2.0;
    q.w = (m02 - m20) / s;
    q.x = (m01 + m10) / s;
    q.y = 0.25 * s;
    q.z = (m12 + m21) / s;
  } else {
    const double s = std::sqrt(1.0 + m22 - m00 - m11) * 2.0;
    q.w = (m10 - m01) / s;
    q.x = (m02 + m20) / s;
    q.y = (m12 + m21) / s;
    q.z = 0.25 * s;
  }
  return normalized(q);
}

}  // namespace

Quaternion look_rotation(const Vec3& from, const Vec3& to, const Vec3& world_up) {
  if (!is_finite(from) || !is_finite(to) || !is_finite(world_up)) {
    throw InvalidInputError("look_rotation: non-finite input");
  }
  const Vec3 diff = to - from;
  if (norm(diff) < 1e-12) {
    throw InvalidInputError("look_rotation: from and to coincide");
  }
  const Vec3 f = normalized(diff);
  const Vec3 up = normalized(world_up);
  Vec3 left = cross(f, up);
  if (norm(left) < 1e-9) {
    // Looking along world_up: fix roll as a pure pitch from the +Y heading.
    const double sign = dot(f, up) >= 0.0 ? -1.0 : 1.0;
    left = cross(f, Vec3{0.0, sign, 0.0});
  }
  left = normalized(left);
  const Vec3 up_local = cross(left, f);
  return from_basis(left, f, up_local);
}

}  // namespace virac

#pragma once

// Quaternion algebra, the angular-distance metric, bounded-rate head
// kinematics and bearing geometry used by every other component.
//
// Frame convention (fixed project-wide, asserted in tests):
//   head-local forward = +Y, up = +Z, left = +X  (right-handed).
// Bearings are head-local: azimuth positive to the left, elevation positive
// upward. Headings (body facing_yaw) use the same sign convention, measured
// from world +Y.

#include <optional>

#include "virac/errors.hpp"

namespace virac {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

Vec3 operator+(const Vec3& a, const Vec3& b);
Vec3 operator-(const Vec3& a, const Vec3& b);
Vec3 operator*(const Vec3& a, double s);
double dot(const Vec3& a, const Vec3& b);
Vec3 cross(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);
// Throws InvalidInputError on (near-)zero vectors.
Vec3 normalized(const Vec3& a);
bool is_finite(const Vec3& a);

// Unit quaternion encoding a head orientation. Component order is (w,x,y,z)
// everywhere, including file formats. q and -q denote the same orientation;
// all consumers of the type are sign-invariant.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {}; }
};

Quaternion operator*(const Quaternion& a, const Quaternion& b);
Quaternion conjugate(const Quaternion& q);
double dot(const Quaternion& a, const Quaternion& b);
double norm(const Quaternion& q);
// Throws InvalidInputError on non-finite or near-zero input.
Quaternion normalized(const Quaternion& q);
bool is_finite(const Quaternion& q);
bool is_unit(const Quaternion& q, double tol = 1e-9);

// Rotation of a vector by a unit quaternion (q v q*).
Vec3 rotate(const Quaternion& q, const Vec3& v);

// axis need not be unit length; angle in radians, right-hand rule.
Quaternion from_axis_angle(const Vec3& axis, double angle);

// Orientation of a body facing `yaw` radians leftward of world +Y, upright.
// Matches the bearing azimuth sign convention.
Quaternion heading_quaternion(double yaw);

// Head-local direction of a point at the given bearing (unit vector).
Vec3 bearing_direction(double azimuth, double elevation);

// Head-local bearing of a direction or point.
struct Bearing {
  double azimuth = 0.0;    // radians, (-pi, pi], positive = leftward
  double elevation = 0.0;  // radians, [-pi/2, pi/2], positive = upward
};

// The agent's head: current orientation, rate limit, and the orientation it
// is currently rotating toward (absent = hold).
struct HeadState {
  Quaternion orientation;
  double max_angular_velocity = 2.5;  // rad/s, must be > 0
  std::optional<Quaternion> target;
};

// Angular distance between two orientations: 2*acos(|dot(q1,q2)|), with the
// dot product clamped into [0,1] before acos so drift at |dot| ~ 1 cannot
// produce NaN. Result in [0, pi]; sign-invariant in both arguments.
// Throws InvalidInputError on non-finite components.
double angular_distance(const Quaternion& q1, const Quaternion& q2);

// One bounded rotation step from `current` toward `target` along the
// shortest geodesic. Returns `target` when it is within `max_step` radians;
// otherwise the point exactly `max_step` from `current`. `target` is
// sign-flipped first when dot < 0 so the short arc is taken.
Quaternion slerp_step(const Quaternion& current, const Quaternion& target,
                      double max_step);

// Constant-speed geodesic interpolation, u in [0,1], sign-aligned.
Quaternion slerp(const Quaternion& a, const Quaternion& b, double u);

// Bearing of `world_point` as seen by a head at `head_position` with the
// given orientation. Throws InvalidInputError when the points coincide.
Bearing bearing_of(const Quaternion& head_orientation, const Vec3& world_point,
                   const Vec3& head_position);

// Unit quaternion whose local forward (+Y) points from -> to, with roll
// minimized against world_up. When the direction is parallel to world_up the
// roll is fixed so the pose equals a pure pitch from the world +Y heading.
// Throws InvalidInputError when from == to.
Quaternion look_rotation(const Vec3& from, const Vec3& to,
                         const Vec3& world_up = {0.0, 0.0, 1.0});

}  // namespace virac

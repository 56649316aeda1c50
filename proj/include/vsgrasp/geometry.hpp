#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

namespace vsgrasp {

using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix3 = Eigen::Matrix3d;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Rigid-body transform: rotation (orthonormal, det +1) plus translation in metres.
struct Pose {
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  static Pose identity() { return Pose{}; }

  static Pose from_translation(const Vector3& t) {
    return Pose{Matrix3::Identity(), t};
  }

  static Pose rot_x(double angle) {
    return Pose{Eigen::AngleAxisd(angle, Vector3::UnitX()).toRotationMatrix(),
                Vector3::Zero()};
  }
  static Pose rot_y(double angle) {
    return Pose{Eigen::AngleAxisd(angle, Vector3::UnitY()).toRotationMatrix(),
                Vector3::Zero()};
  }
  static Pose rot_z(double angle) {
    return Pose{Eigen::AngleAxisd(angle, Vector3::UnitZ()).toRotationMatrix(),
                Vector3::Zero()};
  }

  /// Map a point from this frame to the parent frame.
  Vector3 operator*(const Vector3& p) const { return rotation * p + translation; }
};

/// Body velocity of a rigid frame: linear (m/s) and angular (rad/s) parts.
struct SpatialVelocity {
  Vector3 linear = Vector3::Zero();
  Vector3 angular = Vector3::Zero();

  static SpatialVelocity zero() { return SpatialVelocity{}; }

  static SpatialVelocity from_vector(const Vector6& v) {
    return SpatialVelocity{v.head<3>(), v.tail<3>()};
  }

  Vector6 to_vector() const {
    Vector6 v;
    v << linear, angular;
    return v;
  }
};

/// Position plus XYZ (roll, pitch, yaw) angles. Roll is applied about x first,
/// then pitch about the rotated y, then yaw about the rotated z.
struct RpyPose {
  double x = 0, y = 0, z = 0;
  double roll = 0, pitch = 0, yaw = 0;
};

inline Matrix3 skew(const Vector3& v) {
  Matrix3 s;
  s << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return s;
}

inline Pose compose(const Pose& a, const Pose& b) {
  return Pose{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

inline Pose inverse(const Pose& a) {
  Matrix3 rt = a.rotation.transpose();
  return Pose{rt, -(rt * a.translation)};
}

/// Rotation-vector (angle*axis) form of R, zero for the identity.
inline Vector3 so3_log(const Matrix3& r) {
  Eigen::AngleAxisd aa(r);
  if (aa.angle() < 1e-12) return Vector3::Zero();
  return aa.angle() * aa.axis();
}

inline Matrix3 so3_exp(const Vector3& w) {
  double angle = w.norm();
  if (angle < 1e-12) return Matrix3::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

/// Exact integration of a constant body twist over dt: returns exp(dt * v) as a Pose.
inline Pose se3_exp(const SpatialVelocity& v, double dt) {
  Vector3 w = v.angular * dt;
  Vector3 u = v.linear * dt;
  double angle = w.norm();
  Matrix3 r = so3_exp(w);
  if (angle < 1e-12) return Pose{r, u};
  Vector3 axis = w / angle;
  Matrix3 ax = skew(axis);
  // left Jacobian of SO(3)
  Matrix3 vmat = Matrix3::Identity()
               + ((1.0 - std::cos(angle)) / angle) * ax
               + ((angle - std::sin(angle)) / angle) * ax * ax;
  return Pose{r, vmat * u};
}

/// Map a body velocity of the camera frame to the body velocity of the
/// end-effector frame, both rigidly connected, with `offset` the camera pose
/// expressed in the end-effector frame. Classic 6x6 adjoint:
///   [ R  [t]x R ]
///   [ 0     R   ]
inline SpatialVelocity velocity_transform(const Pose& offset, const SpatialVelocity& v) {
  Vector3 ang = offset.rotation * v.angular;
  Vector3 lin = offset.rotation * v.linear + offset.translation.cross(ang);
  return SpatialVelocity{lin, ang};
}

/// 6-vector (translation; angle*axis) of a relative pose. Zero iff identity.
inline Vector6 pose_error_vector(const Pose& rel) {
  Vector6 e;
  e << rel.translation, so3_log(rel.rotation);
  return e;
}

inline Pose to_pose(const RpyPose& p) {
  Matrix3 r = (Eigen::AngleAxisd(p.roll, Vector3::UnitX())
             * Eigen::AngleAxisd(p.pitch, Vector3::UnitY())
             * Eigen::AngleAxisd(p.yaw, Vector3::UnitZ())).toRotationMatrix();
  return Pose{r, Vector3(p.x, p.y, p.z)};
}

/// Inverse of to_pose; undefined at pitch = +/- pi/2.
inline RpyPose to_rpy(const Pose& p) {
  const Matrix3& r = p.rotation;
  RpyPose out;
  out.x = p.translation.x();
  out.y = p.translation.y();
  out.z = p.translation.z();
  out.pitch = std::asin(std::clamp(r(0, 2), -1.0, 1.0));
  out.yaw = std::atan2(-r(0, 1), r(0, 0));
  out.roll = std::atan2(-r(1, 2), r(2, 2));
  return out;
}

/// Frobenius check that rotation is orthonormal with det +1.
inline bool is_valid_rotation(const Matrix3& r, double tol = 1e-9) {
  return (r.transpose() * r - Matrix3::Identity()).norm() < tol
      && std::abs(r.determinant() - 1.0) < tol;
}

}  // namespace vsgrasp

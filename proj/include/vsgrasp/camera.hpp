#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "vsgrasp/geometry.hpp"
#include "vsgrasp/random.hpp"

namespace vsgrasp {

struct BehindCamera : std::runtime_error {
  BehindCamera() : std::runtime_error("point is behind the camera") {}
};

struct SingularSystem : std::runtime_error {
  SingularSystem() : std::runtime_error("back-projection system is singular") {}
};

using Pixel = Eigen::Vector2d;

/// Pinhole intrinsics plus the depth sensor's usable range.
struct CameraModel {
  double focal_px = 600.0;
  Pixel principal = Pixel(320.0, 240.0);
  int width = 640;
  int height = 480;
  double depth_min = 0.16;
  double depth_max = 2.0;

  Eigen::Matrix3d intrinsics() const {
    Eigen::Matrix3d k;
    k << focal_px, 0, principal.x(),
         0, focal_px, principal.y(),
         0, 0, 1;
    return k;
  }

  bool contains(const Pixel& p) const {
    return p.x() >= 0 && p.x() < width && p.y() >= 0 && p.y() < height;
  }
};

/// 3x4 projection matrix with named partition blocks:
///   [ A  B  C ]      A 2x2, B 2x1, C 2x1,
///   [ D  E  F ]      D 1x2, E and F scalar.
struct CameraMatrix {
  Eigen::Matrix<double, 3, 4> m = Eigen::Matrix<double, 3, 4>::Zero();

  Eigen::Matrix2d block_a() const { return m.block<2, 2>(0, 0); }
  Eigen::Vector2d block_b() const { return m.block<2, 1>(0, 2); }
  Eigen::Vector2d block_c() const { return m.block<2, 1>(0, 3); }
  Eigen::RowVector2d block_d() const { return m.block<1, 2>(2, 0); }
  double block_e() const { return m(2, 2); }
  double block_f() const { return m(2, 3); }
};

/// Depth frame with an explicit validity mask. Values in metres; pixels
/// outside the sensor range carry valid == false and are serialized as NaN.
struct DepthImage {
  int width = 0;
  int height = 0;
  double depth_min = 0;
  double depth_max = 0;
  Eigen::ArrayXXd values;          // height x width
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;

  bool valid_at(int u, int v) const {
    return u >= 0 && u < width && v >= 0 && v < height && valid(v, u);
  }
  double at(int u, int v) const { return values(v, u); }
};

struct ProjectedPoint {
  Pixel pixel;
  double depth = 0;  // distance along the optical axis, metres
};

/// Projection matrix for a camera at `pose` (camera frame expressed in the
/// world frame). With the identity pose this is intrinsics * [I | 0] and the
/// matrix maps camera-frame points.
CameraMatrix camera_matrix(const CameraModel& cam, const Pose& pose);

/// Pinhole projection of a world point; throws BehindCamera for Z <= 1e-6 m.
ProjectedPoint project(const CameraModel& cam, const Pose& pose, const Vector3& point);

/// Recover (X, Y) in the matrix's source frame from a pixel and a known Z.
Eigen::Vector2d solve_xy(const CameraMatrix& cm, const Pixel& pixel, double z);

/// Apply the sensor range model to a ground-truth depth grid: out-of-range
/// pixels become invalid, in-range ones optionally get zero-mean noise
/// (clamped back into range).
DepthImage sense_depth(const CameraModel& cam, const Eigen::ArrayXXd& true_depth,
                       double noise_sigma = 0.0, Rng* rng = nullptr);

}  // namespace vsgrasp

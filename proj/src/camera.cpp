#include "vsgrasp/camera.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace vsgrasp {

CameraMatrix camera_matrix(const CameraModel& cam, const Pose& pose) {
  const Pose inv = inverse(pose);
  Eigen::Matrix<double, 3, 4> ext;
  ext.block<3, 3>(0, 0) = inv.rotation;
  ext.block<3, 1>(0, 3) = inv.translation;
  CameraMatrix cm;
  cm.m = cam.intrinsics() * ext;
  return cm;
}

ProjectedPoint project(const CameraModel& cam, const Pose& pose, const Vector3& point) {
  const Pose inv = inverse(pose);
  const Vector3 pc = inv.rotation * point + inv.translation;
  if (pc.z() <= 1e-6) throw BehindCamera();
  ProjectedPoint out;
  out.pixel = Pixel(cam.focal_px * pc.x() / pc.z() + cam.principal.x(),
                    cam.focal_px * pc.y() / pc.z() + cam.principal.y());
  out.depth = pc.z();
  return out;
}

Eigen::Vector2d solve_xy(const CameraMatrix& cm, const Pixel& pixel, double z) {
  // Projection rows give  A(X;Y) + Bz + C = w p  and  D(X;Y) + Ez + F = w.
  // Eliminating the scale w:  (p D - A)(X;Y) = Bz + C - (Ez + F) p.
  Eigen::Matrix2d lhs = pixel * cm.block_d() - cm.block_a();
  Eigen::Vector2d rhs = cm.block_b() * z + cm.block_c()
                        - (cm.block_e() * z + cm.block_f()) * pixel;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(lhs, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smin = svd.singularValues()(1);
  const double smax = svd.singularValues()(0);
  if (smin <= 0 || smax / smin > 1e12) throw SingularSystem();
  return svd.solve(rhs);
}

DepthImage sense_depth(const CameraModel& cam, const Eigen::ArrayXXd& true_depth,
                       double noise_sigma, Rng* rng) {
  DepthImage img;
  img.height = static_cast<int>(true_depth.rows());
  img.width = static_cast<int>(true_depth.cols());
  img.depth_min = cam.depth_min;
  img.depth_max = cam.depth_max;
  img.values = Eigen::ArrayXXd::Zero(img.height, img.width);
  img.valid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
      img.height, img.width, false);
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      double d = true_depth(v, u);
      if (!std::isfinite(d) || d < cam.depth_min || d > cam.depth_max) continue;
      if (noise_sigma > 0 && rng) {
        d += rng->normal(noise_sigma);
        d = std::min(std::max(d, cam.depth_min), cam.depth_max);
      }
      img.values(v, u) = d;
      img.valid(v, u) = true;
    }
  }
  return img;
}

}  // namespace vsgrasp

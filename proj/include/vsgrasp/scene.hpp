#pragma once

#include <vector>

#include <Eigen/Core>

#include "vsgrasp/geometry.hpp"
#include "vsgrasp/random.hpp"

namespace vsgrasp {

inline constexpr int kDescriptorDim = 128;

/// Texture point on the object surface: position in the object frame and the
/// ground-truth descriptor a detector would report for it.
struct Anchor {
  Vector3 position = Vector3::Zero();
  Eigen::VectorXd descriptor;  // kDescriptorDim, unit norm
};

/// Planar object lying on the table: z fixed, roll = pitch = 0. The annotated
/// grasp lives in the object frame; clearance_width is the opening the fingers
/// must clear for the grasp to count.
struct SceneObject {
  Pose pose = Pose::identity();
  std::vector<Anchor> anchors;
  Vector3 grasp_center = Vector3::Zero();
  double grasp_axis_yaw = 0;
  double grasp_width = 0.10;
  double clearance_width = 0.06;
  double half_w = 0.06;  // anchor patch half extents, metres
  double half_h = 0.04;
};

/// Sensor imperfection knobs, all off at zero.
struct NoiseConfig {
  double pixel_sigma = 0;
  double descriptor_deg = 0;
  double outlier_fraction = 0;
  double depth_sigma = 0;
};

/// Object with `n` anchors sampled uniformly on a 2*half_w x 2*half_h patch,
/// each with a fixed random unit descriptor. Deterministic per seed.
inline SceneObject make_planar_object(int n, double half_w, double half_h,
                                      std::uint64_t seed) {
  SceneObject obj;
  obj.half_w = half_w;
  obj.half_h = half_h;
  Rng rng(mix_seed(seed, 17));
  obj.anchors.reserve(n);
  for (int i = 0; i < n; ++i) {
    Anchor a;
    a.position = Vector3(rng.uniform(-half_w, half_w), rng.uniform(-half_h, half_h), 0);
    a.descriptor = rng.unit_vector(kDescriptorDim);
    obj.anchors.push_back(std::move(a));
  }
  return obj;
}

}  // namespace vsgrasp

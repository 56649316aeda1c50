#pragma once

#include <optional>
#include <stdexcept>

#include <Eigen/Core>

#include "vsgrasp/camera.hpp"
#include "vsgrasp/geometry.hpp"
#include "vsgrasp/scene.hpp"

namespace vsgrasp {

struct ObjectNotVisible : std::runtime_error {
  ObjectNotVisible() : std::runtime_error("grasp center projects outside the image") {}
};

struct NoGraspFound : std::runtime_error {
  NoGraspFound() : std::runtime_error("no local maximum above the quality floor") {}
};

struct InvalidDepthAtGrasp : std::runtime_error {
  InvalidDepthAtGrasp() : std::runtime_error("no valid depth at the grasp pixel") {}
};

/// Per-pixel grasp grids: finger orientation phi in (-pi/2, pi/2], opening
/// width in metres, quality in [0, 1]. All three share dimensions.
struct GraspMap {
  Eigen::ArrayXXd phi;      // rows x cols = height x width
  Eigen::ArrayXXd width;
  Eigen::ArrayXXd quality;

  int height() const { return static_cast<int>(quality.rows()); }
  int width_px() const { return static_cast<int>(quality.cols()); }
};

/// One grasp hypothesis read out of a GraspMap at pixel (u, v).
struct Grasp {
  int u = 0;
  int v = 0;
  double phi = 0;
  double w = 0;
  double q = 0;
};

/// Grasp expressed in the observing camera frame. Roll and pitch are zero:
/// the fingers approach normal to the table.
struct GraspPose {
  Vector3 position = Vector3::Zero();
  double yaw = 0;
};

/// Stand-in for a learned grasp synthesizer: quality is a Gaussian bump
/// (sigma_px) centered on the projected grasp center, phi is the projected
/// grasp axis, width the object's annotated opening. Throws ObjectNotVisible
/// when the center does not project into the image.
GraspMap synthesize_grasp_map(const SceneObject& scene, const CameraModel& cam,
                              const Pose& cam_pose, double sigma_px = 15.0);

/// Best grasp in the map. Without a previous grasp: the global quality
/// maximum. With one: the strict-8-neighborhood local maximum nearest to it
/// in pixels (ties: higher q, then lower u, then lower v). Maxima at or below
/// q_min are ignored; NoGraspFound if none remain.
Grasp select_best_grasp(const GraspMap& g, const std::optional<Grasp>& previous,
                        double q_min = 0.2);

/// Back-project the grasp pixel through cm with Z = depth[s]; yaw = phi.
/// cm must map points in the camera's own frame (pose = identity).
GraspPose grasp_to_pose(const Grasp& g, const CameraMatrix& cm, const DepthImage& depth);

/// Relative pose that, when attained by the camera, places the end-effector
/// frame at the grasp frame: grasp pose composed with the hand-eye offset.
Pose desired_camera_pose(const GraspPose& grasp, const Pose& hand_eye);

}  // namespace vsgrasp

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>

#include "vsgrasp/camera.hpp"
#include "vsgrasp/features.hpp"
#include "vsgrasp/geometry.hpp"
#include "vsgrasp/grasp.hpp"

namespace vsgrasp {

struct TooFewFeatures : std::runtime_error {
  TooFewFeatures() : std::runtime_error("need at least 3 matched features") {}
};

struct DegenerateJacobian : std::runtime_error {
  DegenerateJacobian() : std::runtime_error("rank-deficient image Jacobian left residual error") {}
};

struct NoValidGoal : std::runtime_error {
  NoValidGoal() : std::runtime_error("fewer than 3 features survive goal prediction") {}
};

/// Pixel targets for IBVS, keyed by reference feature id, plus the fixed
/// interaction-matrix depth. world_points keeps each feature's reconstructed
/// 3D location so depth can optionally track forward kinematics.
struct IbvsGoal {
  std::map<int, Pixel> goal_pixels;
  double fixed_depth = 0.05;
  std::map<int, Vector3> world_points;
};

struct GainConfig {
  Vector6 lambda_p = (Vector6() << 1.5, 1.5, 1.5, 1.0, 1.0, 1.0).finished();
  double lambda_i = 1.0;
};

enum class Mode { PBVS, IBVS, GRASP, DONE };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::PBVS: return "PBVS";
    case Mode::IBVS: return "IBVS";
    case Mode::GRASP: return "GRASP";
    default: return "DONE";
  }
}

/// Everything the controller consumes in one cycle. depth may be empty
/// (width 0) on frames where no range image was rendered; sensed_distance is
/// the range at the tracked grasp pixel, NaN when the sensor has no reading.
struct Observation {
  double t = 0;
  int frame_id = 0;
  FeatureSet features;
  std::optional<GraspMap> grasp_map;
  DepthImage depth;
  double sensed_distance = std::numeric_limits<double>::quiet_NaN();
  Pose camera_pose;  // xi^0_c from kinematics
  Pose ee_pose;      // xi^0_e
};

struct ControlConfig {
  CameraModel camera;
  GainConfig gains;
  // xi^e_c: camera 6 cm behind the tool tip along the approach axis
  Pose hand_eye = Pose::from_translation(Vector3(0, 0, -0.06));
  double dt = 1.0 / 30;
  double switch_distance = 0.25;
  double fixed_depth = 0.05;
  bool use_kinematic_depth = false;
  double grasp_err_px = 2.0;
  int grasp_hold = 10;
  double tau = 0.15;
  double max_accel = 1.0;  // per-axis slew bound, units/s^2
  double goal_margin_scale = 1.5;
  double q_min = 0.2;
  double grasp_sigma_px = 15.0;
  bool ideal_correspondence = false;
  MatchConfig match;
};

/// Controller memory across cycles. stored_ref/stored_pose/goal are written
/// exactly once, at the PBVS->IBVS capture, and never mutated afterwards.
struct ControllerState {
  Mode mode = Mode::PBVS;
  bool captured = false;
  int capture_count = 0;
  FeatureSet stored_ref;
  Pose stored_pose;
  IbvsGoal goal;
  Grasp final_grasp;
  std::optional<Grasp> tracked;
  SpatialVelocity last_cmd;
  int hold_count = 0;
  bool fault = false;
  // per-step diagnostics for logging
  double last_err_px = std::numeric_limits<double>::quiet_NaN();
  int last_n_matches = 0;
  std::map<int, Pixel> last_current;  // matched current pixels by ref id
};

/// Proportional law on the 6-vector pose error of the desired-camera pose.
SpatialVelocity pbvs_step(const Pose& rel, const GainConfig& gains);

/// 2x6 image Jacobian of a point feature at the given pixel and depth,
/// mapping camera spatial velocity to pixel velocity.
Eigen::Matrix<double, 2, 6> interaction_matrix(const Pixel& pixel, double z,
                                               const CameraModel& cam);

/// One IBVS cycle: stack per-feature Jacobians over ids shared by current
/// and goal, solve nu_c = -lambda * pinv(J) * (f - f*), return the command
/// mapped into the end-effector frame. depth_override supplies per-id depths
/// (forward-kinematic update); otherwise goal.fixed_depth is used for all.
SpatialVelocity ibvs_step(const std::map<int, Pixel>& current, const IbvsGoal& goal,
                          const GainConfig& gains, const Pose& hand_eye,
                          const CameraModel& cam,
                          const std::map<int, double>* depth_override = nullptr);

/// Where the reference features will appear once the camera reaches
/// grasp_cam_pose: back-project each with its stored depth, lift through
/// ref_pose to the world, re-project at the grasp camera pose. Features
/// landing behind the camera or outside margin_scale times the image bounds
/// are dropped. cm_at_ref must map reference-camera-frame points (the stored
/// z values are depths in that frame).
IbvsGoal predict_goal_features(const FeatureSet& ref, const CameraMatrix& cm_at_ref,
                               const Pose& ref_pose, const Pose& grasp_cam_pose,
                               const CameraModel& cam, double margin_scale = 1.5,
                               double fixed_depth = 0.05);

/// First-order low-pass (alpha = dt / (dt + tau)) followed by a per-axis
/// slew limit of max_accel * dt.
SpatialVelocity continuity_filter(const SpatialVelocity& prev, const SpatialVelocity& raw,
                                  double dt, const ControlConfig& cfg);

/// The switching controller: PBVS on the tracked grasp while sensed range
/// stays at or above switch_distance; one-shot reference capture and goal
/// prediction on the first crossing; IBVS after, with the grasp trigger
/// arming GRASP once the mean pixel error stays under grasp_err_px for
/// grasp_hold cycles. Match or servo failures command exactly zero velocity
/// and raise state.fault for that cycle.
std::pair<SpatialVelocity, ControllerState> switch_and_step(
    const Observation& obs, const ControllerState& state, const ControlConfig& cfg);

}  // namespace vsgrasp

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vsgrasp/camera.hpp"
#include "vsgrasp/geometry.hpp"
#include "vsgrasp/random.hpp"
#include "vsgrasp/scene.hpp"
#include "vsgrasp/servo.hpp"

namespace vsgrasp {

/// How the object moves between control cycles. random_planar alternates
/// velocity bursts with pauses inside a square zone, the way a hand nudges a
/// part around; scripted applies exact jumps and constant-velocity segments.
struct MotionModel {
  enum class Kind { Static, RandomPlanar, Scripted };

  struct Jump {
    int step = 0;
    double dx = 0, dy = 0, dyaw = 0;
  };
  struct Segment {
    int start_step = 0;
    int end_step = 0;
    double vx = 0, vy = 0, wz = 0;
  };

  Kind kind = Kind::Static;
  double speed = 0.03;  // m/s bound
  Eigen::Vector2d zone_center = Eigen::Vector2d::Zero();
  double zone_half = 0.15;
  double burst_min = 0.5, burst_max = 1.5;  // s
  double pause_min = 1.5, pause_max = 3.0;  // s
  std::vector<Jump> jumps;
  std::vector<Segment> segments;
};

/// Kinematic world: the object on the table plane and a velocity-driven
/// end-effector rig carrying the camera.
struct World {
  SceneObject object;
  Pose ee_pose;     // xi^0_e
  Pose hand_eye;    // xi^e_c
  MotionModel motion;
  Rng motion_rng{0};
  double t = 0;
  int step_count = 0;
  // random_planar phase state
  Eigen::Vector2d obj_vel = Eigen::Vector2d::Zero();
  double phase_left = 0;
  bool in_pause = true;

  Pose camera_pose() const { return compose(ee_pose, hand_eye); }
};

struct LogRecord {
  double t = 0;
  Mode mode = Mode::PBVS;
  double mean_err_px = std::numeric_limits<double>::quiet_NaN();
  int n_matches = 0;
  Vector6 cmd = Vector6::Zero();
};

struct TrialResult {
  bool success = false;
  int steps = 0;
  double final_err_px = std::numeric_limits<double>::quiet_NaN();
  std::string cause;  // "grasped", "tolerance", "MatchFailure", "Timeout"
  double pos_err_m = std::numeric_limits<double>::quiet_NaN();
  double yaw_err_rad = std::numeric_limits<double>::quiet_NaN();
  std::vector<LogRecord> log;
  std::map<int, std::vector<Pixel>> tracks;  // per goal feature, when recorded
  IbvsGoal goal;
  int capture_count = 0;
};

struct TrialConfig {
  int max_steps = 3000;
  double pos_tol = 0.01;
  double yaw_tol = 5.0 * M_PI / 180.0;
  int fault_abort = 150;  // consecutive faulted cycles before giving up
  bool record_tracks = false;
};

/// Full description of one experiment setup; built by the scenario parser or
/// directly in tests.
struct Scenario {
  CameraModel camera;
  NoiseConfig noise;
  ControlConfig control;
  MotionModel motion;
  TrialConfig trial;
  // object
  int n_anchors = 60;
  double patch_half_w = 0.06;
  double patch_half_h = 0.04;
  std::uint64_t object_seed = 7;
  Vector3 object_position = Vector3::Zero();
  double object_yaw = 0;
  double grasp_axis_yaw = 0;
  double grasp_width = 0.10;
  double clearance_width = 0.06;
  // end-effector start pose (camera pointing down), plus per-trial jitter
  Vector3 start_position = Vector3(0, 0, 0.4);
  double start_yaw = 0;
  double start_jitter_xy = 0;
  double start_jitter_z = 0;
  double start_jitter_yaw = 0;
};

struct CampaignSummary {
  struct TrialRow {
    std::uint64_t seed = 0;
    bool success = false;
    int steps = 0;
    std::string cause;
    double final_err_px = std::numeric_limits<double>::quiet_NaN();
    double pos_err_m = std::numeric_limits<double>::quiet_NaN();
    double yaw_err_rad = std::numeric_limits<double>::quiet_NaN();
  };
  int n_trials = 0;
  int successes = 0;
  double success_rate = 0;
  double mean_steps_success = 0;
  std::map<std::string, int> causes;
  std::vector<TrialRow> trials;
};

/// Build the world a trial starts from; the seed drives start-pose jitter
/// and the motion stream.
World make_world(const Scenario& scn, std::uint64_t seed);

/// Advance one control period: integrate the end-effector under its body
/// twist exactly, then move the object per its motion model.
void step_world(World& world, const SpatialVelocity& cmd, double dt);

/// Render what the sensors deliver at the current world state. The depth
/// image is only rendered when requested; the range estimate at the tracked
/// pixel is always filled when the object is in range.
Observation observe(const World& world, const CameraModel& cam, const NoiseConfig& noise,
                    Rng& rng, const std::optional<Pixel>& tracked, bool need_depth,
                    double grasp_sigma_px = 15.0);

/// One closed-loop grasp attempt, deterministic per seed.
TrialResult run_trial(const Scenario& scn, std::uint64_t seed);

/// Sequential trials, summarized in seed order. The sink, when given, sees
/// every TrialResult as it completes (index, result).
using TrialSink = std::function<void(size_t, const TrialResult&)>;
CampaignSummary run_campaign(const Scenario& scn, const std::vector<std::uint64_t>& seeds,
                             const TrialSink& sink = {});

}  // namespace vsgrasp

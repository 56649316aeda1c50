#include "vsgrasp/sim.hpp"

#include <algorithm>
#include <cmath>

#include "vsgrasp/features.hpp"
#include "vsgrasp/grasp.hpp"

namespace vsgrasp {
namespace {

void advance_object(World& w, double dt) {
  auto& m = w.motion;
  switch (m.kind) {
    case MotionModel::Kind::Static:
      return;
    case MotionModel::Kind::RandomPlanar: {
      if (w.phase_left <= 0) {
        w.in_pause = !w.in_pause;
        if (w.in_pause) {
          w.phase_left = w.motion_rng.uniform(m.pause_min, m.pause_max);
          w.obj_vel.setZero();
        } else {
          w.phase_left = w.motion_rng.uniform(m.burst_min, m.burst_max);
          const double ang = w.motion_rng.uniform(0.0, 2.0 * M_PI);
          const double sp = w.motion_rng.uniform(0.5, 1.0) * m.speed;
          w.obj_vel = sp * Eigen::Vector2d(std::cos(ang), std::sin(ang));
        }
      }
      Eigen::Vector2d pos = w.object.pose.translation.head<2>();
      // reflect at the zone boundary so the object stays reachable
      for (int i = 0; i < 2; ++i) {
        const double next = pos(i) + w.obj_vel(i) * dt;
        if (std::abs(next - m.zone_center(i)) > m.zone_half) w.obj_vel(i) = -w.obj_vel(i);
      }
      pos += w.obj_vel * dt;
      w.object.pose.translation.head<2>() = pos;
      w.phase_left -= dt;
      return;
    }
    case MotionModel::Kind::Scripted: {
      for (const auto& j : m.jumps) {
        if (j.step == w.step_count) {
          w.object.pose.translation.x() += j.dx;
          w.object.pose.translation.y() += j.dy;
          w.object.pose.rotation = w.object.pose.rotation * Pose::rot_z(j.dyaw).rotation;
        }
      }
      for (const auto& s : m.segments) {
        if (w.step_count >= s.start_step && w.step_count < s.end_step) {
          w.object.pose.translation.x() += s.vx * dt;
          w.object.pose.translation.y() += s.vy * dt;
          w.object.pose.rotation = w.object.pose.rotation * Pose::rot_z(s.wz * dt).rotation;
        }
      }
      return;
    }
  }
}

// Depth along the optical axis where the pixel ray meets the table plane
// z = plane_z; negative or backward intersections count as no return.
double ray_plane_depth(const CameraModel& cam, const Pose& cam_pose, double plane_z,
                       double u, double v) {
  const Vector3 dir_c((u - cam.principal.x()) / cam.focal_px,
                      (v - cam.principal.y()) / cam.focal_px, 1.0);
  const double dz = (cam_pose.rotation * dir_c).z();
  if (std::abs(dz) < 1e-12) return std::numeric_limits<double>::infinity();
  const double s = (plane_z - cam_pose.translation.z()) / dz;
  return s > 0 ? s : std::numeric_limits<double>::infinity();
}

Eigen::ArrayXXd render_plane_depth(const CameraModel& cam, const Pose& cam_pose,
                                   double plane_z) {
  const Eigen::Matrix3d r = cam_pose.rotation;
  const double oz = cam_pose.translation.z();
  Eigen::ArrayXd xbar =
      (Eigen::ArrayXd::LinSpaced(cam.width, 0, cam.width - 1) - cam.principal.x()) / cam.focal_px;
  Eigen::ArrayXd ybar =
      (Eigen::ArrayXd::LinSpaced(cam.height, 0, cam.height - 1) - cam.principal.y()) / cam.focal_px;
  // dz(v,u) = r20*xbar(u) + r21*ybar(v) + r22
  Eigen::ArrayXXd dz = (Eigen::VectorXd::Ones(cam.height) * (r(2, 0) * xbar).matrix().transpose()).array()
                     + ((r(2, 1) * ybar).matrix() * Eigen::RowVectorXd::Ones(cam.width)).array()
                     + r(2, 2);
  Eigen::ArrayXXd depth = (plane_z - oz) / dz;
  return (depth > 0.0).select(depth, std::numeric_limits<double>::infinity());
}

}  // namespace

World make_world(const Scenario& scn, std::uint64_t seed) {
  World w;
  w.object = make_planar_object(scn.n_anchors, scn.patch_half_w, scn.patch_half_h,
                                scn.object_seed);
  w.object.pose = Pose::rot_z(scn.object_yaw);
  w.object.pose.translation = scn.object_position;
  w.object.grasp_axis_yaw = scn.grasp_axis_yaw;
  w.object.grasp_width = scn.grasp_width;
  w.object.clearance_width = scn.clearance_width;

  Rng start_rng(mix_seed(seed, 3));
  Vector3 start = scn.start_position;
  double yaw = scn.start_yaw;
  if (scn.start_jitter_xy > 0) {
    start.x() += start_rng.uniform(-scn.start_jitter_xy, scn.start_jitter_xy);
    start.y() += start_rng.uniform(-scn.start_jitter_xy, scn.start_jitter_xy);
  }
  if (scn.start_jitter_z > 0)
    start.z() += start_rng.uniform(-scn.start_jitter_z, scn.start_jitter_z);
  if (scn.start_jitter_yaw > 0)
    yaw += start_rng.uniform(-scn.start_jitter_yaw, scn.start_jitter_yaw);

  // tool frame z points down at the table; camera shares the tool axes
  w.ee_pose = compose(Pose::rot_x(M_PI), Pose::rot_z(yaw));
  w.ee_pose.translation = start;
  w.hand_eye = scn.control.hand_eye;
  w.motion = scn.motion;
  w.motion.zone_center = scn.object_position.head<2>();
  w.motion_rng = Rng(mix_seed(seed, 1));
  return w;
}

void step_world(World& world, const SpatialVelocity& cmd, double dt) {
  world.ee_pose = compose(world.ee_pose, se3_exp(cmd, dt));
  advance_object(world, dt);
  world.t += dt;
  world.step_count += 1;
}

Observation observe(const World& world, const CameraModel& cam, const NoiseConfig& noise,
                    Rng& rng, const std::optional<Pixel>& tracked, bool need_depth,
                    double grasp_sigma_px) {
  Observation obs;
  obs.t = world.t;
  obs.frame_id = world.step_count;
  obs.camera_pose = world.camera_pose();
  obs.ee_pose = world.ee_pose;
  obs.features = detect(world.object, cam, obs.camera_pose, noise, rng, world.step_count);
  try {
    obs.grasp_map = synthesize_grasp_map(world.object, cam, obs.camera_pose, grasp_sigma_px);
  } catch (const ObjectNotVisible&) {
    obs.grasp_map.reset();
  }

  const double plane_z = world.object.pose.translation.z();
  if (need_depth) {
    const Eigen::ArrayXXd true_depth = render_plane_depth(cam, obs.camera_pose, plane_z);
    obs.depth = sense_depth(cam, true_depth, noise.depth_sigma, &rng);
  }

  // range estimate at the tracked grasp pixel (fallback: projected grasp center)
  std::optional<Pixel> probe = tracked;
  if (!probe) {
    try {
      const ProjectedPoint c =
          project(cam, obs.camera_pose, world.object.pose * world.object.grasp_center);
      if (cam.contains(c.pixel)) probe = c.pixel;
    } catch (const BehindCamera&) {
    }
  }
  if (probe) {
    const int u = static_cast<int>(probe->x());
    const int v = static_cast<int>(probe->y());
    if (obs.depth.width > 0) {
      if (obs.depth.valid_at(u, v)) obs.sensed_distance = obs.depth.at(u, v);
    } else {
      const double d = ray_plane_depth(cam, obs.camera_pose, plane_z, probe->x(), probe->y());
      if (d >= cam.depth_min && d <= cam.depth_max) obs.sensed_distance = d;
    }
  }
  return obs;
}

TrialResult run_trial(const Scenario& scn, std::uint64_t seed) {
  World world = make_world(scn, seed);
  Rng sense_rng(mix_seed(seed, 2));
  ControlConfig cfg = scn.control;
  cfg.camera = scn.camera;
  cfg.match.ransac.seed = mix_seed(seed, 4);

  ControllerState state;
  TrialResult result;
  int consecutive_faults = 0;

  for (int step = 0; step < scn.trial.max_steps; ++step) {
    std::optional<Pixel> tracked;
    if (state.tracked) tracked = Pixel(state.tracked->u, state.tracked->v);
    const bool need_depth = state.mode == Mode::PBVS;
    Observation obs = observe(world, scn.camera, scn.noise, sense_rng, tracked, need_depth,
                              cfg.grasp_sigma_px);
    auto [cmd, next] = switch_and_step(obs, state, cfg);
    state = std::move(next);

    LogRecord rec;
    rec.t = obs.t;
    rec.mode = state.mode;
    rec.mean_err_px = state.last_err_px;
    rec.n_matches = state.last_n_matches;
    rec.cmd = cmd.to_vector();
    result.log.push_back(rec);
    if (scn.trial.record_tracks && state.captured) {
      for (const auto& [id, px] : state.last_current) {
        if (state.goal.goal_pixels.count(id)) result.tracks[id].push_back(px);
      }
    }

    result.steps = step + 1;
    consecutive_faults = state.fault ? consecutive_faults + 1 : 0;
    if (consecutive_faults >= scn.trial.fault_abort) {
      result.cause = "MatchFailure";
      break;
    }
    if (state.mode == Mode::GRASP) {
      // evaluate against the object's current ground-truth grasp
      const Vector3 gc = world.object.pose * world.object.grasp_center;
      result.pos_err_m = (world.ee_pose.translation - gc).norm();
      // fingers open along the end-effector x axis; the grasp yaw is already
      // folded into the pose the controller converged to
      const Vector3 axis_cmd = world.ee_pose.rotation.col(0);
      const Vector3 axis_true =
          world.object.pose.rotation
          * Vector3(std::cos(world.object.grasp_axis_yaw), std::sin(world.object.grasp_axis_yaw), 0);
      const double c = std::clamp(std::abs(axis_cmd.dot(axis_true))
                                  / (axis_cmd.norm() * axis_true.norm()), 0.0, 1.0);
      result.yaw_err_rad = std::acos(c);
      const bool width_ok = state.final_grasp.w >= world.object.clearance_width;
      result.success = result.pos_err_m < scn.trial.pos_tol
                    && result.yaw_err_rad < scn.trial.yaw_tol && width_ok;
      result.cause = result.success ? "grasped" : "tolerance";
      break;
    }
    step_world(world, cmd, scn.control.dt);
  }
  if (result.cause.empty()) result.cause = "Timeout";
  result.final_err_px = state.last_err_px;
  result.goal = state.goal;
  result.capture_count = state.capture_count;
  return result;
}

CampaignSummary run_campaign(const Scenario& scn, const std::vector<std::uint64_t>& seeds,
                             const TrialSink& sink) {
  CampaignSummary summary;
  summary.n_trials = static_cast<int>(seeds.size());
  double steps_sum = 0;
  for (size_t i = 0; i < seeds.size(); ++i) {
    const std::uint64_t seed = seeds[i];
    const TrialResult r = run_trial(scn, seed);
    if (sink) sink(i, r);
    CampaignSummary::TrialRow row;
    row.seed = seed;
    row.success = r.success;
    row.steps = r.steps;
    row.cause = r.cause;
    row.final_err_px = r.final_err_px;
    row.pos_err_m = r.pos_err_m;
    row.yaw_err_rad = r.yaw_err_rad;
    summary.trials.push_back(row);
    summary.causes[r.cause] += 1;
    if (r.success) {
      summary.successes += 1;
      steps_sum += r.steps;
    }
  }
  summary.success_rate =
      summary.n_trials > 0 ? static_cast<double>(summary.successes) / summary.n_trials : 0;
  summary.mean_steps_success = summary.successes > 0 ? steps_sum / summary.successes : 0;
  return summary;
}

}  // namespace vsgrasp

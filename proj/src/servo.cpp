#include "vsgrasp/servo.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace vsgrasp {
namespace {

// Shared ids, ascending; std::map iteration order makes this deterministic.
std::vector<int> shared_ids(const std::map<int, Pixel>& current, const IbvsGoal& goal) {
  std::vector<int> ids;
  for (const auto& [id, px] : current) {
    if (goal.goal_pixels.count(id)) ids.push_back(id);
  }
  return ids;
}

}  // namespace

SpatialVelocity pbvs_step(const Pose& rel, const GainConfig& gains) {
  const Vector6 e = pose_error_vector(rel);
  return SpatialVelocity::from_vector(gains.lambda_p.cwiseProduct(e));
}

Eigen::Matrix<double, 2, 6> interaction_matrix(const Pixel& pixel, double z,
                                               const CameraModel& cam) {
  const double f = cam.focal_px;
  const double ub = pixel.x() - cam.principal.x();
  const double vb = pixel.y() - cam.principal.y();
  Eigen::Matrix<double, 2, 6> j;
  j << -f / z, 0, ub / z, ub * vb / f, -(f * f + ub * ub) / f, vb,
       0, -f / z, vb / z, (f * f + vb * vb) / f, -ub * vb / f, -ub;
  return j;
}

SpatialVelocity ibvs_step(const std::map<int, Pixel>& current, const IbvsGoal& goal,
                          const GainConfig& gains, const Pose& hand_eye,
                          const CameraModel& cam,
                          const std::map<int, double>* depth_override) {
  const std::vector<int> ids = shared_ids(current, goal);
  const int n = static_cast<int>(ids.size());
  if (n < 3) throw TooFewFeatures();

  Eigen::MatrixXd j(2 * n, 6);
  Eigen::VectorXd e(2 * n);
  for (int k = 0; k < n; ++k) {
    const int id = ids[k];
    const Pixel& cur = current.at(id);
    const Pixel& tgt = goal.goal_pixels.at(id);
    double z = goal.fixed_depth;
    if (depth_override) {
      auto it = depth_override->find(id);
      if (it != depth_override->end() && it->second > 1e-6) z = it->second;
    }
    j.block<2, 6>(2 * k, 0) = interaction_matrix(cur, z, cam);
    e.segment<2>(2 * k) = cur - tgt;
  }

  const Eigen::VectorXd b = -gains.lambda_i * e;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double tol = 1e-10 * sv(0);
  int rank = 0;
  Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) {
      inv_sv(i) = 1.0 / sv(i);
      ++rank;
    }
  }
  const Eigen::VectorXd nu =
      svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose() * b;
  if (rank < 6) {
    const double bn = b.norm();
    if (bn > 1e-9 && (j * nu - b).norm() > 0.25 * bn) throw DegenerateJacobian();
  }
  return velocity_transform(hand_eye, SpatialVelocity::from_vector(nu));
}

IbvsGoal predict_goal_features(const FeatureSet& ref, const CameraMatrix& cm_at_ref,
                               const Pose& ref_pose, const Pose& grasp_cam_pose,
                               const CameraModel& cam, double margin_scale,
                               double fixed_depth) {
  IbvsGoal goal;
  goal.fixed_depth = fixed_depth;
  const double half_u = margin_scale * cam.width / 2.0;
  const double half_v = margin_scale * cam.height / 2.0;
  const double cu = cam.width / 2.0;
  const double cv = cam.height / 2.0;
  for (const auto& rec : ref.records) {
    if (!rec.has_depth()) continue;
    const Eigen::Vector2d xy = solve_xy(cm_at_ref, rec.p, rec.z);
    const Vector3 world = ref_pose * Vector3(xy.x(), xy.y(), rec.z);
    ProjectedPoint proj;
    try {
      proj = project(cam, grasp_cam_pose, world);
    } catch (const BehindCamera&) {
      continue;
    }
    if (std::abs(proj.pixel.x() - cu) > half_u || std::abs(proj.pixel.y() - cv) > half_v)
      continue;
    goal.goal_pixels[rec.id] = proj.pixel;
    goal.world_points[rec.id] = world;
  }
  if (goal.goal_pixels.size() < 3) throw NoValidGoal();
  return goal;
}

SpatialVelocity continuity_filter(const SpatialVelocity& prev, const SpatialVelocity& raw,
                                  double dt, const ControlConfig& cfg) {
  const double alpha = dt / (dt + cfg.tau);
  const double max_step = cfg.max_accel * dt;
  Vector6 p = prev.to_vector();
  Vector6 r = raw.to_vector();
  Vector6 out;
  for (int i = 0; i < 6; ++i) {
    const double v = p(i) + alpha * (r(i) - p(i));
    out(i) = p(i) + std::clamp(v - p(i), -max_step, max_step);
  }
  return SpatialVelocity::from_vector(out);
}

namespace {

// Sensed range for the switch test: depth at the grasp pixel when the sensor
// has one, NaN otherwise.
double range_at(const Observation& obs, const Grasp& g) {
  if (obs.depth.width > 0 && obs.depth.valid_at(g.u, g.v)) return obs.depth.at(g.u, g.v);
  return std::numeric_limits<double>::quiet_NaN();
}

// Current pixels keyed by reference feature id, via the robust pipeline or,
// for predictor validation runs, by the simulator's ground-truth labels.
std::map<int, Pixel> current_by_ref_id(const Observation& obs, const ControllerState& st,
                                       const ControlConfig& cfg) {
  std::map<int, Pixel> current;
  if (cfg.ideal_correspondence) {
    std::map<int, int> anchor_to_ref;
    for (const auto& rec : st.stored_ref.records)
      if (rec.anchor_id >= 0) anchor_to_ref[rec.anchor_id] = rec.id;
    for (const auto& rec : obs.features.records) {
      auto it = anchor_to_ref.find(rec.anchor_id);
      if (rec.anchor_id >= 0 && it != anchor_to_ref.end()) current[it->second] = rec.p;
    }
    return current;
  }
  MatchConfig mc = cfg.match;
  mc.ransac.seed = mix_seed(cfg.match.ransac.seed, static_cast<std::uint64_t>(obs.frame_id));
  const RobustMatchResult res = robust_match(st.stored_ref, obs.features, mc, cfg.camera);
  for (const auto& match : res.matches)
    current[st.stored_ref.records[match.ref_index].id] = obs.features.records[match.cur_index].p;
  return current;
}

}  // namespace

std::pair<SpatialVelocity, ControllerState> switch_and_step(
    const Observation& obs, const ControllerState& state, const ControlConfig& cfg) {
  ControllerState st = state;
  st.fault = false;
  st.last_err_px = std::numeric_limits<double>::quiet_NaN();
  st.last_n_matches = 0;
  st.last_current.clear();

  if (st.mode == Mode::GRASP || st.mode == Mode::DONE) {
    st.mode = Mode::DONE;
    st.last_cmd = SpatialVelocity::zero();
    return {SpatialVelocity::zero(), st};
  }

  const auto fault_hold = [&]() {
    st.fault = true;
    st.last_cmd = SpatialVelocity::zero();
    return std::make_pair(SpatialVelocity::zero(), st);
  };

  if (st.mode == Mode::PBVS) {
    try {
      if (!obs.grasp_map) throw ObjectNotVisible();
      const Grasp g = select_best_grasp(*obs.grasp_map, st.tracked, cfg.q_min);
      st.tracked = g;
      const double dist = range_at(obs, g);
      if (std::isfinite(dist) && dist >= cfg.switch_distance) {
        // range data valid and far: position-based servo toward the grasp
        const CameraMatrix cm = camera_matrix(cfg.camera, Pose::identity());
        const GraspPose gp = grasp_to_pose(g, cm, obs.depth);
        const Pose rel = desired_camera_pose(gp, cfg.hand_eye);
        const SpatialVelocity raw =
            velocity_transform(cfg.hand_eye, pbvs_step(rel, cfg.gains));
        const SpatialVelocity out = continuity_filter(st.last_cmd, raw, cfg.dt, cfg);
        st.last_cmd = out;
        return {out, st};
      }
      // First crossing under the switch distance: capture the reference
      // features and camera pose, fix the grasp, predict its image, and
      // hand over to IBVS. Runs at most once per trial.
      const CameraMatrix cm = camera_matrix(cfg.camera, Pose::identity());
      const GraspPose gp = grasp_to_pose(g, cm, obs.depth);
      const Pose rel = desired_camera_pose(gp, cfg.hand_eye);
      const Pose grasp_cam_pose = compose(obs.camera_pose, rel);
      st.goal = predict_goal_features(obs.features, cm, obs.camera_pose, grasp_cam_pose,
                                      cfg.camera, cfg.goal_margin_scale, cfg.fixed_depth);
      st.stored_ref = obs.features;
      st.stored_pose = obs.camera_pose;
      st.final_grasp = g;
      st.captured = true;
      st.capture_count += 1;
      st.hold_count = 0;
      st.mode = Mode::IBVS;
      // fall through to the IBVS step below
    } catch (const ObjectNotVisible&) {
      return fault_hold();
    } catch (const NoGraspFound&) {
      return fault_hold();
    } catch (const InvalidDepthAtGrasp&) {
      return fault_hold();
    } catch (const NoValidGoal&) {
      return fault_hold();
    }
  }

  try {
    const std::map<int, Pixel> current = current_by_ref_id(obs, st, cfg);
    st.last_current = current;

    double err_sum = 0;
    int err_n = 0;
    for (const auto& [id, px] : current) {
      auto it = st.goal.goal_pixels.find(id);
      if (it != st.goal.goal_pixels.end()) {
        err_sum += (px - it->second).norm();
        ++err_n;
      }
    }
    st.last_n_matches = err_n;
    if (err_n == 0) throw TooFewFeatures();
    const double mean_err = err_sum / err_n;
    st.last_err_px = mean_err;

    std::map<int, double> z_kin;
    const std::map<int, double>* z_override = nullptr;
    if (cfg.use_kinematic_depth) {
      const Pose inv_cam = inverse(obs.camera_pose);
      for (const auto& [id, wp] : st.goal.world_points)
        z_kin[id] = (inv_cam.rotation * wp + inv_cam.translation).z();
      z_override = &z_kin;
    }
    const SpatialVelocity raw =
        ibvs_step(current, st.goal, cfg.gains, cfg.hand_eye, cfg.camera, z_override);

    if (mean_err < cfg.grasp_err_px && err_n >= 3) {
      st.hold_count += 1;
      if (st.hold_count >= cfg.grasp_hold) {
        st.mode = Mode::GRASP;
        st.last_cmd = SpatialVelocity::zero();
        return {SpatialVelocity::zero(), st};
      }
    } else {
      st.hold_count = 0;
    }

    const SpatialVelocity out = continuity_filter(st.last_cmd, raw, cfg.dt, cfg);
    st.last_cmd = out;
    return {out, st};
  } catch (const MatchFailure&) {
    return fault_hold();
  } catch (const TooFewFeatures&) {
    return fault_hold();
  } catch (const DegenerateJacobian&) {
    return fault_hold();
  }
}

}  // namespace vsgrasp

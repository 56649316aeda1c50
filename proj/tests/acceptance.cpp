// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the exit status is the number of failures. Runs standalone, no arguments.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <set>
#include <vector>

#include "vsgrasp/logio.hpp"
#include "vsgrasp/scenario.hpp"
#include "vsgrasp/sim.hpp"

using namespace vsgrasp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Pose down_camera(double h) {
  Pose p = Pose::rot_x(M_PI);
  p.translation = Vector3(0, 0, h);
  return p;
}

// random camera tilted up to ~40 degrees off straight-down; even corner rays
// then stay clearly transverse to horizontal planes, so the fixed-z recovery
// is well conditioned
Pose random_tilted_pose(Rng& rng) {
  Pose p = compose(compose(Pose::rot_x(M_PI + rng.uniform(-0.5, 0.5)),
                           Pose::rot_y(rng.uniform(-0.5, 0.5))),
                   Pose::rot_z(rng.uniform(-M_PI, M_PI)));
  p.translation = Vector3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                          rng.uniform(0.3, 1.2));
  return p;
}

// single-trial rig: 640x480, low start, trigger disabled so the servo loop
// runs to the step budget
Scenario tracking_scenario() {
  Scenario s;
  s.n_anchors = 60;
  s.patch_half_w = 0.06;
  s.patch_half_h = 0.04;
  s.object_seed = 7;
  s.grasp_axis_yaw = 20.0 * M_PI / 180.0;
  s.start_position = Vector3(0.03, -0.02, 0.22);
  // 5 degrees short of the -20 the grasp axis demands: the image-based stage
  // keeps a small rotation to do, but its paths stay translation-dominant
  s.start_yaw = -15.0 * M_PI / 180.0;
  s.control.ideal_correspondence = true;
  s.control.grasp_hold = 1000000;
  s.trial.max_steps = 600;
  s.trial.record_tracks = true;
  return s;
}

// campaign rig: 320x240 camera, jittered starts
Scenario campaign_scenario() {
  Scenario s;
  s.camera.focal_px = 300;
  s.camera.width = 320;
  s.camera.height = 240;
  s.camera.principal = Pixel(160, 120);
  s.control.camera = s.camera;
  s.grasp_axis_yaw = 20.0 * M_PI / 180.0;
  s.start_position = Vector3(0, 0, 0.32);
  s.start_jitter_xy = 0.02;
  s.start_jitter_z = 0.02;
  s.start_jitter_yaw = 10.0 * M_PI / 180.0;
  return s;
}

Scenario dynamic_campaign_scenario() {
  Scenario s = campaign_scenario();
  s.motion.kind = MotionModel::Kind::RandomPlanar;
  s.motion.speed = 0.02;
  s.motion.zone_half = 0.04;
  s.motion.burst_min = 0.4;
  s.motion.burst_max = 1.0;
  s.motion.pause_min = 2.0;
  s.motion.pause_max = 3.5;
  s.noise.pixel_sigma = 0.5;
  s.noise.descriptor_deg = 10.0;
  s.noise.outlier_fraction = 0.2;
  s.noise.depth_sigma = 0.0005;
  s.control.gains.lambda_i = 2.0;
  s.control.grasp_err_px = 3.0;
  return s;
}

bool report(int n, bool ok, const char* detail) {
  std::printf("criterion %d: %s  (%s)\n", n, ok ? "PASS" : "FAIL", detail);
  std::fflush(stdout);
  return ok;
}

// ---- criterion 1: projection round trip ------------------------------------

bool criterion_1() {
  CameraModel cam;
  Rng rng(1001);
  const auto t0 = Clock::now();
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const Pose pose = random_tilted_pose(rng);
    // a point in front of the camera, built from a pixel and a depth
    const Pixel px(rng.uniform(0.0, cam.width), rng.uniform(0.0, cam.height));
    const double z = rng.uniform(0.1, 1.5);
    const Vector3 ray((px.x() - cam.principal.x()) / cam.focal_px,
                      (px.y() - cam.principal.y()) / cam.focal_px, 1.0);
    const Vector3 world = pose * (ray * z);

    const ProjectedPoint proj = project(cam, pose, world);
    const CameraMatrix cm = camera_matrix(cam, pose);
    const Eigen::Vector2d xy = solve_xy(cm, proj.pixel, world.z());
    worst = std::max(worst, (xy - world.head<2>()).norm());
  }
  const double dt = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "max round-trip error %.3g m over 1000, %.2f s", worst, dt);
  return report(1, worst < 1e-9 && dt < 1.0, buf);
}

// ---- criterion 2: interaction matrix vs finite differences -----------------

bool criterion_2() {
  CameraModel cam;
  Rng rng(1002);
  const double delta = 1e-6;
  const auto t0 = Clock::now();
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const Pixel px(rng.uniform(20.0, cam.width - 20.0), rng.uniform(20.0, cam.height - 20.0));
    const double z = rng.uniform(0.05, 1.5);
    Vector6 nu;
    for (int k = 0; k < 6; ++k) nu(k) = rng.uniform(-1.0, 1.0);
    nu.normalize();

    const Vector3 pt((px.x() - cam.principal.x()) * z / cam.focal_px,
                     (px.y() - cam.principal.y()) * z / cam.focal_px, z);
    const Pose inv = inverse(se3_exp(SpatialVelocity::from_vector(nu), delta));
    const Vector3 moved = inv.rotation * pt + inv.translation;
    const Pixel px2(cam.focal_px * moved.x() / moved.z() + cam.principal.x(),
                    cam.focal_px * moved.y() / moved.z() + cam.principal.y());

    const Eigen::Vector2d fd = (px2 - px) / delta;
    const Eigen::Vector2d an = interaction_matrix(px, z, cam) * nu;
    worst = std::max(worst, (fd - an).norm() / std::max(1.0, an.norm()));
  }
  const double dt = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "max relative error %.3g over 1000, %.2f s", worst, dt);
  return report(2, worst < 1e-3 && dt < 5.0, buf);
}

// ---- criterion 3: goal prediction exactness --------------------------------

bool criterion_3() {
  CameraModel cam;
  const CameraMatrix cm_local = camera_matrix(cam, Pose::identity());
  double worst = 0;
  int checked = 0;
  for (int cfg = 0; cfg < 20; ++cfg) {
    Rng rng(1100 + cfg);
    const SceneObject obj = make_planar_object(40, 0.05, 0.04, 30 + cfg);
    Pose ref_pose = down_camera(rng.uniform(0.3, 0.6));
    ref_pose.translation.x() = rng.uniform(-0.03, 0.03);
    ref_pose.translation.y() = rng.uniform(-0.03, 0.03);
    Pose grasp_pose = compose(Pose::rot_x(M_PI), Pose::rot_z(rng.uniform(-0.5, 0.5)));
    grasp_pose.translation = Vector3(rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02),
                                     rng.uniform(0.08, 0.15));

    const FeatureSet fs = detect(obj, cam, ref_pose, NoiseConfig{}, rng);
    IbvsGoal goal;
    try {
      goal = predict_goal_features(fs, cm_local, ref_pose, grasp_pose, cam);
    } catch (const NoValidGoal&) {
      continue;
    }
    for (const auto& rec : fs.records) {
      auto it = goal.goal_pixels.find(rec.id);
      if (it == goal.goal_pixels.end()) continue;
      const Vector3 world = obj.pose * obj.anchors[rec.anchor_id].position;
      const ProjectedPoint direct = project(cam, grasp_pose, world);
      worst = std::max(worst, (it->second - direct.pixel).norm());
      ++checked;
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "max prediction error %.3g px over %d features", worst, checked);
  return report(3, worst < 1e-6 && checked > 300, buf);
}

// ---- criterion 4: servo convergence and path straightness ------------------

bool criterion_4() {
  const Scenario scn = tracking_scenario();
  const TrialResult r = run_trial(scn, 1);

  double final_err = std::numeric_limits<double>::infinity();
  for (auto it = r.log.rbegin(); it != r.log.rend(); ++it) {
    if (std::isfinite(it->mean_err_px)) {
      final_err = it->mean_err_px;
      break;
    }
  }

  // straightness: worst distance from each feature path to its start-goal
  // chord, as a fraction of chord length
  double worst_dev = 0;
  for (const auto& [id, track] : r.tracks) {
    if (track.size() < 2) continue;
    const Pixel a = track.front();
    const Pixel b = track.back();
    const double chord = (b - a).norm();
    if (chord < 10.0) continue;  // a feature that barely moves has no meaningful chord
    const Pixel dir = (b - a) / chord;
    double dev = 0;
    for (const Pixel& p : track) {
      const Pixel rel = p - a;
      const double off = std::abs(rel.x() * dir.y() - rel.y() * dir.x());
      dev = std::max(dev, off);
    }
    worst_dev = std::max(worst_dev, dev / chord);
  }

  char buf[160];
  std::snprintf(buf, sizeof buf, "final error %.3g px in %d steps, worst chord deviation %.1f%%",
                final_err, r.steps, 100 * worst_dev);
  return report(4, final_err < 1.0 && r.steps <= 600 && worst_dev < 0.15, buf);
}

// ---- criterion 5: re-convergence after displacements -----------------------

bool criterion_5() {
  Scenario scn = tracking_scenario();
  scn.motion.kind = MotionModel::Kind::Scripted;
  scn.motion.jumps.push_back({650, 0.03, 0.0, 0.0});
  scn.motion.jumps.push_back({1000, 0.0, 0.03, 0.0});
  scn.motion.jumps.push_back({1350, -0.03, 0.0, 0.0});
  scn.trial.max_steps = 1700;
  const TrialResult r = run_trial(scn, 1);

  bool ok = true;
  int worst_recovery = 0;
  for (const int jump : {650, 1000, 1350}) {
    // the spike must appear, then die below 2 px within 300 steps
    double peak = 0;
    int recovered = -1;
    for (int i = jump + 1; i < std::min<int>(jump + 301, r.log.size()); ++i) {
      if (!std::isfinite(r.log[i].mean_err_px)) continue;
      peak = std::max(peak, r.log[i].mean_err_px);
      if (peak > 10.0 && r.log[i].mean_err_px < 2.0) {
        recovered = i - jump;
        break;
      }
    }
    if (recovered < 0) ok = false;
    worst_recovery = std::max(worst_recovery, recovered);
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "3 displacements, slowest recovery %d steps", worst_recovery);
  return report(5, ok, buf);
}

// ---- criterion 6: matching precision and recall ----------------------------

bool criterion_6() {
  CameraModel cam;
  const SceneObject obj = make_planar_object(60, 0.06, 0.04, 7);
  NoiseConfig noise;
  noise.pixel_sigma = 0.5;
  noise.descriptor_deg = 10.0;
  noise.outlier_fraction = 0.3;

  long kept_true = 0, kept_all = 0, possible = 0;
  int failures = 0;
  for (int frame = 0; frame < 100; ++frame) {
    Rng rng(2000 + frame);
    // low viewpoint spreads the anchors across the filter grid
    Pose ref_pose = down_camera(0.12);
    ref_pose.translation.x() = 0.005 * (frame % 3);
    const FeatureSet ref = detect(obj, cam, ref_pose, NoiseConfig{}, rng);
    Pose cur_pose = down_camera(0.12 - 0.0002 * (frame % 50));
    cur_pose.translation.x() = 0.004 + 0.0001 * frame;
    cur_pose.translation.y() = -0.003 + 0.0001 * (frame % 7);
    const FeatureSet cur = detect(obj, cam, cur_pose, noise, rng);

    std::set<int> ref_anchors, cur_anchors;
    for (const auto& rec : ref.records)
      if (rec.anchor_id >= 0) ref_anchors.insert(rec.anchor_id);
    for (const auto& rec : cur.records)
      if (rec.anchor_id >= 0 && ref_anchors.count(rec.anchor_id))
        cur_anchors.insert(rec.anchor_id);
    possible += static_cast<long>(cur_anchors.size());

    MatchConfig cfg;
    cfg.ransac.seed = mix_seed(3000, frame);
    try {
      const RobustMatchResult res = robust_match(ref, cur, cfg, cam);
      for (const auto& m : res.matches) {
        ++kept_all;
        const int ra = ref.records[m.ref_index].anchor_id;
        const int ca = cur.records[m.cur_index].anchor_id;
        if (ra >= 0 && ra == ca) ++kept_true;
      }
    } catch (const MatchFailure&) {
      ++failures;
    }
  }
  const double precision = kept_all > 0 ? double(kept_true) / kept_all : 0.0;
  const double recall = possible > 0 ? double(kept_true) / possible : 0.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "precision %.4f, recall %.4f over 100 frames (%d match failures)",
                precision, recall, failures);
  return report(6, precision >= 0.95 && recall >= 0.90 && failures == 0, buf);
}

// ---- criterion 7: ransac determinism and residual --------------------------

bool criterion_7() {
  CameraModel cam;
  Rng rng(1007);
  // general-position (non-planar) point field seen from two viewpoints
  FeatureSet ref, cur;
  const Pose pa = down_camera(0.5);
  Pose pb = compose(compose(Pose::rot_x(M_PI), Pose::rot_y(0.1)), Pose::rot_z(0.2));
  pb.translation = Vector3(0.05, -0.04, 0.45);
  MatchSet matches;
  int id = 0;
  while (id < 40) {
    const Vector3 pt(rng.uniform(-0.12, 0.12), rng.uniform(-0.09, 0.09),
                     rng.uniform(-0.05, 0.05));
    ProjectedPoint qa, qb;
    try {
      qa = project(cam, pa, pt);
      qb = project(cam, pb, pt);
    } catch (const BehindCamera&) {
      continue;
    }
    if (!cam.contains(qa.pixel) || !cam.contains(qb.pixel)) continue;
    FeatureRecord r;
    r.id = id;
    r.d = rng.unit_vector(kDescriptorDim);
    r.p = qa.pixel;
    ref.records.push_back(r);
    r.p = qb.pixel;
    cur.records.push_back(r);
    matches.push_back({id, id, 0.0});
    ++id;
  }

  RansacConfig cfg;
  cfg.seed = 77;
  const auto [f1, in1] = estimate_fundamental_ransac(matches, ref, cur, cfg);
  const auto [f2, in2] = estimate_fundamental_ransac(matches, ref, cur, cfg);

  bool identical = (f1.array() == f2.array()).all() && in1.size() == in2.size();
  for (size_t i = 0; identical && i < in1.size(); ++i)
    identical = in1[i].ref_index == in2[i].ref_index && in1[i].cur_index == in2[i].cur_index;

  // first-order geometric residual of every inlier against the epipolar
  // constraint, in pixels
  double worst = 0;
  for (const auto& m : in1) {
    const Eigen::Vector3d x = ref.records[m.ref_index].p.homogeneous();
    const Eigen::Vector3d xp = cur.records[m.cur_index].p.homogeneous();
    const double num = xp.dot(f1 * x);
    const Eigen::Vector3d fx = f1 * x;
    const Eigen::Vector3d ftxp = f1.transpose() * xp;
    const double den = fx.head<2>().squaredNorm() + ftxp.head<2>().squaredNorm();
    worst = std::max(worst, std::abs(num) / std::sqrt(den));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "reruns %s, %zu inliers, max residual %.3g px",
                identical ? "bit-identical" : "DIFFER", in1.size(), worst);
  return report(7, identical && in1.size() == 40 && worst < 1e-6, buf);
}

// ---- criterion 8: one-shot switch and bounded velocity steps ---------------

bool criterion_8() {
  const Scenario scn = campaign_scenario();
  const double bound = scn.control.max_accel * scn.control.dt + 1e-12;
  bool ok = true;
  double worst_step = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const TrialResult r = run_trial(scn, seed);
    if (r.capture_count != 1 || !r.success) ok = false;
    for (size_t i = 1; i < r.log.size(); ++i) {
      const Vector6 dv = r.log[i].cmd - r.log[i - 1].cmd;
      for (int k = 0; k < 6; ++k) {
        worst_step = std::max(worst_step, std::abs(dv(k)));
        if (std::abs(dv(k)) > bound) ok = false;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "20 trials, one capture each, max per-axis step %.5f (bound %.5f)",
                worst_step, scn.control.max_accel * scn.control.dt);
  return report(8, ok, buf);
}

// ---- criterion 9: campaigns ------------------------------------------------

bool criterion_9() {
  const auto t0 = Clock::now();

  std::vector<std::uint64_t> static_seeds, dynamic_seeds;
  for (int i = 0; i < 100; ++i) {
    static_seeds.push_back(mix_seed(9001, i));
    dynamic_seeds.push_back(mix_seed(9002, i));
  }

  bool captures_ok = true;
  const TrialSink capture_check = [&](size_t, const TrialResult& r) {
    if (r.success && r.capture_count != 1) captures_ok = false;
  };

  const CampaignSummary st = run_campaign(campaign_scenario(), static_seeds, capture_check);
  const CampaignSummary dy =
      run_campaign(dynamic_campaign_scenario(), dynamic_seeds, capture_check);
  const double dt = seconds_since(t0);

  char buf[200];
  std::snprintf(buf, sizeof buf, "static %d/100, dynamic %d/100, %.0f s total",
                st.successes, dy.successes, dt);
  return report(9,
                st.successes == 100 && dy.successes >= 70 && dt < 300.0 && captures_ok,
                buf);
}

// ---- criterion 10: fast exit fails as a match failure ----------------------

bool criterion_10() {
  Scenario scn = campaign_scenario();
  scn.motion.kind = MotionModel::Kind::Scripted;
  scn.motion.segments.push_back({30, 300, 0.5, 0.0, 0.0});
  const TrialResult r = run_trial(scn, 3);
  char buf[128];
  std::snprintf(buf, sizeof buf, "cause \"%s\" after %d steps", r.cause.c_str(), r.steps);
  return report(10, !r.success && r.cause == "MatchFailure", buf);
}

}  // namespace

int main() {
  int failures = 0;
  failures += !criterion_1();
  failures += !criterion_2();
  failures += !criterion_3();
  failures += !criterion_4();
  failures += !criterion_5();
  failures += !criterion_6();
  failures += !criterion_7();
  failures += !criterion_8();
  failures += !criterion_9();
  failures += !criterion_10();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}

#include "vsgrasp/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace vsgrasp {
namespace {

constexpr double kDegToRad = M_PI / 180.0;

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    if (tok[0] == '#') break;
    tokens.push_back(tok);
  }
  return tokens;
}

double to_double(const std::string& s, int line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ScenarioError("line " + std::to_string(line_no) + ": not a number: " + s);
  }
}

int to_int(const std::string& s, int line_no) {
  return static_cast<int>(std::llround(to_double(s, line_no)));
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  Scenario scn;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<std::string> tok = tokenize(line);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    const auto need = [&](size_t n) {
      if (tok.size() != n + 1)
        throw ScenarioError("line " + std::to_string(line_no) + ": " + key + " expects "
                            + std::to_string(n) + " value(s)");
    };
    const auto num = [&](size_t i) { return to_double(tok[i], line_no); };
    const auto integer = [&](size_t i) { return to_int(tok[i], line_no); };

    if (key == "camera.width") { need(1); scn.camera.width = integer(1); }
    else if (key == "camera.height") { need(1); scn.camera.height = integer(1); }
    else if (key == "camera.focal_px") { need(1); scn.camera.focal_px = num(1); }
    else if (key == "camera.principal") {
      need(2);
      scn.camera.principal = Pixel(num(1), num(2));
    }
    else if (key == "camera.depth_min") { need(1); scn.camera.depth_min = num(1); }
    else if (key == "camera.depth_max") { need(1); scn.camera.depth_max = num(1); }
    else if (key == "object.anchors") { need(1); scn.n_anchors = integer(1); }
    else if (key == "object.patch_half_w") { need(1); scn.patch_half_w = num(1); }
    else if (key == "object.patch_half_h") { need(1); scn.patch_half_h = num(1); }
    else if (key == "object.seed") { need(1); scn.object_seed = static_cast<std::uint64_t>(integer(1)); }
    else if (key == "object.position") {
      need(3);
      scn.object_position = Vector3(num(1), num(2), num(3));
    }
    else if (key == "object.yaw_deg") { need(1); scn.object_yaw = num(1) * kDegToRad; }
    else if (key == "object.grasp_yaw_deg") { need(1); scn.grasp_axis_yaw = num(1) * kDegToRad; }
    else if (key == "object.grasp_width") { need(1); scn.grasp_width = num(1); }
    else if (key == "object.clearance_width") { need(1); scn.clearance_width = num(1); }
    else if (key == "start.position") {
      need(3);
      scn.start_position = Vector3(num(1), num(2), num(3));
    }
    else if (key == "start.yaw_deg") { need(1); scn.start_yaw = num(1) * kDegToRad; }
    else if (key == "start.jitter_xy") { need(1); scn.start_jitter_xy = num(1); }
    else if (key == "start.jitter_z") { need(1); scn.start_jitter_z = num(1); }
    else if (key == "start.jitter_yaw_deg") { need(1); scn.start_jitter_yaw = num(1) * kDegToRad; }
    else if (key == "hand_eye.z") {
      need(1);
      scn.control.hand_eye = Pose::from_translation(Vector3(0, 0, num(1)));
    }
    else if (key == "motion.kind") {
      need(1);
      if (tok[1] == "static") scn.motion.kind = MotionModel::Kind::Static;
      else if (tok[1] == "random_planar") scn.motion.kind = MotionModel::Kind::RandomPlanar;
      else if (tok[1] == "scripted") scn.motion.kind = MotionModel::Kind::Scripted;
      else throw ScenarioError("line " + std::to_string(line_no) + ": unknown motion kind " + tok[1]);
    }
    else if (key == "motion.speed") { need(1); scn.motion.speed = num(1); }
    else if (key == "motion.zone_half") { need(1); scn.motion.zone_half = num(1); }
    else if (key == "motion.burst") {
      need(2);
      scn.motion.burst_min = num(1);
      scn.motion.burst_max = num(2);
    }
    else if (key == "motion.pause") {
      need(2);
      scn.motion.pause_min = num(1);
      scn.motion.pause_max = num(2);
    }
    else if (key == "motion.jump") {
      need(4);
      scn.motion.jumps.push_back({integer(1), num(2), num(3), num(4) * kDegToRad});
    }
    else if (key == "motion.segment") {
      need(5);
      scn.motion.segments.push_back({integer(1), integer(2), num(3), num(4), num(5) * kDegToRad});
    }
    else if (key == "noise.pixel_sigma") { need(1); scn.noise.pixel_sigma = num(1); }
    else if (key == "noise.descriptor_deg") { need(1); scn.noise.descriptor_deg = num(1); }
    else if (key == "noise.outlier_fraction") { need(1); scn.noise.outlier_fraction = num(1); }
    else if (key == "noise.depth_sigma") { need(1); scn.noise.depth_sigma = num(1); }
    else if (key == "control.lambda_p") {
      need(2);
      scn.control.gains.lambda_p.head<3>().setConstant(num(1));
      scn.control.gains.lambda_p.tail<3>().setConstant(num(2));
    }
    else if (key == "control.lambda_i") { need(1); scn.control.gains.lambda_i = num(1); }
    else if (key == "control.switch_distance") { need(1); scn.control.switch_distance = num(1); }
    else if (key == "control.fixed_depth") { need(1); scn.control.fixed_depth = num(1); }
    else if (key == "control.use_kinematic_depth") { need(1); scn.control.use_kinematic_depth = integer(1) != 0; }
    else if (key == "control.grasp_err_px") { need(1); scn.control.grasp_err_px = num(1); }
    else if (key == "control.grasp_hold") { need(1); scn.control.grasp_hold = integer(1); }
    else if (key == "control.tau") { need(1); scn.control.tau = num(1); }
    else if (key == "control.max_accel") { need(1); scn.control.max_accel = num(1); }
    else if (key == "control.goal_margin_scale") { need(1); scn.control.goal_margin_scale = num(1); }
    else if (key == "control.q_min") { need(1); scn.control.q_min = num(1); }
    else if (key == "control.grasp_sigma_px") { need(1); scn.control.grasp_sigma_px = num(1); }
    else if (key == "control.ideal_correspondence") { need(1); scn.control.ideal_correspondence = integer(1) != 0; }
    else if (key == "control.dt") { need(1); scn.control.dt = num(1); }
    else if (key == "match.ratio") { need(1); scn.control.match.ratio = num(1); }
    else if (key == "match.dedup_px") { need(1); scn.control.match.dedup_radius_px = num(1); }
    else if (key == "match.grid") {
      need(2);
      scn.control.match.grid_cols = integer(1);
      scn.control.match.grid_rows = integer(2);
    }
    else if (key == "ransac.iters") { need(1); scn.control.match.ransac.max_iters = integer(1); }
    else if (key == "ransac.threshold_px") { need(1); scn.control.match.ransac.threshold_px = num(1); }
    else if (key == "ransac.min_inliers") { need(1); scn.control.match.ransac.min_inliers = integer(1); }
    else if (key == "ransac.model") {
      need(1);
      if (tok[1] == "fundamental") scn.control.match.ransac.model = GeometryModel::Fundamental;
      else if (tok[1] == "homography") scn.control.match.ransac.model = GeometryModel::Homography;
      else throw ScenarioError("line " + std::to_string(line_no) + ": unknown model " + tok[1]);
    }
    else if (key == "trial.max_steps") { need(1); scn.trial.max_steps = integer(1); }
    else if (key == "trial.pos_tol") { need(1); scn.trial.pos_tol = num(1); }
    else if (key == "trial.yaw_tol_deg") { need(1); scn.trial.yaw_tol = num(1) * kDegToRad; }
    else if (key == "trial.fault_abort") { need(1); scn.trial.fault_abort = integer(1); }
    else if (key == "trial.record_tracks") { need(1); scn.trial.record_tracks = integer(1) != 0; }
    else {
      throw ScenarioError("line " + std::to_string(line_no) + ": unknown key " + key);
    }
  }
  scn.control.camera = scn.camera;
  return scn;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

}  // namespace vsgrasp

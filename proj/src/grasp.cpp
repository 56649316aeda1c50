#include "vsgrasp/grasp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace vsgrasp {
namespace {

double wrap_half_pi(double a) {
  while (a > M_PI / 2) a -= M_PI;
  while (a <= -M_PI / 2) a += M_PI;
  return a;
}

bool is_local_max(const Eigen::ArrayXXd& q, int u, int v) {
  const int h = static_cast<int>(q.rows());
  const int w = static_cast<int>(q.cols());
  const double c = q(v, u);
  for (int dv = -1; dv <= 1; ++dv) {
    for (int du = -1; du <= 1; ++du) {
      if (du == 0 && dv == 0) continue;
      int uu = u + du, vv = v + dv;
      if (uu < 0 || uu >= w || vv < 0 || vv >= h) continue;
      if (q(vv, uu) >= c) return false;
    }
  }
  return true;
}

}  // namespace

GraspMap synthesize_grasp_map(const SceneObject& scene, const CameraModel& cam,
                              const Pose& cam_pose, double sigma_px) {
  const Vector3 center_w = scene.pose * scene.grasp_center;
  ProjectedPoint center;
  try {
    center = project(cam, cam_pose, center_w);
  } catch (const BehindCamera&) {
    throw ObjectNotVisible();
  }
  if (!cam.contains(center.pixel)) throw ObjectNotVisible();

  // Projected grasp axis: image direction between the projections of the
  // center and a nearby point along the axis.
  const Vector3 axis_obj(std::cos(scene.grasp_axis_yaw), std::sin(scene.grasp_axis_yaw), 0);
  const Vector3 tip_w = scene.pose * (scene.grasp_center + 1e-4 * axis_obj);
  const ProjectedPoint tip = project(cam, cam_pose, tip_w);
  const double phi = wrap_half_pi(std::atan2(tip.pixel.y() - center.pixel.y(),
                                             tip.pixel.x() - center.pixel.x()));

  GraspMap map;
  map.phi = Eigen::ArrayXXd::Constant(cam.height, cam.width, phi);
  map.width = Eigen::ArrayXXd::Constant(cam.height, cam.width, scene.grasp_width);
  Eigen::ArrayXd du = Eigen::ArrayXd::LinSpaced(cam.width, 0, cam.width - 1) - center.pixel.x();
  Eigen::ArrayXd dv = Eigen::ArrayXd::LinSpaced(cam.height, 0, cam.height - 1) - center.pixel.y();
  const double inv2s2 = 1.0 / (2.0 * sigma_px * sigma_px);
  Eigen::ArrayXXd r2 = (dv.square().matrix() * Eigen::RowVectorXd::Ones(cam.width)).array()
                     + (Eigen::VectorXd::Ones(cam.height) * du.square().matrix().transpose()).array();
  map.quality = (-r2 * inv2s2).exp();
  return map;
}

Grasp select_best_grasp(const GraspMap& g, const std::optional<Grasp>& previous,
                        double q_min) {
  const int h = g.height();
  const int w = g.width_px();
  std::vector<std::pair<int, int>> maxima;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      if (g.quality(v, u) > q_min && is_local_max(g.quality, u, v))
        maxima.emplace_back(u, v);
  if (maxima.empty()) throw NoGraspFound();

  int best_u = -1, best_v = -1;
  if (!previous) {
    double best_q = -1;
    for (auto [u, v] : maxima) {
      double q = g.quality(v, u);
      if (q > best_q || (q == best_q && (u < best_u || (u == best_u && v < best_v)))) {
        best_q = q;
        best_u = u;
        best_v = v;
      }
    }
  } else {
    double best_d2 = std::numeric_limits<double>::infinity();
    double best_q = -1;
    for (auto [u, v] : maxima) {
      double du = u - previous->u, dv = v - previous->v;
      double d2 = du * du + dv * dv;
      double q = g.quality(v, u);
      bool better = d2 < best_d2
                 || (d2 == best_d2 && (q > best_q
                 || (q == best_q && (u < best_u || (u == best_u && v < best_v)))));
      if (better) {
        best_d2 = d2;
        best_q = q;
        best_u = u;
        best_v = v;
      }
    }
  }
  Grasp out;
  out.u = best_u;
  out.v = best_v;
  out.q = g.quality(best_v, best_u);
  out.phi = g.phi(best_v, best_u);
  out.w = g.width(best_v, best_u);
  return out;
}

GraspPose grasp_to_pose(const Grasp& g, const CameraMatrix& cm, const DepthImage& depth) {
  if (!depth.valid_at(g.u, g.v)) throw InvalidDepthAtGrasp();
  const double z = depth.at(g.u, g.v);
  const Eigen::Vector2d xy = solve_xy(cm, Pixel(g.u, g.v), z);
  GraspPose out;
  out.position = Vector3(xy.x(), xy.y(), z);
  out.yaw = g.phi;
  return out;
}

Pose desired_camera_pose(const GraspPose& grasp, const Pose& hand_eye) {
  Pose grasp_pose = Pose::rot_z(grasp.yaw);
  grasp_pose.translation = grasp.position;
  return compose(grasp_pose, hand_eye);
}

}  // namespace vsgrasp

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vsgrasp/camera.hpp"
#include "vsgrasp/geometry.hpp"
#include "vsgrasp/scene.hpp"

namespace vsgrasp {

struct TooFewMatches : std::runtime_error {
  TooFewMatches() : std::runtime_error("fewer matches than the minimal sample") {}
};

struct NoConsensus : std::runtime_error {
  NoConsensus() : std::runtime_error("no model reached the inlier floor") {}
};

struct MatchFailure : std::runtime_error {
  explicit MatchFailure(const std::string& why)
      : std::runtime_error("matching failed: " + why) {}
};

/// Detected feature: pixel, unit descriptor, depth (NaN when the sensor had
/// no valid reading there). anchor_id is the simulator's ground-truth label
/// (-1 for injected outliers); evaluation only, the pipeline never reads it.
struct FeatureRecord {
  int id = 0;
  Pixel p = Pixel::Zero();
  Eigen::VectorXd d;
  double z = std::numeric_limits<double>::quiet_NaN();
  int anchor_id = -1;

  bool has_depth() const { return std::isfinite(z); }
};

struct FeatureSet {
  int frame_id = 0;
  Pose capture_pose = Pose::identity();
  std::vector<FeatureRecord> records;

  int size() const { return static_cast<int>(records.size()); }
};

struct Match {
  int ref_index = 0;
  int cur_index = 0;
  double distance = 0;
};

using MatchSet = std::vector<Match>;

/// Two-view model used as the geometric consistency check. Fundamental is the
/// general case; Homography suits strictly planar targets where F is only
/// determined up to a family.
enum class GeometryModel { Fundamental, Homography };

struct RansacConfig {
  std::uint64_t seed = 0;
  int max_iters = 1000;
  double threshold_px = 1.5;
  int min_inliers = 8;
  double confidence = 0.99;
  GeometryModel model = GeometryModel::Fundamental;
};

struct MatchConfig {
  double ratio = 0.8;
  double dedup_radius_px = 5.0;
  int grid_cols = 20;
  int grid_rows = 20;
  RansacConfig ransac;
};

/// Match counts surviving each pipeline stage, in execution order.
struct StageCounts {
  int after_ratio = 0;
  int after_dedup = 0;
  int after_loop = 0;
  int after_model = 0;
  int after_grid = 0;
};

struct RobustMatchResult {
  MatchSet matches;
  StageCounts counts;
  Eigen::Matrix3d model = Eigen::Matrix3d::Zero();
};

/// Synthetic detector: projects visible anchors, perturbs pixels and
/// descriptors per `noise`, attaches depth where the sensor range allows, and
/// appends outlier_fraction random spurious features.
FeatureSet detect(const SceneObject& scene, const CameraModel& cam, const Pose& pose,
                  const NoiseConfig& noise, Rng& rng, int frame_id = 0);

/// Nearest-neighbor matching with the distance ratio test, one-to-one by
/// keeping the smaller-distance match on conflict.
MatchSet match_ratio(const FeatureSet& ref, const FeatureSet& cur, double ratio);

/// Among matches whose current pixels crowd within radius_px, keep the one
/// with the smallest descriptor distance.
MatchSet dedup(const MatchSet& m, const FeatureSet& cur, double radius_px);

/// Forward-backward consistency: (i, j) survives iff ref[i] is the reverse
/// nearest neighbor of cur[j].
MatchSet loop_check(const FeatureSet& ref, const FeatureSet& cur, const MatchSet& m);

/// Seeded RANSAC around the normalized 8-point algorithm (or 4-point DLT for
/// the homography model); Sampson distance (respectively transfer error)
/// below threshold_px marks inliers; the returned model is refit on them.
std::pair<Eigen::Matrix3d, MatchSet> estimate_fundamental_ransac(
    const MatchSet& m, const FeatureSet& ref, const FeatureSet& cur,
    const RansacConfig& cfg);

/// At most one match per grid cell, smallest descriptor distance wins.
MatchSet grid_filter(const MatchSet& m, const FeatureSet& cur,
                     std::pair<int, int> grid, std::pair<int, int> image_size);

/// Stages in order: ratio test, pixel dedup, loop constraint, model
/// consensus, grid thinning. Throws MatchFailure when the model stage cannot
/// run or finds no consensus.
RobustMatchResult robust_match(const FeatureSet& ref, const FeatureSet& cur,
                               const MatchConfig& cfg, const CameraModel& cam);

}  // namespace vsgrasp

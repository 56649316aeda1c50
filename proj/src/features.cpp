#include "vsgrasp/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/Dense>

namespace vsgrasp {
namespace {

// Pairwise descriptor distances; rows index ref, cols index cur. Unit-norm
// descriptors let the Gram product carry the whole computation.
Eigen::MatrixXd distance_matrix(const FeatureSet& ref, const FeatureSet& cur) {
  const int nr = ref.size();
  const int nc = cur.size();
  Eigen::MatrixXd r(nr, kDescriptorDim), c(nc, kDescriptorDim);
  for (int i = 0; i < nr; ++i) r.row(i) = ref.records[i].d.transpose();
  for (int j = 0; j < nc; ++j) c.row(j) = cur.records[j].d.transpose();
  Eigen::MatrixXd d2 = (-2.0 * (r * c.transpose())).array() + 2.0;
  return d2.cwiseMax(0.0).cwiseSqrt();
}

MatchSet sorted_by_ref(MatchSet m) {
  std::sort(m.begin(), m.end(), [](const Match& a, const Match& b) {
    return a.ref_index < b.ref_index;
  });
  return m;
}

// Ascending quality order with a full tie-break so every stage processes
// matches in one deterministic sequence.
MatchSet quality_order(MatchSet m) {
  std::sort(m.begin(), m.end(), [](const Match& a, const Match& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.ref_index != b.ref_index) return a.ref_index < b.ref_index;
    return a.cur_index < b.cur_index;
  });
  return m;
}

Eigen::Vector3d homog(const Pixel& p) { return Eigen::Vector3d(p.x(), p.y(), 1.0); }

// Hartley conditioning: centroid to the origin, mean length sqrt(2).
Eigen::Matrix3d normalizing_transform(const std::vector<Pixel>& pts) {
  Pixel mean = Pixel::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double scale = 0;
  for (const auto& p : pts) scale += (p - mean).norm();
  scale /= static_cast<double>(pts.size());
  if (scale < 1e-12) scale = 1.0;
  const double s = std::sqrt(2.0) / scale;
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x(),
       0, s, -s * mean.y(),
       0, 0, 1;
  return t;
}

Eigen::Matrix3d fit_fundamental(const std::vector<Eigen::Vector3d>& x_ref,
                                const std::vector<Eigen::Vector3d>& x_cur,
                                const std::vector<int>& idx) {
  Eigen::MatrixXd a(static_cast<int>(idx.size()), 9);
  for (size_t k = 0; k < idx.size(); ++k) {
    const auto& x = x_ref[idx[k]];
    const auto& xp = x_cur[idx[k]];
    a.row(static_cast<int>(k)) << xp.x() * x.x(), xp.x() * x.y(), xp.x(),
                                  xp.y() * x.x(), xp.y() * x.y(), xp.y(),
                                  x.x(), x.y(), 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  Eigen::Matrix<double, 9, 1> f = svd.matrixV().col(8);
  Eigen::Matrix3d fm;
  fm << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);
  // rank-2 enforcement
  Eigen::JacobiSVD<Eigen::Matrix3d> fs(fm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d sv = fs.singularValues();
  sv(2) = 0;
  return fs.matrixU() * sv.asDiagonal() * fs.matrixV().transpose();
}

Eigen::Matrix3d fit_homography(const std::vector<Eigen::Vector3d>& x_ref,
                               const std::vector<Eigen::Vector3d>& x_cur,
                               const std::vector<int>& idx) {
  Eigen::MatrixXd a(2 * static_cast<int>(idx.size()), 9);
  for (size_t k = 0; k < idx.size(); ++k) {
    const auto& x = x_ref[idx[k]];
    const auto& xp = x_cur[idx[k]];
    a.row(static_cast<int>(2 * k)) << x.x(), x.y(), 1, 0, 0, 0,
        -xp.x() * x.x(), -xp.x() * x.y(), -xp.x();
    a.row(static_cast<int>(2 * k + 1)) << 0, 0, 0, x.x(), x.y(), 1,
        -xp.y() * x.x(), -xp.y() * x.y(), -xp.y();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hm;
  hm << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return hm;
}

double sampson_px(const Eigen::Matrix3d& f, const Eigen::Vector3d& x,
                  const Eigen::Vector3d& xp) {
  const double alg = xp.dot(f * x);
  const Eigen::Vector3d fx = f * x;
  const Eigen::Vector3d ftxp = f.transpose() * xp;
  const double g2 = fx.x() * fx.x() + fx.y() * fx.y()
                  + ftxp.x() * ftxp.x() + ftxp.y() * ftxp.y();
  if (g2 < 1e-300) return std::numeric_limits<double>::infinity();
  return std::abs(alg) / std::sqrt(g2);
}

double transfer_px(const Eigen::Matrix3d& h, const Eigen::Vector3d& x,
                   const Eigen::Vector3d& xp) {
  const Eigen::Vector3d hx = h * x;
  if (std::abs(hx.z()) < 1e-12) return std::numeric_limits<double>::infinity();
  return (hx.head<2>() / hx.z() - xp.head<2>()).norm();
}

}  // namespace

FeatureSet detect(const SceneObject& scene, const CameraModel& cam, const Pose& pose,
                  const NoiseConfig& noise, Rng& rng, int frame_id) {
  FeatureSet out;
  out.frame_id = frame_id;
  out.capture_pose = pose;
  const Pose inv = inverse(pose);
  const double desc_rad = noise.descriptor_deg * M_PI / 180.0;
  int next_id = 0;
  int visible_true = 0;
  for (size_t a = 0; a < scene.anchors.size(); ++a) {
    const Vector3 world = scene.pose * scene.anchors[a].position;
    const Vector3 pc = inv.rotation * world + inv.translation;
    if (pc.z() <= 1e-6) continue;
    Pixel px(cam.focal_px * pc.x() / pc.z() + cam.principal.x(),
             cam.focal_px * pc.y() / pc.z() + cam.principal.y());
    if (!cam.contains(px)) continue;
    ++visible_true;
    if (noise.pixel_sigma > 0) {
      px.x() += rng.normal(noise.pixel_sigma);
      px.y() += rng.normal(noise.pixel_sigma);
      if (!cam.contains(px)) continue;
    }
    FeatureRecord rec;
    rec.id = next_id++;
    rec.p = px;
    rec.anchor_id = static_cast<int>(a);
    rec.d = scene.anchors[a].descriptor;
    if (desc_rad > 0) {
      // rotate the descriptor by a random angle <= desc_rad toward a random
      // orthogonal direction, staying on the unit sphere
      const double angle = rng.uniform(0.0, desc_rad);
      Eigen::VectorXd u = rng.unit_vector(kDescriptorDim);
      u -= u.dot(rec.d) * rec.d;
      const double un = u.norm();
      if (un > 1e-9) {
        u /= un;
        rec.d = std::cos(angle) * rec.d + std::sin(angle) * u;
        rec.d.normalize();
      }
    }
    // depth readout follows the sensor range model for this one ray
    const double true_z = pc.z();
    if (true_z >= cam.depth_min && true_z <= cam.depth_max) {
      double z = true_z;
      if (noise.depth_sigma > 0) {
        z += rng.normal(noise.depth_sigma);
        z = std::min(std::max(z, cam.depth_min), cam.depth_max);
      }
      rec.z = z;
    }
    out.records.push_back(std::move(rec));
  }
  const int n_outliers = static_cast<int>(std::llround(noise.outlier_fraction * visible_true));
  for (int k = 0; k < n_outliers; ++k) {
    FeatureRecord rec;
    rec.id = next_id++;
    rec.p = Pixel(rng.uniform(0.0, cam.width - 1e-9), rng.uniform(0.0, cam.height - 1e-9));
    rec.d = rng.unit_vector(kDescriptorDim);
    rec.anchor_id = -1;
    out.records.push_back(std::move(rec));
  }
  return out;
}

MatchSet match_ratio(const FeatureSet& ref, const FeatureSet& cur, double ratio) {
  MatchSet candidates;
  if (ref.size() == 0 || cur.size() < 2) return candidates;
  const Eigen::MatrixXd dist = distance_matrix(ref, cur);
  for (int i = 0; i < ref.size(); ++i) {
    int j1 = -1, j2 = -1;
    double d1 = std::numeric_limits<double>::infinity();
    double d2 = std::numeric_limits<double>::infinity();
    for (int j = 0; j < cur.size(); ++j) {
      const double d = dist(i, j);
      if (d < d1) {
        d2 = d1;
        j2 = j1;
        d1 = d;
        j1 = j;
      } else if (d < d2) {
        d2 = d;
        j2 = j;
      }
    }
    (void)j2;
    if (j1 >= 0 && d1 < ratio * d2) candidates.push_back({i, j1, d1});
  }
  // one-to-one: better-distance match wins a contested current feature
  candidates = quality_order(std::move(candidates));
  std::set<int> claimed;
  MatchSet out;
  for (const auto& m : candidates) {
    if (claimed.insert(m.cur_index).second) out.push_back(m);
  }
  return sorted_by_ref(out);
}

MatchSet dedup(const MatchSet& m, const FeatureSet& cur, double radius_px) {
  MatchSet ordered = quality_order(m);
  MatchSet kept;
  for (const auto& cand : ordered) {
    const Pixel& p = cur.records[cand.cur_index].p;
    bool crowded = false;
    for (const auto& k : kept) {
      if ((cur.records[k.cur_index].p - p).norm() < radius_px) {
        crowded = true;
        break;
      }
    }
    if (!crowded) kept.push_back(cand);
  }
  return sorted_by_ref(kept);
}

MatchSet loop_check(const FeatureSet& ref, const FeatureSet& cur, const MatchSet& m) {
  if (m.empty()) return {};
  const Eigen::MatrixXd dist = distance_matrix(ref, cur);
  MatchSet out;
  for (const auto& cand : m) {
    int best_i = 0;
    double best_d = dist(0, cand.cur_index);
    for (int i = 1; i < ref.size(); ++i) {
      if (dist(i, cand.cur_index) < best_d) {
        best_d = dist(i, cand.cur_index);
        best_i = i;
      }
    }
    if (best_i == cand.ref_index) out.push_back(cand);
  }
  return sorted_by_ref(out);
}

std::pair<Eigen::Matrix3d, MatchSet> estimate_fundamental_ransac(
    const MatchSet& m, const FeatureSet& ref, const FeatureSet& cur,
    const RansacConfig& cfg) {
  const int sample_size = cfg.model == GeometryModel::Fundamental ? 8 : 4;
  const int n = static_cast<int>(m.size());
  if (n < 8) throw TooFewMatches();

  std::vector<Pixel> p_ref(n), p_cur(n);
  for (int k = 0; k < n; ++k) {
    p_ref[k] = ref.records[m[k].ref_index].p;
    p_cur[k] = cur.records[m[k].cur_index].p;
  }
  const Eigen::Matrix3d t_ref = normalizing_transform(p_ref);
  const Eigen::Matrix3d t_cur = normalizing_transform(p_cur);
  std::vector<Eigen::Vector3d> xn_ref(n), xn_cur(n), x_ref(n), x_cur(n);
  for (int k = 0; k < n; ++k) {
    x_ref[k] = homog(p_ref[k]);
    x_cur[k] = homog(p_cur[k]);
    xn_ref[k] = t_ref * x_ref[k];
    xn_cur[k] = t_cur * x_cur[k];
  }

  const auto residual = [&](const Eigen::Matrix3d& model, int k) {
    return cfg.model == GeometryModel::Fundamental
               ? sampson_px(model, x_ref[k], x_cur[k])
               : transfer_px(model, x_ref[k], x_cur[k]);
  };
  const auto denormalize = [&](const Eigen::Matrix3d& mn) {
    return cfg.model == GeometryModel::Fundamental
               ? Eigen::Matrix3d(t_cur.transpose() * mn * t_ref)
               : Eigen::Matrix3d(t_cur.inverse() * mn * t_ref);
  };
  const auto fit = [&](const std::vector<int>& idx) {
    return cfg.model == GeometryModel::Fundamental
               ? fit_fundamental(xn_ref, xn_cur, idx)
               : fit_homography(xn_ref, xn_cur, idx);
  };

  Rng rng(cfg.seed);
  std::vector<char> best_mask(n, 0);
  int best_count = 0;
  double needed = cfg.max_iters;
  for (int iter = 0; iter < cfg.max_iters && iter < needed; ++iter) {
    std::vector<int> idx;
    while (static_cast<int>(idx.size()) < sample_size) {
      const int cand = static_cast<int>(rng.integer(n));
      if (std::find(idx.begin(), idx.end(), cand) == idx.end()) idx.push_back(cand);
    }
    const Eigen::Matrix3d model = denormalize(fit(idx));
    std::vector<char> mask(n, 0);
    int count = 0;
    for (int k = 0; k < n; ++k) {
      if (residual(model, k) < cfg.threshold_px) {
        mask[k] = 1;
        ++count;
      }
    }
    if (count > best_count) {
      best_count = count;
      best_mask = mask;
      const double w = static_cast<double>(count) / n;
      const double denom = std::log(std::max(1e-12, 1.0 - std::pow(w, sample_size)));
      needed = denom < -1e-12 ? std::log(1.0 - cfg.confidence) / denom : cfg.max_iters;
    }
  }
  if (best_count < cfg.min_inliers) throw NoConsensus();

  // refit on the consensus set, renormalized over those points
  std::vector<int> inlier_idx;
  for (int k = 0; k < n; ++k)
    if (best_mask[k]) inlier_idx.push_back(k);
  std::vector<Pixel> in_ref, in_cur;
  for (int k : inlier_idx) {
    in_ref.push_back(p_ref[k]);
    in_cur.push_back(p_cur[k]);
  }
  const Eigen::Matrix3d tr2 = normalizing_transform(in_ref);
  const Eigen::Matrix3d tc2 = normalizing_transform(in_cur);
  std::vector<Eigen::Vector3d> rn2(n), cn2(n);
  for (int k = 0; k < n; ++k) {
    rn2[k] = tr2 * x_ref[k];
    cn2[k] = tc2 * x_cur[k];
  }
  Eigen::Matrix3d refit_n = cfg.model == GeometryModel::Fundamental
                                ? fit_fundamental(rn2, cn2, inlier_idx)
                                : fit_homography(rn2, cn2, inlier_idx);
  Eigen::Matrix3d refit = cfg.model == GeometryModel::Fundamental
                              ? Eigen::Matrix3d(tc2.transpose() * refit_n * tr2)
                              : Eigen::Matrix3d(tc2.inverse() * refit_n * tr2);

  MatchSet inliers;
  for (int k = 0; k < n; ++k)
    if (residual(refit, k) < cfg.threshold_px) inliers.push_back(m[k]);
  if (static_cast<int>(inliers.size()) < cfg.min_inliers) {
    // refit degraded the consensus; fall back to the sampled set
    inliers.clear();
    for (int k : inlier_idx) inliers.push_back(m[k]);
  }
  return {refit, sorted_by_ref(inliers)};
}

MatchSet grid_filter(const MatchSet& m, const FeatureSet& cur,
                     std::pair<int, int> grid, std::pair<int, int> image_size) {
  const int cols = grid.first;
  const int rows = grid.second;
  const int w = image_size.first;
  const int h = image_size.second;
  MatchSet ordered = quality_order(m);
  std::map<std::pair<int, int>, Match> cells;
  for (const auto& cand : ordered) {
    const Pixel& p = cur.records[cand.cur_index].p;
    int cu = std::clamp(static_cast<int>(p.x() * cols / w), 0, cols - 1);
    int cv = std::clamp(static_cast<int>(p.y() * rows / h), 0, rows - 1);
    cells.try_emplace({cu, cv}, cand);
  }
  MatchSet out;
  for (const auto& [cell, match] : cells) out.push_back(match);
  return sorted_by_ref(out);
}

RobustMatchResult robust_match(const FeatureSet& ref, const FeatureSet& cur,
                               const MatchConfig& cfg, const CameraModel& cam) {
  RobustMatchResult res;
  MatchSet stage = match_ratio(ref, cur, cfg.ratio);
  res.counts.after_ratio = static_cast<int>(stage.size());
  stage = dedup(stage, cur, cfg.dedup_radius_px);
  res.counts.after_dedup = static_cast<int>(stage.size());
  stage = loop_check(ref, cur, stage);
  res.counts.after_loop = static_cast<int>(stage.size());
  try {
    auto [model, inliers] = estimate_fundamental_ransac(stage, ref, cur, cfg.ransac);
    res.model = model;
    stage = std::move(inliers);
  } catch (const TooFewMatches&) {
    throw MatchFailure("too few matches for the consensus stage");
  } catch (const NoConsensus&) {
    throw MatchFailure("no geometric consensus");
  }
  res.counts.after_model = static_cast<int>(stage.size());
  stage = grid_filter(stage, cur, {cfg.grid_cols, cfg.grid_rows}, {cam.width, cam.height});
  res.counts.after_grid = static_cast<int>(stage.size());
  res.matches = std::move(stage);
  return res;
}

}  // namespace vsgrasp

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsgrasp/camera.hpp"
#include "vsgrasp/features.hpp"
#include "vsgrasp/grasp.hpp"
#include "vsgrasp/sim.hpp"

namespace vsgrasp {

struct LogFormatError : std::runtime_error {
  explicit LogFormatError(const std::string& why) : std::runtime_error(why) {}
};

/// Controller log: header then `t,mode,mean_err_px,n_matches,vx,vy,vz,wx,wy,wz`.
void write_controller_log(const std::string& path, const std::vector<LogRecord>& records);
std::vector<LogRecord> read_controller_log(const std::string& path);

/// Feature log: header then `frame,id,u,v,z_or_nan`.
void write_feature_csv(const std::string& path, const FeatureSet& set);
FeatureSet read_feature_csv(const std::string& path);

/// Match log: header then `stage,ref_id,cur_id,dist`, one block per stage.
using StagedMatches = std::vector<std::pair<std::string, MatchSet>>;
void write_match_csv(const std::string& path, const StagedMatches& stages,
                     const FeatureSet& ref, const FeatureSet& cur);
/// Rows come back as (stage, ref_id, cur_id, dist).
struct MatchRow {
  std::string stage;
  int ref_id = 0;
  int cur_id = 0;
  double dist = 0;
};
std::vector<MatchRow> read_match_csv(const std::string& path);

/// Depth image: header `W,H,depth_min,depth_max`, then H rows of W values,
/// NaN marking invalid pixels.
void write_depth_csv(const std::string& path, const DepthImage& img);
DepthImage read_depth_csv(const std::string& path);

/// Grasp map: header `W,H`, then three H-row blocks: quality, phi, width.
void write_grasp_map_csv(const std::string& path, const GraspMap& map);
GraspMap read_grasp_map_csv(const std::string& path);

/// Image-plane feature tracks: header then `id,step,u,v`.
void write_tracks_csv(const std::string& path,
                      const std::map<int, std::vector<Pixel>>& tracks);
std::map<int, std::vector<Pixel>> read_tracks_csv(const std::string& path);

/// Predicted goal pixels: header then `id,u,v`.
void write_goals_csv(const std::string& path, const std::map<int, Pixel>& goals);
std::map<int, Pixel> read_goals_csv(const std::string& path);

/// Campaign summary as JSON (per-trial rows included).
void write_summary_json(const std::string& path, const CampaignSummary& summary,
                        const std::string& scenario_name);
CampaignSummary read_summary_json(const std::string& path);

}  // namespace vsgrasp

#include "vsgrasp/logio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vsgrasp {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LogFormatError("cannot write " + path);
  out.precision(17);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LogFormatError("cannot read " + path);
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

double parse_num(const std::string& s) {
  if (s == "nan" || s == "NaN" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw LogFormatError("bad numeric field: " + s);
  }
}

// %.17g keeps doubles exact through a write/read cycle
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Mode mode_from_name(const std::string& s) {
  if (s == "PBVS") return Mode::PBVS;
  if (s == "IBVS") return Mode::IBVS;
  if (s == "GRASP") return Mode::GRASP;
  if (s == "DONE") return Mode::DONE;
  throw LogFormatError("unknown mode: " + s);
}

}  // namespace

void write_controller_log(const std::string& path, const std::vector<LogRecord>& records) {
  std::ofstream out = open_out(path);
  out << "t,mode,mean_err_px,n_matches,vx,vy,vz,wx,wy,wz\n";
  for (const auto& r : records) {
    out << fmt(r.t) << ',' << mode_name(r.mode) << ',' << fmt(r.mean_err_px) << ','
        << r.n_matches;
    for (int i = 0; i < 6; ++i) out << ',' << fmt(r.cmd(i));
    out << '\n';
  }
}

std::vector<LogRecord> read_controller_log(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split_csv(line).size() != 10)
    throw LogFormatError("bad controller log header in " + path);
  std::vector<LogRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) throw LogFormatError("bad controller log row: " + line);
    LogRecord r;
    r.t = parse_num(f[0]);
    r.mode = mode_from_name(f[1]);
    r.mean_err_px = parse_num(f[2]);
    r.n_matches = static_cast<int>(parse_num(f[3]));
    for (int i = 0; i < 6; ++i) r.cmd(i) = parse_num(f[4 + i]);
    records.push_back(r);
  }
  return records;
}

void write_feature_csv(const std::string& path, const FeatureSet& set) {
  std::ofstream out = open_out(path);
  out << "frame,id,u,v,z_or_nan\n";
  for (const auto& rec : set.records) {
    out << set.frame_id << ',' << rec.id << ',' << fmt(rec.p.x()) << ',' << fmt(rec.p.y())
        << ',' << fmt(rec.z) << '\n';
  }
}

FeatureSet read_feature_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split_csv(line).size() != 5)
    throw LogFormatError("bad feature log header in " + path);
  FeatureSet set;
  bool have_frame = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 5) throw LogFormatError("bad feature row: " + line);
    if (!have_frame) {
      set.frame_id = static_cast<int>(parse_num(f[0]));
      have_frame = true;
    }
    FeatureRecord rec;
    rec.id = static_cast<int>(parse_num(f[1]));
    rec.p = Pixel(parse_num(f[2]), parse_num(f[3]));
    rec.z = parse_num(f[4]);
    set.records.push_back(std::move(rec));
  }
  return set;
}

void write_match_csv(const std::string& path, const StagedMatches& stages,
                     const FeatureSet& ref, const FeatureSet& cur) {
  std::ofstream out = open_out(path);
  out << "stage,ref_id,cur_id,dist\n";
  for (const auto& [name, matches] : stages) {
    for (const auto& m : matches) {
      out << name << ',' << ref.records[m.ref_index].id << ',' << cur.records[m.cur_index].id
          << ',' << fmt(m.distance) << '\n';
    }
  }
}

std::vector<MatchRow> read_match_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split_csv(line).size() != 4)
    throw LogFormatError("bad match log header in " + path);
  std::vector<MatchRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 4) throw LogFormatError("bad match row: " + line);
    rows.push_back({f[0], static_cast<int>(parse_num(f[1])), static_cast<int>(parse_num(f[2])),
                    parse_num(f[3])});
  }
  return rows;
}

void write_depth_csv(const std::string& path, const DepthImage& img) {
  std::ofstream out = open_out(path);
  out << img.width << ',' << img.height << ',' << fmt(img.depth_min) << ','
      << fmt(img.depth_max) << '\n';
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      if (u) out << ',';
      out << (img.valid(v, u) ? fmt(img.values(v, u)) : "nan");
    }
    out << '\n';
  }
}

DepthImage read_depth_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw LogFormatError("empty depth file " + path);
  const auto header = split_csv(line);
  if (header.size() != 4) throw LogFormatError("bad depth header in " + path);
  DepthImage img;
  img.width = static_cast<int>(parse_num(header[0]));
  img.height = static_cast<int>(parse_num(header[1]));
  img.depth_min = parse_num(header[2]);
  img.depth_max = parse_num(header[3]);
  img.values = Eigen::ArrayXXd::Zero(img.height, img.width);
  img.valid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
      img.height, img.width, false);
  for (int v = 0; v < img.height; ++v) {
    if (!std::getline(in, line)) throw LogFormatError("truncated depth file " + path);
    const auto f = split_csv(line);
    if (static_cast<int>(f.size()) != img.width)
      throw LogFormatError("bad depth row length in " + path);
    for (int u = 0; u < img.width; ++u) {
      const double d = parse_num(f[u]);
      if (!std::isnan(d)) {
        img.values(v, u) = d;
        img.valid(v, u) = true;
      }
    }
  }
  return img;
}

void write_grasp_map_csv(const std::string& path, const GraspMap& map) {
  std::ofstream out = open_out(path);
  const int h = map.height();
  const int w = map.width_px();
  out << w << ',' << h << '\n';
  for (const Eigen::ArrayXXd* grid : {&map.quality, &map.phi, &map.width}) {
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        if (u) out << ',';
        out << fmt((*grid)(v, u));
      }
      out << '\n';
    }
  }
}

GraspMap read_grasp_map_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw LogFormatError("empty grasp map file " + path);
  const auto header = split_csv(line);
  if (header.size() != 2) throw LogFormatError("bad grasp map header in " + path);
  const int w = static_cast<int>(parse_num(header[0]));
  const int h = static_cast<int>(parse_num(header[1]));
  GraspMap map;
  for (Eigen::ArrayXXd* grid : {&map.quality, &map.phi, &map.width}) {
    *grid = Eigen::ArrayXXd::Zero(h, w);
    for (int v = 0; v < h; ++v) {
      if (!std::getline(in, line)) throw LogFormatError("truncated grasp map " + path);
      const auto f = split_csv(line);
      if (static_cast<int>(f.size()) != w) throw LogFormatError("bad grasp map row in " + path);
      for (int u = 0; u < w; ++u) (*grid)(v, u) = parse_num(f[u]);
    }
  }
  return map;
}

void write_tracks_csv(const std::string& path,
                      const std::map<int, std::vector<Pixel>>& tracks) {
  std::ofstream out = open_out(path);
  out << "id,step,u,v\n";
  for (const auto& [id, path_px] : tracks) {
    for (size_t k = 0; k < path_px.size(); ++k) {
      out << id << ',' << k << ',' << fmt(path_px[k].x()) << ',' << fmt(path_px[k].y())
          << '\n';
    }
  }
}

std::map<int, std::vector<Pixel>> read_tracks_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split_csv(line).size() != 4)
    throw LogFormatError("bad tracks header in " + path);
  std::map<int, std::vector<Pixel>> tracks;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 4) throw LogFormatError("bad tracks row: " + line);
    tracks[static_cast<int>(parse_num(f[0]))].push_back(Pixel(parse_num(f[2]), parse_num(f[3])));
  }
  return tracks;
}

void write_goals_csv(const std::string& path, const std::map<int, Pixel>& goals) {
  std::ofstream out = open_out(path);
  out << "id,u,v\n";
  for (const auto& [id, px] : goals)
    out << id << ',' << fmt(px.x()) << ',' << fmt(px.y()) << '\n';
}

std::map<int, Pixel> read_goals_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split_csv(line).size() != 3)
    throw LogFormatError("bad goals header in " + path);
  std::map<int, Pixel> goals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 3) throw LogFormatError("bad goals row: " + line);
    goals[static_cast<int>(parse_num(f[0]))] = Pixel(parse_num(f[1]), parse_num(f[2]));
  }
  return goals;
}

void write_summary_json(const std::string& path, const CampaignSummary& summary,
                        const std::string& scenario_name) {
  nlohmann::json j;
  j["scenario"] = scenario_name;
  j["n_trials"] = summary.n_trials;
  j["successes"] = summary.successes;
  j["success_rate"] = summary.success_rate;
  j["mean_steps_success"] = summary.mean_steps_success;
  j["causes"] = summary.causes;
  j["trials"] = nlohmann::json::array();
  for (const auto& t : summary.trials) {
    nlohmann::json row;
    row["seed"] = t.seed;
    row["success"] = t.success;
    row["steps"] = t.steps;
    row["cause"] = t.cause;
    row["final_err_px"] = std::isnan(t.final_err_px) ? nlohmann::json() : nlohmann::json(t.final_err_px);
    row["pos_err_m"] = std::isnan(t.pos_err_m) ? nlohmann::json() : nlohmann::json(t.pos_err_m);
    row["yaw_err_rad"] = std::isnan(t.yaw_err_rad) ? nlohmann::json() : nlohmann::json(t.yaw_err_rad);
    j["trials"].push_back(row);
  }
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

CampaignSummary read_summary_json(const std::string& path) {
  std::ifstream in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw LogFormatError(std::string("bad summary json: ") + e.what());
  }
  CampaignSummary s;
  s.n_trials = j.at("n_trials").get<int>();
  s.successes = j.at("successes").get<int>();
  s.success_rate = j.at("success_rate").get<double>();
  s.mean_steps_success = j.at("mean_steps_success").get<double>();
  s.causes = j.at("causes").get<std::map<std::string, int>>();
  for (const auto& row : j.at("trials")) {
    CampaignSummary::TrialRow t;
    t.seed = row.at("seed").get<std::uint64_t>();
    t.success = row.at("success").get<bool>();
    t.steps = row.at("steps").get<int>();
    t.cause = row.at("cause").get<std::string>();
    if (!row.at("final_err_px").is_null()) t.final_err_px = row.at("final_err_px").get<double>();
    if (!row.at("pos_err_m").is_null()) t.pos_err_m = row.at("pos_err_m").get<double>();
    if (!row.at("yaw_err_rad").is_null()) t.yaw_err_rad = row.at("yaw_err_rad").get<double>();
    s.trials.push_back(t);
  }
  return s;
}

}  // namespace vsgrasp

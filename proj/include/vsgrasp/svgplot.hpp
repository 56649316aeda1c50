#pragma once

#include <map>
#include <string>
#include <vector>

#include "vsgrasp/camera.hpp"
#include "vsgrasp/sim.hpp"

namespace vsgrasp {

/// Mean feature error against time. Records without an error value (PBVS
/// phase) are skipped. Output is deterministic for identical input.
std::string svg_error_plot(const std::vector<LogRecord>& records,
                           const std::string& title);

/// Image-plane feature paths with start markers and predicted goal crosses,
/// drawn in pixel coordinates over the image rectangle.
std::string svg_path_plot(const std::map<int, std::vector<Pixel>>& tracks,
                          const std::map<int, Pixel>& goals, int image_w, int image_h,
                          const std::string& title);

}  // namespace vsgrasp

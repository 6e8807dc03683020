#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <map>
#include <random>
#include <string>

#include "iaqmob/core.hpp"
#include "iaqmob/featurize.hpp"
#include "iaqmob/trajectory.hpp"

namespace iaqmob::testing {

/// Fresh, empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("iaqmob-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs a shell command line, capturing stdout, stderr and the exit code.
inline CommandResult run_command(const std::string& cmdline) {
  TempDir io("cmd");
  const auto out = io.path() / "stdout";
  const auto err = io.path() / "stderr";
  const std::string full = cmdline + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(full.c_str());
  CommandResult r;
  r.exit_code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

/// rows x cols grid of size x size zones, ids row-major, one gateway per corner.
inline Deployment grid_deployment(int rows, int cols, double size = 5.0) {
  Deployment d;
  d.name = "grid";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      d.zones.push_back({ZoneId{r * cols + c + 1},
                         Rect{c * size, r * size, (c + 1) * size, (r + 1) * size}});
    }
  }
  const double w = cols * size, h = rows * size;
  d.gateways = {{"g1", {0, 0}}, {"g2", {w, 0}}, {"g3", {0, h}}, {"g4", {w, h}}};
  d.validate();
  return d;
}

/// Ground truth rendered as the trajectories a perfect classifier would
/// produce: one step per window wholly inside an interval, for tags whose id
/// starts with `prefix`.
inline std::vector<Trajectory> truth_trajectories(std::span<const GroundTruthInterval> truth,
                                                  Millis window_ms, const std::string& prefix = "") {
  std::map<std::string, Trajectory> by_tag;
  for (const auto& iv : truth) {
    if (iv.tag_id.rfind(prefix, 0) != 0) continue;
    auto& t = by_tag[iv.tag_id];
    t.tag_id = iv.tag_id;
    for (Millis w = floor_div(iv.start + window_ms - 1, window_ms) * window_ms; w + window_ms <= iv.end;
         w += window_ms) {
      t.steps.push_back({{w, window_ms}, iv.zone});
    }
  }
  std::vector<Trajectory> out;
  for (auto& [tag, t] : by_tag) {
    std::sort(t.steps.begin(), t.steps.end(),
              [](const auto& a, const auto& b) { return a.window.start < b.window.start; });
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace iaqmob::testing

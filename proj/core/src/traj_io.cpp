#include "kf/traj_io.hpp"

#include "kf/config.hpp"
#include "kf/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace kf {

namespace {

std::string snapshot_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snap_%06d.kfm", index);
  return buf;
}

Termination parse_termination(const std::string& s) {
  if (s == "t_end") return Termination::TEnd;
  if (s == "blow-up-threshold") return Termination::BlowupThreshold;
  if (s == "mesh-failure") return Termination::MeshFailure;
  throw std::runtime_error("unknown termination reason: '" + s + "'");
}

}  // namespace

void write_summary_csv(const std::filesystem::path& path, const FlowTrajectory& traj) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << "t,area,max_A2,min_cos_alpha,max_H,remesh_flag\n";
  for (const Snapshot& s : traj.snapshots) {
    os << format_double(s.t) << ',' << format_double(s.summary.area) << ','
       << format_double(s.summary.max_a2) << ',' << format_double(s.summary.min_cos_alpha)
       << ',' << format_double(s.summary.max_mean_curvature) << ','
       << (s.summary.remesh_event ? 1 : 0) << '\n';
  }
}

void write_trajectory(const std::filesystem::path& dir, const FlowTrajectory& traj,
                      const std::string& config_echo, bool s_axis) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    write_mesh(dir / snapshot_filename(static_cast<int>(i)), traj.snapshots[i].mesh);
  }
  write_summary_csv(dir / "summary.csv", traj);

  std::ofstream os(dir / "manifest.kft");
  if (!os) throw std::runtime_error("cannot open manifest for writing in " + dir.string());
  os << "KF-TRAJ v1\n";
  os << "termination " << to_string(traj.termination) << '\n';
  if (!traj.failure_detail.empty()) os << "failure_detail " << traj.failure_detail << '\n';
  os << "s_axis " << (s_axis ? 1 : 0) << '\n';
  os << "snapshots " << traj.snapshots.size() << '\n';
  os << "config-begin\n" << config_echo;
  if (!config_echo.empty() && config_echo.back() != '\n') os << '\n';
  os << "config-end\n";
  os << "index-begin\n";
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const Snapshot& s = traj.snapshots[i];
    os << i << ' ' << format_double(s.t) << ' ' << snapshot_filename(static_cast<int>(i))
       << ' ' << (s.summary.remesh_event ? 1 : 0) << ' ' << format_double(s.summary.area)
       << ' ' << format_double(s.summary.max_a2) << ' '
       << format_double(s.summary.min_cos_alpha) << ' '
       << format_double(s.summary.max_mean_curvature) << ' '
       << (s.summary.has_beta ? 1 : 0) << ' ' << format_double(s.summary.beta_min) << ' '
       << format_double(s.summary.beta_max) << '\n';
  }
  os << "index-end\n";
}

TrajectoryBundle read_trajectory(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.kft");
  if (!is) throw std::runtime_error("cannot open manifest in " + dir.string());
  std::string line;
  if (!std::getline(is, line) || line != "KF-TRAJ v1") {
    throw std::runtime_error(dir.string() + ": not a KF-TRAJ v1 manifest");
  }
  TrajectoryBundle bundle;
  std::size_t snapshot_count = 0;
  while (std::getline(is, line)) {
    if (line == "config-begin") {
      std::ostringstream echo;
      while (std::getline(is, line) && line != "config-end") echo << line << '\n';
      bundle.config_echo = echo.str();
      continue;
    }
    if (line == "index-begin") {
      while (std::getline(is, line) && line != "index-end") {
        std::istringstream ls(line);
        std::size_t idx;
        std::string file;
        int remesh_flag = 0, has_beta = 0;
        Snapshot snap;
        if (!(ls >> idx >> snap.t >> file >> remesh_flag >> snap.summary.area >>
              snap.summary.max_a2 >> snap.summary.min_cos_alpha >>
              snap.summary.max_mean_curvature >> has_beta >> snap.summary.beta_min >>
              snap.summary.beta_max)) {
          throw std::runtime_error(dir.string() + ": bad index line: '" + line + "'");
        }
        snap.summary.t = snap.t;
        snap.summary.remesh_event = remesh_flag != 0;
        snap.summary.has_beta = has_beta != 0;
        snap.mesh = read_mesh(dir / file);
        bundle.traj.snapshots.push_back(std::move(snap));
      }
      continue;
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "termination") {
      std::string reason;
      ls >> reason;
      bundle.traj.termination = parse_termination(reason);
    } else if (key == "failure_detail") {
      std::getline(ls, bundle.traj.failure_detail);
    } else if (key == "s_axis") {
      int flag = 0;
      ls >> flag;
      bundle.s_axis = flag != 0;
    } else if (key == "snapshots") {
      ls >> snapshot_count;
    }
  }
  if (snapshot_count != bundle.traj.snapshots.size()) {
    throw std::runtime_error(dir.string() + ": snapshot count mismatch in manifest");
  }
  if (!bundle.config_echo.empty()) {
    try {
      const KeyValueConfig echoed = KeyValueConfig::parse(bundle.config_echo, "manifest");
      bundle.traj.config.scenario = echoed.get_string("scenario", "");
    } catch (const std::exception&) {
      // A foreign echo block is tolerated; the snapshots carry the data.
    }
  }
  return bundle;
}

void write_trace_csv(const std::filesystem::path& path, const DensityTrace& trace) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << "s,phi,term_shrinker,term_grad,under_resolved_flag\n";
  for (const auto& sample : trace.samples) {
    os << format_double(sample.s) << ',' << format_double(sample.phi) << ','
       << format_double(sample.term_shrinker) << ',' << format_double(sample.term_grad)
       << ',' << (sample.under_resolved ? 1 : 0) << '\n';
  }
}

void write_angles_csv(const std::filesystem::path& path, const AngleField& angles) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << "face_id,cos_alpha,beta,branch_flag\n";
  for (std::size_t f = 0; f < angles.face_cos_alpha.size(); ++f) {
    os << f << ',' << format_double(angles.face_cos_alpha[f]) << ',';
    if (angles.has_beta) {
      os << format_double(angles.face_beta[f]) << ','
         << static_cast<int>(angles.face_branch_flag[f]);
    } else {
      os << "nan,0";
    }
    os << '\n';
  }
}

}  // namespace kf

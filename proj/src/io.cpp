#include "poselift/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace poselift {

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && *begin == ' ') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError(context + ": bad number '" + s + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& context) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError(context + ": bad integer '" + s + "'");
  }
  return v;
}

template <typename Row, typename JointParser>
std::vector<Row> read_pose_csv(const std::filesystem::path& path,
                               const SkeletonPtr& skeleton, int coords,
                               const JointParser& parse_joints) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Row> rows;
  std::string line;
  std::int64_t line_no = 0;
  const std::size_t expected =
      3 + static_cast<std::size_t>(skeleton->joint_count * coords);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("id,", 0) == 0) continue;  // header
    const std::string context = path.string() + " row " + std::to_string(line_no);
    const std::vector<std::string> fields = split_csv_row(line);
    if (fields.size() != expected) {
      throw FormatError(context + ": expected " + std::to_string(expected) +
                        " columns, got " + std::to_string(fields.size()));
    }
    Row row;
    row.id = parse_int(fields[0], context);
    row.activity = fields[1];
    row.subject = fields[2];
    row.pose = parse_joints(fields, context);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path.string() + ": no pose rows");
  return rows;
}

}  // namespace

SkeletonPtr skeleton_from_json(const nlohmann::json& j) {
  try {
    std::vector<std::string> names =
        j.at("joint_names").get<std::vector<std::string>>();
    const int root = j.at("root_index").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
      edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    return make_skeleton(std::move(names), root, std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad skeleton JSON: ") + e.what());
  }
}

nlohmann::json skeleton_to_json(const Skeleton& skeleton) {
  nlohmann::json j;
  j["joint_names"] = skeleton.joint_names;
  j["root_index"] = skeleton.root_index;
  auto edges = nlohmann::json::array();
  for (const auto& [p, c] : skeleton.edges) edges.push_back({p, c});
  j["edges"] = edges;
  return j;
}

SkeletonPtr load_skeleton(const std::filesystem::path& path) {
  return skeleton_from_json(load_json(path));
}

CameraModel camera_from_json(const nlohmann::json& j) {
  try {
    CameraModel cam;
    cam.focal = j.at("focal").get<double>();
    cam.principal_point.x() = j.at("cx").get<double>();
    cam.principal_point.y() = j.at("cy").get<double>();
    if (j.contains("R")) {
      const auto r = j.at("R").get<std::vector<double>>();
      if (r.size() != 9) throw FormatError("camera R must have 9 entries");
      for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) {
          cam.rotation(row, col) = r[static_cast<std::size_t>(3 * row + col)];
        }
      }
    }
    if (j.contains("t")) {
      const auto t = j.at("t").get<std::vector<double>>();
      if (t.size() != 3) throw FormatError("camera t must have 3 entries");
      cam.translation = {t[0], t[1], t[2]};
    }
    cam.validate();
    return cam;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad camera JSON: ") + e.what());
  }
}

nlohmann::json camera_to_json(const CameraModel& cam) {
  nlohmann::json j;
  j["focal"] = cam.focal;
  j["cx"] = cam.principal_point.x();
  j["cy"] = cam.principal_point.y();
  std::vector<double> r(9);
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      r[static_cast<std::size_t>(3 * row + col)] = cam.rotation(row, col);
    }
  }
  j["R"] = r;
  j["t"] = {cam.translation.x(), cam.translation.y(), cam.translation.z()};
  return j;
}

CameraModel load_camera(const std::filesystem::path& path) {
  return camera_from_json(load_json(path));
}

std::vector<LabeledPose3D> read_pose3d_csv(const std::filesystem::path& path,
                                           const SkeletonPtr& skeleton) {
  return read_pose_csv<LabeledPose3D>(
      path, skeleton, 3,
      [&](const std::vector<std::string>& fields, const std::string& context) {
        std::vector<Eigen::Vector3d> joints;
        joints.reserve(static_cast<std::size_t>(skeleton->joint_count));
        for (int j = 0; j < skeleton->joint_count; ++j) {
          const std::size_t base = 3 + static_cast<std::size_t>(3 * j);
          joints.emplace_back(parse_double(fields[base], context),
                              parse_double(fields[base + 1], context),
                              parse_double(fields[base + 2], context));
        }
        return make_pose3d(skeleton, std::move(joints));
      });
}

std::vector<LabeledPose2D> read_pose2d_csv(const std::filesystem::path& path,
                                           const SkeletonPtr& skeleton) {
  return read_pose_csv<LabeledPose2D>(
      path, skeleton, 2,
      [&](const std::vector<std::string>& fields, const std::string& context) {
        std::vector<Eigen::Vector2d> joints;
        joints.reserve(static_cast<std::size_t>(skeleton->joint_count));
        for (int j = 0; j < skeleton->joint_count; ++j) {
          const std::size_t base = 3 + static_cast<std::size_t>(2 * j);
          joints.emplace_back(parse_double(fields[base], context),
                              parse_double(fields[base + 1], context));
        }
        return make_pose2d(skeleton, std::move(joints));
      });
}

namespace {

template <typename Rows, typename JointWriter>
void write_pose_csv(const std::filesystem::path& path, const Rows& rows,
                    int coords, const JointWriter& write_joints) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "id,activity,subject";
  if (!rows.empty()) {
    const auto& skel = *rows.front().pose.skeleton;
    for (int j = 0; j < skel.joint_count; ++j) {
      out << ",J" << j << "x,J" << j << "y";
      if (coords == 3) out << ",J" << j << "z";
    }
  }
  out << "\n";
  for (const auto& row : rows) {
    out << row.id << "," << row.activity << "," << row.subject;
    write_joints(out, row);
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_pose3d_csv(const std::filesystem::path& path,
                      const std::vector<LabeledPose3D>& rows) {
  write_pose_csv(path, rows, 3, [](std::ofstream& out, const LabeledPose3D& row) {
    for (const auto& j : row.pose.joints) {
      out << "," << j.x() << "," << j.y() << "," << j.z();
    }
  });
}

void write_pose2d_csv(const std::filesystem::path& path,
                      const std::vector<LabeledPose2D>& rows) {
  write_pose_csv(path, rows, 2, [](std::ofstream& out, const LabeledPose2D& row) {
    for (const auto& j : row.pose.joints) {
      out << "," << j.x() << "," << j.y();
    }
  });
}

nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace poselift

#include "poselift/types.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <unordered_set>

namespace poselift {

SkeletonPtr make_skeleton(std::vector<std::string> joint_names, int root_index,
                          std::vector<std::pair<int, int>> edges) {
  const int n = static_cast<int>(joint_names.size());
  if (n <= 0) throw ConfigInvalid("skeleton needs at least one joint");
  if (root_index < 0 || root_index >= n) {
    throw ConfigInvalid("skeleton root index out of range");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : joint_names) {
    if (!seen.insert(name).second) {
      throw ConfigInvalid("duplicate joint name: " + name);
    }
  }
  if (static_cast<int>(edges.size()) != n - 1) {
    throw ConfigInvalid("skeleton edges must form a spanning tree (need N-1)");
  }
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  for (const auto& [p, c] : edges) {
    if (p < 0 || p >= n || c < 0 || c >= n) {
      throw ConfigInvalid("skeleton edge index out of range");
    }
    if (c == root_index) throw ConfigInvalid("root joint cannot have a parent");
    if (parent[static_cast<std::size_t>(c)] != -1) {
      throw ConfigInvalid("joint has two parents: " +
                          joint_names[static_cast<std::size_t>(c)]);
    }
    parent[static_cast<std::size_t>(c)] = p;
  }
  // Every non-root joint must reach the root through parent links.
  for (int j = 0; j < n; ++j) {
    if (j == root_index) continue;
    int cur = j;
    int hops = 0;
    while (cur != root_index) {
      cur = parent[static_cast<std::size_t>(cur)];
      if (cur < 0 || ++hops > n) {
        throw ConfigInvalid("skeleton edges do not form a tree rooted at root");
      }
    }
  }
  auto skel = std::make_shared<Skeleton>();
  skel->joint_count = n;
  skel->joint_names = std::move(joint_names);
  skel->root_index = root_index;
  skel->edges = std::move(edges);
  return skel;
}

std::vector<int> topological_edge_order(const Skeleton& skeleton) {
  const std::size_t n = static_cast<std::size_t>(skeleton.joint_count);
  std::vector<bool> placed(n, false);
  placed[static_cast<std::size_t>(skeleton.root_index)] = true;
  std::vector<int> order;
  order.reserve(skeleton.edges.size());
  std::vector<bool> used(skeleton.edges.size(), false);
  while (order.size() < skeleton.edges.size()) {
    bool progress = false;
    for (std::size_t e = 0; e < skeleton.edges.size(); ++e) {
      if (used[e]) continue;
      const auto& [p, c] = skeleton.edges[e];
      if (placed[static_cast<std::size_t>(p)]) {
        placed[static_cast<std::size_t>(c)] = true;
        used[e] = true;
        order.push_back(static_cast<int>(e));
        progress = true;
      }
    }
    if (!progress) throw ConfigInvalid("skeleton edges are not connected");
  }
  return order;
}

Eigen::Vector3d Pose3D::centroid() const {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& j : joints) sum += j;
  return sum / static_cast<double>(joints.size());
}

namespace {

template <typename Vec>
void check_joints(const SkeletonPtr& skeleton, const std::vector<Vec>& joints) {
  if (!skeleton) throw ConfigInvalid("pose has no skeleton");
  if (static_cast<int>(joints.size()) != skeleton->joint_count) {
    throw SkeletonMismatch("pose has " + std::to_string(joints.size()) +
                           " joints, skeleton expects " +
                           std::to_string(skeleton->joint_count));
  }
  for (const auto& j : joints) {
    if (!j.allFinite()) throw ConfigInvalid("pose has non-finite coordinates");
  }
}

}  // namespace

Pose3D make_pose3d(SkeletonPtr skeleton, std::vector<Eigen::Vector3d> joints) {
  check_joints(skeleton, joints);
  return Pose3D{std::move(skeleton), std::move(joints)};
}

Pose2D make_pose2d(SkeletonPtr skeleton, std::vector<Eigen::Vector2d> joints) {
  check_joints(skeleton, joints);
  return Pose2D{std::move(skeleton), std::move(joints)};
}

void CameraModel::validate() const {
  if (!(focal > 0)) throw ConfigInvalid("camera focal length must be > 0");
  if (!rotation.allFinite() || !translation.allFinite() ||
      !principal_point.allFinite()) {
    throw ConfigInvalid("camera has non-finite parameters");
  }
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ConfigInvalid("camera rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw ConfigInvalid("camera rotation must have determinant +1");
  }
}

}  // namespace poselift

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "facemotion/flame.hpp"

namespace facemotion {

using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

struct VertexFrame {
  Vertices vertices;

  std::size_t size() const { return static_cast<std::size_t>(vertices.rows()); }
  Eigen::Vector3d vertex(std::size_t i) const { return vertices.row(static_cast<Eigen::Index>(i)).transpose(); }
};

namespace region {
inline constexpr const char* kLips = "lips";
inline constexpr const char* kFace = "face";
inline constexpr const char* kUpperFace = "upper_face";
}  // namespace region

namespace landmark {
inline constexpr const char* kUpperLip = "upper_lip";
inline constexpr const char* kLowerLip = "lower_lip";
inline constexpr const char* kLeftCorner = "left_corner";
inline constexpr const char* kRightCorner = "right_corner";
}  // namespace landmark

// Linear blendshape face with a rigidly articulated jaw. Identity shape is
// baked into `template_vertices`.
//
// Basis matrices are stored flattened: row 3*i + c is coordinate c of vertex i,
// column k is the displacement for unit coefficient k.
struct BlendshapeModel {
  Vertices template_vertices;
  Eigen::MatrixXd expression_basis;  // 3N x 50
  Eigen::MatrixXd eyelid_basis;      // 3N x 2
  Eigen::Vector3d jaw_joint = Eigen::Vector3d::Zero();
  std::vector<std::size_t> jaw_region;
  std::map<std::string, std::vector<std::size_t>> regions;
  std::map<std::string, std::size_t> landmarks;

  std::size_t num_vertices() const { return static_cast<std::size_t>(template_vertices.rows()); }

  // Throws ConfigError on out-of-range indices, inconsistent basis shapes,
  // non-finite data, lips not inside face, or lips overlapping upper_face.
  void validate() const;

  // Throws ConfigError naming the missing entry.
  const std::vector<std::size_t>& region(const std::string& name) const;
  std::size_t landmark(const std::string& name) const;

  bool operator==(const BlendshapeModel& other) const;
};

// V = R_global * Jaw(template + expression_basis * psi + eyelid_basis * eyelid)
VertexFrame forward_vertices(const BlendshapeModel& model, const FlameFrame& frame);

// Euclidean distance between the upper and lower lip landmarks (meters).
double mouth_opening(const BlendshapeModel& model, const VertexFrame& vertices);
// Euclidean distance between the two lip corners (meters).
double mouth_width(const BlendshapeModel& model, const VertexFrame& vertices);

std::vector<VertexFrame> sequence_vertices(const BlendshapeModel& model, const MotionSequence& motion,
                                           bool zero_posed);

}  // namespace facemotion

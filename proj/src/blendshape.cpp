#include "facemotion/blendshape.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "facemotion/error.hpp"
#include "facemotion/rotation.hpp"

namespace facemotion {

Eigen::Matrix3d rotation_from_axis_angle(const Eigen::Vector3d& axis_angle) {
  const double theta_sq = axis_angle.squaredNorm();
  if (theta_sq == 0.0) return Eigen::Matrix3d::Identity();

  Eigen::Matrix3d k;
  k << 0.0, -axis_angle.z(), axis_angle.y(),
       axis_angle.z(), 0.0, -axis_angle.x(),
       -axis_angle.y(), axis_angle.x(), 0.0;

  // R = I + a*K + b*K^2 with a = sin(t)/t, b = (1 - cos(t))/t^2 on the
  // unnormalized skew matrix K.
  double a;
  double b;
  if (theta_sq < 1e-12) {
    a = 1.0 - theta_sq / 6.0;
    b = 0.5 - theta_sq / 24.0;
  } else {
    const double theta = std::sqrt(theta_sq);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta_sq;
  }
  return Eigen::Matrix3d::Identity() + a * k + b * (k * k);
}

namespace {

void check_indices(const std::vector<std::size_t>& indices, std::size_t n, const std::string& what) {
  for (auto i : indices) {
    if (i >= n) {
      throw ConfigError(what + " index " + std::to_string(i) + " out of range for " + std::to_string(n) +
                        " vertices");
    }
  }
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

void BlendshapeModel::validate() const {
  const std::size_t n = num_vertices();
  if (n == 0) throw ConfigError("blendshape model has no vertices");
  const auto rows = static_cast<Eigen::Index>(3 * n);
  if (expression_basis.rows() != rows || expression_basis.cols() != static_cast<Eigen::Index>(FlameFrame::kExpressionDim)) {
    throw ConfigError("expression basis must be " + std::to_string(3 * n) + " x 50");
  }
  if (eyelid_basis.rows() != rows || eyelid_basis.cols() != static_cast<Eigen::Index>(FlameFrame::kEyelidDim)) {
    throw ConfigError("eyelid basis must be " + std::to_string(3 * n) + " x 2");
  }
  if (!template_vertices.allFinite() || !all_finite(expression_basis) || !all_finite(eyelid_basis) ||
      !jaw_joint.allFinite()) {
    throw ConfigError("blendshape model contains non-finite values");
  }
  check_indices(jaw_region, n, "jaw_region");
  for (const auto& [name, indices] : regions) check_indices(indices, n, "region '" + name + "'");
  for (const auto& [name, index] : landmarks) check_indices({index}, n, "landmark '" + name + "'");

  auto lips_it = regions.find(region::kLips);
  if (lips_it != regions.end()) {
    auto face_it = regions.find(region::kFace);
    if (face_it != regions.end()) {
      const std::set<std::size_t> face(face_it->second.begin(), face_it->second.end());
      for (auto i : lips_it->second) {
        if (!face.count(i)) throw ConfigError("lips vertex " + std::to_string(i) + " is not in face region");
      }
    }
    auto upper_it = regions.find(region::kUpperFace);
    if (upper_it != regions.end()) {
      const std::set<std::size_t> upper(upper_it->second.begin(), upper_it->second.end());
      for (auto i : lips_it->second) {
        if (upper.count(i)) throw ConfigError("lips vertex " + std::to_string(i) + " is also in upper_face");
      }
    }
  }
}

const std::vector<std::size_t>& BlendshapeModel::region(const std::string& name) const {
  auto it = regions.find(name);
  if (it == regions.end()) throw ConfigError("blendshape model has no region '" + name + "'");
  return it->second;
}

std::size_t BlendshapeModel::landmark(const std::string& name) const {
  auto it = landmarks.find(name);
  if (it == landmarks.end()) throw ConfigError("blendshape model has no landmark '" + name + "'");
  if (it->second >= num_vertices()) throw ConfigError("landmark '" + name + "' out of range");
  return it->second;
}

bool BlendshapeModel::operator==(const BlendshapeModel& other) const {
  return template_vertices == other.template_vertices && expression_basis == other.expression_basis &&
         eyelid_basis == other.eyelid_basis && jaw_joint == other.jaw_joint && jaw_region == other.jaw_region &&
         regions == other.regions && landmarks == other.landmarks;
}

VertexFrame forward_vertices(const BlendshapeModel& model, const FlameFrame& frame) {
  const auto n = static_cast<Eigen::Index>(model.num_vertices());
  if (model.expression_basis.rows() != 3 * n || model.eyelid_basis.rows() != 3 * n ||
      model.expression_basis.cols() != static_cast<Eigen::Index>(FlameFrame::kExpressionDim) ||
      model.eyelid_basis.cols() != static_cast<Eigen::Index>(FlameFrame::kEyelidDim)) {
    throw DimensionError("blendshape model bases are incompatible with a 58-channel frame");
  }

  const Eigen::Map<const Eigen::VectorXd> psi(frame.expression().data(), FlameFrame::kExpressionDim);
  const Eigen::Map<const Eigen::VectorXd> lids(frame.eyelid().data(), FlameFrame::kEyelidDim);

  VertexFrame out;
  out.vertices = model.template_vertices;
  Eigen::Map<Eigen::VectorXd> flat(out.vertices.data(), 3 * n);
  flat += model.expression_basis * psi;
  flat += model.eyelid_basis * lids;

  const Eigen::Vector3d jaw(frame.jaw_pose()[0], frame.jaw_pose()[1], frame.jaw_pose()[2]);
  if (!jaw.isZero(0.0)) {
    const Eigen::Matrix3d r = rotation_from_axis_angle(jaw);
    for (auto i : model.jaw_region) {
      const auto row = static_cast<Eigen::Index>(i);
      const Eigen::Vector3d local = out.vertices.row(row).transpose() - model.jaw_joint;
      out.vertices.row(row) = (r * local + model.jaw_joint).transpose();
    }
  }

  const Eigen::Vector3d global(frame.global_pose()[0], frame.global_pose()[1], frame.global_pose()[2]);
  if (!global.isZero(0.0)) {
    const Eigen::Matrix3d r = rotation_from_axis_angle(global);
    out.vertices = out.vertices * r.transpose();
  }
  return out;
}

namespace {

double landmark_distance(const BlendshapeModel& model, const VertexFrame& v, const char* a, const char* b) {
  const auto ia = model.landmark(a);
  const auto ib = model.landmark(b);
  if (ia >= v.size() || ib >= v.size()) {
    throw DimensionError("vertex frame has fewer vertices than the model's landmarks require");
  }
  return (v.vertex(ia) - v.vertex(ib)).norm();
}

}  // namespace

double mouth_opening(const BlendshapeModel& model, const VertexFrame& vertices) {
  return landmark_distance(model, vertices, landmark::kUpperLip, landmark::kLowerLip);
}

double mouth_width(const BlendshapeModel& model, const VertexFrame& vertices) {
  return landmark_distance(model, vertices, landmark::kLeftCorner, landmark::kRightCorner);
}

std::vector<VertexFrame> sequence_vertices(const BlendshapeModel& model, const MotionSequence& motion,
                                           bool zero_posed) {
  std::vector<VertexFrame> out;
  out.reserve(motion.size());
  for (const auto& frame : motion.frames) {
    out.push_back(forward_vertices(model, zero_posed ? zero_pose(frame) : frame));
  }
  return out;
}

}  // namespace facemotion

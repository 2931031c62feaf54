#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "facemotion/error.hpp"
#include "facemotion/training.hpp"

namespace facemotion {

WindowProjection fit_projections(std::span<const MotionSequence> corpus, const QuantizerConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw ComputationError("fit_projections: corpus is empty");

  const std::size_t dim = cfg.window_dim();
  if (cfg.latent_dim >= dim) return WindowProjection::identity(dim, cfg.latent_dim);

  std::vector<RowMatrix> parts;
  Eigen::Index rows = 0;
  for (const auto& m : corpus) {
    if (m.empty()) continue;
    parts.push_back(motion_windows(m, cfg.group_size));
    rows += parts.back().rows();
  }
  if (rows < 1) throw ComputationError("fit_projections: corpus has no windows");

  RowMatrix windows(rows, static_cast<Eigen::Index>(dim));
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    windows.middleRows(at, p.rows()) = p;
    at += p.rows();
  }

  // Mean shifted by the first window so identical windows give it exactly.
  const Eigen::RowVectorXd pivot = windows.row(0);
  const Eigen::RowVectorXd mean = pivot + (windows.rowwise() - pivot).colwise().mean();
  const RowMatrix centered = windows.rowwise() - mean;
  const Eigen::MatrixXd covariance = (centered.transpose() * centered) / static_cast<double>(rows);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) throw ComputationError("fit_projections: eigendecomposition failed");

  const auto d = static_cast<Eigen::Index>(cfg.latent_dim);
  const auto n = static_cast<Eigen::Index>(dim);
  WindowProjection proj;
  proj.encode_map = RowMatrix::Zero(d, n);
  // Directions without corpus variance stay zero, so a degenerate corpus
  // encodes to exactly zero latents.
  const double floor = 1e-12 * std::max(solver.eigenvalues()[n - 1], 0.0);
  for (Eigen::Index r = 0; r < d; ++r) {
    if (!(solver.eigenvalues()[n - 1 - r] > floor)) break;
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - r);
    const double tol = 1e-9 * v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v[i]) > tol) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    proj.encode_map.row(r) = v.transpose();
  }
  proj.encode_bias = -(proj.encode_map * mean.transpose());
  proj.decode_map = proj.encode_map.transpose();
  proj.decode_bias = mean.transpose();
  return proj;
}

}  // namespace facemotion

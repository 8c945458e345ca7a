#pragma once

#include <utility>
#include <vector>

#include "switchid/segmentation.hpp"
#include "switchid/sparsity.hpp"

namespace switchid {

/// Segmented data in residual form. Block m is [y^m, -T_m'] with p_m rows,
/// so block * [1; theta] is the residual of theta on that segment.
class SegmentBlocks {
 public:
  SegmentBlocks() = default;

  /// Blocks for the listed segments of `seg`, in the given order.
  SegmentBlocks(const RegressorMatrix& regs, const Segmentation& seg,
                const std::vector<Index>& segments);
  /// Blocks for every segment of `seg`.
  SegmentBlocks(const RegressorMatrix& regs, const Segmentation& seg);

  Index size() const noexcept { return static_cast<Index>(blocks_.size()); }
  Index dim() const noexcept { return dim_; }
  Index samples() const noexcept { return samples_; }

  const Matrix& block(Index m) const { return blocks_[static_cast<std::size_t>(m)]; }
  Index rows(Index m) const { return block(m).rows(); }
  /// Segment index in the source segmentation.
  Index origin(Index m) const { return origin_[static_cast<std::size_t>(m)]; }
  /// Column range of the block in the source regressor matrix.
  std::pair<Index, Index> range(Index m) const { return ranges_[static_cast<std::size_t>(m)]; }
  /// First row of block m in the concatenated data.
  Index offset(Index m) const { return offsets_[static_cast<std::size_t>(m)]; }

  auto outputs(Index m) const { return block(m).col(0); }
  /// Regressors of block m as columns (n x p_m).
  Matrix regressors(Index m) const { return -block(m).rightCols(dim_).transpose(); }

  /// All blocks stacked in order as one regressor set.
  RegressorMatrix concatenated() const;

 private:
  void add(const RegressorMatrix& regs, const Segmentation& seg, Index segment);

  std::vector<Matrix> blocks_;
  std::vector<Index> origin_;
  std::vector<std::pair<Index, Index>> ranges_;
  std::vector<Index> offsets_;
  Index dim_ = 0;
  Index samples_ = 0;
};

inline Vector augmented(const Vector& theta) {
  Vector out(theta.size() + 1);
  out(0) = 1.0;
  out.tail(theta.size()) = theta;
  return out;
}

struct ExtractionConfig {
  double eps0 = 1e-3;
  double eps_thres = 1e-4;
  double alpha = 0.9;
  double eta = 0.01;
  double v0 = 0.1;
  int max_iters = 100;
  double weight_floor = 1e-8;
  /// Weight denominators never drop below this fraction of the block's own
  /// residual, so the momentum term cannot erase the ordering between blocks.
  double residual_floor = 0.5;
  /// Blocks within this multiple of the best block's normalised residual are
  /// assigned even when they miss eps_thres. Zero keeps the bare threshold.
  double relax_factor = 3.0;

  void validate() const;
};

struct ExtractedSubmodel {
  Vector theta;
  std::vector<Index> assigned;  ///< block indices, ascending
  std::vector<Index> support;   ///< blocks left out of the fit (l0 path only)
  int iterations = 0;
  bool converged = false;
  double threshold = 0.0;  ///< assignment threshold actually used
  std::vector<double> residual_profile;
};

/// Normalised residual of each block under theta:
/// ||D_m [1; theta]||_1 / (nu(D_m) ||[1; theta]||_2 p_m).
std::vector<double> normalized_residuals(const Vector& theta, const SegmentBlocks& blocks);

std::vector<Index> assign_blocks(const Vector& theta, const SegmentBlocks& blocks, double eps_thres);

/// Least squares of y on the regressors of the assigned blocks.
Vector reestimate(const SegmentBlocks& blocks, const std::vector<Index>& assigned);

/// Iteratively reweighted least squares with per-block momentum on the
/// weights, then assignment and re-estimation.
ExtractedSubmodel reweighted_l1_extract(const SegmentBlocks& blocks, const ExtractionConfig& cfg);

/// Block-greedy orthogonal matching pursuit on A_X z = b_X. The support
/// collects blocks that do not fit the extracted submodel; the remaining
/// blocks, plus any that pass the assignment rule under the refit theta, are
/// assigned. `proj` must come from blocks.concatenated().
ExtractedSubmodel omp_extract(const SegmentBlocks& blocks, const Projector& proj,
                              const ExtractionConfig& cfg);

}  // namespace switchid

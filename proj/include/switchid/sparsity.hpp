#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "switchid/dataset.hpp"

namespace switchid {

/// Stand-in for +infinity in spark and genericity results.
inline constexpr Index kInfinity = std::numeric_limits<Index>::max();

/// Singular values below this fraction of the largest one count as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Exhaustive certificates refuse inputs beyond these sizes.
inline constexpr Index kMaxExhaustiveColumns = 20;
inline constexpr std::uint64_t kMaxExhaustiveSubsets = 200000;

/// Orthogonal projector onto the complement of the regressor row space.
struct Projector {
  Matrix full;         ///< N x N, I - X'(XX')^{-1}X
  Matrix basis;        ///< (N-n) x N, orthonormal rows spanning the same space (A_X)
  Vector b;            ///< basis * y
  Matrix range_basis;  ///< N x n, orthonormal columns spanning the row space of X
};

Projector projector(const RegressorMatrix& regs);

/// Numerical rank with a tolerance relative to `scale` (the largest singular
/// value of the matrix when `scale` is not positive).
Index numerical_rank(const Eigen::Ref<const Matrix>& A, double scale = 0.0);

Index spark(const Eigen::Ref<const Matrix>& A);

double mutual_coherence(const Eigen::Ref<const Matrix>& A);

/// Hat matrix X'(XX')^{-1}X of a full-row-rank regressor matrix.
Matrix hat_matrix(const Eigen::Ref<const Matrix>& X);

double tau(const Eigen::Ref<const Matrix>& X);

inline double theta_bound(double tau_value) { return 0.5 * (1.0 + 1.0 / tau_value); }

/// Smallest m such that every m-column submatrix has rank at least k.
Index genericity_index(const Eigen::Ref<const Matrix>& X, Index k);

/// Mean column norm for matrices; mean absolute entry for vectors, which are
/// treated as a row of scalar columns.
template <typename Derived>
double nu(const Eigen::MatrixBase<Derived>& block) {
  if (block.size() == 0) throw Error(Errc::empty_block, "nu of an empty block");
  if constexpr (Derived::ColsAtCompileTime == 1) {
    return block.cwiseAbs().mean();
  } else {
    return block.colwise().norm().mean();
  }
}

struct ExtractionStage {
  Index remaining = 0;
  Index group_size = 0;
  double theta_bound = 0.0;
  bool holds = false;
};

struct ExtractionBound {
  std::vector<ExtractionStage> stages;
  bool holds = true;
};

/// Evaluates group_i > remaining_i - theta_i > 0 for each extraction stage
/// except the last. `groups` lists the sample count of each submodel in
/// extraction order, `theta_bounds` the threshold of the data left at each stage.
ExtractionBound check_extraction_chain(const std::vector<Index>& groups,
                                       const std::vector<double>& theta_bounds);

/// Same chain with thresholds computed from the regressors left at each stage.
/// `groups` holds the regressor columns of each submodel in extraction order.
ExtractionBound extraction_bound(const RegressorMatrix& regs,
                                 const std::vector<std::vector<Index>>& groups);

struct SparsitySummary {
  std::optional<Index> spark;  ///< of A_X, only for inputs within the exhaustive limits
  std::optional<double> mu;    ///< mutual coherence of A_X, for modest sample counts
  double tau = 0.0;
  double theta_bound = 0.0;
  std::map<Index, Index> genericity;  ///< k -> v_k(X), within the exhaustive limits
};

struct SummaryOptions {
  Index max_columns_for_mu = 400;
  bool exhaustive = true;
};

SparsitySummary summarize(const RegressorMatrix& regs, const SummaryOptions& opts = {});

}  // namespace switchid

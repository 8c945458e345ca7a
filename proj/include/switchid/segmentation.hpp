#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "switchid/dataset.hpp"

namespace switchid {

/// Ridge weight used by both the batch and recursive segment fits:
/// 1e-8 times the mean squared regressor norm.
double default_ridge(const RegressorMatrix& regs);

struct SegmentFit {
  double cost = 0.0;
  Vector beta;
};

/// Ridge-regularised least squares over regressor columns [begin, end).
/// `cost` is the plain residual sum of squares of the minimiser.
SegmentFit segment_cost(const RegressorMatrix& regs, Index begin, Index end, double ridge);

/// Rank-one recursive least squares over columns [begin, end). Element i of
/// the result is the residual sum of squares of the fit over [begin, begin+i].
/// Starts from Q = I/ridge and a zero estimate, so every emitted value agrees
/// with segment_cost on the same stretch.
std::vector<double> rls_sweep(const RegressorMatrix& regs, Index begin, Index end, double ridge);

/// Streaming form of rls_sweep.
class RecursiveLeastSquares {
 public:
  RecursiveLeastSquares(Index dim, double ridge);

  /// Absorbs one sample and returns the running residual sum of squares.
  double update(const Eigen::Ref<const Vector>& x, double y);

  const Vector& beta() const noexcept { return beta_; }
  double cost() const noexcept { return running_ - ridge_ * beta_.squaredNorm(); }

 private:
  double ridge_;
  Matrix q_;
  Vector beta_;
  Vector qx_;
  double running_ = 0.0;
};

/// Optimal prefix costs. cost(m, k) is the best total cost of splitting the
/// first k columns into m segments of at least `dwell` columns each;
/// start(m, k) is where the last of those segments begins.
struct DpTables {
  Index max_segments = 0;
  Index dwell = 0;
  Index columns = 0;
  std::vector<double> costs;
  std::vector<Index> starts;

  double cost(Index m, Index k) const { return costs[idx(m, k)]; }
  Index start(Index m, Index k) const { return starts[idx(m, k)]; }
  /// Total cost of the best m-segment split of all columns.
  double total(Index m) const { return cost(m, columns); }

  std::size_t idx(Index m, Index k) const {
    return static_cast<std::size_t>((m - 1) * (columns + 1) + k);
  }
};

DpTables dp_tables(const RegressorMatrix& regs, Index max_segments, Index dwell,
                   double ridge = -1.0);

/// Segment starts plus the end: 0 = b_0 < ... < b_M = columns, in regressor
/// column coordinates.
struct Segmentation {
  std::vector<Index> boundaries;
  std::vector<Vector> betas;
  std::vector<double> costs;
  double total_cost = 0.0;

  Index segments() const noexcept { return static_cast<Index>(betas.size()); }
  Index begin(Index m) const { return boundaries[static_cast<std::size_t>(m)]; }
  Index end(Index m) const { return boundaries[static_cast<std::size_t>(m) + 1]; }
  Index length(Index m) const { return end(m) - begin(m); }
};

/// Walks the start table back from the full series and refits each segment.
Segmentation backtrack(const DpTables& tables, Index segments, const RegressorMatrix& regs,
                       double ridge = -1.0);

/// Builds a segmentation from given boundaries (fits betas and costs).
Segmentation segmentation_from_boundaries(const RegressorMatrix& regs,
                                          std::vector<Index> boundaries, double ridge = -1.0);

struct CriterionRow {
  Index segments = 0;
  double total_cost = 0.0;
  double log_ratio = 0.0;  ///< log(J(1)/J(M)) / (M-1); NaN for M = 1
};

struct SegmentCountChoice {
  Index segments = 1;
  bool degenerate = false;  ///< J(1) already at the floor; the data look unswitched
  std::vector<CriterionRow> criterion;
};

/// Floor applied to J(M) before taking logarithms: 1e-12 * ||y||^2.
double cost_floor(const RegressorMatrix& regs);

/// Picks the M in [2, max_segments] with the largest average log-cost
/// reduction per added segment, log(J(1)/J(M)) / (M-1). Ties go to the
/// smaller M. Falls back to M = 1 when J(1) is already at the floor.
SegmentCountChoice select_segment_count(const DpTables& tables, const RegressorMatrix& regs);

struct InstantOptions {
  Index dwell = 10;
  Index max_segments = 15;
  Index fixed_segments = 0;  ///< when positive, skips the count selection
};

struct InstantResult {
  Segmentation segmentation;
  SegmentCountChoice choice;
};

InstantResult identify_instants(const RegressorMatrix& regs, const InstantOptions& opts);

}  // namespace switchid

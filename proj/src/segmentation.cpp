#include "switchid/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace switchid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double resolve_ridge(const RegressorMatrix& regs, double ridge) {
  return ridge > 0.0 ? ridge : default_ridge(regs);
}

}  // namespace

double default_ridge(const RegressorMatrix& regs) {
  const double scale = regs.cols() > 0 ? regs.X.colwise().squaredNorm().mean() : 0.0;
  return 1e-8 * (scale > 0.0 ? scale : 1.0);
}

SegmentFit segment_cost(const RegressorMatrix& regs, Index begin, Index end, double ridge) {
  if (begin < 0 || end > regs.cols() || begin >= end)
    throw Error(Errc::invalid_argument, "segment range out of bounds");
  const auto T = regs.X.middleCols(begin, end - begin);
  const auto y = regs.y.segment(begin, end - begin);
  Matrix gram = T * T.transpose();
  gram.diagonal().array() += ridge;
  SegmentFit fit;
  fit.beta = gram.ldlt().solve(T * y);
  fit.cost = (y - T.transpose() * fit.beta).squaredNorm();
  return fit;
}

RecursiveLeastSquares::RecursiveLeastSquares(Index dim, double ridge)
    : ridge_(ridge),
      q_(Matrix::Identity(dim, dim) / ridge),
      beta_(Vector::Zero(dim)),
      qx_(dim) {}

double RecursiveLeastSquares::update(const Eigen::Ref<const Vector>& x, double y) {
  qx_.noalias() = q_ * x;
  const double gain_den = 1.0 + x.dot(qx_);
  const double err = y - x.dot(beta_);
  beta_ += qx_ * (err / gain_den);
  q_.noalias() -= (qx_ / gain_den) * qx_.transpose();
  running_ += err * err / gain_den;
  return cost();
}

std::vector<double> rls_sweep(const RegressorMatrix& regs, Index begin, Index end, double ridge) {
  if (begin < 0 || end > regs.cols() || begin >= end)
    throw Error(Errc::invalid_argument, "sweep range out of bounds");
  RecursiveLeastSquares rls(regs.rows(), ridge);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(end - begin));
  for (Index k = begin; k < end; ++k) out.push_back(rls.update(regs.X.col(k), regs.y(k)));
  return out;
}

DpTables dp_tables(const RegressorMatrix& regs, Index max_segments, Index dwell, double ridge) {
  const Index N = regs.cols();
  if (dwell < 1) throw Error(Errc::invalid_argument, "dwell must be at least 1");
  if (max_segments < 1) throw Error(Errc::invalid_argument, "need at least one segment");
  if (max_segments * dwell > N)
    throw Error(Errc::infeasible_dwell, std::to_string(max_segments) + " segments of dwell " +
                                            std::to_string(dwell) + " exceed " +
                                            std::to_string(N) + " columns");
  ridge = resolve_ridge(regs, ridge);

  DpTables t;
  t.max_segments = max_segments;
  t.dwell = dwell;
  t.columns = N;
  t.costs.assign(static_cast<std::size_t>(max_segments * (N + 1)), kInf);
  t.starts.assign(t.costs.size(), -1);

  // Row m-1 at column j is final once every start before j has been swept,
  // because segments are at least one column long. Sweeping starts in
  // increasing order therefore fills all rows in a single pass.
  auto prev_cost = [&](Index m, Index j) { return m == 1 ? (j == 0 ? 0.0 : kInf) : t.cost(m - 1, j); };
  for (Index j = 0; j + dwell <= N; ++j) {
    bool any = false;
    for (Index m = 1; m <= max_segments && !any; ++m) any = std::isfinite(prev_cost(m, j));
    if (!any) continue;
    RecursiveLeastSquares rls(regs.rows(), ridge);
    for (Index k = j; k < N; ++k) {
      const double d = rls.update(regs.X.col(k), regs.y(k));
      const Index len = k + 1 - j;
      if (len < dwell) continue;
      for (Index m = 1; m <= max_segments; ++m) {
        const double base = prev_cost(m, j);
        if (!std::isfinite(base)) continue;
        const std::size_t cell = t.idx(m, k + 1);
        if (base + d < t.costs[cell]) {
          t.costs[cell] = base + d;
          t.starts[cell] = j;
        }
      }
    }
  }
  return t;
}

Segmentation segmentation_from_boundaries(const RegressorMatrix& regs,
                                          std::vector<Index> boundaries, double ridge) {
  ridge = resolve_ridge(regs, ridge);
  Segmentation seg;
  seg.boundaries = std::move(boundaries);
  for (std::size_t m = 0; m + 1 < seg.boundaries.size(); ++m) {
    SegmentFit fit = segment_cost(regs, seg.boundaries[m], seg.boundaries[m + 1], ridge);
    seg.total_cost += fit.cost;
    seg.costs.push_back(fit.cost);
    seg.betas.push_back(std::move(fit.beta));
  }
  return seg;
}

Segmentation backtrack(const DpTables& tables, Index segments, const RegressorMatrix& regs,
                       double ridge) {
  if (segments < 1 || segments > tables.max_segments)
    throw Error(Errc::invalid_argument, "segment count outside the table");
  if (!std::isfinite(tables.total(segments)))
    throw Error(Errc::infeasible_dwell, "no admissible split into " + std::to_string(segments) +
                                            " segments");
  std::vector<Index> b(static_cast<std::size_t>(segments + 1));
  b.back() = tables.columns;
  for (Index m = segments; m >= 1; --m)
    b[static_cast<std::size_t>(m - 1)] = tables.start(m, b[static_cast<std::size_t>(m)]);
  return segmentation_from_boundaries(regs, std::move(b), ridge);
}

double cost_floor(const RegressorMatrix& regs) {
  const double energy = regs.y.squaredNorm();
  return 1e-12 * (energy > 0.0 ? energy : 1.0);
}

SegmentCountChoice select_segment_count(const DpTables& tables, const RegressorMatrix& regs) {
  SegmentCountChoice out;
  const double floor = cost_floor(regs);
  const double j1 = std::max(tables.total(1), floor);
  for (Index m = 1; m <= tables.max_segments; ++m) {
    const double jm = std::max(tables.total(m), floor);
    out.criterion.push_back({m, tables.total(m),
                             m == 1 ? std::nan("") : std::log(j1 / jm) / static_cast<double>(m - 1)});
  }
  if (tables.total(1) <= floor) {
    out.degenerate = true;
    return out;
  }
  double best = -kInf;
  for (Index m = 2; m <= tables.max_segments; ++m) {
    const double v = out.criterion[static_cast<std::size_t>(m - 1)].log_ratio;
    if (std::isfinite(v) && v > best) {
      best = v;
      out.segments = m;
    }
  }
  return out;
}

InstantResult identify_instants(const RegressorMatrix& regs, const InstantOptions& opts) {
  // Selection only tries counts the dwell leaves room for; a fixed count
  // that does not fit still fails in dp_tables.
  const Index max_segments = opts.fixed_segments > 0
                                 ? opts.fixed_segments
                                 : std::min(std::max<Index>(regs.cols() / std::max<Index>(opts.dwell, 1), 1),
                                            opts.max_segments);
  const double ridge = default_ridge(regs);
  const DpTables tables = dp_tables(regs, max_segments, opts.dwell, ridge);
  InstantResult out;
  out.choice = select_segment_count(tables, regs);
  if (opts.fixed_segments > 0) {
    out.choice.segments = opts.fixed_segments;
    out.choice.degenerate = false;
  }
  out.segmentation = backtrack(tables, out.choice.segments, regs, ridge);
  return out;
}

}  // namespace switchid

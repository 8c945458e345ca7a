#include "switchid/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace switchid {

SegmentBlocks::SegmentBlocks(const RegressorMatrix& regs, const Segmentation& seg,
                             const std::vector<Index>& segments)
    : dim_(regs.rows()) {
  for (Index m : segments) add(regs, seg, m);
}

SegmentBlocks::SegmentBlocks(const RegressorMatrix& regs, const Segmentation& seg)
    : dim_(regs.rows()) {
  for (Index m = 0; m < seg.segments(); ++m) add(regs, seg, m);
}

void SegmentBlocks::add(const RegressorMatrix& regs, const Segmentation& seg, Index segment) {
  const Index begin = seg.begin(segment);
  const Index p = seg.length(segment);
  Matrix d(p, dim_ + 1);
  d.col(0) = regs.y.segment(begin, p);
  d.rightCols(dim_) = -regs.X.middleCols(begin, p).transpose();
  blocks_.push_back(std::move(d));
  origin_.push_back(segment);
  ranges_.emplace_back(begin, begin + p);
  offsets_.push_back(samples_);
  samples_ += p;
}

RegressorMatrix SegmentBlocks::concatenated() const {
  RegressorMatrix out{Matrix(dim_, samples_), Vector(samples_), 0};
  for (Index m = 0; m < size(); ++m) {
    out.X.middleCols(offset(m), rows(m)) = regressors(m);
    out.y.segment(offset(m), rows(m)) = outputs(m);
  }
  return out;
}

void ExtractionConfig::validate() const {
  if (!(eps0 > 0.0) || !(eps_thres > 0.0) || !(eta > 0.0) || !(weight_floor > 0.0))
    throw Error(Errc::invalid_argument, "eps0, eps_thres, eta and weight_floor must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(Errc::invalid_argument, "alpha must lie in [0, 1)");
  if (max_iters < 1) throw Error(Errc::invalid_argument, "max_iters must be positive");
  if (!(relax_factor >= 0.0)) throw Error(Errc::invalid_argument, "relax_factor must be >= 0");
  if (!(residual_floor >= 0.0)) throw Error(Errc::invalid_argument, "residual_floor must be >= 0");
}

std::vector<double> normalized_residuals(const Vector& theta, const SegmentBlocks& blocks) {
  const Vector full = augmented(theta);
  const double theta_norm = full.norm();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(blocks.size()));
  for (Index m = 0; m < blocks.size(); ++m) {
    const Matrix& d = blocks.block(m);
    const double scale = nu(d) * theta_norm * static_cast<double>(d.rows());
    const double r = (d * full).lpNorm<1>();
    out.push_back(scale > 0.0 ? r / scale : (r > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
  }
  return out;
}

std::vector<Index> assign_blocks(const Vector& theta, const SegmentBlocks& blocks, double eps_thres) {
  const auto r = normalized_residuals(theta, blocks);
  std::vector<Index> out;
  for (Index m = 0; m < blocks.size(); ++m)
    if (r[static_cast<std::size_t>(m)] <= eps_thres) out.push_back(m);
  return out;
}

Vector reestimate(const SegmentBlocks& blocks, const std::vector<Index>& assigned) {
  const Index n = blocks.dim();
  Matrix gram = Matrix::Zero(n, n);
  Vector rhs = Vector::Zero(n);
  Index count = 0;
  for (Index m : assigned) {
    const Matrix t = blocks.regressors(m);
    gram.noalias() += t * t.transpose();
    rhs.noalias() += t * blocks.outputs(m);
    count += blocks.rows(m);
  }
  if (count < n || numerical_rank(gram) < n)
    throw Error(Errc::rank_deficient_assignment, "assigned blocks do not determine theta");
  return gram.ldlt().solve(rhs);
}

namespace {

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Assigns with the relaxed threshold max(eps_thres, relax * best residual).
void assign_relaxed(ExtractedSubmodel& out, const SegmentBlocks& blocks, const ExtractionConfig& cfg,
                    std::vector<Index> always = {}) {
  out.residual_profile = normalized_residuals(out.theta, blocks);
  double best = std::numeric_limits<double>::infinity();
  for (double r : out.residual_profile) best = std::min(best, r);
  out.threshold = std::max(cfg.eps_thres, cfg.relax_factor * best);
  std::vector<bool> take(static_cast<std::size_t>(blocks.size()), false);
  for (Index m : always) take[static_cast<std::size_t>(m)] = true;
  for (Index m = 0; m < blocks.size(); ++m)
    if (out.residual_profile[static_cast<std::size_t>(m)] <= out.threshold)
      take[static_cast<std::size_t>(m)] = true;
  out.assigned.clear();
  for (Index m = 0; m < blocks.size(); ++m)
    if (take[static_cast<std::size_t>(m)]) out.assigned.push_back(m);
}

// Alternates re-estimation and relaxed assignment until the assigned set
// settles. Keeps the current theta when the assigned blocks do not
// determine it.
void refit_assigned(ExtractedSubmodel& out, const SegmentBlocks& blocks, const ExtractionConfig& cfg,
                    const std::vector<Index>& always = {}) {
  for (int pass = 0; pass < cfg.max_iters; ++pass) {
    try {
      out.theta = reestimate(blocks, out.assigned);
    } catch (const Error& e) {
      if (e.code() != Errc::rank_deficient_assignment) throw;
      return;
    }
    const auto before = out.assigned;
    assign_relaxed(out, blocks, cfg, always);
    if (out.assigned == before || out.assigned.empty()) break;
  }
}

Vector weighted_fit(const SegmentBlocks& blocks, const std::vector<double>& row_weights) {
  const Index n = blocks.dim();
  const double top = *std::max_element(row_weights.begin(), row_weights.end());
  Matrix gram = Matrix::Zero(n, n);
  Vector rhs = Vector::Zero(n);
  double trace = 0.0;
  for (Index m = 0; m < blocks.size(); ++m) {
    const double c = row_weights[static_cast<std::size_t>(m)] / top;
    const Matrix t = blocks.regressors(m);
    gram.noalias() += c * (t * t.transpose());
    rhs.noalias() += c * (t * blocks.outputs(m));
  }
  trace = gram.trace();
  gram.diagonal().array() += 1e-12 * (trace > 0.0 ? trace / static_cast<double>(n) : 1.0);
  return gram.ldlt().solve(rhs);
}

}  // namespace

ExtractedSubmodel reweighted_l1_extract(const SegmentBlocks& blocks, const ExtractionConfig& cfg) {
  cfg.validate();
  if (blocks.size() == 0) throw Error(Errc::empty_block, "no blocks to extract from");
  if (blocks.samples() <= blocks.dim())
    throw Error(Errc::rank_deficient_assignment, "not more samples than parameters");

  const auto M = static_cast<std::size_t>(blocks.size());
  std::vector<double> scale(M);
  for (std::size_t m = 0; m < M; ++m) scale[m] = nu(blocks.block(static_cast<Index>(m)));

  std::vector<double> weight(M, 1.0);
  std::vector<double> momentum(M, cfg.v0);
  std::vector<double> row_weights(M);

  ExtractedSubmodel out;
  Vector previous;
  for (int it = 0; it < cfg.max_iters; ++it) {
    for (std::size_t m = 0; m < M; ++m) {
      const double w = weight[m] / std::max(scale[m], cfg.weight_floor);
      row_weights[m] = w * w;
    }
    out.theta = weighted_fit(blocks, row_weights);
    out.iterations = it + 1;
    if (it > 0 && (out.theta - previous).norm() <= cfg.eps0) {
      out.converged = true;
      break;
    }
    previous = out.theta;

    const Vector full = augmented(out.theta);
    for (std::size_t m = 0; m < M; ++m) {
      const double r = std::max(nu(blocks.block(static_cast<Index>(m)) * full), cfg.weight_floor);
      momentum[m] = cfg.alpha * momentum[m] - cfg.eta / r;
      weight[m] = 1.0 / std::max({r + momentum[m], cfg.residual_floor * r, cfg.weight_floor});
    }
  }

  assign_relaxed(out, blocks, cfg);
  if (out.assigned.empty())
    throw Error(Errc::no_block_assigned, "no block within eps_thres = " + short_number(cfg.eps_thres));
  refit_assigned(out, blocks, cfg);
  if (out.assigned.empty())
    throw Error(Errc::no_block_assigned, "no block within eps_thres = " + short_number(cfg.eps_thres));
  return out;
}

namespace {

// Solves min_q ||A_S q - r|| where A_S holds the projector-basis columns of
// the listed samples. A_S'A_S = I - U U' with U the matching rows of the
// range basis, which Woodbury inverts through an n x n system. Near-singular
// cases fall back to a dense solve.
Vector restricted_solve(const Projector& proj, const std::vector<Index>& samples, const Vector& r) {
  const Index p = static_cast<Index>(samples.size());
  const Index n = proj.range_basis.cols();
  Matrix a(proj.basis.rows(), p);
  Matrix u(p, n);
  for (Index i = 0; i < p; ++i) {
    a.col(i) = proj.basis.col(samples[static_cast<std::size_t>(i)]);
    u.row(i) = proj.range_basis.row(samples[static_cast<std::size_t>(i)]);
  }
  const Vector rhs = a.transpose() * r;
  const Matrix inner = Matrix::Identity(n, n) - u.transpose() * u;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(inner);
  if (eig.eigenvalues().minCoeff() > 1e-8) {
    return rhs + u * inner.ldlt().solve(u.transpose() * rhs);
  }
  return a.completeOrthogonalDecomposition().solve(r);
}

std::vector<Index> block_samples(const SegmentBlocks& blocks, const std::vector<Index>& which) {
  std::vector<Index> out;
  for (Index m : which)
    for (Index i = 0; i < blocks.rows(m); ++i) out.push_back(blocks.offset(m) + i);
  return out;
}

Matrix basis_columns(const Projector& proj, const std::vector<Index>& samples) {
  Matrix a(proj.basis.rows(), static_cast<Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) a.col(static_cast<Index>(i)) = proj.basis.col(samples[i]);
  return a;
}

}  // namespace

ExtractedSubmodel omp_extract(const SegmentBlocks& blocks, const Projector& proj,
                              const ExtractionConfig& cfg) {
  cfg.validate();
  if (blocks.size() == 0) throw Error(Errc::empty_block, "no blocks to extract from");
  if (proj.basis.cols() != blocks.samples())
    throw Error(Errc::invalid_argument, "projector does not match the blocks");

  const Index M = blocks.size();
  const Index n = blocks.dim();
  std::vector<bool> in_support(static_cast<std::size_t>(M), false);
  std::vector<Index> support;
  Index outside = blocks.samples();
  Vector residual = proj.b;

  ExtractedSubmodel out;
  while (residual.norm() > cfg.eps0) {
    // Sweep: best single-block correction of the current residual.
    const double r2 = residual.squaredNorm();
    Index chosen = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index m = 0; m < M; ++m) {
      if (in_support[static_cast<std::size_t>(m)]) continue;
      if (outside - blocks.rows(m) < n) continue;  // theta must stay determined
      const auto samples = block_samples(blocks, {m});
      const Vector q = restricted_solve(proj, samples, residual);
      const double err = (basis_columns(proj, samples) * q - residual).squaredNorm();
      if (err < best) {
        best = err;
        chosen = m;
      }
    }
    if (chosen < 0) break;

    in_support[static_cast<std::size_t>(chosen)] = true;
    support.push_back(chosen);
    outside -= blocks.rows(chosen);
    ++out.iterations;

    const auto samples = block_samples(blocks, support);
    const Vector z = restricted_solve(proj, samples, proj.b);
    const Vector next = proj.b - basis_columns(proj, samples) * z;
    if (next.squaredNorm() > r2 * (1.0 - 1e-12))
      throw Error(Errc::no_progress, "residual stalled at " + std::to_string(std::sqrt(r2)));
    residual = next;
  }
  out.converged = residual.norm() <= cfg.eps0;

  std::vector<Index> fitted;
  for (Index m = 0; m < M; ++m)
    if (!in_support[static_cast<std::size_t>(m)]) fitted.push_back(m);
  std::sort(support.begin(), support.end());
  out.support = support;
  out.theta = reestimate(blocks, fitted);
  assign_relaxed(out, blocks, cfg, fitted);
  refit_assigned(out, blocks, cfg, fitted);
  return out;
}

}  // namespace switchid

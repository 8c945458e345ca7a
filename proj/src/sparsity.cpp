#include "switchid/sparsity.hpp"

#include <cmath>
#include <string>

namespace switchid {

namespace {

// Visits every k-subset of {0..n-1} in lexicographic order until `visit`
// returns false. Returns false if the walk was cut short.
template <typename F>
bool for_each_subset(Index n, Index k, std::uint64_t& budget, F&& visit) {
  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    if (budget == 0)
      throw Error(Errc::too_large, "exhaustive search exceeds " +
                                       std::to_string(kMaxExhaustiveSubsets) + " subsets");
    --budget;
    if (!visit(idx)) return false;
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return true;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

Matrix columns_of(const Eigen::Ref<const Matrix>& A, const std::vector<Index>& idx) {
  Matrix out(A.rows(), static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Index>(i)) = A.col(idx[i]);
  return out;
}

void check_exhaustive_size(const Eigen::Ref<const Matrix>& A) {
  if (A.cols() > kMaxExhaustiveColumns)
    throw Error(Errc::too_large, std::to_string(A.cols()) + " columns exceed the exhaustive limit of " +
                                     std::to_string(kMaxExhaustiveColumns));
}

double largest_singular_value(const Eigen::Ref<const Matrix>& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

}  // namespace

Index numerical_rank(const Eigen::Ref<const Matrix>& A, double scale) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& s = svd.singularValues();
  const double ref = scale > 0.0 ? scale : s(0);
  if (!(ref > 0.0)) return 0;
  return (s.array() > kRankTolerance * ref).count();
}

Projector projector(const RegressorMatrix& regs) {
  const Index n = regs.rows();
  const Index N = regs.cols();
  if (N < n) throw Error(Errc::rank_deficient_regressors, "fewer samples than regressors");

  Eigen::JacobiSVD<Matrix> svd(regs.X, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(n - 1) <= kRankTolerance * s(0))
    throw Error(Errc::rank_deficient_regressors, "regressor matrix is not of full row rank");

  Projector p;
  p.range_basis = svd.matrixV();
  p.full = Matrix::Identity(N, N) - p.range_basis * p.range_basis.transpose();

  Eigen::HouseholderQR<Matrix> qr(p.range_basis);
  const Matrix q = qr.householderQ();
  p.basis = q.rightCols(N - n).transpose();
  p.b = p.basis * regs.y;
  return p;
}

Index spark(const Eigen::Ref<const Matrix>& A) {
  if (A.size() == 0) throw Error(Errc::invalid_argument, "spark of an empty matrix");
  check_exhaustive_size(A);
  const double scale = largest_singular_value(A);
  std::uint64_t budget = kMaxExhaustiveSubsets;
  const Index max_k = std::min<Index>(A.cols(), A.rows() + 1);
  for (Index k = 1; k <= max_k; ++k) {
    bool dependent = false;
    for_each_subset(A.cols(), k, budget, [&](const std::vector<Index>& idx) {
      if (numerical_rank(columns_of(A, idx), scale) < k) dependent = true;
      return !dependent;
    });
    if (dependent) return k;
  }
  return kInfinity;
}

double mutual_coherence(const Eigen::Ref<const Matrix>& A) {
  if (A.cols() < 2) throw Error(Errc::invalid_argument, "coherence needs at least two columns");
  const Vector norms = A.colwise().norm();
  const double floor = 1e-12 * std::max(norms.maxCoeff(), 1e-300);
  if (norms.minCoeff() <= floor) throw Error(Errc::zero_column, "a column norm vanishes");
  const Matrix normalized = A * norms.cwiseInverse().asDiagonal();
  Matrix gram = normalized.transpose() * normalized;
  gram.diagonal().setZero();
  return std::min(1.0, gram.cwiseAbs().maxCoeff());
}

Matrix hat_matrix(const Eigen::Ref<const Matrix>& X) {
  Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(X.rows() - 1) <= kRankTolerance * s(0))
    throw Error(Errc::rank_deficient_regressors, "XX' is singular");
  const Matrix& v = svd.matrixV();
  return v * v.transpose();
}

double tau(const Eigen::Ref<const Matrix>& X) {
  if (X.cols() < 2) throw Error(Errc::invalid_argument, "tau needs at least two samples");
  Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(X.rows() - 1) <= kRankTolerance * s(0))
    throw Error(Errc::rank_deficient_regressors, "XX' is singular");
  const Matrix& v = svd.matrixV();
  const Index N = X.cols();
  const Vector complement = (Vector::Ones(N) - v.rowwise().squaredNorm());
  if (complement.minCoeff() <= 1e-10)
    throw Error(Errc::leverage_one, "a sample has leverage one");
  const Vector scale = complement.cwiseSqrt().cwiseInverse();
  double best = 0.0;
  for (Index t = 0; t < N; ++t)
    for (Index k = t + 1; k < N; ++k)
      best = std::max(best, std::abs(v.row(t).dot(v.row(k))) * scale(t) * scale(k));
  return best;
}

Index genericity_index(const Eigen::Ref<const Matrix>& X, Index k) {
  if (k < 0) throw Error(Errc::invalid_argument, "negative k");
  if (k == 0) return 0;
  if (k > X.rows()) return kInfinity;
  const double scale = largest_singular_value(X);
  if (k > numerical_rank(X, scale)) return kInfinity;
  check_exhaustive_size(X);
  std::uint64_t budget = kMaxExhaustiveSubsets;
  for (Index m = k; m <= X.cols(); ++m) {
    const bool all = for_each_subset(X.cols(), m, budget, [&](const std::vector<Index>& idx) {
      return numerical_rank(columns_of(X, idx), scale) >= k;
    });
    if (all) return m;
  }
  return kInfinity;
}

ExtractionBound check_extraction_chain(const std::vector<Index>& groups,
                                       const std::vector<double>& theta_bounds) {
  ExtractionBound out;
  Index remaining = 0;
  for (Index g : groups) remaining += g;
  for (std::size_t i = 0; i + 1 < groups.size(); ++i) {
    ExtractionStage st;
    st.remaining = remaining;
    st.group_size = groups[i];
    st.theta_bound = i < theta_bounds.size() ? theta_bounds[i] : std::nan("");
    const double rhs = static_cast<double>(remaining) - st.theta_bound;
    st.holds = static_cast<double>(groups[i]) > rhs && rhs > 0.0;
    out.holds = out.holds && st.holds;
    out.stages.push_back(st);
    remaining -= groups[i];
  }
  return out;
}

ExtractionBound extraction_bound(const RegressorMatrix& regs,
                                 const std::vector<std::vector<Index>>& groups) {
  std::vector<Index> sizes;
  std::vector<double> bounds;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    sizes.push_back(static_cast<Index>(groups[i].size()));
    if (i + 1 == groups.size()) break;
    std::vector<Index> rest;
    for (std::size_t j = i; j < groups.size(); ++j)
      rest.insert(rest.end(), groups[j].begin(), groups[j].end());
    try {
      bounds.push_back(theta_bound(tau(regs.gather(rest).X)));
    } catch (const Error&) {
      bounds.push_back(std::nan(""));
    }
  }
  return check_extraction_chain(sizes, bounds);
}

SparsitySummary summarize(const RegressorMatrix& regs, const SummaryOptions& opts) {
  SparsitySummary out;
  out.tau = tau(regs.X);
  out.theta_bound = theta_bound(out.tau);
  if (regs.cols() <= opts.max_columns_for_mu) {
    const Projector p = projector(regs);
    if (p.basis.rows() > 0) out.mu = mutual_coherence(p.basis);
    if (opts.exhaustive && regs.cols() <= kMaxExhaustiveColumns) {
      try {
        if (p.basis.rows() > 0) out.spark = spark(p.basis);
      } catch (const Error&) {
      }
    }
  }
  if (opts.exhaustive && regs.cols() <= kMaxExhaustiveColumns) {
    try {
      for (Index k = 1; k <= regs.rows(); ++k) out.genericity[k] = genericity_index(regs.X, k);
    } catch (const Error&) {
      out.genericity.clear();
    }
  }
  return out;
}

}  // namespace switchid

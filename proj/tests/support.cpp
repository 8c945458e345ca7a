#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <switchid/extraction.hpp>
#include <switchid/sparsity.hpp>

namespace switchid::testing {

Matrix gaussian(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> d;
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = d(rng);
  return out;
}

Vector gaussian(Rng& rng, Index size) { return gaussian(rng, size, 1).col(0); }

Index uniform(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

RegressorMatrix make_regs(Matrix X, Vector y) {
  RegressorMatrix r;
  r.X = std::move(X);
  r.y = std::move(y);
  return r;
}

Vector stable_theta(Rng& rng, const SystemOrder& order) {
  // (1 - p1 q)(1 - p2 q) ... expanded into y_k = a1 y_{k-1} + ...
  Vector poly = Vector::Zero(order.na + 1);
  poly(0) = 1.0;
  for (int i = 0; i < order.na; ++i) {
    const double p = uniform_real(rng, -0.8, 0.8);
    for (int j = i + 1; j >= 1; --j) poly(j) -= p * poly(j - 1);
  }
  Vector theta(order.n());
  for (int i = 0; i < order.na; ++i) theta(i) = -poly(i + 1);
  for (int i = 0; i < order.nb; ++i) theta(order.na + i) = uniform_real(rng, 0.3, 1.5) * (rng() % 2 ? 1 : -1);
  return theta;
}

TrueSystem random_system(Rng& rng, const SystemOrder& order, int modes, Index segments,
                         Index min_gap, Index max_gap) {
  TrueSystem sys;
  for (int s = 0; s < modes; ++s) sys.thetas.push_back(stable_theta(rng, order));
  while (true) {
    sys.modes.clear();
    for (Index m = 0; m < segments; ++m) {
      int mode = static_cast<int>(uniform(rng, 0, modes - 1));
      while (m > 0 && modes > 1 && mode == sys.modes.back()) mode = static_cast<int>(uniform(rng, 0, modes - 1));
      sys.modes.push_back(mode);
    }
    bool all = true;
    for (int s = 0; s < modes; ++s)
      all = all && std::find(sys.modes.begin(), sys.modes.end(), s) != sys.modes.end();
    if (all) break;
  }
  sys.boundaries = {0};
  for (Index m = 0; m < segments; ++m)
    sys.boundaries.push_back(sys.boundaries.back() + uniform(rng, min_gap, max_gap));
  sys.seed = rng();
  return sys;
}

Index rank_svd(const Matrix& A, double scale) {
  if (A.size() == 0) return 0;
  const Vector s = Eigen::JacobiSVD<Matrix>(A).singularValues();
  return (s.array() > 1e-10 * scale).count();
}

namespace {

// Calls visit on every k-subset of {0..n-1}; stops when visit returns true.
bool any_subset(Index n, Index k, const std::function<bool(const std::vector<Index>&)>& visit) {
  std::vector<Index> idx;
  std::function<bool(Index)> rec = [&](Index from) {
    if (static_cast<Index>(idx.size()) == k) return visit(idx);
    for (Index i = from; i < n; ++i) {
      idx.push_back(i);
      if (rec(i + 1)) return true;
      idx.pop_back();
    }
    return false;
  };
  return rec(0);
}

Matrix pick(const Matrix& A, const std::vector<Index>& idx) {
  Matrix out(A.rows(), static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Index>(i)) = A.col(idx[i]);
  return out;
}

double top_singular(const Matrix& A) { return Eigen::JacobiSVD<Matrix>(A).singularValues()(0); }

}  // namespace

Index brute_spark(const Matrix& A) {
  const double scale = top_singular(A);
  for (Index k = 1; k <= A.cols(); ++k)
    if (any_subset(A.cols(), k, [&](const auto& idx) { return rank_svd(pick(A, idx), scale) < k; }))
      return k;
  return kInfinity;
}

double brute_coherence(const Matrix& A) {
  double best = 0.0;
  for (Index i = 0; i < A.cols(); ++i)
    for (Index j = i + 1; j < A.cols(); ++j)
      best = std::max(best, std::abs(A.col(i).dot(A.col(j))) / (A.col(i).norm() * A.col(j).norm()));
  return best;
}

Index brute_genericity(const Matrix& A, Index k) {
  if (k == 0) return 0;
  const double scale = top_singular(A);
  for (Index m = 1; m <= A.cols(); ++m)
    if (!any_subset(A.cols(), m, [&](const auto& idx) { return rank_svd(pick(A, idx), scale) < k; }))
      return m;
  return kInfinity;
}

double brute_segmentation(const RegressorMatrix& regs, Index segments, Index dwell, double ridge,
                          std::vector<Index>* best) {
  const Index N = regs.cols();
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<Index> cuts = {0};
  std::function<void(Index, double)> rec = [&](Index left, double cost) {
    const Index begin = cuts.back();
    if (left == 1) {
      if (N - begin < dwell) return;
      const double total = cost + segment_cost(regs, begin, N, ridge).cost;
      if (total < best_cost) {
        best_cost = total;
        if (best) {
          *best = cuts;
          best->push_back(N);
        }
      }
      return;
    }
    for (Index end = begin + dwell; end + (left - 1) * dwell <= N; ++end) {
      cuts.push_back(end);
      rec(left - 1, cost + segment_cost(regs, begin, end, ridge).cost);
      cuts.pop_back();
    }
  };
  rec(segments, 0.0);
  return best_cost;
}

namespace {

bool close(double a, double b, double rel, double abs_floor) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

void note(PropertyReport& r, bool ok, double err) {
  ++r.trials;
  if (!ok) ++r.failures;
  if (std::isfinite(err)) r.worst = std::max(r.worst, err);
}

RegressorMatrix two_mode_regs(Rng& rng, Index n, Index N, double noise) {
  Matrix X = gaussian(rng, n, N);
  const Vector a = gaussian(rng, n);
  const Vector b = gaussian(rng, n);
  const Index cut = uniform(rng, 0, N);
  Vector y(N);
  for (Index k = 0; k < N; ++k) y(k) = X.col(k).dot(k < cut ? a : b);
  y += noise * gaussian(rng, N);
  return make_regs(std::move(X), std::move(y));
}

// Mixes integer, duplicated and Gaussian columns so that dependent subsets
// actually occur.
Matrix certificate_matrix(Rng& rng) {
  const Index rows = uniform(rng, 2, 5);
  const Index cols = uniform(rng, 2, 8);
  Matrix A(rows, cols);
  const int kind = static_cast<int>(uniform(rng, 0, 2));
  for (Index j = 0; j < cols; ++j) {
    do {
      if (kind == 0) {
        for (Index i = 0; i < rows; ++i) A(i, j) = static_cast<double>(uniform(rng, -2, 2));
      } else {
        A.col(j) = gaussian(rng, rows);
        if (kind == 2 && j > 0 && uniform(rng, 0, 2) == 0)
          A.col(j) = uniform_real(rng, -2.0, 2.0) * A.col(uniform(rng, 0, j - 1));
      }
    } while (A.col(j).norm() < 0.5);
  }
  if (kind == 1 && rows > 2 && uniform(rng, 0, 1) == 0) {
    // low rank: rows-1 dimensional column space
    A = gaussian(rng, rows, rows - 1) * gaussian(rng, rows - 1, cols);
  }
  return A;
}

}  // namespace

PropertyReport dp_matches_exhaustive(int draws, std::uint64_t seed) {
  Rng rng(seed);
  PropertyReport r;
  for (int d = 0; d < draws; ++d) {
    const Index n = uniform(rng, 1, 2);
    const Index N = uniform(rng, 4, 14);
    const Index M = uniform(rng, 1, 3);
    const Index dwell = uniform(rng, 1, N / M);
    const RegressorMatrix regs = two_mode_regs(rng, n, N, 0.1);
    const double ridge = default_ridge(regs);
    const DpTables tables = dp_tables(regs, M, dwell, ridge);
    const double floor = 1e-10 * regs.y.squaredNorm();
    bool ok = true;
    double err = 0.0;
    for (Index m = 1; m <= M; ++m) {
      const double brute = brute_segmentation(regs, m, dwell, ridge);
      const Segmentation seg = backtrack(tables, m, regs, ridge);
      err = std::max(err, std::abs(tables.total(m) - brute) / std::max(brute, 1e-300));
      ok = ok && close(tables.total(m), brute, 1e-6, floor) && close(seg.total_cost, brute, 1e-6, floor);
      for (Index s = 0; s < seg.segments(); ++s) ok = ok && seg.length(s) >= dwell;
    }
    note(r, ok, err);
  }
  return r;
}

PropertyReport rls_matches_batch(int segments, std::uint64_t seed) {
  Rng rng(seed);
  PropertyReport r;
  for (int t = 0; t < segments; ++t) {
    const Index n = uniform(rng, 1, 4);
    const Index N = uniform(rng, 2, 60);
    const RegressorMatrix regs = two_mode_regs(rng, n, N, uniform_real(rng, 0.0, 1.0));
    const Index begin = uniform(rng, 0, N - 1);
    const Index end = uniform(rng, begin + 1, N);
    const double ridge = default_ridge(regs);
    const std::vector<double> stream = rls_sweep(regs, begin, end, ridge);
    const double floor = 1e-10 * regs.y.segment(begin, end - begin).squaredNorm() + 1e-300;
    bool ok = static_cast<Index>(stream.size()) == end - begin;
    double err = 0.0;
    for (std::size_t i = 0; ok && i < stream.size(); ++i) {
      const double batch = segment_cost(regs, begin, begin + static_cast<Index>(i) + 1, ridge).cost;
      if (batch > floor) err = std::max(err, std::abs(stream[i] - batch) / batch);
      ok = ok && close(stream[i], batch, 1e-6, floor);
    }
    note(r, ok, err);
  }
  return r;
}

PropertyReport certificates_match_enumeration(int matrices, std::uint64_t seed) {
  Rng rng(seed);
  PropertyReport r;
  for (int t = 0; t < matrices; ++t) {
    const Matrix A = certificate_matrix(rng);
    bool ok = spark(A) == brute_spark(A);
    const double mu_err = std::abs(mutual_coherence(A) - brute_coherence(A));
    ok = ok && mu_err <= 1e-12;
    for (Index k = 0; k <= A.rows(); ++k) ok = ok && genericity_index(A, k) == brute_genericity(A, k);
    note(r, ok, mu_err);
  }
  return r;
}

PropertyReport coherence_equals_tau(int draws, std::uint64_t seed) {
  Rng rng(seed);
  PropertyReport r;
  for (int t = 0; t < draws; ++t) {
    const Index n = uniform(rng, 1, 4);
    const Index N = uniform(rng, n + 2, n + 30);
    const RegressorMatrix regs = make_regs(gaussian(rng, n, N), gaussian(rng, N));
    const double err = std::abs(mutual_coherence(projector(regs).basis) - tau(regs.X));
    note(r, err <= 1e-8, err);
  }
  return r;
}

PropertyReport omp_recovers_planted_support(int trials, std::uint64_t seed) {
  Rng rng(seed);
  PropertyReport r;
  ExtractionConfig cfg;
  cfg.eps0 = 1e-8;
  while (r.trials < trials) {
    const Index n = uniform(rng, 1, 3);
    const Index N = uniform(rng, n + 4, n + 12);
    Matrix X = gaussian(rng, n, N);
    const Vector theta = gaussian(rng, n);
    RegressorMatrix regs = make_regs(X, X.transpose() * theta);
    const Projector proj = projector(regs);
    const double bound = theta_bound(mutual_coherence(proj.basis));
    // largest sparsity strictly below the bound
    const Index kmax = static_cast<Index>(std::ceil(bound)) - 1;
    if (kmax < 1) continue;
    const Index k = uniform(rng, 1, std::min(kmax, N - n - 1));

    std::vector<Index> planted(static_cast<std::size_t>(N));
    for (Index i = 0; i < N; ++i) planted[static_cast<std::size_t>(i)] = i;
    std::shuffle(planted.begin(), planted.end(), rng);
    planted.resize(static_cast<std::size_t>(k));
    std::sort(planted.begin(), planted.end());
    for (Index i : planted) regs.y(i) += uniform_real(rng, 1.0, 3.0) * (rng() % 2 ? 1.0 : -1.0);

    // one block per sample
    std::vector<Index> bounds(static_cast<std::size_t>(N + 1));
    for (Index i = 0; i <= N; ++i) bounds[static_cast<std::size_t>(i)] = i;
    const Segmentation seg = segmentation_from_boundaries(regs, bounds);
    const SegmentBlocks blocks(regs, seg);
    const ExtractedSubmodel out = omp_extract(blocks, projector(blocks.concatenated()), cfg);
    const double err = (out.theta - theta).norm();
    note(r, out.support == planted && err <= 1e-6, err);
  }
  return r;
}

PropertyReport noiseless_end_to_end(int systems, std::uint64_t seed, Extractor extractor) {
  Rng rng(seed);
  PropertyReport r;
  for (int t = 0; t < systems; ++t) {
    SystemOrder order{static_cast<int>(uniform(rng, 1, 2)), static_cast<int>(uniform(rng, 1, 2))};
    const int S = static_cast<int>(uniform(rng, 1, 3));
    const Index segments = S == 1 ? 1 : uniform(rng, S, 6);
    const Index dwell = 3 * order.n();
    TrueSystem sys = random_system(rng, order, S, segments, dwell + order.max_lag() + 5, dwell + 60);
    const TimeSeries ts = simulate(sys, order, {}, sys.length());

    IdentifyConfig cfg;
    cfg.dwell = dwell;
    cfg.max_segments = std::max<Index>(segments + 3, 4);
    cfg.extractor = extractor;
    bool ok = false;
    double err = std::numeric_limits<double>::infinity();
    try {
      const IdentificationResult res = identify(ts, cfg);
      err = 0.0;
      for (const Vector& truth : sys.thetas) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vector& est : res.submodels.thetas) best = std::min(best, (est - truth).norm());
        err = std::max(err, best);
      }
      ok = res.S() == S && err <= 1e-6;
    } catch (const std::exception&) {
    }
    note(r, ok, err);
  }
  return r;
}

}  // namespace switchid::testing

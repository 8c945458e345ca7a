#include "switchid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace switchid {

std::string to_string(Extractor e) { return e == Extractor::l0 ? "l0" : "l1"; }

Extractor extractor_from_string(const std::string& s) {
  if (s == "l1") return Extractor::l1;
  if (s == "l0") return Extractor::l0;
  throw Error(Errc::invalid_argument, "unknown extractor '" + s + "' (expected l0 or l1)");
}

void IdentifyConfig::validate() const {
  if (dwell < 1) throw Error(Errc::invalid_argument, "dwell must be at least 1");
  if (max_segments < 1) throw Error(Errc::invalid_argument, "mmax must be at least 1");
  if (fixed_segments < 0) throw Error(Errc::invalid_argument, "fixed segment count must be >= 0");
  if (!(merge_tolerance >= 0.0)) throw Error(Errc::invalid_argument, "merge tolerance must be >= 0");
  if (split < 0) throw Error(Errc::invalid_argument, "split must be >= 0");
  if (pe_window < 0) throw Error(Errc::invalid_argument, "PE window must be >= 0");
  extraction.validate();
}

std::vector<Index> IdentificationResult::raw_instants() const {
  std::vector<Index> out;
  for (Index b : instants.segmentation.boundaries) out.push_back(b + offset);
  return out;
}

double fit_score(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& yhat) {
  if (y.size() != yhat.size()) throw Error(Errc::invalid_argument, "fit: length mismatch");
  if (y.size() < 2) throw Error(Errc::invalid_argument, "fit: need at least two samples");
  const double spread = (y.array() - y.mean()).matrix().norm();
  if (!(spread > 0.0)) throw Error(Errc::constant_reference, "fit: reference output is constant");
  return 100.0 * (1.0 - (yhat - y).norm() / spread);
}

std::pair<RegressorMatrix, std::optional<RegressorMatrix>> split_regressors(const TimeSeries& ts,
                                                                            Index split) {
  const RegressorMatrix all = build_regressors(ts);
  if (split <= 0 || split >= ts.size()) return {all, std::nullopt};
  const Index cut = split - all.offset;
  if (cut <= 0) throw Error(Errc::series_too_short, "training part is shorter than the lags");
  RegressorMatrix test = all.slice(cut, all.cols());
  return {all.slice(0, cut), std::move(test)};
}

Prediction predict_with_labels(const std::vector<Vector>& thetas, const RegressorMatrix& regs,
                               const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != regs.cols())
    throw Error(Errc::invalid_argument, "one label per regressor column required");
  Prediction out{Vector(regs.cols()), labels};
  for (Index k = 0; k < regs.cols(); ++k) {
    const int l = labels[static_cast<std::size_t>(k)];
    if (l < 0 || l >= static_cast<int>(thetas.size()))
      throw Error(Errc::invalid_argument, "label outside the submodel set");
    out.yhat(k) = thetas[static_cast<std::size_t>(l)].dot(regs.X.col(k));
  }
  return out;
}

Prediction predict_dp_assign(const std::vector<Vector>& thetas, const RegressorMatrix& regs,
                             Index dwell) {
  if (thetas.empty()) throw Error(Errc::invalid_argument, "no submodels to predict with");
  const Index N = regs.cols();
  const auto S = thetas.size();
  // prefix[i](k): squared residual of theta i over columns [0, k).
  std::vector<Vector> prefix(S, Vector::Zero(N + 1));
  for (std::size_t i = 0; i < S; ++i) {
    const Vector r = regs.y - regs.X.transpose() * thetas[i];
    for (Index k = 0; k < N; ++k) prefix[i](k + 1) = prefix[i](k) + r(k) * r(k);
  }
  auto best_on = [&](Index j, Index k) {
    std::pair<double, int> b{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = 0; i < S; ++i) {
      const double c = prefix[i](k) - prefix[i](j);
      if (c < b.first) b = {c, static_cast<int>(i)};
    }
    return b;
  };

  std::vector<int> labels(static_cast<std::size_t>(N), 0);
  if (N < 2 * dwell || dwell < 1) {
    std::fill(labels.begin(), labels.end(), N > 0 ? best_on(0, N).second : 0);
    return predict_with_labels(thetas, regs, labels);
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> F(static_cast<std::size_t>(N + 1), inf);
  std::vector<Index> from(static_cast<std::size_t>(N + 1), -1);
  std::vector<int> label(static_cast<std::size_t>(N + 1), 0);
  F[0] = 0.0;
  for (Index k = dwell; k <= N; ++k) {
    for (Index j = 0; j + dwell <= k; ++j) {
      if (!std::isfinite(F[static_cast<std::size_t>(j)])) continue;
      const auto [c, l] = best_on(j, k);
      const double v = F[static_cast<std::size_t>(j)] + c;
      if (v < F[static_cast<std::size_t>(k)]) {
        F[static_cast<std::size_t>(k)] = v;
        from[static_cast<std::size_t>(k)] = j;
        label[static_cast<std::size_t>(k)] = l;
      }
    }
  }
  for (Index k = N; k > 0;) {
    const Index j = from[static_cast<std::size_t>(k)];
    std::fill(labels.begin() + j, labels.begin() + k, label[static_cast<std::size_t>(k)]);
    k = j;
  }
  return predict_with_labels(thetas, regs, labels);
}

Vector simulate_with_labels(const std::vector<Vector>& thetas, const RegressorMatrix& regs,
                            const std::vector<int>& labels, int na) {
  if (static_cast<Index>(labels.size()) != regs.cols())
    throw Error(Errc::invalid_argument, "one label per regressor column required");
  Vector out(regs.cols());
  if (regs.cols() == 0) return out;
  Vector lags = regs.X.col(0).head(na);
  Vector x(regs.rows());
  for (Index k = 0; k < regs.cols(); ++k) {
    x = regs.X.col(k);
    x.head(na) = lags;
    out(k) = thetas.at(static_cast<std::size_t>(labels[static_cast<std::size_t>(k)])).dot(x);
    if (na > 0) {
      for (int i = na - 1; i > 0; --i) lags(i) = lags(i - 1);
      lags(0) = out(k);
    }
  }
  return out;
}

Prediction predict(const IdentificationResult& result, const RegressorMatrix& regs,
                   ModePolicy policy, const std::vector<int>* oracle_labels) {
  if (policy == ModePolicy::oracle) {
    if (oracle_labels == nullptr)
      throw Error(Errc::policy_unavailable, "oracle policy needs true labels");
    return predict_with_labels(result.submodels.thetas, regs, *oracle_labels);
  }
  return predict_dp_assign(result.submodels.thetas, regs, result.config.dwell);
}

namespace {

double relative_distance(const Vector& a, const Vector& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

// Least squares on the listed segments; nullopt when they do not determine theta.
std::optional<Vector> fit_segments(const RegressorMatrix& regs, const Segmentation& seg,
                                   const std::vector<Index>& segments) {
  try {
    const SegmentBlocks blocks(regs, seg, segments);
    std::vector<Index> all(static_cast<std::size_t>(blocks.size()));
    std::iota(all.begin(), all.end(), Index{0});
    return reestimate(blocks, all);
  } catch (const Error& e) {
    if (e.code() != Errc::rank_deficient_assignment) throw;
    return std::nullopt;
  }
}

bool stall_code(Errc c) {
  switch (c) {
    case Errc::no_block_assigned:
    case Errc::rank_deficient_assignment:
    case Errc::rank_deficient_regressors:
    case Errc::no_progress:
    case Errc::leverage_one:
      return true;
    default:
      return false;
  }
}

void merge_duplicates(SubmodelSet& set, const RegressorMatrix& regs, const Segmentation& seg,
                      double tolerance) {
  const auto S = set.thetas.size();
  std::vector<std::size_t> parent(S);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < S; ++i)
    for (std::size_t j = i + 1; j < S; ++j)
      if (relative_distance(set.thetas[i], set.thetas[j]) <= tolerance) {
        const auto a = find(i), b = find(j);
        parent[std::max(a, b)] = std::min(a, b);
      }

  std::vector<int> remap(S, -1);
  SubmodelSet merged;
  for (std::size_t i = 0; i < S; ++i) {
    const auto root = find(i);
    if (remap[root] < 0) {
      remap[root] = static_cast<int>(merged.thetas.size());
      merged.thetas.push_back(set.thetas[root]);
      merged.flagged.push_back(set.flagged[root]);
    }
    remap[i] = remap[root];
    merged.flagged[static_cast<std::size_t>(remap[i])] =
        merged.flagged[static_cast<std::size_t>(remap[i])] && set.flagged[i];
  }
  merged.segment_labels = set.segment_labels;
  for (int& l : merged.segment_labels) l = remap[static_cast<std::size_t>(l)];

  if (merged.thetas.size() < S) {
    for (std::size_t i = 0; i < merged.thetas.size(); ++i) {
      std::vector<Index> segments;
      for (std::size_t m = 0; m < merged.segment_labels.size(); ++m)
        if (merged.segment_labels[m] == static_cast<int>(i)) segments.push_back(static_cast<Index>(m));
      if (auto theta = fit_segments(regs, seg, segments)) merged.thetas[i] = *theta;
    }
  }
  set = std::move(merged);
}

std::vector<int> sample_labels(const Segmentation& seg, const std::vector<int>& segment_labels) {
  std::vector<int> out(static_cast<std::size_t>(seg.boundaries.back()), 0);
  for (Index m = 0; m < seg.segments(); ++m)
    std::fill(out.begin() + seg.begin(m), out.begin() + seg.end(m),
              segment_labels[static_cast<std::size_t>(m)]);
  return out;
}

}  // namespace

IdentificationResult identify(const TimeSeries& ts, const IdentifyConfig& cfg) {
  cfg.validate();
  ts.order.validate();
  IdentificationResult out;
  out.config = cfg;
  out.order = ts.order;
  out.samples = ts.size();
  auto [train, test] = split_regressors(ts, cfg.split);
  out.split = test ? cfg.split : ts.size();
  out.offset = train.offset;

  const InstantOptions iopt{cfg.dwell, cfg.max_segments, cfg.fixed_segments};
  if (cfg.segment_all && test) {
    out.instants = identify_instants(build_regressors(ts), iopt);
    std::vector<Index> clipped;
    for (Index b : out.instants.segmentation.boundaries)
      if (b < train.cols()) clipped.push_back(b);
    clipped.push_back(train.cols());
    out.segmentation = segmentation_from_boundaries(train, std::move(clipped));
  } else {
    out.instants = identify_instants(train, iopt);
    out.segmentation = out.instants.segmentation;
  }
  const Segmentation& seg = out.segmentation;
  const Index M = seg.segments();
  const Index n = train.rows();

  SubmodelSet& set = out.submodels;
  set.segment_labels.assign(static_cast<std::size_t>(M), -1);
  std::vector<Index> remaining(static_cast<std::size_t>(M));
  std::iota(remaining.begin(), remaining.end(), Index{0});

  while (!remaining.empty()) {
    const SegmentBlocks blocks(train, seg, remaining);
    ExtractionRound round;
    round.remaining = blocks.size();
    std::optional<ExtractedSubmodel> sub;
    try {
      if (blocks.samples() <= n)
        throw Error(Errc::rank_deficient_assignment, "fewer samples left than parameters");
      const RegressorMatrix rest = blocks.concatenated();
      if (cfg.extractor == Extractor::l0) {
        sub = omp_extract(blocks, projector(rest), cfg.extraction);
      } else {
        sub = reweighted_l1_extract(blocks, cfg.extraction);
      }
      if (cfg.sparsity_diagnostics) {
        try {
          round.sparsity = summarize(rest, {400, false});
        } catch (const Error&) {
        }
      }
    } catch (const Error& e) {
      if (!stall_code(e.code())) throw;
      round.stalled = true;
      round.stall_reason = e.what();
    }

    if (round.stalled) {
      // Every block left becomes its own submodel.
      out.stalled = true;
      for (Index m : remaining) {
        set.segment_labels[static_cast<std::size_t>(m)] = static_cast<int>(set.thetas.size());
        set.thetas.push_back(seg.betas[static_cast<std::size_t>(m)]);
        set.flagged.push_back(true);
        round.segments.push_back(m);
      }
      out.rounds.push_back(std::move(round));
      break;
    }

    const int label = static_cast<int>(set.thetas.size());
    set.thetas.push_back(sub->theta);
    set.flagged.push_back(false);
    std::vector<Index> left;
    std::vector<bool> taken(static_cast<std::size_t>(blocks.size()), false);
    for (Index b : sub->assigned) taken[static_cast<std::size_t>(b)] = true;
    for (Index b = 0; b < blocks.size(); ++b) {
      if (taken[static_cast<std::size_t>(b)]) {
        set.segment_labels[static_cast<std::size_t>(blocks.origin(b))] = label;
        round.segments.push_back(blocks.origin(b));
      } else {
        left.push_back(blocks.origin(b));
      }
    }
    round.theta = sub->theta;
    round.iterations = sub->iterations;
    round.converged = sub->converged;
    round.threshold = sub->threshold;
    round.residual_profile = sub->residual_profile;
    for (Index b : sub->support) round.support.push_back(blocks.origin(b));
    out.rounds.push_back(std::move(round));
    remaining = std::move(left);
  }

  merge_duplicates(set, train, seg, cfg.merge_tolerance);
  set.sample_labels = sample_labels(seg, set.segment_labels);

  out.train = predict_with_labels(set.thetas, train, set.sample_labels);
  out.fit_train = fit_score(train.y, out.train.yhat);
  if (test) {
    out.test = predict_dp_assign(set.thetas, *test, cfg.dwell);
    out.fit_test = fit_score(test->y, out.test->yhat);
    out.fit_test_simulated =
        fit_score(test->y, simulate_with_labels(set.thetas, *test, out.test->labels, ts.order.na));
  }
  out.diagnostics = pe_diagnostics(out, train, cfg.pe_window > 0 ? cfg.pe_window : cfg.dwell);
  return out;
}

PeDiagnostics pe_diagnostics(const IdentificationResult& result, const RegressorMatrix& train,
                             Index window) {
  PeDiagnostics d;
  const auto& thetas = result.submodels.thetas;
  const Segmentation& seg = result.segmentation;
  const Index n = train.rows();
  double scale = 0.0;
  for (const auto& t : thetas) scale = std::max(scale, t.norm());

  d.min_theta_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < thetas.size(); ++i)
    for (std::size_t j = i + 1; j < thetas.size(); ++j)
      d.min_theta_distance = std::min(d.min_theta_distance, (thetas[i] - thetas[j]).norm());
  d.distinct_ok = thetas.size() < 2 || d.min_theta_distance > 1e-6 * std::max(scale, 1.0);
  if (!d.distinct_ok) d.reasons.push_back("two submodels coincide");

  for (Index m = 0; m < seg.segments(); ++m) {
    const auto T = train.X.middleCols(seg.begin(m), seg.length(m));
    const Matrix gram = T * T.transpose();
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues();
    d.gram_min_eigenvalue.push_back(ev(0));
    const bool ok = ev(n - 1) > 0.0 && ev(0) > kRankTolerance * ev(n - 1);
    d.gram_ok.push_back(ok);
    if (!ok) d.reasons.push_back("segment " + std::to_string(m) + " has a singular Gram matrix");

    const int own = result.submodels.segment_labels[static_cast<std::size_t>(m)];
    bool witness = true;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      if (static_cast<int>(i) == own) continue;
      const Vector diff = thetas[static_cast<std::size_t>(own)] - thetas[i];
      const Vector proj = T.transpose() * diff;
      const double tol = 1e-8 * diff.norm() * T.colwise().norm().maxCoeff();
      if (!(proj.cwiseAbs().maxCoeff() > tol)) witness = false;
    }
    d.witness_ok.push_back(witness);
    if (!witness) d.reasons.push_back("segment " + std::to_string(m) + " has no discriminating sample");
  }

  d.window = std::min(window, train.cols());
  d.rho1 = std::numeric_limits<double>::infinity();
  d.rho2 = 0.0;
  if (d.window > 0) {
    Matrix sum = train.X.leftCols(d.window) * train.X.leftCols(d.window).transpose();
    for (Index start = 0;; ++start) {
      const Vector ev =
          Eigen::SelfAdjointEigenSolver<Matrix>(sum / static_cast<double>(d.window), Eigen::EigenvaluesOnly)
              .eigenvalues();
      d.rho1 = std::min(d.rho1, ev(0));
      d.rho2 = std::max(d.rho2, ev(n - 1));
      if (start + d.window >= train.cols()) break;
      const auto out_col = train.X.col(start);
      const auto in_col = train.X.col(start + d.window);
      sum.noalias() += in_col * in_col.transpose() - out_col * out_col.transpose();
    }
  }
  const bool window_ok = d.rho1 > kRankTolerance * std::max(d.rho2, 1e-300);
  if (!window_ok) d.reasons.push_back("windowed excitation bound rho1 is zero");

  d.verdict = d.distinct_ok && window_ok &&
              std::all_of(d.gram_ok.begin(), d.gram_ok.end(), [](bool b) { return b; }) &&
              std::all_of(d.witness_ok.begin(), d.witness_ok.end(), [](bool b) { return b; });
  return d;
}

Matrix kernel_overlap(const std::vector<Vector>& thetas, const RegressorMatrix& regs, double eps) {
  const auto S = static_cast<Index>(thetas.size());
  const Index N = regs.cols();
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> fits(N, S);
  // One-row block [y_k, -x_k']: nu is the mean absolute entry over n+1 columns.
  const Vector row_nu = (regs.y.cwiseAbs() + regs.X.cwiseAbs().colwise().sum().transpose()) /
                        static_cast<double>(regs.rows() + 1);
  for (Index i = 0; i < S; ++i) {
    const Vector& t = thetas[static_cast<std::size_t>(i)];
    const double tn = std::sqrt(1.0 + t.squaredNorm());
    const Vector r = (regs.y - regs.X.transpose() * t).cwiseAbs();
    for (Index k = 0; k < N; ++k) fits(k, i) = r(k) <= eps * row_nu(k) * tn;
  }
  Matrix out(S, S);
  for (Index i = 0; i < S; ++i)
    for (Index j = 0; j < S; ++j)
      out(i, j) = N > 0 ? (fits.col(i) && fits.col(j)).count() / static_cast<double>(N) : 0.0;
  return out;
}

}  // namespace switchid

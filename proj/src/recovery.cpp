// Copyright 2026 The blindtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "blindtomo/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blindtomo {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kConverged: return "converged";
    case Termination::kIterationCap: return "iteration-cap";
    case Termination::kStalled: return "stalled";
  }
  return "unknown";
}

std::string to_string(StepMode mode) {
  return mode == StepMode::kAdaptivePerBlock ? "adaptive-per-block" : "constant";
}

StepMode step_mode_from_string(const std::string& name) {
  if (name == "adaptive-per-block") return StepMode::kAdaptivePerBlock;
  if (name == "constant") return StepMode::kConstant;
  throw std::invalid_argument("unknown step mode '" + name + "'");
}

void SdtConfig::validate(Eigen::Index n, Eigen::Index d) const {
  if (s < 1 || s > n) throw std::invalid_argument("sdt: need 1 <= s <= n");
  if (r < 1 || r > d) throw std::invalid_argument("sdt: need 1 <= r <= d");
  if (max_iters < 1) throw std::invalid_argument("sdt: max_iters must be >= 1");
  if (!(gamma_break > 0.0)) throw std::invalid_argument("sdt: gamma_break must be positive");
  if (support_restriction) {
    for (Eigen::Index k : *support_restriction) {
      if (k < 0 || k >= n) throw std::invalid_argument("sdt: support index out of range");
    }
  }
}

namespace {

bool stalled(const std::vector<double>& trace) {
  const auto len = static_cast<int>(trace.size());
  if (len <= kStallWindow) return false;
  return std::abs(trace[static_cast<std::size_t>(len - 1)] -
                  trace[static_cast<std::size_t>(len - 1 - kStallWindow)]) < kStallTolerance;
}

void zero_off_support(BlockSignal& x, const std::vector<char>& on_support) {
  for (Eigen::Index k = 0; k < x.n(); ++k) {
    if (!on_support[static_cast<std::size_t>(k)]) x.block(k).setZero();
  }
}

}  // namespace

RecoveryReport sdt(const RealVector& y, const MeasurementEnsemble& ens, const SdtConfig& cfg,
                   const SdtOptions& options) {
  const Eigen::Index n = ens.n();
  const Eigen::Index d = ens.d();
  cfg.validate(n, d);
  if (y.size() != ens.m()) throw DimensionError("sdt: data length != m");
  if (!y.allFinite()) throw NumericalFailure("sdt: data contains non-finite values");

  RecoveryReport report;
  const double y_norm = y.norm();
  if (y_norm == 0.0) {
    // The first gradient step is zero and the zero iterate already fits.
    report.signal = BlockSignal(n, d);
    report.iterations = 1;
    report.termination = Termination::kConverged;
    report.relative_residual = 0.0;
    if (cfg.record_trace) report.residual_trace = {0.0};
    return report;
  }

  std::vector<char> on_support(static_cast<std::size_t>(n), 1);
  if (cfg.support_restriction) {
    std::fill(on_support.begin(), on_support.end(), 0);
    for (Eigen::Index k : *cfg.support_restriction) on_support[static_cast<std::size_t>(k)] = 1;
  }

  BlockSignal x = options.initial ? *options.initial : BlockSignal(n, d);
  if (!x.same_shape(BlockSignal(n, d))) throw DimensionError("sdt: initial iterate has wrong shape");
  if (cfg.support_restriction) zero_off_support(x, on_support);

  RealVector residual = y - ens.apply(x);
  double rel = residual.norm() / y_norm;
  BlockSignal best = x;
  double best_rel = rel;
  std::vector<double> trace;

  const Eigen::Index dd = d * d;
  RealVector coords(dd);
  report.termination = Termination::kIterationCap;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    BlockSignal grad = ens.adjoint(residual);
    if (cfg.use_tangent_projection) grad = tangent_space_project(x, grad, cfg.r);
    if (cfg.support_restriction) zero_off_support(grad, on_support);

    for (Eigen::Index k = 0; k < n; ++k) {
      double step = cfg.constant_step;
      if (cfg.step_mode == StepMode::kAdaptivePerBlock) {
        const double numerator = grad.block(k).squaredNorm();
        if (numerator == 0.0) continue;
        hvec_into(grad.block(k), coords);
        const double denominator = (ens.design().middleCols(k * dd, dd) * coords).squaredNorm();
        step = denominator < kStepDenominatorFloor ? 0.0 : numerator / denominator;
      }
      if (step != 0.0) x.block(k) += step * grad.block(k);
    }
    x = project_omega_hat(x, cfg.s, cfg.r, cfg.rank_mode);
    if (cfg.support_restriction) zero_off_support(x, on_support);

    residual = y - ens.apply(x);
    rel = residual.norm() / y_norm;
    if (!std::isfinite(rel)) throw NumericalFailure("sdt: non-finite residual at iteration " + std::to_string(iter));
    trace.push_back(rel);
    report.iterations = iter;
    if (options.observer) options.observer(iter, x);
    if (rel < best_rel) {
      best = x;
      best_rel = rel;
    }
    if (rel <= cfg.gamma_break) {
      report.termination = Termination::kConverged;
      break;
    }
    if (stalled(trace)) {
      report.termination = Termination::kStalled;
      break;
    }
  }

  report.signal = std::move(best);
  report.relative_residual = best_rel;
  if (cfg.record_trace) report.residual_trace = std::move(trace);
  return report;
}

RecoveryReport dt(const RealVector& y, const MeasurementEnsemble& ens, SdtConfig cfg,
                  const SdtOptions& options) {
  cfg.s = ens.n();
  cfg.rank_mode = RankProjectionMode::kPlainRank;
  return sdt(y, ens, cfg, options);
}

RecoveryReport informed_dt(const RealVector& y, const MeasurementEnsemble& ens, SdtConfig cfg,
                           std::vector<Eigen::Index> support, const SdtOptions& options) {
  cfg.support_restriction = std::move(support);
  return dt(y, ens, std::move(cfg), options);
}

RecoveryReport standard_tomography(const RealVector& y, const MeasurementEnsemble& ens_single_block,
                                   SdtConfig cfg, const SdtOptions& options) {
  if (ens_single_block.n() != 1) {
    throw DimensionError("standard_tomography: expected a single-block ensemble, got n = " +
                         std::to_string(ens_single_block.n()));
  }
  cfg.s = 1;
  return sdt(y, ens_single_block, cfg, options);
}

// ---------------------------------------------------------------------------
// Sparse-vector IHT (normalized step, Blumensath & Davies)

SparseIhtResult iht_sparse_vector(const RealVector& y, const RealMatrix& a, Eigen::Index s, int budget,
                                  const std::optional<RealVector>& initial) {
  if (a.rows() != y.size()) throw DimensionError("iht_sparse_vector: matrix rows != data length");
  if (s < 0) throw std::invalid_argument("iht_sparse_vector: s must be non-negative");
  const Eigen::Index n = a.cols();
  SparseIhtResult out;
  out.x = RealVector::Zero(n);
  if (initial) {
    if (initial->size() != n) throw DimensionError("iht_sparse_vector: initial vector length");
    out.x = hard_threshold_vector(*initial, s);
  }
  const double y_norm = y.norm();
  if (y_norm == 0.0) {
    out.x.setZero();
    out.residual_norm = 0.0;
    return out;
  }

  constexpr double kShrink = 2.0;
  constexpr double kSafety = 0.01;
  RealVector x = out.x;
  RealVector residual = y - a * x;
  out.residual_norm = residual.norm();
  for (int iter = 1; iter <= budget; ++iter) {
    const RealVector g = a.transpose() * residual;
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (x(i) != 0.0) support.push_back(i);
    }
    if (support.empty()) support = top_s_indices(g, s);
    RealVector g_support = RealVector::Zero(n);
    for (Eigen::Index i : support) g_support(i) = g(i);
    const double denominator = (a * g_support).squaredNorm();
    if (denominator < kStepDenominatorFloor) break;
    double step = g_support.squaredNorm() / denominator;

    RealVector next;
    for (int shrink = 0; shrink < 50; ++shrink) {
      next = hard_threshold_vector(x + step * g, s);
      bool same_support = true;
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((next(i) != 0.0) != (x(i) != 0.0)) {
          same_support = false;
          break;
        }
      }
      if (same_support) break;
      const RealVector delta = next - x;
      const double delta_gain = (a * delta).squaredNorm();
      if (delta_gain == 0.0) break;
      const double bound = (1.0 - kSafety) * delta.squaredNorm() / delta_gain;
      if (step <= bound) break;
      step /= kShrink;
    }

    const double change = (next - x).norm();
    x = std::move(next);
    residual = y - a * x;
    const double res = residual.norm();
    out.iterations = iter;
    if (res < out.residual_norm) {
      out.residual_norm = res;
      out.x = x;
    }
    if (res <= 1e-14 * y_norm || change <= 1e-15 * (1.0 + x.norm())) break;
  }
  return out;
}

ComplexMatrix iht_low_rank(const RealVector& y, const MeasurementEnsemble& op, Eigen::Index r,
                           RankProjectionMode mode, int budget, const LowRankIhtOptions& options) {
  if (op.n() != 1) throw DimensionError("iht_low_rank: operator must act on a single block");
  SdtConfig cfg;
  cfg.s = 1;
  cfg.r = r;
  cfg.max_iters = budget;
  // A zero threshold would be rejected by validation; the smallest positive
  // double stands for "run the full budget".
  cfg.gamma_break = options.gamma_break > 0.0 ? options.gamma_break : std::numeric_limits<double>::denorm_min();
  cfg.rank_mode = mode;
  cfg.use_tangent_projection = options.use_tangent_projection;
  SdtOptions sdt_options;
  if (options.initial) sdt_options.initial = BlockSignal(std::vector<ComplexMatrix>{*options.initial});
  return sdt(y, op, cfg, sdt_options).signal.block(0);
}

// ---------------------------------------------------------------------------
// ALS

void AlsConfig::validate() const {
  if (s < 1) throw std::invalid_argument("als: s must be >= 1");
  if (r < 1) throw std::invalid_argument("als: r must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("als: max_iters must be >= 1");
  if (!(gamma_break > 0.0)) throw std::invalid_argument("als: gamma_break must be positive");
  if (reinit_period < 1 || reinit_period > max_iters) {
    throw std::invalid_argument("als: need 1 <= reinit_period <= max_iters");
  }
  if (max_reinits < 0) throw std::invalid_argument("als: max_reinits must be >= 0");
  if (xi_budget < 1 || rho_budget < 1) throw std::invalid_argument("als: inner budgets must be >= 1");
}

RecoveryReport als_bt(const RealVector& y, const MeasurementEnsemble& ens, const AlsConfig& cfg,
                      RngStream& rng) {
  cfg.validate();
  const Eigen::Index n = ens.n();
  const Eigen::Index d = ens.d();
  if (cfg.s > n || cfg.r > d) throw std::invalid_argument("als: need s <= n and r <= d");
  if (y.size() != ens.m()) throw DimensionError("als: data length != m");
  if (!y.allFinite()) throw NumericalFailure("als: data contains non-finite values");

  RecoveryReport report;
  ComplexMatrix rho = random_rank_r_state(d, cfg.r, rng).matrix();
  const double y_norm = y.norm();
  if (y_norm == 0.0) {
    report.xi = CalibrationVector(RealVector::Zero(n));
    report.state = DensityMatrix(rho);
    report.signal = BlockSignal(n, d);
    report.iterations = 1;
    report.termination = Termination::kConverged;
    return report;
  }

  std::optional<RealVector> xi;
  RealVector best_xi = RealVector::Zero(n);
  ComplexMatrix best_rho = rho;
  double best_rel = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  int since_restart = 0;
  report.termination = Termination::kIterationCap;

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    ++since_restart;
    const RealMatrix columns = ens.block_responses(rho);
    xi = iht_sparse_vector(y, columns, cfg.s, cfg.xi_budget, xi).x;

    const MeasurementEnsemble op = ens.combine_blocks(*xi);
    LowRankIhtOptions inner;
    inner.initial = rho;
    rho = iht_low_rank(y, op, cfg.r, RankProjectionMode::kPsd, cfg.rho_budget, inner);

    const double rel = (y - op.design() * hvec(rho)).norm() / y_norm;
    if (!std::isfinite(rel)) throw NumericalFailure("als: non-finite residual at iteration " + std::to_string(iter));
    trace.push_back(rel);
    report.iterations = iter;
    if (rel < best_rel) {
      best_rel = rel;
      best_xi = *xi;
      best_rho = rho;
    }
    if (rel <= cfg.gamma_break) {
      report.termination = Termination::kConverged;
      break;
    }
    const bool collapsed = rho.norm() == 0.0;
    if ((since_restart >= cfg.reinit_period || collapsed) && report.reinits < cfg.max_reinits) {
      ++report.reinits;
      since_restart = 0;
      rho = random_rank_r_state(d, cfg.r, rng).matrix();
      xi.reset();
    }
  }

  // Fix the scale ambiguity (c xi, rho / c) by requiring a unit-trace state.
  const double t = best_rho.trace().real();
  if (t > 0.0) {
    report.state = project_to_density_matrix(best_rho / t);
    report.xi = CalibrationVector(best_xi * t);
  } else {
    report.state = project_to_density_matrix(best_rho);
    report.xi = CalibrationVector(RealVector::Zero(n));
  }
  report.signal = assemble_signal(*report.xi, *report.state);
  report.relative_residual = best_rel;
  if (cfg.record_trace) report.residual_trace = std::move(trace);
  return report;
}

}  // namespace blindtomo

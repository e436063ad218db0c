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

#pragma once

// Recovery algorithms.
//
//   sdt                  iterative hard thresholding on the relaxed sparse
//                        de-mixing set (per-block step widths, optional
//                        tangent-space projection)
//   dt / informed_dt     the non-sparse special case s = n, optionally
//                        restricted to a known block support
//   standard_tomography  sdt on a single block (n = s = 1)
//   als_bt               alternating sparse-vector IHT / low-rank IHT on the
//                        bilinear model y = A(xi (x) rho), with restarts

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blindtomo/linalg.hpp"
#include "blindtomo/measurements.hpp"
#include "blindtomo/projections.hpp"
#include "blindtomo/rng.hpp"
#include "blindtomo/signals.hpp"

namespace blindtomo {

class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

enum class Termination { kConverged, kIterationCap, kStalled };
std::string to_string(Termination t);

enum class StepMode { kAdaptivePerBlock, kConstant };
std::string to_string(StepMode mode);
StepMode step_mode_from_string(const std::string& name);

struct SdtConfig {
  Eigen::Index s = 1;
  Eigen::Index r = 1;
  int max_iters = 600;
  double gamma_break = 1e-5;
  StepMode step_mode = StepMode::kAdaptivePerBlock;
  /// Step width used by StepMode::kConstant.
  double constant_step = 1.0;
  bool use_tangent_projection = true;
  RankProjectionMode rank_mode = RankProjectionMode::kSignedPsd;
  /// Informed variant: blocks outside this set are held at zero.
  std::optional<std::vector<Eigen::Index>> support_restriction;
  bool record_trace = false;

  void validate(Eigen::Index n, Eigen::Index d) const;
};

/// Called after every iteration with (iteration, current iterate).
using IterateObserver = std::function<void(int, const BlockSignal&)>;

struct SdtOptions {
  /// Starting point; defaults to the zero signal.
  std::optional<BlockSignal> initial;
  IterateObserver observer;
};

struct RecoveryReport {
  BlockSignal signal;                     // sdt-family estimate
  std::optional<DensityMatrix> state;     // als estimate (unit trace)
  std::optional<CalibrationVector> xi;    // als estimate
  int iterations = 0;
  int reinits = 0;
  double relative_residual = 0.0;
  Termination termination = Termination::kIterationCap;
  std::vector<double> residual_trace;
};

/// A change of the relative residual below kStallTolerance across
/// kStallWindow iterations ends a run as stalled.
inline constexpr double kStallTolerance = 1e-12;
inline constexpr int kStallWindow = 10;
/// Step-width denominators below this give a zero step for the block.
inline constexpr double kStepDenominatorFloor = 1e-14;

RecoveryReport sdt(const RealVector& y, const MeasurementEnsemble& ens, const SdtConfig& cfg,
                   const SdtOptions& options = {});

/// sdt with s = n and plain-rank truncation (the non-sparse de-mixing algorithm).
RecoveryReport dt(const RealVector& y, const MeasurementEnsemble& ens, SdtConfig cfg,
                  const SdtOptions& options = {});

/// dt restricted to a known block support.
RecoveryReport informed_dt(const RealVector& y, const MeasurementEnsemble& ens, SdtConfig cfg,
                           std::vector<Eigen::Index> support, const SdtOptions& options = {});

/// sdt on a single-block ensemble (n = s = 1). The caller passes the target
/// block only, e.g. ens.select_blocks({0}).
RecoveryReport standard_tomography(const RealVector& y, const MeasurementEnsemble& ens_single_block,
                                   SdtConfig cfg, const SdtOptions& options = {});

struct SparseIhtResult {
  RealVector x;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Normalized IHT for min ||y - A x|| over s-sparse x; returns the best
/// iterate by residual.
SparseIhtResult iht_sparse_vector(const RealVector& y, const RealMatrix& a, Eigen::Index s, int budget,
                                  const std::optional<RealVector>& initial = std::nullopt);

struct LowRankIhtOptions {
  double gamma_break = 0.0;
  bool use_tangent_projection = true;
  std::optional<ComplexMatrix> initial;
};

/// Low-rank IHT for a single-block operator: sdt with n = s = 1.
ComplexMatrix iht_low_rank(const RealVector& y, const MeasurementEnsemble& op, Eigen::Index r,
                           RankProjectionMode mode, int budget, const LowRankIhtOptions& options = {});

struct AlsConfig {
  Eigen::Index s = 1;
  Eigen::Index r = 1;
  int max_iters = 1000;
  double gamma_break = 1e-5;
  int reinit_period = 50;
  int max_reinits = 10;
  int xi_budget = 50;
  int rho_budget = 10;
  bool record_trace = false;

  void validate() const;
};

/// Alternating least squares over (xi in Sigma_s, rho rank-r PSD). Restarts
/// from a fresh Haar-random rank-r state after every `reinit_period`
/// iterations without convergence, at most `max_reinits` times. The report
/// carries the trace-normalized state and the correspondingly rescaled xi.
RecoveryReport als_bt(const RealVector& y, const MeasurementEnsemble& ens, const AlsConfig& cfg,
                      RngStream& rng);

}  // namespace blindtomo

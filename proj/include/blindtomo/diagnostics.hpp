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

// Error metrics, the sampled RIP lower bound and convergence-rate fits.

#include <stdexcept>
#include <string>
#include <vector>

#include "blindtomo/linalg.hpp"
#include "blindtomo/measurements.hpp"
#include "blindtomo/recovery.hpp"
#include "blindtomo/rng.hpp"
#include "blindtomo/signals.hpp"

namespace blindtomo {

class InsufficientDataError : public std::invalid_argument {
 public:
  explicit InsufficientDataError(const std::string& what) : std::invalid_argument(what) {}
};

struct TrialMetrics {
  double frob_error = 0.0;
  double trace_norm_error = 0.0;
  double calib_l2_error = 0.0;
  bool success = false;
  int iterations = 0;
  Termination termination = Termination::kIterationCap;
};

/// Schatten-1 norm of rho_hat - rho.
double trace_norm_error(const ComplexMatrix& rho_hat, const ComplexMatrix& rho);

/// ||xi_hat - xi||_2
double calibration_l2_error(const RealVector& xi_hat, const RealVector& xi);

/// max over `sample_count` random unit-Frobenius signals X of the relaxed
/// (s, r) signal set of | ||A(X)||^2 - 1 |. The ensemble is used as given, so
/// pass it already normalized (e.g. ens.scaled(1/sqrt(m))). Samples are drawn
/// sequentially from `rng`, so equal seeds give nested sample sets.
double rip_delta_lower_bound(const MeasurementEnsemble& ens, int sample_count, Eigen::Index s,
                             Eigen::Index r, RngStream& rng);

/// Sample count of the GUE RIP bound,
///   (C / delta^2) [ s ln(e n / s) + (2d + 1) r s ln(c / delta) + ln(2 / tau) ],
/// for caller-chosen constants C and c.
double rip_sample_count(Eigen::Index n, Eigen::Index d, Eigen::Index s, Eigen::Index r, double delta,
                        double tau, double big_c, double small_c);

struct ConvergenceFit {
  double rate = 0.0;            // exp(slope) of log(error) against iteration
  double log_residual_rms = 0.0;
  int points = 0;
};

/// Least-squares line through log(trace[l]) against l. The trace is truncated
/// at its first non-positive entry; fewer than three remaining points throws
/// InsufficientDataError.
ConvergenceFit convergence_trace_fit(const std::vector<double>& trace);

}  // namespace blindtomo

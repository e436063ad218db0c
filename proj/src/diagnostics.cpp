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

#include "blindtomo/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace blindtomo {

double trace_norm_error(const ComplexMatrix& rho_hat, const ComplexMatrix& rho) {
  if (rho_hat.rows() != rho.rows() || rho_hat.cols() != rho.cols()) {
    throw DimensionError("trace_norm_error: shape mismatch");
  }
  return eig_hermitian(rho_hat - rho).eigenvalues.cwiseAbs().sum();
}

double calibration_l2_error(const RealVector& xi_hat, const RealVector& xi) {
  if (xi_hat.size() != xi.size()) throw DimensionError("calibration_l2_error: length mismatch");
  return (xi_hat - xi).norm();
}

double rip_delta_lower_bound(const MeasurementEnsemble& ens, int sample_count, Eigen::Index s,
                             Eigen::Index r, RngStream& rng) {
  if (sample_count < 1) throw std::invalid_argument("rip_delta_lower_bound: sample_count must be >= 1");
  double delta = 0.0;
  for (int i = 0; i < sample_count; ++i) {
    const BlockSignal x = random_omega_hat_signal(ens.n(), ens.d(), s, r, rng);
    delta = std::max(delta, std::abs(ens.apply(x).squaredNorm() - 1.0));
  }
  return delta;
}

double rip_sample_count(Eigen::Index n, Eigen::Index d, Eigen::Index s, Eigen::Index r, double delta,
                        double tau, double big_c, double small_c) {
  const auto nd = static_cast<double>(n);
  const auto sd = static_cast<double>(s);
  const double bracket = sd * std::log(std::exp(1.0) * nd / sd) +
                         static_cast<double>(2 * d + 1) * static_cast<double>(r) * sd * std::log(small_c / delta) +
                         std::log(2.0 / tau);
  return big_c / (delta * delta) * bracket;
}

ConvergenceFit convergence_trace_fit(const std::vector<double>& trace) {
  std::vector<double> logs;
  for (double e : trace) {
    if (!(e > 0.0)) break;
    logs.push_back(std::log(e));
  }
  if (logs.size() < 3) {
    throw InsufficientDataError("convergence_trace_fit: need at least 3 positive entries, got " +
                                std::to_string(logs.size()));
  }
  const auto count = static_cast<double>(logs.size());
  double mean_l = 0.0, mean_v = 0.0;
  for (std::size_t l = 0; l < logs.size(); ++l) {
    mean_l += static_cast<double>(l);
    mean_v += logs[l];
  }
  mean_l /= count;
  mean_v /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t l = 0; l < logs.size(); ++l) {
    sxx += (static_cast<double>(l) - mean_l) * (static_cast<double>(l) - mean_l);
    sxy += (static_cast<double>(l) - mean_l) * (logs[l] - mean_v);
  }
  const double slope = sxy / sxx;
  const double intercept = mean_v - slope * mean_l;
  double sq = 0.0;
  for (std::size_t l = 0; l < logs.size(); ++l) {
    const double fit = intercept + slope * static_cast<double>(l);
    sq += (logs[l] - fit) * (logs[l] - fit);
  }
  return {std::exp(slope), std::sqrt(sq / count), static_cast<int>(logs.size())};
}

}  // namespace blindtomo

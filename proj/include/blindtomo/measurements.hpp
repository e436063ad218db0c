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

// Measurement ensembles: n blocks of m Hermitian observables A_k^(i), the
// forward map y_i = sum_k <A_k^(i), x_k> and its adjoint.
//
// Internally every ensemble is a real "design" matrix of shape m x (n d^2):
// row i, column block k holds hvec(A_k^(i)). Because hvec is an isometry on
// Hermitian matrices the forward map is a matrix-vector product on hvec
// coordinates and the adjoint is the transpose.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "blindtomo/linalg.hpp"
#include "blindtomo/rng.hpp"
#include "blindtomo/signals.hpp"

namespace blindtomo {

class UnsupportedNoiseError : public std::invalid_argument {
 public:
  explicit UnsupportedNoiseError(const std::string& what) : std::invalid_argument(what) {}
};

/// Tensor product W_1 (x) W_2 (x) ... of single-qubit Paulis; letter j acts on
/// qubit j, the first letter being the most significant tensor factor.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::string letters);

  const std::string& letters() const { return letters_; }
  int qubits() const { return static_cast<int>(letters_.size()); }
  Eigen::Index dim() const { return Eigen::Index{1} << letters_.size(); }
  bool is_identity() const;
  int count(char letter) const;

  ComplexMatrix dense() const;
  /// Tr(rho P) without forming P.
  double expectation(const ComplexMatrix& rho) const;

  static PauliString random(int qubits, RngStream& rng);

  friend bool operator==(const PauliString& a, const PauliString& b) { return a.letters_ == b.letters_; }

 private:
  std::string letters_;
};

ComplexMatrix pauli_matrix(char letter);

/// Real-weighted sum of Pauli strings; an empty sum is the zero observable.
struct PauliTerm {
  double weight = 1.0;
  PauliString string;
};
using PauliSum = std::vector<PauliTerm>;

ComplexMatrix dense(const PauliSum& sum, Eigen::Index d);

/// Coherent-error replacement: the sum over single-site replacements of one
/// occurrence of `from` by `to` in `target` (empty when `from` is absent).
PauliSum replace_one_letter(const PauliString& target, char from, char to);

/// The six ordered pairs W -> W~ (W != W~) in calibration-vector order:
/// X->Y, X->Z, Y->X, Y->Z, Z->X, Z->Y.
const std::vector<std::pair<char, char>>& coherent_error_pairs();

enum class EnsembleKind { kGue, kGaussian, kSubsampledPauli, kCoherentErrorPauli, kDense };

std::string to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& name);
bool is_pauli_kind(EnsembleKind kind);

class MeasurementEnsemble {
 public:
  /// blocks[k][i] = A_k^(i). All observables must be Hermitian (1e-10).
  static MeasurementEnsemble from_observables(const std::vector<std::vector<ComplexMatrix>>& blocks);
  /// Pauli-sum observables on q qubits; terms[k][i] is A_k^(i).
  static MeasurementEnsemble from_pauli_sums(EnsembleKind kind, int qubits,
                                             std::vector<std::vector<PauliSum>> terms);

  EnsembleKind kind() const { return kind_; }
  Eigen::Index n() const { return n_; }
  Eigen::Index m() const { return m_; }
  Eigen::Index d() const { return d_; }
  int qubits() const { return qubits_; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  double scale() const { return scale_; }
  const RealMatrix& design() const { return design_; }
  bool has_pauli_terms() const { return !pauli_terms_.empty(); }
  const PauliSum& pauli_terms(Eigen::Index k, Eigen::Index i) const;

  /// Dense A_k^(i).
  ComplexMatrix observable(Eigen::Index k, Eigen::Index i) const;

  /// y_i = sum_k <A_k^(i), x_k>. Zero blocks are skipped.
  RealVector apply(const BlockSignal& x) const;
  /// A_k(x_k): block k alone, all other blocks zero.
  RealVector apply_block(Eigen::Index k, const ComplexMatrix& xk) const;
  /// Block k = sum_i y_i A_k^(i).
  BlockSignal adjoint(const RealVector& y) const;
  /// m x n matrix whose column k is A_k(rho).
  RealMatrix block_responses(const ComplexMatrix& rho) const;

  /// Single-block ensemble with observables sum_k w_k A_k^(i).
  MeasurementEnsemble combine_blocks(const RealVector& weights) const;
  /// Ensemble restricted to the listed blocks, in the given order.
  MeasurementEnsemble select_blocks(const std::vector<Eigen::Index>& blocks) const;
  /// Every observable multiplied by `factor` (e.g. 1/sqrt(m) for RIP probes).
  MeasurementEnsemble scaled(double factor) const;

  nlohmann::json to_json() const;
  static MeasurementEnsemble from_json(const nlohmann::json& j);

 private:
  friend MeasurementEnsemble gue_ensemble(Eigen::Index, Eigen::Index, Eigen::Index, std::uint64_t);
  friend MeasurementEnsemble gaussian_ensemble(Eigen::Index, Eigen::Index, Eigen::Index, std::uint64_t);
  friend MeasurementEnsemble subsampled_pauli_ensemble(Eigen::Index, Eigen::Index, int, std::uint64_t);
  friend MeasurementEnsemble coherent_error_pauli_ensemble(Eigen::Index, int, std::uint64_t);

  void check_signal(const BlockSignal& x) const;

  EnsembleKind kind_ = EnsembleKind::kDense;
  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
  Eigen::Index d_ = 0;
  int qubits_ = 0;
  std::optional<std::uint64_t> seed_;
  double scale_ = 1.0;
  RealMatrix design_;
  std::vector<std::vector<PauliSum>> pauli_terms_;
};

/// GUE observables (B + B^dagger)/2 with B_ab ~ N(0,1) + i N(0,1).
MeasurementEnsemble gue_ensemble(Eigen::Index n, Eigen::Index m, Eigen::Index d, std::uint64_t seed);
/// Real Gaussian observables (B + B^T)/2 with B_ab ~ N(0,1).
MeasurementEnsemble gaussian_ensemble(Eigen::Index n, Eigen::Index m, Eigen::Index d, std::uint64_t seed);
/// Each block holds m independent uniformly random Pauli strings on q qubits.
MeasurementEnsemble subsampled_pauli_ensemble(Eigen::Index n, Eigen::Index m, int qubits,
                                              std::uint64_t seed);
/// Block 0: m uniform target strings. Blocks 1..6: single-letter replacement
/// sums of the same targets for the pairs in coherent_error_pairs(). n = 7.
MeasurementEnsemble coherent_error_pauli_ensemble(Eigen::Index m, int qubits, std::uint64_t seed);

struct NoiseModel {
  enum class Kind { kNone, kShot };
  Kind kind = Kind::kNone;
  std::uint64_t samples = 100000000;
  /// Draw exact binomial outcome counts instead of the Gaussian approximation.
  bool exact_binomial = false;

  static NoiseModel none() { return {}; }
  static NoiseModel shot(std::uint64_t samples) { return {Kind::kShot, samples, false}; }
};

/// Shot noise for Pauli expectation data: y_i + g_i, g_i ~ N(0, (1 - c_i^2)/N)
/// where c_i is y_i clipped to [-1, 1]. Throws UnsupportedNoiseError for
/// non-Pauli ensemble kinds.
RealVector add_shot_noise(const RealVector& y, EnsembleKind kind, const NoiseModel& noise,
                          RngStream& rng);

}  // namespace blindtomo

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

#include "blindtomo/measurements.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace blindtomo {

namespace {

constexpr char kPauliLetters[4] = {'I', 'X', 'Y', 'Z'};

bool valid_letter(char c) { return c == 'I' || c == 'X' || c == 'Y' || c == 'Z'; }

}  // namespace

// ---------------------------------------------------------------------------
// Pauli strings

PauliString::PauliString(std::string letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw std::invalid_argument("PauliString: empty string");
  for (char c : letters_) {
    if (!valid_letter(c)) throw std::invalid_argument(std::string("PauliString: invalid letter '") + c + "'");
  }
}

bool PauliString::is_identity() const {
  return std::all_of(letters_.begin(), letters_.end(), [](char c) { return c == 'I'; });
}

int PauliString::count(char letter) const {
  return static_cast<int>(std::count(letters_.begin(), letters_.end(), letter));
}

ComplexMatrix pauli_matrix(char letter) {
  ComplexMatrix p(2, 2);
  const Complex i(0.0, 1.0);
  switch (letter) {
    case 'I': p << 1, 0, 0, 1; break;
    case 'X': p << 0, 1, 1, 0; break;
    case 'Y': p << 0, -i, i, 0; break;
    case 'Z': p << 1, 0, 0, -1; break;
    default: throw std::invalid_argument(std::string("pauli_matrix: invalid letter '") + letter + "'");
  }
  return p;
}

ComplexMatrix PauliString::dense() const {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (char c : letters_) out = kron(out, pauli_matrix(c));
  return out;
}

double PauliString::expectation(const ComplexMatrix& rho) const {
  const Eigen::Index d = dim();
  if (rho.rows() != d || rho.cols() != d) throw DimensionError("PauliString::expectation: shape mismatch");
  const int q = qubits();
  // P|b> = phase(b) |b xor flip>; Tr(rho P) = sum_b phase(b) rho(b, b xor flip).
  Eigen::Index flip = 0;
  for (int j = 0; j < q; ++j) {
    const char c = letters_[static_cast<std::size_t>(j)];
    if (c == 'X' || c == 'Y') flip |= Eigen::Index{1} << (q - 1 - j);
  }
  Complex total = 0.0;
  for (Eigen::Index b = 0; b < d; ++b) {
    Complex phase = 1.0;
    for (int j = 0; j < q; ++j) {
      const bool bit = (b >> (q - 1 - j)) & 1;
      switch (letters_[static_cast<std::size_t>(j)]) {
        case 'Y': phase *= bit ? Complex(0, -1) : Complex(0, 1); break;
        case 'Z': if (bit) phase = -phase; break;
        default: break;
      }
    }
    total += phase * rho(b, b ^ flip);
  }
  return total.real();
}

PauliString PauliString::random(int qubits, RngStream& rng) {
  std::string letters(static_cast<std::size_t>(qubits), 'I');
  for (auto& c : letters) c = kPauliLetters[rng.uniform_index(4)];
  return PauliString(std::move(letters));
}

ComplexMatrix dense(const PauliSum& sum, Eigen::Index d) {
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (const auto& term : sum) {
    if (term.string.dim() != d) throw DimensionError("dense(PauliSum): qubit count mismatch");
    out += term.weight * term.string.dense();
  }
  return out;
}

PauliSum replace_one_letter(const PauliString& target, char from, char to) {
  PauliSum out;
  const std::string& letters = target.letters();
  for (std::size_t j = 0; j < letters.size(); ++j) {
    if (letters[j] != from) continue;
    std::string replaced = letters;
    replaced[j] = to;
    out.push_back({1.0, PauliString(std::move(replaced))});
  }
  return out;
}

const std::vector<std::pair<char, char>>& coherent_error_pairs() {
  static const std::vector<std::pair<char, char>> pairs = {
      {'X', 'Y'}, {'X', 'Z'}, {'Y', 'X'}, {'Y', 'Z'}, {'Z', 'X'}, {'Z', 'Y'}};
  return pairs;
}

// ---------------------------------------------------------------------------
// Ensemble kinds

std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::kGue: return "gue";
    case EnsembleKind::kGaussian: return "gaussian";
    case EnsembleKind::kSubsampledPauli: return "subsampled-pauli";
    case EnsembleKind::kCoherentErrorPauli: return "coherent-error-pauli";
    case EnsembleKind::kDense: return "dense";
  }
  return "unknown";
}

EnsembleKind ensemble_kind_from_string(const std::string& name) {
  if (name == "gue") return EnsembleKind::kGue;
  if (name == "gaussian") return EnsembleKind::kGaussian;
  if (name == "subsampled-pauli") return EnsembleKind::kSubsampledPauli;
  if (name == "coherent-error-pauli") return EnsembleKind::kCoherentErrorPauli;
  if (name == "dense") return EnsembleKind::kDense;
  throw std::invalid_argument("unknown ensemble kind '" + name + "'");
}

bool is_pauli_kind(EnsembleKind kind) {
  return kind == EnsembleKind::kSubsampledPauli || kind == EnsembleKind::kCoherentErrorPauli;
}

// ---------------------------------------------------------------------------
// MeasurementEnsemble

MeasurementEnsemble MeasurementEnsemble::from_observables(
    const std::vector<std::vector<ComplexMatrix>>& blocks) {
  if (blocks.empty() || blocks.front().empty()) {
    throw DimensionError("from_observables: need at least one block and one observable");
  }
  MeasurementEnsemble ens;
  ens.kind_ = EnsembleKind::kDense;
  ens.n_ = static_cast<Eigen::Index>(blocks.size());
  ens.m_ = static_cast<Eigen::Index>(blocks.front().size());
  ens.d_ = blocks.front().front().rows();
  const Eigen::Index dd = ens.d_ * ens.d_;
  ens.design_.resize(ens.m_, ens.n_ * dd);
  RealVector row(dd);
  for (Eigen::Index k = 0; k < ens.n_; ++k) {
    const auto& list = blocks[static_cast<std::size_t>(k)];
    if (static_cast<Eigen::Index>(list.size()) != ens.m_) {
      throw DimensionError("from_observables: blocks have different observable counts");
    }
    for (Eigen::Index i = 0; i < ens.m_; ++i) {
      const ComplexMatrix& a = list[static_cast<std::size_t>(i)];
      if (a.rows() != ens.d_ || a.cols() != ens.d_) throw DimensionError("from_observables: shape mismatch");
      if (hermiticity_defect(a) > 1e-10) throw std::invalid_argument("from_observables: observable not Hermitian");
      hvec_into(a, row);
      ens.design_.block(i, k * dd, 1, dd) = row.transpose();
    }
  }
  return ens;
}

MeasurementEnsemble MeasurementEnsemble::from_pauli_sums(EnsembleKind kind, int qubits,
                                                         std::vector<std::vector<PauliSum>> terms) {
  if (terms.empty() || terms.front().empty()) {
    throw DimensionError("from_pauli_sums: need at least one block and one observable");
  }
  if (qubits < 1) throw DimensionError("from_pauli_sums: need at least one qubit");
  MeasurementEnsemble ens;
  ens.kind_ = kind;
  ens.qubits_ = qubits;
  ens.n_ = static_cast<Eigen::Index>(terms.size());
  ens.m_ = static_cast<Eigen::Index>(terms.front().size());
  ens.d_ = Eigen::Index{1} << qubits;
  const Eigen::Index dd = ens.d_ * ens.d_;
  ens.design_ = RealMatrix::Zero(ens.m_, ens.n_ * dd);
  RealVector row(dd);
  for (Eigen::Index k = 0; k < ens.n_; ++k) {
    const auto& list = terms[static_cast<std::size_t>(k)];
    if (static_cast<Eigen::Index>(list.size()) != ens.m_) {
      throw DimensionError("from_pauli_sums: blocks have different observable counts");
    }
    for (Eigen::Index i = 0; i < ens.m_; ++i) {
      const PauliSum& sum = list[static_cast<std::size_t>(i)];
      if (sum.empty()) continue;
      hvec_into(dense(sum, ens.d_), row);
      ens.design_.block(i, k * dd, 1, dd) = row.transpose();
    }
  }
  ens.pauli_terms_ = std::move(terms);
  return ens;
}

const PauliSum& MeasurementEnsemble::pauli_terms(Eigen::Index k, Eigen::Index i) const {
  if (pauli_terms_.empty()) throw std::logic_error("pauli_terms: ensemble has no Pauli description");
  return pauli_terms_.at(static_cast<std::size_t>(k)).at(static_cast<std::size_t>(i));
}

ComplexMatrix MeasurementEnsemble::observable(Eigen::Index k, Eigen::Index i) const {
  if (k < 0 || k >= n_ || i < 0 || i >= m_) throw DimensionError("observable: index out of range");
  const Eigen::Index dd = d_ * d_;
  return hmat(design_.block(i, k * dd, 1, dd).transpose(), d_);
}

void MeasurementEnsemble::check_signal(const BlockSignal& x) const {
  if (x.n() != n_ || x.d() != d_) {
    throw DimensionError("measurement: signal has " + std::to_string(x.n()) + " blocks of dim " +
                         std::to_string(x.d()) + ", ensemble expects " + std::to_string(n_) +
                         " of dim " + std::to_string(d_));
  }
}

RealVector MeasurementEnsemble::apply(const BlockSignal& x) const {
  check_signal(x);
  const Eigen::Index dd = d_ * d_;
  RealVector y = RealVector::Zero(m_);
  RealVector coords(dd);
  for (Eigen::Index k = 0; k < n_; ++k) {
    if (x.block(k).squaredNorm() == 0.0) continue;
    hvec_into(x.block(k), coords);
    y.noalias() += design_.middleCols(k * dd, dd) * coords;
  }
  return y;
}

RealVector MeasurementEnsemble::apply_block(Eigen::Index k, const ComplexMatrix& xk) const {
  if (k < 0 || k >= n_) throw DimensionError("apply_block: block index out of range");
  if (xk.rows() != d_ || xk.cols() != d_) throw DimensionError("apply_block: shape mismatch");
  const Eigen::Index dd = d_ * d_;
  return design_.middleCols(k * dd, dd) * hvec(xk);
}

BlockSignal MeasurementEnsemble::adjoint(const RealVector& y) const {
  if (y.size() != m_) {
    throw DimensionError("adjoint: data length " + std::to_string(y.size()) + " != m = " + std::to_string(m_));
  }
  const Eigen::Index dd = d_ * d_;
  const RealVector coords = design_.transpose() * y;
  BlockSignal out(n_, d_);
  for (Eigen::Index k = 0; k < n_; ++k) out.block(k) = hmat(coords.segment(k * dd, dd), d_);
  return out;
}

RealMatrix MeasurementEnsemble::block_responses(const ComplexMatrix& rho) const {
  if (rho.rows() != d_ || rho.cols() != d_) throw DimensionError("block_responses: shape mismatch");
  const Eigen::Index dd = d_ * d_;
  const RealVector coords = hvec(rho);
  RealMatrix out(m_, n_);
  for (Eigen::Index k = 0; k < n_; ++k) out.col(k).noalias() = design_.middleCols(k * dd, dd) * coords;
  return out;
}

MeasurementEnsemble MeasurementEnsemble::combine_blocks(const RealVector& weights) const {
  if (weights.size() != n_) throw DimensionError("combine_blocks: weight count != n");
  const Eigen::Index dd = d_ * d_;
  MeasurementEnsemble out;
  out.kind_ = EnsembleKind::kDense;
  out.n_ = 1;
  out.m_ = m_;
  out.d_ = d_;
  out.qubits_ = qubits_;
  out.design_ = RealMatrix::Zero(m_, dd);
  for (Eigen::Index k = 0; k < n_; ++k) {
    if (weights(k) != 0.0) out.design_.noalias() += weights(k) * design_.middleCols(k * dd, dd);
  }
  return out;
}

MeasurementEnsemble MeasurementEnsemble::select_blocks(const std::vector<Eigen::Index>& blocks) const {
  if (blocks.empty()) throw DimensionError("select_blocks: empty block list");
  const Eigen::Index dd = d_ * d_;
  MeasurementEnsemble out = *this;
  out.n_ = static_cast<Eigen::Index>(blocks.size());
  out.design_.resize(m_, out.n_ * dd);
  out.pauli_terms_.clear();
  for (Eigen::Index j = 0; j < out.n_; ++j) {
    const Eigen::Index k = blocks[static_cast<std::size_t>(j)];
    if (k < 0 || k >= n_) throw DimensionError("select_blocks: block index out of range");
    out.design_.middleCols(j * dd, dd) = design_.middleCols(k * dd, dd);
    if (!pauli_terms_.empty()) out.pauli_terms_.push_back(pauli_terms_[static_cast<std::size_t>(k)]);
  }
  // A subset of a seeded random ensemble is no longer reproducible from the seed.
  if (!has_pauli_terms()) {
    out.kind_ = EnsembleKind::kDense;
    out.seed_.reset();
  }
  return out;
}

MeasurementEnsemble MeasurementEnsemble::scaled(double factor) const {
  MeasurementEnsemble out = *this;
  out.design_ *= factor;
  out.scale_ *= factor;
  for (auto& block : out.pauli_terms_) {
    for (auto& sum : block) {
      for (auto& term : sum) term.weight *= factor;
    }
  }
  return out;
}

nlohmann::json MeasurementEnsemble::to_json() const {
  nlohmann::json j;
  j["schema"] = "blindtomo.ensemble/1";
  j["kind"] = to_string(kind_);
  j["n"] = n_;
  j["m"] = m_;
  j["d"] = d_;
  j["scale"] = scale_;
  if (seed_) j["seed"] = *seed_;
  if (!pauli_terms_.empty()) {
    j["qubits"] = qubits_;
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& block : pauli_terms_) {
      nlohmann::json observables = nlohmann::json::array();
      for (const auto& sum : block) {
        nlohmann::json terms = nlohmann::json::array();
        // Weights are stored relative to the ensemble scale.
        for (const auto& term : sum) terms.push_back({term.weight / scale_, term.string.letters()});
        observables.push_back(std::move(terms));
      }
      blocks.push_back(std::move(observables));
    }
    j["observables"] = std::move(blocks);
  } else if (kind_ == EnsembleKind::kDense || !seed_) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m_; ++i) {
      std::vector<double> row;
      row.reserve(static_cast<std::size_t>(design_.cols()));
      for (Eigen::Index c = 0; c < design_.cols(); ++c) row.push_back(design_(i, c));
      rows.push_back(std::move(row));
    }
    j["kind"] = to_string(EnsembleKind::kDense);
    j["design"] = std::move(rows);
    j["scale"] = 1.0;
  }
  return j;
}

MeasurementEnsemble MeasurementEnsemble::from_json(const nlohmann::json& j) {
  const EnsembleKind kind = ensemble_kind_from_string(j.at("kind").get<std::string>());
  const auto n = j.at("n").get<Eigen::Index>();
  const auto m = j.at("m").get<Eigen::Index>();
  const auto d = j.at("d").get<Eigen::Index>();
  const double scale = j.value("scale", 1.0);
  MeasurementEnsemble ens;
  if (j.contains("observables")) {
    const int qubits = j.at("qubits").get<int>();
    std::vector<std::vector<PauliSum>> terms;
    for (const auto& block : j.at("observables")) {
      std::vector<PauliSum> list;
      for (const auto& sum : block) {
        PauliSum parsed;
        for (const auto& term : sum) {
          parsed.push_back({term.at(0).get<double>(), PauliString(term.at(1).get<std::string>())});
        }
        list.push_back(std::move(parsed));
      }
      terms.push_back(std::move(list));
    }
    ens = from_pauli_sums(kind, qubits, std::move(terms));
    if (j.contains("seed")) ens.seed_ = j.at("seed").get<std::uint64_t>();
  } else if (kind == EnsembleKind::kGue || kind == EnsembleKind::kGaussian) {
    const auto seed = j.at("seed").get<std::uint64_t>();
    ens = kind == EnsembleKind::kGue ? gue_ensemble(n, m, d, seed) : gaussian_ensemble(n, m, d, seed);
  } else if (kind == EnsembleKind::kDense) {
    const auto& rows = j.at("design");
    ens.kind_ = EnsembleKind::kDense;
    ens.n_ = n;
    ens.m_ = m;
    ens.d_ = d;
    ens.design_.resize(m, n * d * d);
    if (static_cast<Eigen::Index>(rows.size()) != m) throw DimensionError("from_json: design row count != m");
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto row = rows.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != n * d * d) throw DimensionError("from_json: design row length");
      for (Eigen::Index c = 0; c < n * d * d; ++c) ens.design_(i, c) = row[static_cast<std::size_t>(c)];
    }
    return ens;
  } else {
    throw std::invalid_argument("from_json: ensemble kind requires Pauli observables");
  }
  if (ens.n_ != n || ens.m_ != m || ens.d_ != d) throw DimensionError("from_json: dimensions disagree with content");
  return scale == 1.0 ? ens : ens.scaled(scale);
}

// ---------------------------------------------------------------------------
// Generators

namespace {

MeasurementEnsemble random_matrix_ensemble(Eigen::Index n, Eigen::Index m, Eigen::Index d,
                                           std::uint64_t seed, bool complex_entries) {
  RngStream rng(seed);
  std::vector<std::vector<ComplexMatrix>> blocks(static_cast<std::size_t>(n));
  for (auto& list : blocks) {
    list.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      ComplexMatrix b(d, d);
      for (Eigen::Index c = 0; c < d; ++c) {
        for (Eigen::Index r = 0; r < d; ++r) {
          const double re = rng.normal();
          const double im = complex_entries ? rng.normal() : 0.0;
          b(r, c) = Complex(re, im);
        }
      }
      list.push_back(hermitian_part(b));
    }
  }
  return MeasurementEnsemble::from_observables(blocks);
}

}  // namespace

MeasurementEnsemble gue_ensemble(Eigen::Index n, Eigen::Index m, Eigen::Index d, std::uint64_t seed) {
  MeasurementEnsemble ens = random_matrix_ensemble(n, m, d, seed, true);
  ens.kind_ = EnsembleKind::kGue;
  ens.seed_ = seed;
  return ens;
}

MeasurementEnsemble gaussian_ensemble(Eigen::Index n, Eigen::Index m, Eigen::Index d, std::uint64_t seed) {
  MeasurementEnsemble ens = random_matrix_ensemble(n, m, d, seed, false);
  ens.kind_ = EnsembleKind::kGaussian;
  ens.seed_ = seed;
  return ens;
}

MeasurementEnsemble subsampled_pauli_ensemble(Eigen::Index n, Eigen::Index m, int qubits,
                                              std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<std::vector<PauliSum>> terms(static_cast<std::size_t>(n));
  for (auto& list : terms) {
    list.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) list.push_back({{1.0, PauliString::random(qubits, rng)}});
  }
  MeasurementEnsemble ens =
      MeasurementEnsemble::from_pauli_sums(EnsembleKind::kSubsampledPauli, qubits, std::move(terms));
  ens.seed_ = seed;
  return ens;
}

MeasurementEnsemble coherent_error_pauli_ensemble(Eigen::Index m, int qubits, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<PauliString> targets;
  targets.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) targets.push_back(PauliString::random(qubits, rng));
  std::vector<std::vector<PauliSum>> terms;
  std::vector<PauliSum> target_block;
  for (const auto& t : targets) target_block.push_back({{1.0, t}});
  terms.push_back(std::move(target_block));
  for (const auto& [from, to] : coherent_error_pairs()) {
    std::vector<PauliSum> block;
    for (const auto& t : targets) block.push_back(replace_one_letter(t, from, to));
    terms.push_back(std::move(block));
  }
  MeasurementEnsemble ens =
      MeasurementEnsemble::from_pauli_sums(EnsembleKind::kCoherentErrorPauli, qubits, std::move(terms));
  ens.seed_ = seed;
  return ens;
}

RealVector add_shot_noise(const RealVector& y, EnsembleKind kind, const NoiseModel& noise,
                          RngStream& rng) {
  if (noise.kind == NoiseModel::Kind::kNone) return y;
  if (!is_pauli_kind(kind)) {
    throw UnsupportedNoiseError("shot noise is only defined for Pauli ensembles, got " + to_string(kind));
  }
  if (noise.samples < 1) throw std::invalid_argument("shot noise: need at least one sample");
  const double samples = static_cast<double>(noise.samples);
  RealVector out = y;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double c = std::clamp(y(i), -1.0, 1.0);
    if (noise.exact_binomial) {
      // Outcomes are +-1 with P(+1) = (1 + c)/2; the estimate is the sample mean.
      std::binomial_distribution<std::uint64_t> counts(noise.samples, 0.5 * (1.0 + c));
      const double mean = 2.0 * static_cast<double>(counts(rng)) / samples - 1.0;
      out(i) = y(i) + (mean - c);
    } else {
      out(i) = y(i) + std::sqrt((1.0 - c * c) / samples) * rng.normal();
    }
  }
  return out;
}

}  // namespace blindtomo

#include "nmf/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace gccnmf {

void Dictionary::validate() const {
  require(atoms.rows() > 0 && atoms.cols() > 0, ErrorCode::kInvariantViolation,
          "dictionary is empty");
  require(bins() == layout.bins(), ErrorCode::kInvariantViolation,
          "dictionary has " + std::to_string(bins()) + " bins but frame size " +
              std::to_string(layout.frame_size) + " implies " +
              std::to_string(layout.bins()));
  for (Eigen::Index d = 0; d < atoms.cols(); ++d) {
    double sum = 0.0;
    for (Eigen::Index f = 0; f < atoms.rows(); ++f) {
      const float x = atoms(f, d);
      require(std::isfinite(x) && x >= 0.0f, ErrorCode::kInvariantViolation,
              "atom " + std::to_string(d) + " has a negative or non-finite entry");
      sum += x;
    }
    require(std::abs(sum - 1.0) <= 1e-6, ErrorCode::kInvariantViolation,
            "atom " + std::to_string(d) + " is not L1-normalized (sum " +
                std::to_string(sum) + ")");
  }
}

double kl_divergence(const Matrix& v, const Matrix& lambda) {
  require(v.rows() == lambda.rows() && v.cols() == lambda.cols(),
          ErrorCode::kInvalidInput, "kl_divergence: shape mismatch");
  double total = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double x = v(i, j);
      const double y = std::max(lambda(i, j), kEps);
      if (x > 0.0) total += x * (std::log(x) - std::log(y));
      total += y - x;
    }
  }
  return total;
}

void update_activations(const Matrix& w, Matrix& h, const Matrix& v) {
  require(w.rows() == v.rows() && w.cols() == h.rows() && h.cols() == v.cols(),
          ErrorCode::kInvalidInput, "update_activations: shape mismatch");
  Matrix ratio(v.rows(), v.cols());
  ratio.noalias() = w * h;
  ratio = v.array() / (ratio.array() + kEps);
  Matrix numer(h.rows(), h.cols());
  numer.noalias() = w.transpose() * ratio;
  const Eigen::VectorXd denom = w.colwise().sum().transpose().array() + kEps;
  h.array() *= numer.array().colwise() / denom.array();
}

void update_dictionary(Matrix& w, const Matrix& h, const Matrix& v) {
  require(w.rows() == v.rows() && w.cols() == h.rows() && h.cols() == v.cols(),
          ErrorCode::kInvalidInput, "update_dictionary: shape mismatch");
  Matrix ratio(v.rows(), v.cols());
  ratio.noalias() = w * h;
  ratio = v.array() / (ratio.array() + kEps);
  Matrix numer(w.rows(), w.cols());
  numer.noalias() = ratio * h.transpose();
  const Eigen::RowVectorXd denom = h.rowwise().sum().transpose().array() + kEps;
  w.array() *= numer.array().rowwise() / denom.array();
}

void normalize_dictionary(Matrix& w, Matrix& h, Rng& rng) {
  require(w.cols() == h.rows(), ErrorCode::kInvalidInput,
          "normalize_dictionary: shape mismatch");
  for (Eigen::Index d = 0; d < w.cols(); ++d) {
    double norm = w.col(d).sum();
    if (norm < kEps) {
      for (Eigen::Index f = 0; f < w.rows(); ++f) w(f, d) = uniform_open_closed(rng);
      norm = w.col(d).sum();
    }
    w.col(d) /= norm;
    h.row(d) *= norm;
  }
}

Matrix sample_training_frames(const Matrix& speech, const Matrix& noise,
                              std::size_t count, std::uint64_t seed) {
  require(count % 2 == 0 && count > 0, ErrorCode::kInvalidParameter,
          "training frame count must be even and positive");
  require(speech.cols() > 0, ErrorCode::kEmptyInput, "speech frame pool is empty");
  require(noise.cols() > 0, ErrorCode::kEmptyInput, "noise frame pool is empty");
  require(speech.rows() == noise.rows(), ErrorCode::kInvalidInput,
          "speech and noise frames differ in bin count");
  Rng rng(seed);
  const std::size_t half = count / 2;
  std::vector<std::pair<const Matrix*, Eigen::Index>> picks;
  picks.reserve(count);
  for (std::size_t i = 0; i < half; ++i)
    picks.emplace_back(&speech, static_cast<Eigen::Index>(
                                    uniform_index(rng, speech.cols())));
  for (std::size_t i = 0; i < half; ++i)
    picks.emplace_back(&noise, static_cast<Eigen::Index>(
                                   uniform_index(rng, noise.cols())));
  // Fisher-Yates with the portable index draw.
  for (std::size_t i = count - 1; i > 0; --i)
    std::swap(picks[i], picks[uniform_index(rng, i + 1)]);
  Matrix out(speech.rows(), static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i)
    out.col(static_cast<Eigen::Index>(i)) = picks[i].first->col(picks[i].second);
  return out;
}

Factorization factorize(const Matrix& v, std::size_t atoms, int iterations,
                        std::uint64_t seed, const ProgressFn& progress) {
  require(atoms >= 1, ErrorCode::kInvalidParameter, "atom count must be >= 1");
  require(iterations >= 1, ErrorCode::kInvalidParameter, "iterations must be >= 1");
  require(v.cols() >= 1 && v.rows() >= 1, ErrorCode::kEmptyInput,
          "training matrix has no frames");
  require((v.array() >= 0.0).all() && v.allFinite(), ErrorCode::kInvalidInput,
          "training matrix must be finite and nonnegative");
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(atoms);
  Factorization out;
  out.w.resize(v.rows(), d);
  out.h.resize(d, v.cols());
  for (Eigen::Index j = 0; j < out.w.cols(); ++j)
    for (Eigen::Index i = 0; i < out.w.rows(); ++i) out.w(i, j) = uniform_open_closed(rng);
  for (Eigen::Index j = 0; j < out.h.cols(); ++j)
    for (Eigen::Index i = 0; i < out.h.rows(); ++i) out.h(i, j) = uniform_open_closed(rng);

  Matrix lambda(v.rows(), v.cols());
  out.kl_trace.reserve(static_cast<std::size_t>(iterations));
  for (int it = 0; it < iterations; ++it) {
    update_activations(out.w, out.h, v);
    update_dictionary(out.w, out.h, v);
    normalize_dictionary(out.w, out.h, rng);
    lambda.noalias() = out.w * out.h;
    const double kl = kl_divergence(v, lambda);
    out.kl_trace.push_back(kl);
    if (progress) progress(it + 1, kl);
  }
  return out;
}

namespace {

Dictionary wrap(const Matrix& w, const DictionaryLayout& layout,
                TrainingProvenance provenance) {
  require(static_cast<std::size_t>(w.rows()) == layout.bins(),
          ErrorCode::kConfigMismatch,
          "training frames have " + std::to_string(w.rows()) +
              " bins, layout expects " + std::to_string(layout.bins()));
  Dictionary dict;
  dict.atoms = w.cast<float>();
  // Re-normalize after rounding to float32.
  for (Eigen::Index d = 0; d < dict.atoms.cols(); ++d) {
    const double norm = dict.atoms.col(d).cast<double>().sum();
    dict.atoms.col(d) = (dict.atoms.col(d).cast<double>() / norm).cast<float>();
  }
  dict.layout = layout;
  dict.provenance = std::move(provenance);
  return dict;
}

}  // namespace

Dictionary pretrain_dictionary(const Matrix& v_train, std::size_t atoms,
                               int iterations, std::uint64_t seed,
                               const DictionaryLayout& layout,
                               const ProgressFn& progress) {
  Factorization fac = factorize(v_train, atoms, iterations, seed, progress);
  TrainingProvenance prov;
  prov.method = "nmf";
  prov.seed = seed;
  prov.iterations = iterations;
  prov.train_frames = static_cast<std::size_t>(v_train.cols());
  return wrap(fac.w, layout, prov);
}

Dictionary copy_to_train(const Matrix& v_train, std::size_t atoms,
                         std::uint64_t seed, const DictionaryLayout& layout,
                         bool with_replacement) {
  require(atoms >= 1, ErrorCode::kInvalidParameter, "atom count must be >= 1");
  require(v_train.cols() >= 1, ErrorCode::kEmptyInput, "training matrix has no frames");
  std::vector<Eigen::Index> usable;
  for (Eigen::Index t = 0; t < v_train.cols(); ++t)
    if (v_train.col(t).sum() > kEps) usable.push_back(t);
  require(!usable.empty(), ErrorCode::kEmptyInput, "all training frames are zero");
  Rng rng(seed);
  Matrix w(v_train.rows(), static_cast<Eigen::Index>(atoms));
  if (with_replacement) {
    for (std::size_t d = 0; d < atoms; ++d)
      w.col(static_cast<Eigen::Index>(d)) = v_train.col(usable[uniform_index(rng, usable.size())]);
  } else {
    require(atoms <= usable.size(), ErrorCode::kInvalidParameter,
            "cannot draw more atoms than non-zero frames without replacement");
    for (std::size_t i = usable.size() - 1; i > 0; --i)
      std::swap(usable[i], usable[uniform_index(rng, i + 1)]);
    for (std::size_t d = 0; d < atoms; ++d)
      w.col(static_cast<Eigen::Index>(d)) = v_train.col(usable[d]);
  }
  for (Eigen::Index d = 0; d < w.cols(); ++d) w.col(d) /= w.col(d).sum();
  TrainingProvenance prov;
  prov.method = "copy";
  prov.seed = seed;
  prov.iterations = 0;
  prov.train_frames = static_cast<std::size_t>(v_train.cols());
  return wrap(w, layout, prov);
}

template <typename Real>
void infer_activations(const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& w,
                       const Eigen::Matrix<Real, Eigen::Dynamic, 1>& atom_sums,
                       const Eigen::Matrix<Real, Eigen::Dynamic, 1>& v,
                       int iterations, Rng& rng,
                       Eigen::Matrix<Real, Eigen::Dynamic, 1>& h) {
  using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  h.resize(w.cols());
  for (Eigen::Index d = 0; d < h.size(); ++d)
    h[d] = static_cast<Real>(uniform_open_closed(rng));
  Vec ratio(w.rows());
  Vec numer(w.cols());
  const Real eps = static_cast<Real>(kEps);
  for (int it = 0; it < iterations; ++it) {
    ratio.noalias() = w * h;
    ratio = v.array() / (ratio.array() + eps);
    numer.noalias() = w.transpose() * ratio;
    h.array() *= numer.array() / (atom_sums.array() + eps);
  }
}

template void infer_activations<float>(const Eigen::MatrixXf&, const Eigen::VectorXf&,
                                       const Eigen::VectorXf&, int, Rng&,
                                       Eigen::VectorXf&);
template void infer_activations<double>(const Eigen::MatrixXd&, const Eigen::VectorXd&,
                                        const Eigen::VectorXd&, int, Rng&,
                                        Eigen::VectorXd&);

Eigen::VectorXd infer_frame_coefficients(const Dictionary& dict,
                                         const Eigen::VectorXd& v, int iterations,
                                         std::uint64_t seed) {
  require(iterations >= 0, ErrorCode::kInvalidParameter, "iterations must be >= 0");
  require(static_cast<std::size_t>(v.size()) == dict.bins(), ErrorCode::kInvalidInput,
          "frame bin count does not match the dictionary");
  const Eigen::MatrixXd w = dict.atoms.cast<double>();
  const Eigen::VectorXd sums = w.colwise().sum().transpose();
  Rng rng(seed);
  Eigen::VectorXd h;
  infer_activations<double>(w, sums, v, iterations, rng, h);
  return h;
}

}  // namespace gccnmf

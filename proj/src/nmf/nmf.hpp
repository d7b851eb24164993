#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "nmf/dictionary.hpp"
#include "nmf/random.hpp"

namespace gccnmf {

using Matrix = Eigen::MatrixXd;

// Generalized KL divergence sum(V log(V / L) + L - V) with 0 log 0 = 0.
// Entries of `lambda` are floored at kEps.
double kl_divergence(const Matrix& v, const Matrix& lambda);

// H <- H * (W^T (V / WH)) / (W^T 1)
void update_activations(const Matrix& w, Matrix& h, const Matrix& v);
// W <- W * ((V / WH) H^T) / (1 H^T)
void update_dictionary(Matrix& w, const Matrix& h, const Matrix& v);

// Scales every column of W to unit L1 norm and the matching row of H by the
// removed factor, leaving WH unchanged. Columns with norm below kEps are
// reinitialized uniform on (0, 1] from `rng` first.
void normalize_dictionary(Matrix& w, Matrix& h, Rng& rng);

// Draws count / 2 columns with replacement from each pool and returns them in
// shuffled order. count must be even and both pools non-empty.
Matrix sample_training_frames(const Matrix& speech, const Matrix& noise,
                              std::size_t count, std::uint64_t seed);

struct Factorization {
  Matrix w;
  Matrix h;
  std::vector<double> kl_trace;  // KL(V, WH) after each full round
};

using ProgressFn = std::function<void(int iteration, double kl)>;

// Plain KL-NMF: uniform (0, 1] initialization, then `iterations` rounds of
// activation update, dictionary update and normalization.
Factorization factorize(const Matrix& v, std::size_t atoms, int iterations,
                        std::uint64_t seed, const ProgressFn& progress = {});

// factorize() and keep only the dictionary.
Dictionary pretrain_dictionary(const Matrix& v_train, std::size_t atoms,
                               int iterations, std::uint64_t seed,
                               const DictionaryLayout& layout,
                               const ProgressFn& progress = {});

// Atoms copied from randomly chosen (non-zero) training frames, L1-normalized.
Dictionary copy_to_train(const Matrix& v_train, std::size_t atoms,
                         std::uint64_t seed, const DictionaryLayout& layout,
                         bool with_replacement = true);

// Activation inference for one magnitude frame with the dictionary fixed:
// uniform (0, 1] start, then `iterations` updates of the activation rule.
// `atom_sums` holds the column sums of `w`.
template <typename Real>
void infer_activations(const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& w,
                       const Eigen::Matrix<Real, Eigen::Dynamic, 1>& atom_sums,
                       const Eigen::Matrix<Real, Eigen::Dynamic, 1>& v,
                       int iterations, Rng& rng,
                       Eigen::Matrix<Real, Eigen::Dynamic, 1>& h);

// Convenience overload for a whole dictionary.
Eigen::VectorXd infer_frame_coefficients(const Dictionary& dict,
                                         const Eigen::VectorXd& v,
                                         int iterations, std::uint64_t seed);

}  // namespace gccnmf

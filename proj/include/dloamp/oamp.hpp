// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "dloamp/numerics.hpp"
#include "dloamp/ofdm.hpp"

namespace dloamp {

struct OampConfig {
  int iterations = 10;
  double beta = 0.5;           // smoothing weight for the error-variance EMA
  double epsilon = 1e-9;       // lower clamp for v^2 and tau^2
  double initial_v_sq = 1.0;   // smoothed error variance before the first layer
  std::vector<double> alphabet;  // ascending real sub-alphabet of the constellation
};

/// Real-valued detection problem y = H u + w with per-real-component noise
/// variance noise_var / 2 (noise_var is the total complex variance).
struct DetectionModel {
  RMat h;  // 2N x 2N
  RVec y;  // 2N
  double noise_var = 0.0;
};

/// Per-iteration scalars and vectors, kept for inspection.
struct OampState {
  RVec u_hat;  // estimate produced by this iteration's denoiser
  RVec r;      // linear estimate fed to the denoiser
  double v_sq = 0.0;
  double v_sq_smoothed = 0.0;
  double tau_sq = 0.0;
};

/// y_hat = y - A_est q_prev with A_est the cut-off matrix of the estimated taps.
CVec isi_cancel(const CVec& y, const CVec& taps_est, const CVec& q_prev);

/// First `taps` entries of the inverse (non-unitary) DFT of a frequency-domain
/// channel estimate; the rest is discarded.
CVec estimated_taps(const CVec& h_freq_est, int taps);

/// Assemble the real model: H_bar = (H_est - A_est) F^H, embedded as
/// [Re -Im; Im Re]; y stacked.
DetectionModel build_detection_model(const CVec& y_hat, const CVec& taps_est, double noise_var);

/// De-correlated linear estimator and its complement:
///   W = (2N / tr(W_hat H)) W_hat,  W_hat = v^2 H^T (v^2 H H^T + (sigma^2/2) I)^{-1},
///   B = I - W H.
/// Direct dense evaluation; the detector loop uses the factorized form below.
std::pair<RMat, RMat> oamp_w(const RMat& h, double v_sq, double noise_var);

/// v_l^2 = (||y - H u||^2 - N sigma_w^2) / tr(H^T H), clamped at epsilon.
/// N counts complex samples (= y.size()/2).
double oamp_v_sq(const RVec& y, const RMat& h, const RVec& u_hat, double noise_var,
                 double epsilon);

/// tau_l^2 = tr(B B^T) v_sm^2 / (2N) + tr(W W^T) sigma_w^2 / (4N), clamped.
double oamp_tau_sq(const RMat& b, const RMat& w, double v_sq_smoothed, double noise_var,
                   double epsilon);

/// Elementwise posterior mean under a uniform prior on the alphabet and
/// Gaussian noise of variance tau_sq; computed with max-subtraction.
RVec posterior_mean(const RVec& r, double tau_sq, const std::vector<double>& alphabet);

/// SVD-factorized model: h = u_basis * diag(s) * v_basis^T.  Every W_l, B_l
/// trace and product in the iteration reduces to diagonal arithmetic on s.
struct SvdModel {
  RMat u_basis, v_basis;
  RVec s;
  RVec y;
  double noise_var = 0.0;
  double tr_hth = 0.0;  // sum of s^2
  Eigen::Index dim() const { return y.size(); }
};

/// General factorization of a real model (dense SVD).
SvdModel factorize(const DetectionModel& model);

/// Fast factorization through the complex N x N matrix: Hermitian
/// eigendecomposition of H H^H, singular values duplicated across the real
/// embedding.  Exact for block-structured models.
SvdModel factorize_complex(const CMat& h_bar, const RVec& y, double noise_var);

namespace detail {
// Diagonal form of one iteration's estimator, scaled so tr(W H) = 2N:
// d holds c*d_i, ds the diagonal of W H, tr_ww = tr(W W^T).
struct IterMats {
  RVec d;
  double tr_ww = 0.0;
  RVec ds;
};
IterMats iteration_mats(const SvdModel& m, double v_sq_smoothed);
}  // namespace detail

struct OampResult {
  RVec u_hat;
  std::vector<OampState> trajectory;
};

OampResult oamp_detect(const SvdModel& model, const OampConfig& cfg);
OampResult oamp_detect(const DetectionModel& model, const OampConfig& cfg);

/// Receiver front end shared by the OAMP-family receivers: estimated taps,
/// ISI cancellation, model assembly, factorization.
SvdModel prepare_detection(const RxFrame& rx, const CVec& h_freq_est, int taps);

}  // namespace dloamp

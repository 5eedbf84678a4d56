// SPDX-License-Identifier: Apache-2.0
#include "dloamp/oamp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dloamp {

CVec isi_cancel(const CVec& y, const CVec& taps_est, const CVec& q_prev) {
  if (y.size() != q_prev.size()) throw std::invalid_argument("isi_cancel: length mismatch");
  if (taps_est.size() > y.size())
    throw std::invalid_argument("isi_cancel: more taps than samples");
  return y - apply_channel_cutoff(taps_est, q_prev);
}

CVec estimated_taps(const CVec& h_freq_est, int taps) {
  const int n = static_cast<int>(h_freq_est.size());
  if (taps > n) throw std::invalid_argument("estimated_taps: more taps than subcarriers");
  // g = non-unitary DFT of the taps, so taps = ifft_unitary(g) / sqrt(N).
  const CVec t = ifft_unitary(h_freq_est) / std::sqrt(static_cast<double>(n));
  return t.head(taps);
}

DetectionModel build_detection_model(const CVec& y_hat, const CVec& taps_est,
                                     double noise_var) {
  const int n = static_cast<int>(y_hat.size());
  ChannelRealization est;
  est.taps = taps_est;
  const CMat h1 = build_cyclic_H(est, n) - build_cutoff_A(est, n);
  const CMat h_bar = h1 * dft_matrix_unitary(n).adjoint();
  DetectionModel model;
  model.h = complex_to_real_mat(h_bar);
  model.y = stack_vec(y_hat);
  model.noise_var = noise_var;
  return model;
}

std::pair<RMat, RMat> oamp_w(const RMat& h, double v_sq, double noise_var) {
  const Eigen::Index dim = h.rows();
  RMat inner = v_sq * (h * h.transpose());
  inner.diagonal().array() += noise_var / 2.0;
  Eigen::LLT<RMat> llt(inner);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("oamp_w: singular inner matrix (v_sq and noise_var both zero?)");
  const RMat w_hat = v_sq * h.transpose() * llt.solve(RMat::Identity(dim, dim));
  const double tr = (w_hat * h).trace();
  if (!(std::abs(tr) > 0.0)) throw std::runtime_error("oamp_w: zero trace normalization");
  const RMat w = (static_cast<double>(dim) / tr) * w_hat;
  return {w, RMat::Identity(dim, dim) - w * h};
}

double oamp_v_sq(const RVec& y, const RMat& h, const RVec& u_hat, double noise_var,
                 double epsilon) {
  const double resid = (y - h * u_hat).squaredNorm();
  const double n_complex = static_cast<double>(y.size()) / 2.0;
  const double tr_hth = h.squaredNorm();
  return std::max((resid - n_complex * noise_var) / tr_hth, epsilon);
}

double oamp_tau_sq(const RMat& b, const RMat& w, double v_sq_smoothed, double noise_var,
                   double epsilon) {
  const double dim = static_cast<double>(b.rows());
  const double tau =
      b.squaredNorm() * v_sq_smoothed / dim + w.squaredNorm() * noise_var / (2.0 * dim);
  return std::max(tau, epsilon);
}

RVec posterior_mean(const RVec& r, double tau_sq, const std::vector<double>& alphabet) {
  if (alphabet.empty()) throw std::invalid_argument("posterior_mean: empty alphabet");
  if (!(tau_sq > 0.0)) throw std::invalid_argument("posterior_mean: tau_sq must be positive");
  RVec out(r.size());
  const double inv = 1.0 / (2.0 * tau_sq);
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    double e_max = -std::numeric_limits<double>::infinity();
    for (double a : alphabet) {
      const double e = -(r(i) - a) * (r(i) - a) * inv;
      if (e > e_max) e_max = e;
    }
    double num = 0.0, den = 0.0;
    for (double a : alphabet) {
      const double wgt = std::exp(-(r(i) - a) * (r(i) - a) * inv - e_max);
      num += a * wgt;
      den += wgt;
    }
    out(i) = num / den;
  }
  return out;
}

SvdModel factorize(const DetectionModel& model) {
  Eigen::BDCSVD<RMat> svd(model.h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdModel out;
  out.u_basis = svd.matrixU();
  out.v_basis = svd.matrixV();
  out.s = svd.singularValues();
  out.y = model.y;
  out.noise_var = model.noise_var;
  out.tr_hth = out.s.squaredNorm();
  return out;
}

SvdModel factorize_complex(const CMat& h_bar, const RVec& y, double noise_var) {
  const Eigen::Index n = h_bar.rows();
  if (y.size() != 2 * n) throw std::invalid_argument("factorize_complex: length mismatch");
  Eigen::SelfAdjointEigenSolver<CMat> es(h_bar * h_bar.adjoint());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("factorize_complex: eigensolver failed");
  const RVec s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMat u = es.eigenvectors();
  CMat v = h_bar.adjoint() * u;
  const double s_floor = s.maxCoeff() * 1e-14;
  for (Eigen::Index i = 0; i < n; ++i) {
    // a column with s ~ 0 contributes nothing downstream; leave it unscaled
    if (s(i) > s_floor) v.col(i) /= s(i);
  }
  SvdModel out;
  out.u_basis = complex_to_real_mat(u);
  out.v_basis = complex_to_real_mat(v);
  out.s.resize(2 * n);
  out.s.head(n) = s;
  out.s.tail(n) = s;
  out.y = y;
  out.noise_var = noise_var;
  out.tr_hth = out.s.squaredNorm();
  return out;
}

namespace detail {

// d_i = v_sm s_i / (v_sm s_i^2 + sigma^2/2), then scaled so tr(W H) = 2N.
IterMats iteration_mats(const SvdModel& m, double v_sq_smoothed) {
  const Eigen::Index dim = m.dim();
  RVec d(dim);
  double tr_wh = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double den = v_sq_smoothed * m.s(i) * m.s(i) + m.noise_var / 2.0;
    if (!(den > 0.0)) {
      if (m.s(i) == 0.0) {
        d(i) = 0.0;
        continue;
      }
      throw std::runtime_error("oamp: singular inner matrix (v_sq and noise_var both zero?)");
    }
    d(i) = v_sq_smoothed * m.s(i) / den;
    tr_wh += d(i) * m.s(i);
  }
  if (!(tr_wh > 0.0)) throw std::runtime_error("oamp: zero trace normalization");
  const double c = static_cast<double>(dim) / tr_wh;
  IterMats mats;
  mats.d = c * d;
  mats.tr_ww = mats.d.squaredNorm();
  mats.ds = mats.d.cwiseProduct(m.s);
  return mats;
}

}  // namespace detail

OampResult oamp_detect(const SvdModel& model, const OampConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("oamp_detect: need at least 1 iteration");
  if (cfg.alphabet.empty()) throw std::invalid_argument("oamp_detect: empty alphabet");
  const Eigen::Index dim = model.dim();
  const double n_complex = static_cast<double>(dim) / 2.0;

  OampResult res;
  res.trajectory.reserve(static_cast<size_t>(cfg.iterations));
  RVec u = RVec::Zero(dim);
  double v_sm = cfg.initial_v_sq;

  for (int l = 0; l < cfg.iterations; ++l) {
    const RVec z = model.y - model.u_basis * model.s.cwiseProduct(model.v_basis.transpose() * u).eval();
    const double v_sq =
        std::max((z.squaredNorm() - n_complex * model.noise_var) / model.tr_hth, cfg.epsilon);
    v_sm = (1.0 - cfg.beta) * v_sm + cfg.beta * v_sq;

    const auto mats = detail::iteration_mats(model, v_sm);
    const RVec r = u + model.v_basis * mats.d.cwiseProduct(model.u_basis.transpose() * z).eval();

    double tr_bb = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double e = 1.0 - mats.ds(i);
      tr_bb += e * e;
    }
    const double tau_sq = std::max(
        tr_bb * v_sm / static_cast<double>(dim) +
            mats.tr_ww * model.noise_var / (2.0 * static_cast<double>(dim)),
        cfg.epsilon);

    u = posterior_mean(r, tau_sq, cfg.alphabet);
    res.trajectory.push_back({u, r, v_sq, v_sm, tau_sq});
  }
  res.u_hat = u;
  return res;
}

OampResult oamp_detect(const DetectionModel& model, const OampConfig& cfg) {
  return oamp_detect(factorize(model), cfg);
}

SvdModel prepare_detection(const RxFrame& rx, const CVec& h_freq_est, int taps) {
  const int n = static_cast<int>(rx.y_data.size());
  const CVec taps_est = estimated_taps(h_freq_est, taps);
  const CVec y_hat = isi_cancel(rx.y_data, taps_est, rx.q_prev_data);
  ChannelRealization est;
  est.taps = taps_est;
  const CMat h1 = build_cyclic_H(est, n) - build_cutoff_A(est, n);
  const CMat h_bar = h1 * dft_matrix_unitary(n).adjoint();
  return factorize_complex(h_bar, stack_vec(y_hat), rx.noise_var);
}

}  // namespace dloamp

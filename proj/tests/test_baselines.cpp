// SPDX-License-Identifier: Apache-2.0
#include "dloamp/baselines.hpp"

#include <cmath>
#include <random>

#include "dloamp/oamp.hpp"
#include "test_util.hpp"

using namespace dloamp;

namespace {

std::mt19937_64 rng(919);

CVec random_cvec(int n) {
  std::normal_distribution<double> g;
  CVec x(n);
  for (int i = 0; i < n; ++i) x(i) = Cplx(g(rng), g(rng));
  return x;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

void test_mmse_zero_noise_is_zf() {
  const CVec y = random_cvec(6), h = random_cvec(6);
  const CVec x = mmse_equalize_per_subcarrier(y, h, 0.0);
  for (int n = 0; n < 6; ++n) T_CHECK(std::abs(x(n) - y(n) / h(n)) < 1e-12);
}

void test_mmse_unit_channel_unit_noise() {
  const CVec y = random_cvec(4);
  const CVec x = mmse_equalize_per_subcarrier(y, CVec::Ones(4), 1.0);
  T_CHECK((x - 0.5 * y).norm() < 1e-14);
}

void test_mmse_scalar_hand_case() {
  CVec y(1), h(1);
  y(0) = Cplx(2.0, -1.0);
  h(0) = Cplx(0.5, 0.5);
  const double s2 = 0.3;
  const Cplx want = std::conj(h(0)) * y(0) / (std::norm(h(0)) + s2);
  T_CHECK(std::abs(mmse_equalize_per_subcarrier(y, h, s2)(0) - want) < 1e-15);
}

void test_ml_noiseless_exact() {
  const Constellation c = make_constellation(16);
  const auto bits = random_bits(64, 3);
  const CVec u = qam_modulate(bits, c);
  const CVec h = random_cvec(u.size());
  const CVec y = h.cwiseProduct(u);
  const CVec got = ml_per_subcarrier(y, h, c);
  T_CHECK(qam_hard_demod(got, c) == bits);
}

// algebraic equivalence: scalar ML equals zero-forcing plus nearest point
void test_ml_equals_zf_nearest() {
  const Constellation c = make_constellation(16);
  for (int trial = 0; trial < 200; ++trial) {
    const CVec y = random_cvec(1);
    CVec h = random_cvec(1);
    if (std::abs(h(0)) < 0.1) h(0) += Cplx(0.5, 0.0);
    const CVec ml = ml_per_subcarrier(y, h, c);
    CVec zf(1);
    zf(0) = y(0) / h(0);
    const auto zf_bits = qam_hard_demod(zf, c);
    T_CHECK(qam_hard_demod(ml, c) == zf_bits);
  }
}

void test_ml_zero_channel_tie_rule() {
  const Constellation c = make_constellation(16);
  CVec y(1), h(1);
  y(0) = Cplx(0.4, -0.2);
  h(0) = Cplx(0.0, 0.0);
  T_CHECK(std::abs(ml_per_subcarrier(y, h, c)(0) - c.points[0]) == 0.0);
}

// on QPSK scalar channels MMSE-plus-slicer and ML decide identically
void test_qpsk_mmse_ml_decision_equality() {
  const Constellation c = make_constellation(4);
  for (int trial = 0; trial < 300; ++trial) {
    const CVec y = random_cvec(1);
    CVec h = random_cvec(1);
    if (std::abs(h(0)) < 0.05) continue;
    const auto ml_bits = qam_hard_demod(ml_per_subcarrier(y, h, c), c);
    const auto mmse_bits =
        qam_hard_demod(mmse_equalize_per_subcarrier(y, h, 0.7), c);
    T_CHECK(ml_bits == mmse_bits);
  }
}

void test_cp_perfect_csi_no_noise() {
  const int n = 16;
  const Constellation c = make_constellation(64);
  const CVec pilot = make_pilot_symbol(n);
  const auto bits = random_bits(static_cast<size_t>(n * 6), 5);
  const OfdmFrame frame = make_frame(bits, c, pilot);
  const auto ch = draw_taps(exp_pdp(5, 2.0), 6);
  const auto got =
      detect_with_cp(frame, ch, 400.0, CpEstimator::Perfect, CpDetector::Ml, c, 7);
  T_CHECK(got == bits);
}

void test_cp_ls_estimator_no_noise() {
  const int n = 16;
  const Constellation c = make_constellation(16);
  const CVec pilot = make_pilot_symbol(n);
  const auto bits = random_bits(static_cast<size_t>(n * 4), 8);
  const OfdmFrame frame = make_frame(bits, c, pilot);
  const auto ch = draw_taps(exp_pdp(4, 2.0), 9);
  const auto got = detect_with_cp(frame, ch, 400.0, CpEstimator::Ls, CpDetector::Mmse, c, 10);
  T_CHECK(got == bits);
}

void test_cp_too_short_rejected() {
  const int n = 4;
  const Constellation c = make_constellation(4);
  const CVec pilot = make_pilot_symbol(n);
  const auto bits = random_bits(static_cast<size_t>(n * 2), 11);
  const OfdmFrame frame = make_frame(bits, c, pilot);
  ChannelRealization ch;
  ch.taps = CVec::Ones(6);
  T_CHECK_THROWS(detect_with_cp(frame, ch, 10.0, CpEstimator::Perfect, CpDetector::Ml, c, 1));
}

// closed-form AWGN oracle: QPSK over a flat channel with perfect CSI
void test_cp_qpsk_awgn_curve() {
  const int n = 64;
  const Constellation c = make_constellation(4);
  const CVec pilot = make_pilot_symbol(n);
  ChannelRealization flat;
  flat.taps = CVec::Ones(1);
  for (double snr_db : {0.0, 6.0}) {
    long errors = 0, bits_total = 0;
    const int frames = 800;  // >= 1e5 bits
    for (int t = 0; t < frames; ++t) {
      const auto bits = random_bits(static_cast<size_t>(2 * n), 3000 + static_cast<std::uint64_t>(t));
      const OfdmFrame frame = make_frame(bits, c, pilot);
      const auto got = detect_with_cp(frame, flat, snr_db, CpEstimator::Perfect,
                                      CpDetector::Ml, c, 4000 + static_cast<std::uint64_t>(t));
      errors += count_bit_errors(got, bits);
      bits_total += static_cast<long>(bits.size());
    }
    const double ber = static_cast<double>(errors) / static_cast<double>(bits_total);
    const double want = q_function(std::sqrt(std::pow(10.0, snr_db / 10.0)));
    const double sigma = std::sqrt(want * (1.0 - want) / static_cast<double>(bits_total));
    T_CHECK(std::abs(ber - want) < 3.0 * sigma);
  }
}

void test_isi_cancel_mmse_single_tap_equals_plain_mmse() {
  const int n = 8;
  const Constellation c = make_constellation(16);
  const CVec pilot = make_pilot_symbol(n);
  const auto bits = random_bits(static_cast<size_t>(n * 4), 21);
  const OfdmFrame frame = make_frame(bits, c, pilot);
  ChannelRealization flat;
  flat.taps = CVec::Ones(1) * Cplx(0.8, 0.3);
  const RxFrame rx = transmit_cp_free(frame, flat, 12.0, 22);
  const CVec g = freq_response(flat, n);
  const auto via_chain = isi_cancel_mmse_detect(rx, g, 1, c);
  const auto via_plain = qam_hard_demod(
      mmse_equalize_per_subcarrier(fft_unitary(rx.y_data), g, rx.noise_var), c);
  T_CHECK(via_chain == via_plain);
}

void test_isi_cancel_mmse_clean_single_tap() {
  const int n = 8;
  const Constellation c = make_constellation(16);
  const CVec pilot = make_pilot_symbol(n);
  const auto bits = random_bits(static_cast<size_t>(n * 4), 23);
  const OfdmFrame frame = make_frame(bits, c, pilot);
  ChannelRealization flat;
  flat.taps = CVec::Ones(1) * Cplx(1.1, -0.2);
  const RxFrame rx = transmit_cp_free(frame, flat, 400.0, 24);
  T_CHECK(isi_cancel_mmse_detect(rx, freq_response(flat, n), 1, c) == bits);
}

// simulation ordering oracle: unhandled ICI leaves the simplified chain
// strictly behind OAMP at high SNR on a long channel
void test_isi_cancel_mmse_worse_than_oamp() {
  const int n = 64;
  const Constellation c = make_constellation(16);
  const CVec pilot = make_pilot_symbol(n);
  const auto pdp = exp_pdp(8, 2.0);
  OampConfig cfg;
  cfg.iterations = 10;
  cfg.alphabet = c.real_levels;

  long err_chain = 0, err_oamp = 0, bits_total = 0;
  const int frames = 500;  // >= 1e5 bits
  for (int t = 0; t < frames; ++t) {
    const std::uint64_t s = 60000 + static_cast<std::uint64_t>(t);
    const auto ch = draw_taps(pdp, s);
    const auto bits = random_bits(static_cast<size_t>(n * 4), s + 1);
    const OfdmFrame frame = make_frame(bits, c, pilot);
    const RxFrame rx = transmit_cp_free(frame, ch, 30.0, s + 2);
    const CVec g = freq_response(ch, n);  // perfect CSI for both
    err_chain += count_bit_errors(isi_cancel_mmse_detect(rx, g, 8, c), bits);
    const SvdModel model = prepare_detection(rx, g, 8);
    err_oamp +=
        count_bit_errors(qam_hard_demod(unstack_vec(oamp_detect(model, cfg).u_hat), c), bits);
    bits_total += static_cast<long>(bits.size());
  }
  T_CHECK(bits_total >= 100000);
  T_CHECK(err_chain > err_oamp);
}

}  // namespace

int main() {
  return testutil::run_tests(
      "baselines",
      {
          {"zero-noise MMSE reduces to zero forcing", test_mmse_zero_noise_is_zf},
          {"unit channel, unit noise halves the output", test_mmse_unit_channel_unit_noise},
          {"scalar MMSE hand evaluation", test_mmse_scalar_hand_case},
          {"noiseless per-subcarrier ML is exact", test_ml_noiseless_exact},
          {"scalar ML equals zero-forcing plus slicing", test_ml_equals_zf_nearest},
          {"zero channel resolves ties to point 0", test_ml_zero_channel_tie_rule},
          {"QPSK: MMSE and ML decide identically", test_qpsk_mmse_ml_decision_equality},
          {"CP receiver with perfect CSI is error free", test_cp_perfect_csi_no_noise},
          {"CP receiver with LS estimate is error free without noise",
           test_cp_ls_estimator_no_noise},
          {"CP shorter than the channel rejected", test_cp_too_short_rejected},
          {"CP QPSK BER matches the closed form", test_cp_qpsk_awgn_curve},
          {"single tap: chain equals plain MMSE", test_isi_cancel_mmse_single_tap_equals_plain_mmse},
          {"single tap, no noise: chain is exact", test_isi_cancel_mmse_clean_single_tap},
          {"ICI left untreated loses to OAMP", test_isi_cancel_mmse_worse_than_oamp},
      });
}

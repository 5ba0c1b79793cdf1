#pragma once

#include <vector>

namespace stg::dsp {

// Normalized biquad, a0 = 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

using Cascade = std::vector<Biquad>;

// Second-order IIR notch (RBJ cookbook) with quality factor q.
Biquad design_notch(double center_hz, double q, double sample_rate);

// Butterworth sections via the bilinear transform with frequency prewarping.
// `order` must be even; order/2 biquads are returned.
Cascade design_butter_lowpass(double cutoff_hz, int order, double sample_rate);
Cascade design_butter_highpass(double cutoff_hz, int order, double sample_rate);

// 4th-order bandpass: 2nd-order highpass at `low` cascaded with 2nd-order
// lowpass at `high`.
Cascade design_bandpass(double low_hz, double high_hz, double sample_rate);

// Causal filtering, transposed direct form II, zero initial state.
std::vector<double> filter(const Cascade& sections, const std::vector<double>& x);

// Zero-phase forward-backward filtering with odd-extension padding and
// steady-state initial conditions scaled by the first padded sample.
std::vector<double> filtfilt(const Cascade& sections, const std::vector<double>& x);

// |H(e^{jw})| at frequency f.
double magnitude_response(const Cascade& sections, double freq_hz, double sample_rate);

}  // namespace stg::dsp

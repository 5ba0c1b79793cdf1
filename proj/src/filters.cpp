#include "stg/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "stg/error.hpp"

namespace stg::dsp {

namespace {

void check_frequency(double f, double sample_rate) {
  if (!(f > 0.0) || !(f < 0.5 * sample_rate)) {
    throw Error(ErrorCode::invalid_argument, "filter frequency must lie in (0, Nyquist)");
  }
}

// Bilinear transform of the analog section 1 / (s^2 + s/q + 1) at prewarped
// cutoff; `highpass` swaps the numerator to s^2.
Biquad butter_section(double cutoff_hz, double q, double sample_rate, bool highpass) {
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
  const double k2 = k * k;
  const double norm = 1.0 / (1.0 + k / q + k2);
  Biquad s;
  if (highpass) {
    s.b0 = norm;
    s.b1 = -2.0 * norm;
    s.b2 = norm;
  } else {
    s.b0 = k2 * norm;
    s.b1 = 2.0 * k2 * norm;
    s.b2 = k2 * norm;
  }
  s.a1 = 2.0 * (k2 - 1.0) * norm;
  s.a2 = (1.0 - k / q + k2) * norm;
  return s;
}

Cascade butter(double cutoff_hz, int order, double sample_rate, bool highpass) {
  check_frequency(cutoff_hz, sample_rate);
  if (order < 2 || order % 2 != 0) throw Error(ErrorCode::invalid_argument, "Butterworth order must be even");
  Cascade out;
  for (int k = 0; k < order / 2; ++k) {
    // Pole pair angles of the analog prototype.
    const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    const double q = 1.0 / (2.0 * std::sin(theta));
    out.push_back(butter_section(cutoff_hz, q, sample_rate, highpass));
  }
  return out;
}

std::vector<double> run_section(const Biquad& s, const std::vector<double>& x, double z1, double z2) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double yi = s.b0 * xi + z1;
    z1 = s.b1 * xi - s.a1 * yi + z2;
    z2 = s.b2 * xi - s.a2 * yi;
    y[i] = yi;
  }
  return y;
}

// State that makes a constant input of 1 produce the steady output dc_gain().
std::pair<double, double> steady_state(const Biquad& s) {
  const double g = s.dc_gain();
  const double z2 = s.b2 - s.a2 * g;
  const double z1 = s.b1 - s.a1 * g + z2;
  return {z1, z2};
}

std::vector<double> filter_with_zi(const Cascade& sections, std::vector<double> x) {
  if (x.empty()) return x;
  for (const auto& s : sections) {
    const auto [z1, z2] = steady_state(s);
    const double x0 = x.front();
    x = run_section(s, x, z1 * x0, z2 * x0);
  }
  return x;
}

}  // namespace

Biquad design_notch(double center_hz, double q, double sample_rate) {
  check_frequency(center_hz, sample_rate);
  if (!(q > 0.0)) throw Error(ErrorCode::invalid_argument, "notch quality factor must be > 0");
  const double w0 = 2.0 * std::numbers::pi * center_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * std::cos(w0) / a0;
  s.b2 = 1.0 / a0;
  s.a1 = -2.0 * std::cos(w0) / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

Cascade design_butter_lowpass(double cutoff_hz, int order, double sample_rate) {
  return butter(cutoff_hz, order, sample_rate, false);
}

Cascade design_butter_highpass(double cutoff_hz, int order, double sample_rate) {
  return butter(cutoff_hz, order, sample_rate, true);
}

Cascade design_bandpass(double low_hz, double high_hz, double sample_rate) {
  if (!(low_hz < high_hz)) throw Error(ErrorCode::invalid_argument, "bandpass needs low < high");
  Cascade c = design_butter_highpass(low_hz, 2, sample_rate);
  const Cascade lp = design_butter_lowpass(high_hz, 2, sample_rate);
  c.insert(c.end(), lp.begin(), lp.end());
  return c;
}

std::vector<double> filter(const Cascade& sections, const std::vector<double>& x) {
  std::vector<double> y = x;
  for (const auto& s : sections) y = run_section(s, y, 0.0, 0.0);
  return y;
}

std::vector<double> filtfilt(const Cascade& sections, const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2 || sections.empty()) return x;
  const std::size_t pad = std::min<std::size_t>(n - 1, 3 * (2 * sections.size() + 1));

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x.front() - x[k]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x.back() - x[n - 1 - k]);

  ext = filter_with_zi(sections, std::move(ext));
  std::reverse(ext.begin(), ext.end());
  ext = filter_with_zi(sections, std::move(ext));
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double magnitude_response(const Cascade& sections, double freq_hz, double sample_rate) {
  const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_rate);
  std::complex<double> h = 1.0;
  for (const auto& s : sections) {
    h *= (s.b0 + s.b1 * z + s.b2 * z * z) / (1.0 + s.a1 * z + s.a2 * z * z);
  }
  return std::abs(h);
}

}  // namespace stg::dsp

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "stg/csv.hpp"
#include "stg/error.hpp"
#include "stg/filters.hpp"
#include "stg/kv_file.hpp"
#include "stg/signal_io.hpp"
#include "test_util.hpp"

using namespace stg;

namespace {

std::vector<double> sine(double freq, double fs, std::size_t n, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs + phase);
  return x;
}

double rms(const std::vector<double>& x, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

Recording small_recording(std::size_t channels, std::size_t samples, double fs, std::uint64_t seed = 1) {
  Rng rng(seed);
  Recording r;
  for (std::size_t c = 0; c < channels; ++c) r.channel_names.push_back("e" + std::to_string(c));
  r.sample_rate = fs;
  r.samples = testutil::random_matrix(channels, samples, rng);
  r.soz_labels.assign(channels, false);
  return r;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected stg::Error");
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("notch kills its center and passes elsewhere") {
  const dsp::Cascade notch{dsp::design_notch(60.0, 30.0, 500.0)};
  CHECK(dsp::magnitude_response(notch, 60.0, 500.0) < 1e-9);
  CHECK(dsp::magnitude_response(notch, 10.0, 500.0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(dsp::magnitude_response(notch, 0.0, 500.0) == doctest::Approx(1.0));
  // -3 dB band is center / Q wide.
  CHECK(dsp::magnitude_response(notch, 61.0, 500.0) == doctest::Approx(std::sqrt(0.5)).epsilon(0.02));
}

TEST_CASE("Butterworth magnitude is 1/sqrt(2) at cutoff") {
  for (int order : {2, 4, 8}) {
    const auto lp = dsp::design_butter_lowpass(40.0, order, 250.0);
    CHECK(lp.size() == static_cast<std::size_t>(order / 2));
    CHECK(dsp::magnitude_response(lp, 40.0, 250.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(dsp::magnitude_response(lp, 0.0, 250.0) == doctest::Approx(1.0));
    const auto hp = dsp::design_butter_highpass(40.0, order, 250.0);
    CHECK(dsp::magnitude_response(hp, 40.0, 250.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(dsp::magnitude_response(hp, 0.0, 250.0) < 1e-12);
  }
  CHECK_THROWS_AS(dsp::design_butter_lowpass(40.0, 3, 250.0), Error);
  CHECK_THROWS_AS(dsp::design_butter_lowpass(200.0, 2, 250.0), Error);
}

TEST_CASE("bandpass passes mid-band and blocks DC") {
  const auto bp = dsp::design_bandpass(0.5, 100.0, 500.0);
  CHECK(bp.size() == 2);
  CHECK(dsp::magnitude_response(bp, 0.0, 500.0) < 1e-12);
  CHECK(dsp::magnitude_response(bp, 10.0, 500.0) == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(dsp::magnitude_response(bp, 240.0, 500.0) < 0.1);
}

TEST_CASE("causal filter impulse response of a pure gain") {
  dsp::Biquad g;
  g.b0 = 2.0;
  const auto y = dsp::filter({g}, {1.0, 0.0, 3.0});
  CHECK(y == std::vector<double>{2.0, 0.0, 6.0});
}

TEST_CASE("filtfilt is zero-phase and squares the magnitude") {
  const double fs = 250.0;
  const auto lp = dsp::design_butter_lowpass(30.0, 4, fs);
  const auto x = sine(10.0, fs, 2000, 0.3);
  const auto y = dsp::filtfilt(lp, x);
  const double gain = std::pow(dsp::magnitude_response(lp, 10.0, fs), 2);
  for (std::size_t i = 200; i < 1800; i += 37) CHECK(y[i] == doctest::Approx(gain * x[i]).epsilon(1e-3));
  CHECK(rms(y, 200, 1800) == doctest::Approx(gain * rms(x, 200, 1800)).epsilon(1e-3));
}

TEST_CASE("filtfilt of a constant through a lowpass stays constant") {
  const auto lp = dsp::design_butter_lowpass(20.0, 8, 250.0);
  const auto y = dsp::filtfilt(lp, std::vector<double>(300, 4.0));
  for (double v : y) CHECK(v == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("key/value files") {
  const auto kv = KeyValueFile::parse("# comment\na = 1\n[learn]\nbeta = 0.25  \nflag = true\nlist = x, y ,z\nempty =\n");
  CHECK(kv.get_int("a", 0) == 1);
  CHECK(kv.get_double("learn.beta", 0.0) == 0.25);
  CHECK(kv.get_bool("learn.flag", false));
  CHECK(kv.get_list("learn.list") == std::vector<std::string>{"x", "y", "z"});
  CHECK(kv.get_list("learn.empty").empty());
  CHECK(kv.get_string("missing", "fb") == "fb");
  CHECK(KeyValueFile::parse(kv.to_string()).values() == kv.values());
  CHECK_THROWS_AS(KeyValueFile::parse("no equals sign\n"), Error);
  CHECK_THROWS_AS(kv.get_int("learn.beta", 0), Error);
}

TEST_CASE("csv number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.875, 0.0}) CHECK(csv::parse_double(csv::format_double(v)) == v);
  CHECK(csv::format_double(-0.0) == "0");
  CHECK_THROWS_AS(csv::parse_double("1.5x"), Error);
  CHECK(csv::split("a,,b") == std::vector<std::string>{"a", "", "b"});
}

TEST_CASE("annotations round-trip") {
  testutil::TempDir dir("ann");
  Annotations a;
  a.onset_sample = 1200;
  a.soz_channels = {"e1", "e3"};
  a.bad_channels = {"e4"};
  a.sample_rate = 500.0;
  a.save(dir / "a.txt");
  const Annotations b = Annotations::load(dir / "a.txt");
  CHECK(b.onset_sample == 1200);
  CHECK(b.soz_channels == a.soz_channels);
  CHECK(b.bad_channels == a.bad_channels);
  REQUIRE(b.sample_rate.has_value());
  CHECK(*b.sample_rate == 500.0);
  csv::write_text(dir / "bad.txt", "soz = e1\n");
  CHECK(code_of([&] { Annotations::load(dir / "bad.txt"); }) == ErrorCode::parse);
}

TEST_CASE("CSV and binary recordings round-trip exactly") {
  testutil::TempDir dir("rec");
  const Recording r = small_recording(4, 50, 500.0);
  Annotations a;
  a.onset_sample = 10;
  a.soz_channels = {"e2"};
  a.sample_rate = 500.0;
  a.save(dir / "ann.txt");

  write_recording_csv(dir / "r.csv", r);
  write_recording_binary(dir / "r.bin", r);
  CHECK(std::filesystem::exists(dir / "r.channels"));
  for (const auto& [file, fmt] : {std::pair{"r.csv", RecordingFormat::csv}, std::pair{"r.bin", RecordingFormat::binary}}) {
    const Recording back = load_recording(dir / file, fmt, dir / "ann.txt");
    CHECK(back.channel_names == r.channel_names);
    CHECK(back.samples == r.samples);
    CHECK(back.sample_rate == 500.0);
    CHECK(back.onset_sample == 10);
    CHECK(back.soz_labels == std::vector<bool>{false, false, true, false});
  }
  CHECK(format_from_extension("x.csv") == RecordingFormat::csv);
  CHECK(format_from_extension("x.bin") == RecordingFormat::binary);

  // Binary header layout.
  std::ifstream in(dir / "r.bin", std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "STGL");
  CHECK(std::filesystem::file_size(dir / "r.bin") == 4 + 2 + 4 + 8 + 8 + 4 * 50 * 8);
}

TEST_CASE("loader validation") {
  testutil::TempDir dir("rec_bad");
  const Recording r = small_recording(3, 20, 250.0);
  write_recording_csv(dir / "r.csv", r);
  Annotations a;
  a.onset_sample = 5;
  CHECK_THROWS_AS(load_recording(dir / "r.csv", RecordingFormat::csv, a), Error);  // no sample rate
  a.sample_rate = 250.0;
  a.soz_channels = {"nope"};
  CHECK(code_of([&] { load_recording(dir / "r.csv", RecordingFormat::csv, a); }) == ErrorCode::invalid_argument);
  a.soz_channels = {};
  a.onset_sample = 25;
  CHECK_THROWS_AS(load_recording(dir / "r.csv", RecordingFormat::csv, a), Error);
  CHECK(code_of([&] { load_recording(dir / "missing.csv", RecordingFormat::csv, a); }) == ErrorCode::io);
  csv::write_text(dir / "junk.bin", "JUNKJUNKJUNK");
  csv::write_text(dir / "junk.channels", "a\n");
  a.onset_sample = 0;
  CHECK_THROWS_AS(load_recording(dir / "junk.bin", RecordingFormat::binary, a), Error);
}

TEST_CASE("bad channels are dropped at load") {
  testutil::TempDir dir("rec_drop");
  const Recording r = small_recording(4, 20, 250.0);
  write_recording_csv(dir / "r.csv", r);
  Annotations a;
  a.sample_rate = 250.0;
  a.bad_channels = {"e1"};
  a.soz_channels = {"e3"};
  const Recording back = load_recording(dir / "r.csv", RecordingFormat::csv, a);
  CHECK(back.channel_names == std::vector<std::string>{"e0", "e2", "e3"});
  CHECK(back.samples.row(1) == r.samples.row(2));
  CHECK(back.soz_labels == std::vector<bool>{false, false, true});
  CHECK(back.bad_channels == std::vector<std::string>{"e1"});
}

TEST_CASE("preprocess decimates by an integer factor") {
  Recording r = small_recording(2, 4000, 1000.0);
  r.onset_sample = 2000;
  const Recording p = preprocess(r);
  CHECK(p.sample_rate == 250.0);
  CHECK(p.n_samples() == 1000);
  CHECK(p.onset_sample == 500);
  CHECK(p.samples.allFinite());

  PreprocessConfig odd;
  odd.target_rate = 300.0;
  CHECK(code_of([&] { preprocess(r, odd); }) == ErrorCode::resample_unsupported);
}

TEST_CASE("preprocess removes mains hum and keeps in-band content") {
  Recording r;
  r.channel_names = {"a"};
  r.sample_rate = 250.0;
  const auto hum = sine(60.0, 250.0, 5000);
  const auto tone = sine(10.0, 250.0, 5000);
  r.samples.resize(1, 5000);
  for (std::size_t i = 0; i < 5000; ++i) r.samples(0, static_cast<Eigen::Index>(i)) = hum[i] + tone[i];
  r.soz_labels = {false};
  const Recording p = preprocess(r);
  std::vector<double> y(p.samples.row(0).begin(), p.samples.row(0).end());
  double err = 0.0;
  for (std::size_t i = 500; i < 4500; ++i) err = std::max(err, std::abs(y[i] - tone[i]));
  CHECK(err < 0.02);
}

TEST_CASE("window geometry") {
  CHECK(window_length_samples(512.0, 250.0) == 128);
  CHECK(window_stride_samples(128, 0.5) == 64);
  CHECK(window_stride_samples(128, 0.0) == 128);

  Recording r = small_recording(3, 2000, 250.0);
  r.onset_sample = 600;
  const WindowedRecording wr = make_windows(r);
  REQUIRE(wr.windows.size() == 13);
  CHECK(wr.window_starts.front() == 600 - 3 * 64);
  CHECK(wr.window_starts[3] == 600);
  CHECK(wr.window_starts.back() == 600 + 9 * 64);
  CHECK(wr.labels[2] == WindowLabel::pre_onset);
  CHECK(wr.labels[3] == WindowLabel::onset);
  CHECK(wr.labels[4] == WindowLabel::post_onset);
  CHECK(wr.window_samples() == 128);
  CHECK(wr.windows[3].values() == r.samples.middleCols(600, 128));
}

TEST_CASE("windowing reports the short side") {
  Recording r = small_recording(2, 1000, 250.0);
  r.onset_sample = 100;
  try {
    make_windows(r);
    FAIL("expected windowing error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::windowing);
    CHECK(std::string(e.what()).find("before onset") != std::string::npos);
  }
  r.onset_sample = 500;
  try {
    make_windows(r);
    FAIL("expected windowing error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("after onset") != std::string::npos);
  }
}

TEST_CASE("window label names") {
  for (auto l : {WindowLabel::pre_onset, WindowLabel::onset, WindowLabel::post_onset})
    CHECK(parse_window_label(window_label_name(l)) == l);
  CHECK_THROWS_AS(parse_window_label("during"), Error);
}

TEST_CASE("preprocess attenuation at 1000 Hz sampling") {
  auto through = [](const std::vector<double>& x) {
    Recording r;
    r.channel_names = {"a"};
    r.sample_rate = 1000.0;
    r.samples = Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    r.soz_labels = {false};
    const Recording p = preprocess(r);
    std::vector<double> y(p.samples.row(0).begin(), p.samples.row(0).end());
    // Skip edge transients on both sides.
    return rms(y, y.size() / 5, y.size() * 4 / 5);
  };
  const std::size_t n = 20000;
  auto db = [](double out, double in) { return 20.0 * std::log10(in / out); };
  CHECK(db(through(sine(60.0, 1000.0, n)), std::sqrt(0.5)) >= 30.0);
  CHECK(db(through(sine(10.0, 1000.0, n)), std::sqrt(0.5)) <= 1.0);
  CHECK(db(through(std::vector<double>(n, 1.0)), 1.0) >= 20.0);
}

TEST_CASE("symmetric pulse stays centred") {
  Recording r;
  r.channel_names = {"a"};
  r.sample_rate = 250.0;
  r.samples = Matrix::Zero(1, 2001);
  for (int k = -20; k <= 20; ++k) r.samples(0, 1000 + k) = std::exp(-0.5 * k * k / 36.0);
  r.soz_labels = {false};
  const Recording p = preprocess(r);
  Eigen::Index peak = 0;
  p.samples.row(0).maxCoeff(&peak);
  CHECK(std::abs(peak - 1000) <= 1);
  // Forward then backward passes differ only by rounding and edge transients.
  double asym = 0.0;
  for (Eigen::Index k = 1; k < 200; ++k) asym = std::max(asym, std::abs(p.samples(0, 1000 + k) - p.samples(0, 1000 - k)));
  CHECK(asym < 1e-6 * p.samples.row(0).maxCoeff());
}

TEST_CASE("preprocess commutes with channel permutation") {
  Recording r = small_recording(4, 3000, 1000.0, 7);
  Recording q = r;
  const std::vector<Eigen::Index> perm{2, 0, 3, 1};
  for (std::size_t c = 0; c < 4; ++c) {
    q.samples.row(static_cast<Eigen::Index>(c)) = r.samples.row(perm[c]);
    q.channel_names[c] = r.channel_names[static_cast<std::size_t>(perm[c])];
  }
  const Recording a = preprocess(r), b = preprocess(q);
  for (std::size_t c = 0; c < 4; ++c) CHECK(b.samples.row(static_cast<Eigen::Index>(c)) == a.samples.row(perm[c]));
}

#include "stg/signal_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>

#include "stg/csv.hpp"
#include "stg/error.hpp"
#include "stg/filters.hpp"
#include "stg/kv_file.hpp"

namespace stg {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'G', 'L'};
constexpr std::uint16_t kBinaryVersion = 1;

template <typename T>
void put_le(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorCode::parse, "binary recording is truncated");
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::size_t channel_index(const std::vector<std::string>& names, const std::string& name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorCode::invalid_argument, "unknown channel '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

Recording read_csv_body(const std::filesystem::path& path) {
  const auto rows = csv::read_rows(path);
  if (rows.empty()) throw Error(ErrorCode::parse, path.string() + ": missing header row");
  Recording r;
  for (const auto& name : rows[0]) {
    const std::string t = csv::trim(name);
    if (t.empty()) throw Error(ErrorCode::parse, path.string() + ": empty channel name in header");
    r.channel_names.push_back(t);
  }
  const auto n_ch = static_cast<Eigen::Index>(r.channel_names.size());
  r.samples.resize(n_ch, static_cast<Eigen::Index>(rows.size() - 1));
  for (std::size_t s = 1; s < rows.size(); ++s) {
    if (rows[s].size() != r.channel_names.size()) {
      throw Error(ErrorCode::parse, path.string() + ": sample row " + std::to_string(s) + " has " +
                                        std::to_string(rows[s].size()) + " fields, expected " +
                                        std::to_string(r.channel_names.size()));
    }
    for (Eigen::Index c = 0; c < n_ch; ++c)
      r.samples(c, static_cast<Eigen::Index>(s - 1)) = csv::parse_double(rows[s][static_cast<std::size_t>(c)]);
  }
  return r;
}

Recording read_binary_body(const std::filesystem::path& path) {
  const std::string bytes = csv::read_text(path);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::parse, path.string() + ": bad magic, expected STGL");
  }
  std::size_t pos = 4;
  const auto version = get_le<std::uint16_t>(bytes, pos);
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::parse, path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto n_ch = get_le<std::uint32_t>(bytes, pos);
  const auto n_s = get_le<std::uint64_t>(bytes, pos);
  Recording r;
  r.sample_rate = get_le<double>(bytes, pos);
  if (bytes.size() - pos != static_cast<std::size_t>(n_ch) * n_s * sizeof(double)) {
    throw Error(ErrorCode::parse, path.string() + ": sample count does not match header");
  }
  r.samples.resize(n_ch, static_cast<Eigen::Index>(n_s));
  for (std::uint32_t c = 0; c < n_ch; ++c)
    for (std::uint64_t s = 0; s < n_s; ++s)
      r.samples(c, static_cast<Eigen::Index>(s)) = get_le<double>(bytes, pos);

  const auto sidecar = channel_sidecar_path(path);
  const std::string names = csv::read_text(sidecar);
  std::size_t start = 0;
  while (start < names.size()) {
    auto end = names.find('\n', start);
    if (end == std::string::npos) end = names.size();
    const std::string t = csv::trim(std::string_view(names).substr(start, end - start));
    if (!t.empty()) r.channel_names.push_back(t);
    start = end + 1;
  }
  if (r.channel_names.size() != n_ch) {
    throw Error(ErrorCode::parse, sidecar.string() + ": lists " + std::to_string(r.channel_names.size()) +
                                      " channels, header says " + std::to_string(n_ch));
  }
  return r;
}

}  // namespace

void Recording::validate() const {
  if (channel_names.size() != n_channels()) {
    throw Error(ErrorCode::invalid_argument, "channel name count does not match sample rows");
  }
  if (std::set<std::string>(channel_names.begin(), channel_names.end()).size() != channel_names.size()) {
    throw Error(ErrorCode::invalid_argument, "channel names are not unique");
  }
  if (soz_labels.size() != n_channels()) {
    throw Error(ErrorCode::invalid_argument, "soz label count does not match channel count");
  }
  if (n_samples() == 0 || onset_sample >= n_samples()) {
    throw Error(ErrorCode::invalid_argument, "onset sample lies outside the recording");
  }
  if (!(sample_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "sample rate must be positive");
  if (!samples.allFinite()) throw Error(ErrorCode::non_finite, "recording has non-finite samples");
}

Annotations Annotations::load(const std::filesystem::path& path) {
  const auto kv = KeyValueFile::load(path);
  Annotations a;
  if (!kv.has("onset_sample")) throw Error(ErrorCode::parse, path.string() + ": missing onset_sample");
  const long long onset = kv.get_int("onset_sample", 0);
  if (onset < 0) throw Error(ErrorCode::parse, path.string() + ": onset_sample must be >= 0");
  a.onset_sample = static_cast<std::size_t>(onset);
  a.soz_channels = kv.get_list("soz");
  a.bad_channels = kv.get_list("bad");
  if (kv.has("sample_rate")) a.sample_rate = kv.get_double("sample_rate", 0.0);
  return a;
}

void Annotations::save(const std::filesystem::path& path) const {
  KeyValueFile kv;
  kv.set("onset_sample", std::to_string(onset_sample));
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  kv.set("soz", join(soz_channels));
  kv.set("bad", join(bad_channels));
  if (sample_rate) kv.set("sample_rate", csv::format_double(*sample_rate));
  csv::write_text(path, kv.to_string());
}

RecordingFormat format_from_extension(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? RecordingFormat::csv : RecordingFormat::binary;
}

std::filesystem::path channel_sidecar_path(const std::filesystem::path& binary_path) {
  auto p = binary_path;
  p.replace_extension(".channels");
  return p;
}

Recording remove_channels(const Recording& r, const std::vector<std::string>& names) {
  std::vector<bool> drop(r.n_channels(), false);
  for (const auto& name : names) drop[channel_index(r.channel_names, name)] = true;
  Recording out;
  out.sample_rate = r.sample_rate;
  out.onset_sample = r.onset_sample;
  out.bad_channels = r.bad_channels;
  const auto kept = static_cast<Eigen::Index>(std::count(drop.begin(), drop.end(), false));
  out.samples.resize(kept, r.samples.cols());
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < r.n_channels(); ++c) {
    if (drop[c]) {
      out.bad_channels.push_back(r.channel_names[c]);
      continue;
    }
    out.channel_names.push_back(r.channel_names[c]);
    if (c < r.soz_labels.size()) out.soz_labels.push_back(r.soz_labels[c]);
    out.samples.row(row++) = r.samples.row(static_cast<Eigen::Index>(c));
  }
  return out;
}

Recording load_recording(const std::filesystem::path& path, RecordingFormat format,
                         const Annotations& annotations) {
  Recording r = format == RecordingFormat::csv ? read_csv_body(path) : read_binary_body(path);
  if (annotations.sample_rate) r.sample_rate = *annotations.sample_rate;
  if (!(r.sample_rate > 0.0)) {
    throw Error(ErrorCode::parse, path.string() + ": no sample rate (CSV recordings need sample_rate in the sidecar)");
  }
  r.onset_sample = annotations.onset_sample;
  r.soz_labels.assign(r.n_channels(), false);
  for (const auto& name : annotations.soz_channels) r.soz_labels[channel_index(r.channel_names, name)] = true;
  r = remove_channels(r, annotations.bad_channels);
  r.validate();
  return r;
}

Recording load_recording(const std::filesystem::path& path, RecordingFormat format,
                         const std::filesystem::path& annotation_path) {
  return load_recording(path, format, Annotations::load(annotation_path));
}

void write_recording_csv(const std::filesystem::path& path, const Recording& r) {
  std::string text;
  for (std::size_t c = 0; c < r.channel_names.size(); ++c) text += (c ? "," : "") + r.channel_names[c];
  text += '\n';
  for (Eigen::Index s = 0; s < r.samples.cols(); ++s) {
    for (Eigen::Index c = 0; c < r.samples.rows(); ++c) {
      if (c) text += ',';
      text += csv::format_double(r.samples(c, s));
    }
    text += '\n';
  }
  csv::write_text(path, text);
}

void write_recording_binary(const std::filesystem::path& path, const Recording& r) {
  std::string out(kMagic, 4);
  put_le<std::uint16_t>(out, kBinaryVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.n_channels()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(r.n_samples()));
  put_le<double>(out, r.sample_rate);
  for (Eigen::Index c = 0; c < r.samples.rows(); ++c)
    for (Eigen::Index s = 0; s < r.samples.cols(); ++s) put_le<double>(out, r.samples(c, s));
  csv::write_text(path, out);
  std::string names;
  for (const auto& n : r.channel_names) names += n + "\n";
  csv::write_text(channel_sidecar_path(path), names);
}

Recording preprocess(const Recording& r, const PreprocessConfig& config) {
  const double fs = r.sample_rate;
  if (!(config.band_low_hz > 0.0) || !(config.band_low_hz < config.band_high_hz)) {
    throw Error(ErrorCode::invalid_argument, "bandpass needs 0 < low < high");
  }
  if (config.band_high_hz >= 0.5 * fs) {
    throw Error(ErrorCode::invalid_argument, "bandpass upper edge must lie below the Nyquist frequency");
  }
  const bool use_notch = config.notch_hz > 0.0;
  if (use_notch && (config.notch_hz < config.band_low_hz || config.notch_hz > config.band_high_hz)) {
    throw Error(ErrorCode::invalid_argument, "notch frequency must lie inside the passband");
  }
  if (!(config.target_rate > 0.0) || config.target_rate > fs) {
    throw Error(ErrorCode::invalid_argument, "target rate must be positive and not exceed the sample rate");
  }
  const double ratio = fs / config.target_rate;
  const auto factor = static_cast<std::size_t>(std::llround(ratio));
  if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9 * ratio) {
    throw Error(ErrorCode::resample_unsupported, "sample rate is not an integer multiple of the target rate");
  }

  dsp::Cascade chain;
  if (use_notch) chain.push_back(dsp::design_notch(config.notch_hz, config.notch_q, fs));
  const dsp::Cascade band = dsp::design_bandpass(config.band_low_hz, config.band_high_hz, fs);
  dsp::Cascade anti_alias;
  if (factor > 1) anti_alias = dsp::design_butter_lowpass(0.45 * config.target_rate, 8, fs);

  const std::size_t n_out = (r.n_samples() + factor - 1) / factor;
  Recording out = r;
  out.samples.resize(r.samples.rows(), static_cast<Eigen::Index>(n_out));
  for (Eigen::Index c = 0; c < r.samples.rows(); ++c) {
    std::vector<double> x(r.n_samples());
    for (std::size_t s = 0; s < x.size(); ++s) x[s] = r.samples(c, static_cast<Eigen::Index>(s));
    if (use_notch) x = dsp::filtfilt({chain.front()}, x);
    x = dsp::filtfilt(band, x);
    if (factor > 1) x = dsp::filtfilt(anti_alias, x);
    for (std::size_t s = 0; s < n_out; ++s) out.samples(c, static_cast<Eigen::Index>(s)) = x[s * factor];
  }
  out.sample_rate = fs / static_cast<double>(factor);
  out.onset_sample = r.onset_sample / factor;
  return out;
}

const char* window_label_name(WindowLabel label) {
  switch (label) {
    case WindowLabel::pre_onset: return "pre_onset";
    case WindowLabel::onset: return "onset";
    case WindowLabel::post_onset: return "post_onset";
  }
  return "unknown";
}

WindowLabel parse_window_label(const std::string& name) {
  if (name == "pre_onset") return WindowLabel::pre_onset;
  if (name == "onset") return WindowLabel::onset;
  if (name == "post_onset") return WindowLabel::post_onset;
  throw Error(ErrorCode::parse, "unknown window label '" + name + "'");
}

std::size_t window_length_samples(double window_ms, double sample_rate) {
  return static_cast<std::size_t>(std::llround(window_ms * sample_rate / 1000.0));
}

std::size_t window_stride_samples(std::size_t window_len, double overlap_fraction) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(window_len) * (1.0 - overlap_fraction)));
}

WindowedRecording make_windows(const Recording& r, const WindowConfig& config) {
  if (!(config.overlap_fraction >= 0.0 && config.overlap_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "overlap fraction must lie in [0, 1)");
  }
  const std::size_t len = window_length_samples(config.window_ms, r.sample_rate);
  if (len < 2) throw Error(ErrorCode::windowing, "window shorter than two samples");
  const std::size_t stride = window_stride_samples(len, config.overlap_fraction);
  if (stride == 0) throw Error(ErrorCode::windowing, "window stride rounds to zero");

  const std::size_t onset = r.onset_sample;
  if (config.n_pre * stride > onset) {
    throw Error(ErrorCode::windowing, "insufficient samples before onset: need " +
                                          std::to_string(config.n_pre * stride) + ", have " +
                                          std::to_string(onset));
  }
  const std::size_t needed_after = config.n_post * stride + len;
  if (onset + needed_after > r.n_samples()) {
    throw Error(ErrorCode::windowing, "insufficient samples after onset: need " + std::to_string(needed_after) +
                                          ", have " + std::to_string(r.n_samples() - onset));
  }

  WindowedRecording wr;
  wr.window_length_ms = config.window_ms;
  wr.overlap_fraction = config.overlap_fraction;
  wr.channel_names = r.channel_names;
  wr.soz_labels = r.soz_labels;
  auto add = [&](std::size_t start, WindowLabel label) {
    wr.windows.emplace_back(
        Matrix(r.samples.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len))));
    wr.labels.push_back(label);
    wr.window_starts.push_back(start);
  };
  for (std::size_t k = config.n_pre; k >= 1; --k) add(onset - k * stride, WindowLabel::pre_onset);
  add(onset, WindowLabel::onset);
  for (std::size_t k = 1; k <= config.n_post; ++k) add(onset + k * stride, WindowLabel::post_onset);
  return wr;
}

}  // namespace stg

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stg/graph_core.hpp"

namespace stg {

/// Multichannel recording in microvolts, channels x samples.
struct Recording {
  std::vector<std::string> channel_names;
  double sample_rate = 0.0;
  Matrix samples;
  std::size_t onset_sample = 0;
  std::vector<bool> soz_labels;
  std::vector<std::string> bad_channels;  // names removed at load time

  std::size_t n_channels() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t n_samples() const { return static_cast<std::size_t>(samples.cols()); }

  /// Throws invalid_argument when an invariant is broken.
  void validate() const;
};

/// Sidecar keys: onset_sample, soz, bad, sample_rate (optional override).
struct Annotations {
  std::size_t onset_sample = 0;
  std::vector<std::string> soz_channels;
  std::vector<std::string> bad_channels;
  std::optional<double> sample_rate;

  static Annotations load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

enum class RecordingFormat { csv, binary };

/// csv for ".csv", binary otherwise.
RecordingFormat format_from_extension(const std::filesystem::path& path);

/// Binary channel names live next to the data file with extension ".channels".
std::filesystem::path channel_sidecar_path(const std::filesystem::path& binary_path);

Recording load_recording(const std::filesystem::path& path, RecordingFormat format,
                         const Annotations& annotations);
Recording load_recording(const std::filesystem::path& path, RecordingFormat format,
                         const std::filesystem::path& annotation_path);

// Writers for the same formats; the binary writer also emits the channel sidecar.
void write_recording_csv(const std::filesystem::path& path, const Recording& r);
void write_recording_binary(const std::filesystem::path& path, const Recording& r);

/// Drops the named channels; unknown names throw invalid_argument.
Recording remove_channels(const Recording& r, const std::vector<std::string>& names);

struct PreprocessConfig {
  double notch_hz = 60.0;  // <= 0 disables the notch
  double notch_q = 30.0;
  double band_low_hz = 0.5;
  double band_high_hz = 100.0;
  double target_rate = 250.0;
};

/// Zero-phase notch, zero-phase 4th-order bandpass, then integer-factor
/// decimation behind a zero-phase anti-alias lowpass at 0.45 * target_rate.
Recording preprocess(const Recording& r, const PreprocessConfig& config = {});

enum class WindowLabel { pre_onset, onset, post_onset };
const char* window_label_name(WindowLabel label);
WindowLabel parse_window_label(const std::string& name);

struct WindowConfig {
  double window_ms = 512.0;
  double overlap_fraction = 0.5;
  std::size_t n_pre = 3;
  std::size_t n_post = 9;
};

struct WindowedRecording {
  std::vector<SignalMatrix> windows;
  std::vector<WindowLabel> labels;
  std::vector<std::size_t> window_starts;
  double window_length_ms = 0.0;
  double overlap_fraction = 0.0;
  std::vector<std::string> channel_names;
  std::vector<bool> soz_labels;

  std::size_t window_samples() const { return windows.empty() ? 0 : windows.front().n_samples(); }
};

std::size_t window_length_samples(double window_ms, double sample_rate);
std::size_t window_stride_samples(std::size_t window_len, double overlap_fraction);

/// The onset window starts at onset_sample; pre-onset windows tile backward
/// and post-onset windows forward with the same stride.
WindowedRecording make_windows(const Recording& r, const WindowConfig& config = {});

}  // namespace stg

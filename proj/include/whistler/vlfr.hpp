#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "whistler/spectro.hpp"

namespace whistler {

/// Header of a VLFR1 raw signal file.
///
/// Layout, little-endian: magic "VLFR", u16 version (= 1), u32 sample rate
/// [Hz], u8 channel count, u64 samples per channel, then channel-major f32
/// samples.
struct VlfrInfo {
  std::uint32_t sample_rate = 0;
  std::uint8_t channels = 0;
  std::uint64_t samples_per_channel = 0;
};

/// Writes one or more equally long channels. Channel order maps to ids
/// "NS", "EW", then "ch2", "ch3", ...
void write_vlfr(const std::string& path, const std::vector<TimeSeriesd>& channels);
void write_vlfr(const std::string& path, const TimeSeriesd& channel);

VlfrInfo vlfr_info(const std::string& path);

/// Reads one channel of a VLFR1 file.
TimeSeriesd read_vlfr(const std::string& path, int channel = 0);

}  // namespace whistler

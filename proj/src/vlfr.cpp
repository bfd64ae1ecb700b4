#include "whistler/vlfr.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "whistler/errors.hpp"

namespace whistler {

namespace {

constexpr char kMagic[4] = {'V', 'L', 'F', 'R'};
constexpr std::uint16_t kVersion = 1;

void put_bytes(std::ostream& os, const void* data, std::size_t n) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void put_le(std::ostream& os, T value) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
  put_bytes(os, buf, sizeof(T));
}

void put_f32_le(std::ostream& os, float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  put_le(os, bits);
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T)))
    throw IoError("vlfr: truncated file");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

float get_f32_le(std::istream& is) {
  const std::uint32_t bits = get_le<std::uint32_t>(is);
  float value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

std::string channel_name(int index) {
  if (index == 0) return "NS";
  if (index == 1) return "EW";
  return "ch" + std::to_string(index);
}

VlfrInfo read_header(std::istream& is, const std::string& path) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("vlfr: bad magic in " + path);
  const auto version = get_le<std::uint16_t>(is);
  if (version != kVersion)
    throw IoError("vlfr: unsupported version " + std::to_string(version));
  VlfrInfo info;
  info.sample_rate = get_le<std::uint32_t>(is);
  info.channels = get_le<std::uint8_t>(is);
  info.samples_per_channel = get_le<std::uint64_t>(is);
  if (info.sample_rate == 0 || info.channels == 0 || info.samples_per_channel == 0)
    throw IoError("vlfr: degenerate header in " + path);
  return info;
}

}  // namespace

void write_vlfr(const std::string& path, const std::vector<TimeSeriesd>& channels) {
  if (channels.empty()) throw InvalidArgument("vlfr: nothing to write");
  const Eigen::Index n = channels.front().samples.size();
  const double fs = channels.front().fs;
  for (const auto& ch : channels) {
    ch.validate();
    if (ch.samples.size() != n || ch.fs != fs)
      throw InvalidArgument("vlfr: channels must share length and sample rate");
  }
  if (channels.size() > 255) throw InvalidArgument("vlfr: too many channels");

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("vlfr: cannot open " + path + " for writing");
  put_bytes(os, kMagic, 4);
  put_le(os, kVersion);
  put_le(os, static_cast<std::uint32_t>(std::llround(fs)));
  put_le(os, static_cast<std::uint8_t>(channels.size()));
  put_le(os, static_cast<std::uint64_t>(n));
  for (const auto& ch : channels)
    for (Eigen::Index i = 0; i < n; ++i)
      put_f32_le(os, static_cast<float>(ch.samples[i]));
  if (!os) throw IoError("vlfr: write failed for " + path);
}

void write_vlfr(const std::string& path, const TimeSeriesd& channel) {
  write_vlfr(path, std::vector<TimeSeriesd>{channel});
}

VlfrInfo vlfr_info(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("vlfr: cannot open " + path);
  return read_header(is, path);
}

TimeSeriesd read_vlfr(const std::string& path, int channel) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("vlfr: cannot open " + path);
  const VlfrInfo info = read_header(is, path);
  if (channel < 0 || channel >= info.channels)
    throw InvalidArgument("vlfr: channel " + std::to_string(channel) + " not present (" +
                          std::to_string(info.channels) + " channels)");

  is.seekg(static_cast<std::streamoff>(channel) *
               static_cast<std::streamoff>(info.samples_per_channel) * 4,
           std::ios::cur);
  TimeSeriesd ts;
  ts.fs = static_cast<double>(info.sample_rate);
  ts.channel_id = channel_name(channel);
  ts.samples.resize(static_cast<Eigen::Index>(info.samples_per_channel));
  for (Eigen::Index i = 0; i < ts.samples.size(); ++i)
    ts.samples[i] = static_cast<double>(get_f32_le(is));
  return ts;
}

}  // namespace whistler

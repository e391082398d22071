//------------------------------------------------------------------------------
//
//   Copyright 2026 The flairnorm Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------
#include "flairnorm/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>

#include "flairnorm/error.hpp"

namespace flairnorm::nifti {

namespace fs = std::filesystem;

namespace {

// Byte offsets inside the 348-byte header.
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffRegular = 38;
constexpr std::size_t kOffMagic = 344;
constexpr std::uint8_t kUnitsMm = 2;

template <typename T>
T load(std::span<const std::uint8_t> bytes, std::size_t off, bool swap) {
  std::array<std::uint8_t, sizeof(T)> raw;
  std::memcpy(raw.data(), bytes.data() + off, sizeof(T));
  if (swap) std::reverse(raw.begin(), raw.end());
  T out;
  std::memcpy(&out, raw.data(), sizeof(T));
  return out;
}

template <typename T>
void store(std::span<std::uint8_t> bytes, std::size_t off, T value) {
  static_assert(std::endian::native == std::endian::little,
                "writer assumes a little-endian host");
  std::memcpy(bytes.data() + off, &value, sizeof(T));
}

std::size_t bytes_per_sample(SampleType t) {
  switch (t) {
    case SampleType::UInt8: return 1;
    case SampleType::Int16: return 2;
    case SampleType::Int32: return 4;
    case SampleType::Float32: return 4;
    case SampleType::Float64: return 8;
  }
  return 0;
}

bool has_suffix(const fs::path &p, std::string_view suffix) {
  const std::string s = p.string();
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Whole-file read through zlib, which passes plain files through untouched.
std::vector<std::uint8_t> slurp(const fs::path &path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::unique_ptr<gzFile_s, int (*)(gzFile)> guard(f, gzclose);
  std::vector<std::uint8_t> out;
  std::array<std::uint8_t, 1 << 16> buf;
  for (;;) {
    const int n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    if (n < 0) {
      throw Error(ErrorCode::IoError, "read failed for " + path.string());
    }
    if (n == 0) break;
    out.insert(out.end(), buf.begin(), buf.begin() + n);
  }
  return out;
}

void spill(const fs::path &path, std::span<const std::uint8_t> bytes) {
  if (has_suffix(path, ".gz")) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (f == nullptr) {
      throw Error(ErrorCode::IoError, "cannot create " + path.string());
    }
    const int n = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    const int rc = gzclose(f);
    if (n != static_cast<int>(bytes.size()) || rc != Z_OK) {
      throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  os.write(reinterpret_cast<const char *>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

fs::path image_path_for(const fs::path &hdr) {
  std::string s = hdr.string();
  for (auto [from, to] : {std::pair{".hdr.gz", ".img.gz"}, {".hdr", ".img"}}) {
    const std::string_view f = from;
    if (s.size() >= f.size() && s.compare(s.size() - f.size(), f.size(), f) == 0) {
      return s.substr(0, s.size() - f.size()) + to;
    }
  }
  return s + ".img";
}

template <typename T>
void decode_samples(std::span<const std::uint8_t> raw, bool swap,
                    std::vector<double> &out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(load<T>(raw, i * sizeof(T), swap));
  }
}

struct Decoded {
  Header header;
  std::vector<double> values;
};

Decoded decode_file(const fs::path &path) {
  const std::vector<std::uint8_t> bytes = slurp(path);
  if (bytes.size() < static_cast<std::size_t>(kHeaderSize)) {
    throw Error(ErrorCode::TruncatedData,
                path.string() + " is shorter than a NIfTI-1 header");
  }
  Decoded d;
  d.header = parse_header(std::span(bytes).first(kHeaderSize));
  const Header &h = d.header;
  const Dims dims = header_dims(h);
  const SampleType type = sample_type(h.datatype);
  const std::size_t bps = bytes_per_sample(type);
  if (static_cast<std::size_t>(h.bitpix) != bps * 8) {
    throw Error(ErrorCode::UnsupportedDatatype,
                "bitpix " + std::to_string(h.bitpix) +
                    " inconsistent with datatype " + std::to_string(h.datatype));
  }

  const bool single = h.magic[1] == '+';
  std::vector<std::uint8_t> separate;
  std::span<const std::uint8_t> payload;
  std::size_t offset = 0;
  if (single) {
    offset = static_cast<std::size_t>(h.vox_offset);
    if (!(h.vox_offset >= static_cast<float>(kHeaderSize))) {
      throw Error(ErrorCode::TruncatedData, "vox_offset points into header");
    }
    payload = bytes;
  } else {
    separate = slurp(image_path_for(path));
    offset = static_cast<std::size_t>(std::max(0.0f, h.vox_offset));
    payload = separate;
  }

  const std::size_t need = dims.count() * bps;
  if (payload.size() < offset || payload.size() - offset < need) {
    throw Error(ErrorCode::TruncatedData,
                path.string() + ": expected " + std::to_string(need) +
                    " data bytes");
  }
  const auto raw = payload.subspan(offset, need);
  d.values.resize(dims.count());
  const bool swap = h.big_endian;
  switch (type) {
    case SampleType::UInt8: decode_samples<std::uint8_t>(raw, swap, d.values); break;
    case SampleType::Int16: decode_samples<std::int16_t>(raw, swap, d.values); break;
    case SampleType::Int32: decode_samples<std::int32_t>(raw, swap, d.values); break;
    case SampleType::Float32: decode_samples<float>(raw, swap, d.values); break;
    case SampleType::Float64: decode_samples<double>(raw, swap, d.values); break;
  }

  if (h.scl_slope != 0.0f && std::isfinite(h.scl_slope) &&
      std::isfinite(h.scl_inter)) {
    const double slope = h.scl_slope;
    const double inter = h.scl_inter;
    if (slope != 1.0 || inter != 0.0) {
      for (double &v : d.values) v = v * slope + inter;
    }
  }
  return d;
}

}  // namespace

Spacing header_spacing(const Header &h) {
  auto axis = [&](int i) {
    const double s = std::abs(static_cast<double>(h.pixdim[i]));
    if (!std::isfinite(s)) {
      throw Error(ErrorCode::InvalidArgument, "non-finite pixdim");
    }
    // 2D images commonly leave the third pixdim at zero.
    return s > 0.0 ? s : 1.0;
  };
  return Spacing{axis(1), axis(2), axis(3)};
}

namespace {

std::vector<std::uint8_t> encode_file(const Header &h,
                                      std::span<const std::uint8_t> data) {
  std::vector<std::uint8_t> out(kSingleFileOffset + data.size(), 0);
  const auto hdr = encode_header(h);
  std::copy(hdr.begin(), hdr.end(), out.begin());
  // Bytes 348..351 stay zero: no extensions.
  std::copy(data.begin(), data.end(), out.begin() + kSingleFileOffset);
  return out;
}

Header make_header(const Dims &dims, const Spacing &spacing, SampleType type) {
  Header h;
  h.dim = {3,
           static_cast<std::int16_t>(dims.nx),
           static_cast<std::int16_t>(dims.ny),
           static_cast<std::int16_t>(dims.nz),
           1, 1, 1, 1};
  h.datatype = datatype_code(type);
  h.bitpix = static_cast<std::int16_t>(bytes_per_sample(type) * 8);
  h.pixdim = {1.0f,
              static_cast<float>(spacing.sx),
              static_cast<float>(spacing.sy),
              static_cast<float>(spacing.sz),
              0.0f, 0.0f, 0.0f, 0.0f};
  h.xyzt_units = kUnitsMm;
  return h;
}

void check_extents(const Dims &dims) {
  constexpr auto kMax =
      static_cast<std::size_t>(std::numeric_limits<std::int16_t>::max());
  if (dims.nx > kMax || dims.ny > kMax || dims.nz > kMax) {
    throw Error(ErrorCode::InvalidArgument,
                "extent exceeds NIfTI-1 limit of 32767");
  }
}

template <typename T>
void encode_samples(std::span<const double> values, std::span<std::uint8_t> out) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    store<T>(out, i * sizeof(T), static_cast<T>(values[i]));
  }
}

template <typename T>
bool integral_fits(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) {
    return v == std::trunc(v) &&
           v >= static_cast<double>(std::numeric_limits<T>::min()) &&
           v <= static_cast<double>(std::numeric_limits<T>::max());
  });
}

}  // namespace

Header parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < static_cast<std::size_t>(kHeaderSize)) {
    throw Error(ErrorCode::TruncatedData, "header shorter than 348 bytes");
  }
  Header h;
  if (load<std::int32_t>(bytes, 0, false) == kHeaderSize) {
    h.big_endian = false;
  } else if (load<std::int32_t>(bytes, 0, true) == kHeaderSize) {
    h.big_endian = true;
  } else {
    throw Error(ErrorCode::BadMagic, "sizeof_hdr is not 348");
  }
  const bool sw = h.big_endian;

  std::memcpy(h.magic.data(), bytes.data() + kOffMagic, 4);
  const bool single = h.magic == std::array<char, 4>{'n', '+', '1', '\0'};
  const bool pair = h.magic == std::array<char, 4>{'n', 'i', '1', '\0'};
  if (!single && !pair) throw Error(ErrorCode::BadMagic, "unrecognised magic");

  for (std::size_t i = 0; i < 8; ++i) {
    h.dim[i] = load<std::int16_t>(bytes, kOffDim + 2 * i, sw);
    h.pixdim[i] = load<float>(bytes, kOffPixdim + 4 * i, sw);
  }
  h.datatype = load<std::int16_t>(bytes, kOffDatatype, sw);
  h.bitpix = load<std::int16_t>(bytes, kOffBitpix, sw);
  h.vox_offset = load<float>(bytes, kOffVoxOffset, sw);
  h.scl_slope = load<float>(bytes, kOffSclSlope, sw);
  h.scl_inter = load<float>(bytes, kOffSclInter, sw);
  h.xyzt_units = bytes[kOffXyztUnits];
  return h;
}

std::array<std::uint8_t, kHeaderSize> encode_header(const Header &h) {
  std::array<std::uint8_t, kHeaderSize> out{};
  std::span<std::uint8_t> b(out);
  store<std::int32_t>(b, 0, kHeaderSize);
  b[kOffRegular] = 'r';
  for (std::size_t i = 0; i < 8; ++i) {
    store<std::int16_t>(b, kOffDim + 2 * i, h.dim[i]);
    store<float>(b, kOffPixdim + 4 * i, h.pixdim[i]);
  }
  store<std::int16_t>(b, kOffDatatype, h.datatype);
  store<std::int16_t>(b, kOffBitpix, h.bitpix);
  store<float>(b, kOffVoxOffset, h.vox_offset);
  store<float>(b, kOffSclSlope, h.scl_slope);
  store<float>(b, kOffSclInter, h.scl_inter);
  b[kOffXyztUnits] = h.xyzt_units;
  std::memcpy(b.data() + kOffMagic, h.magic.data(), 4);
  return out;
}

Dims header_dims(const Header &h) {
  const int rank = h.dim[0];
  if (rank < 2 || rank > 7) {
    throw Error(ErrorCode::UnsupportedDatatype,
                "dim[0] must be between 2 and 7, got " + std::to_string(rank));
  }
  for (int i = 1; i <= rank; ++i) {
    if (h.dim[i] < 1) {
      throw Error(ErrorCode::InvalidArgument, "non-positive extent in dim");
    }
    // Trailing singleton axes are tolerated; real 4D data is not.
    if (i > 3 && h.dim[i] != 1) {
      throw Error(ErrorCode::UnsupportedDatatype,
                  "only 2D and 3D volumes are supported");
    }
  }
  return Dims{static_cast<std::size_t>(h.dim[1]),
              static_cast<std::size_t>(h.dim[2]),
              rank >= 3 ? static_cast<std::size_t>(h.dim[3]) : 1u};
}

SampleType sample_type(std::int16_t datatype) {
  switch (datatype) {
    case DT_UINT8: return SampleType::UInt8;
    case DT_INT16: return SampleType::Int16;
    case DT_INT32: return SampleType::Int32;
    case DT_FLOAT32: return SampleType::Float32;
    case DT_FLOAT64: return SampleType::Float64;
    default:
      throw Error(ErrorCode::UnsupportedDatatype,
                  "datatype code " + std::to_string(datatype));
  }
}

std::int16_t datatype_code(SampleType type) {
  switch (type) {
    case SampleType::UInt8: return DT_UINT8;
    case SampleType::Int16: return DT_INT16;
    case SampleType::Int32: return DT_INT32;
    case SampleType::Float32: return DT_FLOAT32;
    case SampleType::Float64: return DT_FLOAT64;
  }
  return DT_FLOAT32;
}

Header read_header(const fs::path &path) {
  const std::vector<std::uint8_t> bytes = slurp(path);
  return parse_header(bytes);
}

Volume read_volume(const fs::path &path) {
  Decoded d = decode_file(path);
  const SampleType type = sample_type(d.header.datatype);
  return Volume(header_dims(d.header), header_spacing(d.header),
                std::move(d.values), "arbitrary", type);
}

Mask read_mask(const fs::path &path, MaskKind kind) {
  Decoded d = decode_file(path);
  std::vector<std::uint8_t> bits(d.values.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const double v = d.values[i];
    if (v != 0.0 && v != 1.0) {
      throw Error(ErrorCode::NonBinaryMask,
                  path.string() + " has voxel value " + std::to_string(v));
    }
    bits[i] = v == 1.0 ? 1 : 0;
  }
  return Mask(header_dims(d.header), std::move(bits), kind);
}

bool representable(const Volume &volume, SampleType type) {
  const auto v = volume.voxels();
  switch (type) {
    case SampleType::UInt8: return integral_fits<std::uint8_t>(v);
    case SampleType::Int16: return integral_fits<std::int16_t>(v);
    case SampleType::Int32: return integral_fits<std::int32_t>(v);
    case SampleType::Float32:
      return std::all_of(v.begin(), v.end(), [](double x) {
        return std::abs(x) <= std::numeric_limits<float>::max();
      });
    case SampleType::Float64: return true;
  }
  return false;
}

void write_volume(const Volume &volume, const fs::path &path, SampleType type) {
  check_extents(volume.dims());
  if (!representable(volume, type)) {
    throw Error(ErrorCode::LossyDatatype,
                "values of " + path.string() +
                    " do not fit the requested datatype");
  }
  const Header h = make_header(volume.dims(), volume.spacing(), type);
  const auto values = volume.voxels();
  std::vector<std::uint8_t> data(values.size() * bytes_per_sample(type));
  switch (type) {
    case SampleType::UInt8: encode_samples<std::uint8_t>(values, data); break;
    case SampleType::Int16: encode_samples<std::int16_t>(values, data); break;
    case SampleType::Int32: encode_samples<std::int32_t>(values, data); break;
    case SampleType::Float32: encode_samples<float>(values, data); break;
    case SampleType::Float64: encode_samples<double>(values, data); break;
  }
  spill(path, encode_file(h, data));
}

void write_mask(const Mask &mask, const Spacing &spacing, const fs::path &path) {
  check_extents(mask.dims());
  const Header h = make_header(mask.dims(), spacing, SampleType::UInt8);
  const auto bits = mask.bits();
  spill(path, encode_file(h, std::span<const std::uint8_t>(bits.data(), bits.size())));
}

}  // namespace flairnorm::nifti

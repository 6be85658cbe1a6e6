#pragma once

#include "deblur/image.hpp"
#include "deblur/psf.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

namespace deblur::io {

enum class NetpbmEncoding { ascii, binary };

/// Layout details needed to write an image back the way it was read.
struct NetpbmInfo {
  NetpbmEncoding encoding = NetpbmEncoding::binary;
  int maxval = 255;
};

/// Reads PGM (P2/P5) or PPM (P3/P6), 8- or 16-bit; samples scaled to [0, 1].
Image read_netpbm(const std::filesystem::path& path, NetpbmInfo* info = nullptr);
Image parse_netpbm(std::istream& in, NetpbmInfo* info = nullptr);

/// Writes PGM for one channel and PPM for three. Samples are clamped to
/// [0, 1] and rounded to the nearest level.
void write_netpbm(const std::filesystem::path& path, const Image& image, const NetpbmInfo& info = {});
void format_netpbm(std::ostream& out, const Image& image, const NetpbmInfo& info = {});

/// Flat CSV: header line "m,n" then m rows of n comma-separated values.
Grid read_csv_grid(const std::filesystem::path& path);
Grid parse_csv_grid(std::istream& in);
void write_csv_grid(const std::filesystem::path& path, const Grid& grid);
void format_csv_grid(std::ostream& out, const Grid& grid);

Psf read_psf_csv(const std::filesystem::path& path);
void write_psf_csv(const std::filesystem::path& path, const Psf& psf);

/// Reads either a netpbm image or a CSV grid depending on the extension.
Image read_image(const std::filesystem::path& path, NetpbmInfo* info = nullptr);
void write_image(const std::filesystem::path& path, const Image& image, const NetpbmInfo& info = {});

/// Writes through a sibling temporary file that is renamed into place.
void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

}  // namespace deblur::io

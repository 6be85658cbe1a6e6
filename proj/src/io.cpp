#include "deblur/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace deblur::io {

namespace {

// Skips whitespace and '#' comments between header tokens.
void skip_header_space(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

long read_header_int(std::istream& in) {
  skip_header_space(in);
  long v = 0;
  if (!(in >> v)) throw std::runtime_error("netpbm: malformed header");
  return v;
}

bool has_extension(const std::filesystem::path& p, std::initializer_list<const char*> exts) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return std::any_of(exts.begin(), exts.end(), [&](const char* x) { return e == x; });
}

}  // namespace

Image parse_netpbm(std::istream& in, NetpbmInfo* info) {
  char p = 0;
  char kind = 0;
  in.get(p);
  in.get(kind);
  if (p != 'P' || (kind != '2' && kind != '5' && kind != '3' && kind != '6'))
    throw std::runtime_error("netpbm: unsupported magic (expected P2, P3, P5 or P6)");
  const bool binary = kind == '5' || kind == '6';
  const int channels = (kind == '3' || kind == '6') ? 3 : 1;
  const long width = read_header_int(in);
  const long height = read_header_int(in);
  const long maxval = read_header_int(in);
  if (width < 1 || height < 1) throw std::runtime_error("netpbm: invalid dimensions");
  if (maxval < 1 || maxval > 65535) throw std::runtime_error("netpbm: maxval must be in [1, 65535]");
  if (binary) in.get();  // single whitespace byte before the raster

  Image img(height, width, channels);
  const double scale = 1.0 / static_cast<double>(maxval);
  const bool wide = maxval > 255;
  for (long i = 0; i < height; ++i) {
    for (long j = 0; j < width; ++j) {
      for (int c = 0; c < channels; ++c) {
        long sample = 0;
        if (binary) {
          const int hi = in.get();
          if (hi == EOF) throw std::runtime_error("netpbm: truncated raster");
          sample = hi;
          if (wide) {
            const int lo = in.get();
            if (lo == EOF) throw std::runtime_error("netpbm: truncated raster");
            sample = (sample << 8) | lo;
          }
        } else if (!(in >> sample)) {
          throw std::runtime_error("netpbm: truncated raster");
        }
        if (sample < 0 || sample > maxval) throw std::runtime_error("netpbm: sample exceeds maxval");
        img.channel(c)(i, j) = static_cast<double>(sample) * scale;
      }
    }
  }
  if (info) *info = {binary ? NetpbmEncoding::binary : NetpbmEncoding::ascii, static_cast<int>(maxval)};
  return img;
}

Image read_netpbm(const std::filesystem::path& path, NetpbmInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_netpbm(in, info);
}

void format_netpbm(std::ostream& out, const Image& image, const NetpbmInfo& info) {
  if (info.maxval < 1 || info.maxval > 65535) throw std::invalid_argument("netpbm: maxval must be in [1, 65535]");
  const bool binary = info.encoding == NetpbmEncoding::binary;
  const bool color = image.channel_count() == 3;
  out << 'P' << (color ? (binary ? '6' : '3') : (binary ? '5' : '2')) << '\n'
      << image.cols() << ' ' << image.rows() << '\n'
      << info.maxval << '\n';
  const bool wide = info.maxval > 255;
  for (Index i = 0; i < image.rows(); ++i) {
    for (Index j = 0; j < image.cols(); ++j) {
      for (int c = 0; c < image.channel_count(); ++c) {
        const double v = std::clamp(image.channel(c)(i, j), 0.0, 1.0);
        const long s = std::lround(v * info.maxval);
        if (binary) {
          if (wide) out.put(static_cast<char>((s >> 8) & 0xff));
          out.put(static_cast<char>(s & 0xff));
        } else {
          out << s << ((j + 1 == image.cols() && c + 1 == image.channel_count()) ? '\n' : ' ');
        }
      }
    }
  }
}

void write_netpbm(const std::filesystem::path& path, const Image& image, const NetpbmInfo& info) {
  write_atomically(path, [&](std::ostream& out) { format_netpbm(out, image, info); });
}

Grid parse_csv_grid(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing 'm,n' header");
  long m = 0;
  long n = 0;
  char comma = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> m >> comma >> n) || comma != ',' || m < 1 || n < 1)
      throw std::runtime_error("csv: header must be 'm,n' with positive sizes");
  }
  Grid g(m, n);
  for (long i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("csv: expected " + std::to_string(m) + " rows");
    std::istringstream rs(line);
    for (long j = 0; j < n; ++j) {
      std::string cell;
      if (!std::getline(rs, cell, ',')) throw std::runtime_error("csv: row " + std::to_string(i) + " is short");
      try {
        g(i, j) = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("csv: bad number '" + cell + "'");
      }
    }
  }
  return g;
}

Grid read_csv_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_csv_grid(in);
}

void format_csv_grid(std::ostream& out, const Grid& grid) {
  out << grid.rows() << ',' << grid.cols() << '\n' << std::setprecision(17);
  for (Index i = 0; i < grid.rows(); ++i) {
    for (Index j = 0; j < grid.cols(); ++j) out << (j ? "," : "") << grid(i, j);
    out << '\n';
  }
}

void write_csv_grid(const std::filesystem::path& path, const Grid& grid) {
  write_atomically(path, [&](std::ostream& out) { format_csv_grid(out, grid); });
}

Psf read_psf_csv(const std::filesystem::path& path) { return Psf::from_weights(read_csv_grid(path)); }

void write_psf_csv(const std::filesystem::path& path, const Psf& psf) { write_csv_grid(path, psf.weights()); }

Image read_image(const std::filesystem::path& path, NetpbmInfo* info) {
  if (has_extension(path, {".csv"})) {
    if (info) *info = {};
    return Image(read_csv_grid(path));
  }
  return read_netpbm(path, info);
}

void write_image(const std::filesystem::path& path, const Image& image, const NetpbmInfo& info) {
  if (has_extension(path, {".csv"})) {
    if (image.channel_count() != 1) throw std::invalid_argument("csv output holds a single channel");
    write_csv_grid(path, image.channel(0));
    return;
  }
  write_netpbm(path, image, info);
}

void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace deblur::io

#include "retv/pgm_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace retv {

namespace {

// Next header token, skipping whitespace and '#' comments.  Consumes the
// single whitespace byte that terminates the token, which is exactly what the
// binary formats need before their payload.
std::string header_token(std::istream& in, const std::string& path) {
  int c = in.get();
  for (;;) {
    if (c == EOF) throw IoError(path + ": truncated header");
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      c = in.get();
      continue;
    }
    break;
  }
  std::string tok;
  while (c != EOF && !std::isspace(static_cast<unsigned char>(c))) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

long header_int(std::istream& in, const std::string& path) {
  const std::string tok = header_token(in, path);
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    throw IoError(path + ": bad header field '" + tok + "'");
  if (tok.size() > 9) throw IoError(path + ": header field out of range '" + tok + "'");
  return std::stol(tok);
}

Image read_pgm(std::istream& in, bool ascii, const std::string& path) {
  const long cols = header_int(in, path);
  const long rows = header_int(in, path);
  const long maxval = header_int(in, path);
  if (rows < 1 || cols < 1 || static_cast<long long>(rows) * cols > (1LL << 30))
    throw IoError(path + ": bad dimensions " + std::to_string(cols) + "x" + std::to_string(rows));
  if (maxval < 1 || maxval > 65535)
    throw IoError(path + ": unsupported maxval " + std::to_string(maxval));

  Image img(rows, cols);
  double* out = img.data();
  const Index n = img.size();

  if (ascii) {
    for (Index i = 0; i < n; ++i) {
      long v = 0;
      if (!(in >> v)) throw IoError(path + ": truncated pixel data");
      if (v < 0 || v > maxval) throw IoError(path + ": sample " + std::to_string(v) + " exceeds maxval");
      out[i] = static_cast<double>(v);
    }
    return img;
  }

  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(static_cast<size_t>(n) * bytes);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw IoError(path + ": truncated pixel data");
  if (bytes == 1) {
    for (Index i = 0; i < n; ++i) {
      const unsigned v = buf[static_cast<size_t>(i)];
      if (v > static_cast<unsigned>(maxval))
        throw IoError(path + ": sample " + std::to_string(v) + " exceeds maxval");
      out[i] = static_cast<double>(v);
    }
  } else {
    // Netpbm stores 16-bit samples most significant byte first.
    for (Index i = 0; i < n; ++i) {
      const unsigned v = 256u * buf[2 * static_cast<size_t>(i)] + buf[2 * static_cast<size_t>(i) + 1];
      if (v > static_cast<unsigned>(maxval))
        throw IoError(path + ": sample " + std::to_string(v) + " exceeds maxval");
      out[i] = static_cast<double>(v);
    }
  }
  return img;
}

std::uint32_t get_u32le(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

void put_u32le(unsigned char* b, std::uint32_t v) {
  b[0] = static_cast<unsigned char>(v & 0xff);
  b[1] = static_cast<unsigned char>((v >> 8) & 0xff);
  b[2] = static_cast<unsigned char>((v >> 16) & 0xff);
  b[3] = static_cast<unsigned char>((v >> 24) & 0xff);
}

Image read_rf32(std::istream& in, const std::string& path) {
  unsigned char hdr[8];
  in.read(reinterpret_cast<char*>(hdr), 8);
  if (in.gcount() != 8) throw IoError(path + ": truncated header");
  const std::uint32_t rows = get_u32le(hdr);
  const std::uint32_t cols = get_u32le(hdr + 4);
  if (rows == 0 || cols == 0 || static_cast<std::uint64_t>(rows) * cols > (1ULL << 30))
    throw IoError(path + ": bad dimensions " + std::to_string(cols) + "x" + std::to_string(rows));

  Image img(static_cast<Index>(rows), static_cast<Index>(cols));
  const size_t n = static_cast<size_t>(rows) * cols;
  std::vector<unsigned char> buf(n * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw IoError(path + ": truncated pixel data");
  double* out = img.data();
  for (size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = get_u32le(&buf[4 * i]);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    out[i] = static_cast<double>(f);
  }
  return img;
}

}  // namespace

Image read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 2);
  if (in.gcount() != 2) throw IoError(path + ": empty or truncated file");
  if (magic[0] == 'P' && magic[1] == '2') return read_pgm(in, true, path);
  if (magic[0] == 'P' && magic[1] == '5') return read_pgm(in, false, path);
  if (magic[0] == 'R' && magic[1] == 'F') {
    in.read(magic + 2, 2);
    if (in.gcount() == 2 && magic[2] == '3' && magic[3] == '2') return read_rf32(in, path);
  }
  throw IoError(path + ": unrecognized format (want PGM P2/P5 or RF32)");
}

void write_pgm(const std::string& path, const Image& img, int maxval) {
  if (img.size() == 0) throw std::invalid_argument("write_pgm: empty image");
  if (maxval < 1 || maxval > 65535) throw std::invalid_argument("write_pgm: maxval out of [1, 65535]");
  if (!all_finite(img)) throw std::invalid_argument("write_pgm: non-finite samples");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << "P5\n" << img.cols() << ' ' << img.rows() << '\n' << maxval << '\n';

  const double* src = img.data();
  const Index n = img.size();
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(static_cast<size_t>(n) * bytes);
  for (Index i = 0; i < n; ++i) {
    long v = std::lround(src[i]);
    if (v < 0) v = 0;
    if (v > maxval) v = maxval;
    if (bytes == 1) {
      buf[static_cast<size_t>(i)] = static_cast<unsigned char>(v);
    } else {
      buf[2 * static_cast<size_t>(i)] = static_cast<unsigned char>(v >> 8);
      buf[2 * static_cast<size_t>(i) + 1] = static_cast<unsigned char>(v & 0xff);
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(path + ": write failed");
}

void write_image(const std::string& path, const Image& img, IntensityRange range) {
  if (!(range.hi > range.lo)) throw std::invalid_argument("write_image: need range.hi > range.lo");
  const Image mapped = ((img - range.lo) / (range.hi - range.lo) * 255.0).max(0.0).min(255.0);
  write_pgm(path, mapped, 255);
}

void write_rf32(const std::string& path, const Image& img) {
  if (img.size() == 0) throw std::invalid_argument("write_rf32: empty image");
  if (!all_finite(img)) throw std::invalid_argument("write_rf32: non-finite samples");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  unsigned char hdr[12] = {'R', 'F', '3', '2'};
  put_u32le(hdr + 4, static_cast<std::uint32_t>(img.rows()));
  put_u32le(hdr + 8, static_cast<std::uint32_t>(img.cols()));
  out.write(reinterpret_cast<const char*>(hdr), 12);

  const double* src = img.data();
  const size_t n = static_cast<size_t>(img.size());
  std::vector<unsigned char> buf(n * 4);
  for (size_t i = 0; i < n; ++i) {
    const float f = static_cast<float>(src[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32le(&buf[4 * i], bits);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace retv

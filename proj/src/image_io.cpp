#include "stitch/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace stitch {

namespace {

[[noreturn]] void io_fail(const std::filesystem::path& path,
                          const std::string& what) {
  throw StitchError(ErrorCode::IoError, path.string() + ": " + what);
}

int read_ppm_token(std::istream& in) {
  // Skips whitespace and '#' comments between header tokens.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF) return -1;
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

}  // namespace

Frame read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open");
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '6') io_fail(path, "not a P6 PPM");
  const int w = read_ppm_token(in);
  const int h = read_ppm_token(in);
  const int maxval = read_ppm_token(in);
  if (w < 1 || h < 1 || maxval != 255) io_fail(path, "unsupported PPM header");
  Frame frame(w, h);
  in.read(reinterpret_cast<char*>(frame.data.data()),
          static_cast<std::streamsize>(frame.data.size()));
  if (!in) io_fail(path, "truncated pixel data");
  return frame;
}

void write_ppm(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.data.data()),
            static_cast<std::streamsize>(frame.data.size()));
  if (!out) io_fail(path, "short write");
}

Frame read_png(const std::filesystem::path& path) {
  PngReadCloser c;
  c.fp = std::fopen(path.string().c_str(), "rb");
  if (!c.fp) io_fail(path, "cannot open");
  c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
  c.info = png_create_info_struct(c.png);
  if (!c.png || !c.info) io_fail(path, "libpng init failed");
  if (setjmp(png_jmpbuf(c.png))) io_fail(path, "libpng read error");
  png_init_io(c.png, c.fp);
  png_read_info(c.png, c.info);

  png_set_expand(c.png);
  png_set_strip_16(c.png);
  png_set_gray_to_rgb(c.png);
  png_read_update_info(c.png, c.info);

  const int w = static_cast<int>(png_get_image_width(c.png, c.info));
  const int h = static_cast<int>(png_get_image_height(c.png, c.info));
  const int channels = png_get_channels(c.png, c.info);
  if (channels != 3 && channels != 4) io_fail(path, "unsupported channels");

  std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * channels);
  Frame frame(w, h);
  bool any_invalid = false;
  std::vector<std::uint8_t> mask(frame.pixel_count(), 1);
  for (int y = 0; y < h; ++y) {
    png_read_row(c.png, row.data(), nullptr);
    for (int x = 0; x < w; ++x) {
      std::uint8_t* dst = frame.px(x, y);
      dst[0] = row[x * channels + 0];
      dst[1] = row[x * channels + 1];
      dst[2] = row[x * channels + 2];
      if (channels == 4 && row[x * channels + 3] == 0) {
        mask[frame.index(x, y)] = 0;
        any_invalid = true;
      }
    }
  }
  png_read_end(c.png, nullptr);
  if (any_invalid) frame.mask = std::move(mask);
  return frame;
}

void write_png(const std::filesystem::path& path, const Frame& frame) {
  PngWriteCloser c;
  c.fp = std::fopen(path.string().c_str(), "wb");
  if (!c.fp) io_fail(path, "cannot open for writing");
  c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                  nullptr);
  c.info = png_create_info_struct(c.png);
  if (!c.png || !c.info) io_fail(path, "libpng init failed");
  if (setjmp(png_jmpbuf(c.png))) io_fail(path, "libpng write error");
  png_init_io(c.png, c.fp);

  const bool with_alpha = frame.has_mask();
  png_set_IHDR(c.png, c.info, frame.width, frame.height, 8,
               with_alpha ? PNG_COLOR_TYPE_RGBA : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(c.png, c.info);

  const int channels = with_alpha ? 4 : 3;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(frame.width) *
                                channels);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const std::uint8_t* src = frame.px(x, y);
      row[x * channels + 0] = src[0];
      row[x * channels + 1] = src[1];
      row[x * channels + 2] = src[2];
      if (with_alpha) {
        row[x * channels + 3] = frame.valid_at(x, y) ? 255 : 0;
      }
    }
    png_write_row(c.png, row.data());
  }
  png_write_end(c.png, nullptr);
}

Frame read_image(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".ppm") return read_ppm(path);
  if (ext == ".png") return read_png(path);
  io_fail(path, "unsupported image extension");
}

void write_image(const std::filesystem::path& path, const Frame& frame) {
  const auto ext = path.extension().string();
  if (ext == ".ppm") return write_ppm(path, frame);
  if (ext == ".png") return write_png(path, frame);
  io_fail(path, "unsupported image extension");
}

std::vector<std::filesystem::path> list_sequence(
    const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) io_fail(dir, "not a directory");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string sequence_name(const std::string& stem, int index,
                          const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%06d", index);
  return stem + buf + ext;
}

}  // namespace stitch

#include "wds/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wds {

namespace {

// libpng reports errors via longjmp, so the decode/encode cores keep all
// C++ objects behind pointers and only POD locals live across setjmp.

bool decode_gray(std::FILE* fp, GrayImage* out, std::string* err) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) {
    *err = "failed to allocate PNG reader";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    *err = "failed to allocate PNG reader";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    if (err->empty()) *err = "failed to decode PNG";
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    *err = "expected a single-channel grayscale PNG";
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if (bit_depth > 8) {
    *err = "expected an 8-bit PNG";
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  out->width = width;
  out->height = height;
  out->pixels.assign(static_cast<std::size_t>(width) * height, 0);
  for (int y = 0; y < height; ++y) {
    png_read_row(png, out->pixels.data() + static_cast<std::size_t>(y) * width,
                 nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode_gray(std::FILE* fp, const GrayImage* image, std::string* err) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) {
    *err = "failed to allocate PNG writer";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    *err = "failed to allocate PNG writer";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    if (err->empty()) *err = "failed to encode PNG";
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image->width),
               static_cast<png_uint_32>(image->height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image->height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image->pixels.data() +
                                             static_cast<std::size_t>(y) *
                                                 image->width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct FileCloser {
  std::FILE* fp;
  ~FileCloser() {
    if (fp) std::fclose(fp);
  }
};

}  // namespace

GrayImage read_gray_png(const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw std::runtime_error("cannot open " + path.string());
  FileCloser closer{fp};
  GrayImage image;
  std::string err;
  if (!decode_gray(fp, &image, &err)) {
    throw std::runtime_error(err + ": " + path.string());
  }
  if (image.width < 1 || image.height < 1) {
    throw std::runtime_error("empty PNG: " + path.string());
  }
  return image;
}

void write_gray_png(const std::filesystem::path& path, const GrayImage& image) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() !=
          static_cast<std::size_t>(image.width) * image.height) {
    throw std::invalid_argument("malformed image buffer");
  }
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot open " + path.string());
  FileCloser closer{fp};
  std::string err;
  if (!encode_gray(fp, &image, &err)) {
    throw std::runtime_error(err + ": " + path.string());
  }
}

BinaryMask mask_from_gray(const GrayImage& image) {
  BinaryMask mask(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::uint8_t v =
          image.pixels[static_cast<std::size_t>(y) * image.width + x];
      if (v != 0 && v != 255) {
        throw std::runtime_error(
            "mask PNG contains a value other than 0 or 255: " +
            std::to_string(static_cast<int>(v)));
      }
      mask.set(x, y, v == 255);
    }
  }
  return mask;
}

GrayImage mask_to_gray(const BinaryMask& mask) {
  GrayImage image;
  image.width = mask.width();
  image.height = mask.height();
  image.pixels.resize(static_cast<std::size_t>(mask.width()) * mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      image.pixels[static_cast<std::size_t>(y) * mask.width() + x] =
          mask.at(x, y) ? 255 : 0;
    }
  }
  return image;
}

LikelihoodMap likelihood_from_gray(const GrayImage& image) {
  LikelihoodMap map(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::uint8_t v =
          image.pixels[static_cast<std::size_t>(y) * image.width + x];
      map.set(x, y, static_cast<double>(v) / 255.0);
    }
  }
  return map;
}

GrayImage likelihood_to_gray(const LikelihoodMap& map) {
  GrayImage image;
  image.width = map.width();
  image.height = map.height();
  image.pixels.resize(static_cast<std::size_t>(map.width()) * map.height());
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const long v = std::lround(map.at(x, y) * 255.0);
      image.pixels[static_cast<std::size_t>(y) * map.width() + x] =
          static_cast<std::uint8_t>(v);
    }
  }
  return image;
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  return mask_from_gray(read_gray_png(path));
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  write_gray_png(path, mask_to_gray(mask));
}

LikelihoodMap read_likelihood_png(const std::filesystem::path& path) {
  return likelihood_from_gray(read_gray_png(path));
}

void write_likelihood_png(const std::filesystem::path& path,
                          const LikelihoodMap& map) {
  write_gray_png(path, likelihood_to_gray(map));
}

}  // namespace wds

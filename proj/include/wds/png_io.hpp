#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wds/mask.hpp"

namespace wds {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Reads a single-channel 8-bit PNG (grayscale of lower bit depth is
/// expanded; color and 16-bit files are rejected).
GrayImage read_gray_png(const std::filesystem::path& path);

void write_gray_png(const std::filesystem::path& path, const GrayImage& img);

// Masks are stored as {0, 255}; any other byte value is a format error.
BinaryMask mask_from_gray(const GrayImage& img);
GrayImage mask_to_gray(const BinaryMask& mask);

// Likelihood byte b maps to likelihood b / 255 exactly.
LikelihoodMap likelihood_from_gray(const GrayImage& img);
GrayImage likelihood_to_gray(const LikelihoodMap& map);

BinaryMask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

LikelihoodMap read_likelihood_png(const std::filesystem::path& path);
void write_likelihood_png(const std::filesystem::path& path,
                          const LikelihoodMap& map);

}  // namespace wds

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sgst/error.hpp"

namespace sgst {

// Interleaved H x W x C raster. Depth maps are single-band u16 millimeters,
// color frames are 3-band u8.
template <typename T>
struct Image {
    int64_t h = 0;
    int64_t w = 0;
    int64_t c = 1;
    std::vector<T> data;

    Image() = default;
    Image(int64_t h_, int64_t w_, int64_t c_) : h(h_), w(w_), c(c_), data(static_cast<size_t>(h_ * w_ * c_), T(0)) {
        if (h_ <= 0 || w_ <= 0 || c_ <= 0) throw DataError("image dimensions must be positive");
    }

    T& at(int64_t y, int64_t x, int64_t ch = 0) { return data[static_cast<size_t>((y * w + x) * c + ch)]; }
    const T& at(int64_t y, int64_t x, int64_t ch = 0) const {
        return data[static_cast<size_t>((y * w + x) * c + ch)];
    }

    int64_t pixels() const { return h * w; }
    bool same_dims(const Image& o) const { return h == o.h && w == o.w && c == o.c; }
};

using ImageU8 = Image<uint8_t>;
using ImageU16 = Image<uint16_t>;
using ImageF = Image<float>;

// round-half-up quantization used everywhere a float becomes a pixel level
inline double round_half_up(double v) { return std::floor(v + 0.5); }

// Bilinear sample with edge replication; coordinates clamp to the frame.
template <typename T>
double sample_bilinear(const Image<T>& img, double y, double x, int64_t ch);

template <typename T>
Image<T> crop(const Image<T>& img, int64_t top, int64_t left, int64_t out_h, int64_t out_w);

// Rotation about the frame center, bilinear, out-of-support pixels replicate
// the nearest edge. angle_deg = 0 returns a bit-identical copy.
template <typename T>
Image<T> rotate_about_center(const Image<T>& img, double angle_deg);

template <typename T>
Image<T> resize_bilinear(const Image<T>& img, int64_t out_h, int64_t out_w);

// Scales so the short side equals `short_side`, preserving aspect ratio.
template <typename T>
Image<T> resize_short_side(const Image<T>& img, int64_t short_side);

// Rec.601 luma: 0.299 R + 0.587 G + 0.114 B. Single-band inputs pass through.
ImageF to_gray_rec601(const ImageU8& rgb);

// Netpbm readers/writers: P6 for 8-bit RGB, P5 maxval 65535 for 16-bit depth
// (two bytes per sample, most significant first).
void write_ppm(const std::string& path, const ImageU8& img);
ImageU8 read_ppm(const std::string& path);
void write_pgm16(const std::string& path, const ImageU16& img);
ImageU16 read_pgm16(const std::string& path);

}  // namespace sgst

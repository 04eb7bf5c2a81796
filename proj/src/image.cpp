#include "sgst/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace sgst {

namespace {

template <typename T>
T quantize(double v) {
    if constexpr (std::is_floating_point_v<T>) {
        return static_cast<T>(v);
    } else {
        const double r = round_half_up(v);
        const double lo = 0.0;
        const double hi = static_cast<double>(std::numeric_limits<T>::max());
        return static_cast<T>(std::clamp(r, lo, hi));
    }
}

}  // namespace

template <typename T>
double sample_bilinear(const Image<T>& img, double y, double x, int64_t ch) {
    const double yc = std::clamp(y, 0.0, static_cast<double>(img.h - 1));
    const double xc = std::clamp(x, 0.0, static_cast<double>(img.w - 1));
    const int64_t y0 = static_cast<int64_t>(std::floor(yc));
    const int64_t x0 = static_cast<int64_t>(std::floor(xc));
    const int64_t y1 = std::min(y0 + 1, img.h - 1);
    const int64_t x1 = std::min(x0 + 1, img.w - 1);
    const double fy = yc - static_cast<double>(y0);
    const double fx = xc - static_cast<double>(x0);
    const double v00 = static_cast<double>(img.at(y0, x0, ch));
    const double v01 = static_cast<double>(img.at(y0, x1, ch));
    const double v10 = static_cast<double>(img.at(y1, x0, ch));
    const double v11 = static_cast<double>(img.at(y1, x1, ch));
    return v00 * (1 - fy) * (1 - fx) + v01 * (1 - fy) * fx + v10 * fy * (1 - fx) + v11 * fy * fx;
}

template <typename T>
Image<T> crop(const Image<T>& img, int64_t top, int64_t left, int64_t out_h, int64_t out_w) {
    if (top < 0 || left < 0 || top + out_h > img.h || left + out_w > img.w)
        throw DataError("crop window [" + std::to_string(top) + "," + std::to_string(left) + " " +
                        std::to_string(out_h) + "x" + std::to_string(out_w) + "] outside frame " +
                        std::to_string(img.h) + "x" + std::to_string(img.w));
    Image<T> out(out_h, out_w, img.c);
    for (int64_t y = 0; y < out_h; ++y) {
        const T* src = &img.at(top + y, left, 0);
        T* dst = &out.at(y, 0, 0);
        std::copy(src, src + out_w * img.c, dst);
    }
    return out;
}

template <typename T>
Image<T> rotate_about_center(const Image<T>& img, double angle_deg) {
    if (angle_deg == 0.0) return img;
    const double theta = angle_deg * 3.14159265358979323846 / 180.0;
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const double cy = static_cast<double>(img.h - 1) / 2.0;
    const double cx = static_cast<double>(img.w - 1) / 2.0;
    Image<T> out(img.h, img.w, img.c);
    for (int64_t y = 0; y < img.h; ++y) {
        for (int64_t x = 0; x < img.w; ++x) {
            const double dy = static_cast<double>(y) - cy;
            const double dx = static_cast<double>(x) - cx;
            // inverse map: where does this output pixel come from
            const double sy = cy + st * dx + ct * dy;
            const double sx = cx + ct * dx - st * dy;
            for (int64_t ch = 0; ch < img.c; ++ch)
                out.at(y, x, ch) = quantize<T>(sample_bilinear(img, sy, sx, ch));
        }
    }
    return out;
}

template <typename T>
Image<T> resize_bilinear(const Image<T>& img, int64_t out_h, int64_t out_w) {
    if (out_h <= 0 || out_w <= 0) throw DataError("resize target must be positive");
    if (out_h == img.h && out_w == img.w) return img;
    Image<T> out(out_h, out_w, img.c);
    const double sy = static_cast<double>(img.h) / static_cast<double>(out_h);
    const double sx = static_cast<double>(img.w) / static_cast<double>(out_w);
    for (int64_t y = 0; y < out_h; ++y) {
        const double src_y = (static_cast<double>(y) + 0.5) * sy - 0.5;
        for (int64_t x = 0; x < out_w; ++x) {
            const double src_x = (static_cast<double>(x) + 0.5) * sx - 0.5;
            for (int64_t ch = 0; ch < img.c; ++ch)
                out.at(y, x, ch) = quantize<T>(sample_bilinear(img, src_y, src_x, ch));
        }
    }
    return out;
}

template <typename T>
Image<T> resize_short_side(const Image<T>& img, int64_t short_side) {
    if (short_side <= 0) throw DataError("short side must be positive");
    if (std::min(img.h, img.w) == short_side) return img;
    int64_t out_h, out_w;
    if (img.h <= img.w) {
        out_h = short_side;
        out_w = std::max<int64_t>(1, static_cast<int64_t>(round_half_up(
                                          static_cast<double>(img.w) * static_cast<double>(short_side) /
                                          static_cast<double>(img.h))));
    } else {
        out_w = short_side;
        out_h = std::max<int64_t>(1, static_cast<int64_t>(round_half_up(
                                          static_cast<double>(img.h) * static_cast<double>(short_side) /
                                          static_cast<double>(img.w))));
    }
    return resize_bilinear(img, out_h, out_w);
}

ImageF to_gray_rec601(const ImageU8& rgb) {
    ImageF out(rgb.h, rgb.w, 1);
    if (rgb.c == 1) {
        for (int64_t i = 0; i < rgb.pixels(); ++i) out.data[static_cast<size_t>(i)] = rgb.data[static_cast<size_t>(i)];
        return out;
    }
    if (rgb.c != 3) throw DataError("grayscale conversion expects 1 or 3 bands, got " + std::to_string(rgb.c));
    for (int64_t i = 0; i < rgb.pixels(); ++i) {
        const double r = rgb.data[static_cast<size_t>(i * 3 + 0)];
        const double g = rgb.data[static_cast<size_t>(i * 3 + 1)];
        const double b = rgb.data[static_cast<size_t>(i * 3 + 2)];
        out.data[static_cast<size_t>(i)] = static_cast<float>(0.299 * r + 0.587 * g + 0.114 * b);
    }
    return out;
}

namespace {

void skip_pnm_space(std::istream& f) {
    int ch = f.peek();
    while (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == '#') {
        if (ch == '#') {
            std::string line;
            std::getline(f, line);
        } else {
            f.get();
        }
        ch = f.peek();
    }
}

int64_t read_pnm_int(std::istream& f) {
    skip_pnm_space(f);
    int64_t v = 0;
    if (!(f >> v)) throw DataError("malformed netpbm header");
    return v;
}

}  // namespace

void write_ppm(const std::string& path, const ImageU8& img) {
    if (img.c != 3) throw DataError("write_ppm expects a 3-band image");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for write: " + path);
    f << "P6\n" << img.w << " " << img.h << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (!f) throw DataError("write failed: " + path);
}

ImageU8 read_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open: " + path);
    std::string magic;
    f >> magic;
    if (magic != "P6") throw DataError(path + ": expected P6 ppm");
    const int64_t w = read_pnm_int(f);
    const int64_t h = read_pnm_int(f);
    const int64_t maxval = read_pnm_int(f);
    if (maxval != 255) throw DataError(path + ": only maxval 255 supported for ppm");
    f.get();  // single whitespace after maxval
    ImageU8 img(h, w, 3);
    f.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (!f) throw DataError(path + ": truncated ppm payload");
    return img;
}

void write_pgm16(const std::string& path, const ImageU16& img) {
    if (img.c != 1) throw DataError("write_pgm16 expects a single-band image");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for write: " + path);
    f << "P5\n" << img.w << " " << img.h << "\n65535\n";
    std::vector<uint8_t> buf(img.data.size() * 2);
    for (size_t i = 0; i < img.data.size(); ++i) {
        buf[i * 2] = static_cast<uint8_t>(img.data[i] >> 8);
        buf[i * 2 + 1] = static_cast<uint8_t>(img.data[i] & 0xff);
    }
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) throw DataError("write failed: " + path);
}

ImageU16 read_pgm16(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open: " + path);
    std::string magic;
    f >> magic;
    if (magic != "P5") throw DataError(path + ": expected P5 pgm");
    const int64_t w = read_pnm_int(f);
    const int64_t h = read_pnm_int(f);
    const int64_t maxval = read_pnm_int(f);
    f.get();
    ImageU16 img(h, w, 1);
    if (maxval == 65535) {
        std::vector<uint8_t> buf(img.data.size() * 2);
        f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!f) throw DataError(path + ": truncated pgm payload");
        for (size_t i = 0; i < img.data.size(); ++i)
            img.data[i] = static_cast<uint16_t>((buf[i * 2] << 8) | buf[i * 2 + 1]);
    } else if (maxval == 255) {
        std::vector<uint8_t> buf(img.data.size());
        f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!f) throw DataError(path + ": truncated pgm payload");
        for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = buf[i];
    } else {
        throw DataError(path + ": unsupported pgm maxval " + std::to_string(maxval));
    }
    return img;
}

#define SGST_INSTANTIATE_IMAGE(T)                                                              \
    template double sample_bilinear<T>(const Image<T>&, double, double, int64_t);              \
    template Image<T> crop<T>(const Image<T>&, int64_t, int64_t, int64_t, int64_t);            \
    template Image<T> rotate_about_center<T>(const Image<T>&, double);                         \
    template Image<T> resize_bilinear<T>(const Image<T>&, int64_t, int64_t);                   \
    template Image<T> resize_short_side<T>(const Image<T>&, int64_t);

SGST_INSTANTIATE_IMAGE(uint8_t)
SGST_INSTANTIATE_IMAGE(uint16_t)
SGST_INSTANTIATE_IMAGE(float)

#undef SGST_INSTANTIATE_IMAGE

}  // namespace sgst

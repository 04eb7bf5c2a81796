#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "sgst/tensor.hpp"

namespace sgst {

// Binary tensor container used for clips, flow fields, stream samples and
// checkpoint chunks.
//
// Layout (little-endian):
//   magic   "SGST"        4 bytes
//   version u16           currently 1
//   dtype   u8            1 = f32, 2 = u8, 3 = u16
//   ndim    u8
//   dims    ndim x u32
//   payload row-major, native element width
//   crc32   u32           over everything above (header + payload)
//
// Round-trips are bit-exact. Readers reject bad magic, unknown version or
// dtype, zero dims, truncated payloads and checksum mismatches.

enum class Dtype : uint8_t { F32 = 1, U8 = 2, U16 = 3 };

inline size_t dtype_size(Dtype d) {
    switch (d) {
        case Dtype::F32: return 4;
        case Dtype::U8: return 1;
        case Dtype::U16: return 2;
    }
    throw DataError("unknown dtype tag " + std::to_string(static_cast<int>(d)));
}

template <typename T>
struct dtype_of;
template <>
struct dtype_of<float> {
    static constexpr Dtype value = Dtype::F32;
};
template <>
struct dtype_of<uint8_t> {
    static constexpr Dtype value = Dtype::U8;
};
template <>
struct dtype_of<uint16_t> {
    static constexpr Dtype value = Dtype::U16;
};

std::vector<uint8_t> write_clip_tensor(const Shape& shape, Dtype dtype, const void* payload);

struct RawClipTensor {
    Shape shape;
    Dtype dtype;
    std::vector<uint8_t> payload;
};

RawClipTensor read_clip_tensor(const uint8_t* bytes, size_t size);

template <typename T>
std::vector<uint8_t> write_clip_tensor(const Tensor<T>& t) {
    return write_clip_tensor(t.shape, dtype_of<T>::value, t.ptr());
}

template <typename T>
Tensor<T> read_clip_tensor_as(const uint8_t* bytes, size_t size) {
    RawClipTensor raw = read_clip_tensor(bytes, size);
    if (raw.dtype != dtype_of<T>::value)
        throw DataError("tensor file holds dtype tag " + std::to_string(static_cast<int>(raw.dtype)) +
                        ", caller expected " + std::to_string(static_cast<int>(dtype_of<T>::value)));
    Tensor<T> t(raw.shape);
    std::memcpy(t.ptr(), raw.payload.data(), raw.payload.size());
    return t;
}

template <typename T>
Tensor<T> read_clip_tensor_as(const std::vector<uint8_t>& bytes) {
    return read_clip_tensor_as<T>(bytes.data(), bytes.size());
}

// File helpers.
void save_bytes(const std::string& path, const std::vector<uint8_t>& bytes);
std::vector<uint8_t> load_bytes(const std::string& path);

template <typename T>
void save_clip_tensor(const std::string& path, const Tensor<T>& t) {
    save_bytes(path, write_clip_tensor(t));
}

template <typename T>
Tensor<T> load_clip_tensor(const std::string& path) {
    std::vector<uint8_t> bytes = load_bytes(path);
    return read_clip_tensor_as<T>(bytes.data(), bytes.size());
}

RawClipTensor load_clip_tensor_raw(const std::string& path);

}  // namespace sgst

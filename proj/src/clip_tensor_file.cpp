#include "sgst/clip_tensor_file.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

namespace sgst {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'S', 'T'};
constexpr uint16_t kVersion = 1;

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

uint16_t get_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

uint32_t get_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) | (static_cast<uint32_t>(p[2]) << 16) |
           (static_cast<uint32_t>(p[3]) << 24);
}

uint32_t crc_of(const uint8_t* p, size_t n) {
    return static_cast<uint32_t>(crc32(0L, reinterpret_cast<const Bytef*>(p), static_cast<uInt>(n)));
}

}  // namespace

std::vector<uint8_t> write_clip_tensor(const Shape& shape, Dtype dtype, const void* payload) {
    if (shape.empty()) throw DataError("refusing to write tensor with no dimensions");
    for (int64_t d : shape) {
        if (d <= 0) throw DataError("refusing to write tensor with empty dimension in " + shape_str(shape));
        if (d > UINT32_MAX) throw DataError("dimension too large for format: " + std::to_string(d));
    }
    if (shape.size() > 255) throw DataError("too many dimensions: " + std::to_string(shape.size()));

    const size_t elems = static_cast<size_t>(shape_numel(shape));
    const size_t payload_bytes = elems * dtype_size(dtype);

    std::vector<uint8_t> out;
    out.reserve(12 + 4 * shape.size() + payload_bytes + 4);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u16(out, kVersion);
    out.push_back(static_cast<uint8_t>(dtype));
    out.push_back(static_cast<uint8_t>(shape.size()));
    for (int64_t d : shape) put_u32(out, static_cast<uint32_t>(d));
    const uint8_t* src = static_cast<const uint8_t*>(payload);
    out.insert(out.end(), src, src + payload_bytes);
    put_u32(out, crc_of(out.data(), out.size()));
    return out;
}

RawClipTensor read_clip_tensor(const uint8_t* bytes, size_t size) {
    if (size < 8) throw DataError("tensor file truncated: " + std::to_string(size) + " bytes");
    if (std::memcmp(bytes, kMagic, 4) != 0) throw DataError("bad magic, not a SGST tensor file");
    const uint16_t version = get_u16(bytes + 4);
    if (version != kVersion)
        throw DataError("unsupported tensor file version " + std::to_string(version));
    const uint8_t dtype_tag = bytes[6];
    if (dtype_tag != 1 && dtype_tag != 2 && dtype_tag != 3)
        throw DataError("unknown dtype tag " + std::to_string(dtype_tag));
    const Dtype dtype = static_cast<Dtype>(dtype_tag);
    const size_t ndim = bytes[7];
    if (ndim == 0) throw DataError("tensor file has zero dimensions");
    const size_t header = 8 + 4 * ndim;
    if (size < header + 4) throw DataError("tensor file truncated in header");

    RawClipTensor raw;
    raw.dtype = dtype;
    raw.shape.resize(ndim);
    size_t elems = 1;
    for (size_t i = 0; i < ndim; ++i) {
        uint32_t d = get_u32(bytes + 8 + 4 * i);
        if (d == 0) throw DataError("tensor file has empty dimension " + std::to_string(i));
        raw.shape[i] = d;
        elems *= d;
    }
    const size_t payload_bytes = elems * dtype_size(dtype);
    if (size != header + payload_bytes + 4)
        throw DataError("tensor file size mismatch: have " + std::to_string(size) + " bytes, header+dims imply " +
                        std::to_string(header + payload_bytes + 4));
    const uint32_t stored = get_u32(bytes + size - 4);
    const uint32_t actual = crc_of(bytes, size - 4);
    if (stored != actual) throw DataError("tensor file checksum mismatch");
    raw.payload.assign(bytes + header, bytes + header + payload_bytes);
    return raw;
}

void save_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for write: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("write failed: " + path);
}

std::vector<uint8_t> load_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw DataError("cannot open: " + path);
    const std::streamsize n = f.tellg();
    f.seekg(0);
    std::vector<uint8_t> bytes(static_cast<size_t>(n));
    f.read(reinterpret_cast<char*>(bytes.data()), n);
    if (!f) throw DataError("read failed: " + path);
    return bytes;
}

RawClipTensor load_clip_tensor_raw(const std::string& path) {
    std::vector<uint8_t> bytes = load_bytes(path);
    return read_clip_tensor(bytes.data(), bytes.size());
}

}  // namespace sgst

#include "sgst/chunk_file.hpp"

#include <zlib.h>

#include <cstring>

#include "sgst/clip_tensor_file.hpp"

namespace sgst {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'C', 'K'};
constexpr uint16_t kVersion = 1;

template <typename T>
void put_le(std::vector<uint8_t>& out, T v) {
    for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const uint8_t* p) {
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<uint8_t> write_chunk_file(const std::vector<Chunk>& chunks) {
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_le<uint16_t>(out, kVersion);
    put_le<uint32_t>(out, static_cast<uint32_t>(chunks.size()));
    for (const Chunk& c : chunks) {
        if (c.name.size() > UINT16_MAX) throw DataError("chunk name too long");
        put_le<uint16_t>(out, static_cast<uint16_t>(c.name.size()));
        out.insert(out.end(), c.name.begin(), c.name.end());
        out.push_back(c.kind);
        put_le<uint64_t>(out, c.payload.size());
        out.insert(out.end(), c.payload.begin(), c.payload.end());
    }
    const uint32_t crc =
        static_cast<uint32_t>(crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size())));
    put_le<uint32_t>(out, crc);
    return out;
}

std::vector<Chunk> read_chunk_file(const uint8_t* bytes, size_t size) {
    if (size < 14) throw DataError("chunk file truncated");
    if (std::memcmp(bytes, kMagic, 4) != 0) throw DataError("bad magic, not a SGCK chunk file");
    const uint16_t version = get_le<uint16_t>(bytes + 4);
    if (version != kVersion) throw DataError("unsupported chunk file version " + std::to_string(version));
    const uint32_t stored_crc = get_le<uint32_t>(bytes + size - 4);
    const uint32_t actual_crc = static_cast<uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes), static_cast<uInt>(size - 4)));
    if (stored_crc != actual_crc) throw DataError("chunk file checksum mismatch");

    const uint32_t count = get_le<uint32_t>(bytes + 6);
    std::vector<Chunk> chunks;
    chunks.reserve(count);
    size_t off = 10;
    const size_t end = size - 4;
    for (uint32_t i = 0; i < count; ++i) {
        if (off + 2 > end) throw DataError("chunk file truncated in chunk header");
        const uint16_t name_len = get_le<uint16_t>(bytes + off);
        off += 2;
        if (off + name_len + 9 > end) throw DataError("chunk file truncated in chunk header");
        Chunk c;
        c.name.assign(reinterpret_cast<const char*>(bytes + off), name_len);
        off += name_len;
        c.kind = bytes[off++];
        const uint64_t payload = get_le<uint64_t>(bytes + off);
        off += 8;
        if (off + payload > end) throw DataError("chunk '" + c.name + "' payload truncated");
        c.payload.assign(bytes + off, bytes + off + payload);
        off += payload;
        chunks.push_back(std::move(c));
    }
    if (off != end) throw DataError("chunk file has trailing bytes");
    return chunks;
}

void save_chunk_file(const std::string& path, const std::vector<Chunk>& chunks) {
    save_bytes(path, write_chunk_file(chunks));
}

std::vector<Chunk> load_chunk_file(const std::string& path) {
    std::vector<uint8_t> bytes = load_bytes(path);
    return read_chunk_file(bytes.data(), bytes.size());
}

}  // namespace sgst

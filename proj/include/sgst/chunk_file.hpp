#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgst/error.hpp"

namespace sgst {

// Named-chunk container used by checkpoints: a text manifest chunk plus one
// tensor chunk (ClipTensorFile bytes) per parameter.
//
// Layout (little-endian):
//   magic "SGCK", u16 version, u32 chunk count
//   per chunk: u16 name length, name bytes, u8 kind, u64 payload size, payload
//   trailing u32 CRC32 over everything above
struct Chunk {
    static constexpr uint8_t kText = 0;
    static constexpr uint8_t kTensor = 1;

    std::string name;
    uint8_t kind = kText;
    std::vector<uint8_t> payload;
};

std::vector<uint8_t> write_chunk_file(const std::vector<Chunk>& chunks);
std::vector<Chunk> read_chunk_file(const uint8_t* bytes, size_t size);

void save_chunk_file(const std::string& path, const std::vector<Chunk>& chunks);
std::vector<Chunk> load_chunk_file(const std::string& path);

}  // namespace sgst

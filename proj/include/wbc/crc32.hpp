#pragma once

#include <cstddef>
#include <cstdint>

namespace wbc {

// CRC-32 (IEEE), incremental: pass the previous result as `seed`.
uint32_t crc32(const void* data, size_t len, uint32_t seed = 0);

}  // namespace wbc

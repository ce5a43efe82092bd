#include "pv/confidence_map.hpp"

#include "pv/error.hpp"
#include "pv/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace pv {

ConfidenceMap::ConfidenceMap(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values))
{
    if (width < 1 || height < 1 || values_.size() != static_cast<std::size_t>(width) * height)
        throw Error(ErrorCode::InvalidMap, "confidence map dimensions do not match its data");
    for (float v : values_)
        if (!(v >= 0.0f && v <= 1.0f))
            throw Error(ErrorCode::InvalidMap, "confidence values must lie in [0,1]");
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p)
{
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 | static_cast<std::uint32_t>(p[2]) << 16 |
           static_cast<std::uint32_t>(p[3]) << 24;
}

} // namespace

std::vector<std::uint8_t> encode_cmap(const ConfidenceMap& map)
{
    std::vector<std::uint8_t> out{'C', 'M', 'A', 'P', kCmapVersion};
    out.reserve(13 + map.size() * 4);
    put_u32(out, static_cast<std::uint32_t>(map.width()));
    put_u32(out, static_cast<std::uint32_t>(map.height()));
    for (float v : map.values())
        put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

ConfidenceMap decode_cmap(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 13 || std::memcmp(bytes.data(), "CMAP", 4) != 0)
        throw Error(ErrorCode::InvalidMap, "not a CMAP file");
    if (bytes[4] != kCmapVersion)
        throw Error(ErrorCode::InvalidMap, "unsupported CMAP version " + std::to_string(bytes[4]));
    const std::uint32_t w = get_u32(bytes.data() + 5);
    const std::uint32_t h = get_u32(bytes.data() + 9);
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (bytes.size() - 13 != n * 4)
        throw Error(ErrorCode::InvalidMap, "CMAP payload size does not match dimensions");
    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i)
        values[i] = std::bit_cast<float>(get_u32(bytes.data() + 13 + 4 * i));
    return ConfidenceMap(static_cast<int>(w), static_cast<int>(h), std::move(values));
}

void save_cmap(const ConfidenceMap& map, const std::filesystem::path& path) { write_atomic(path, encode_cmap(map)); }

ConfidenceMap load_cmap(const std::filesystem::path& path) { return decode_cmap(read_bytes(path)); }

} // namespace pv

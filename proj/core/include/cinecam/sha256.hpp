#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace cinecam {

/// Incremental SHA-256 (FIPS 180-4). Used for content hashes in run
/// manifests; not a cryptographic dependency worth pulling a library for.
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t n);
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::array<std::uint8_t, 32> digest();

private:
    void block(const std::uint8_t* p);
    std::array<std::uint32_t, 8> h_;
    std::array<std::uint8_t, 64> buf_;
    std::uint64_t total_ = 0;
    std::size_t fill_ = 0;
};

/// Hex digest of a byte string.
std::string sha256_hex(std::string_view data);

}  // namespace cinecam

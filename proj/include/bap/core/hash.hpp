#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

namespace bap {

using Byte = std::uint8_t;
using Bytes = std::vector<Byte>;

//! Fixed-width opaque byte string. The tag keeps digests and addresses from
//! being mixed up even though both are just bytes.
template <std::size_t N, class Tag>
struct Blob {
    static constexpr std::size_t size = N;

    std::array<Byte, N> bytes{};

    auto operator<=>(const Blob&) const = default;

    [[nodiscard]] bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }

    [[nodiscard]] std::span<const Byte, N> span() const { return bytes; }

    [[nodiscard]] std::string hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(2 * N);
        for (auto b : bytes) {
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0x0f]);
        }
        return out;
    }

    static Blob from_hex(std::string_view text) {
        if (text.size() != 2 * N)
            throw std::invalid_argument("hex string has wrong length for a " + std::to_string(N) + "-byte value");
        auto nibble = [](char c) -> Byte {
            if (c >= '0' && c <= '9') return static_cast<Byte>(c - '0');
            if (c >= 'a' && c <= 'f') return static_cast<Byte>(c - 'a' + 10);
            if (c >= 'A' && c <= 'F') return static_cast<Byte>(c - 'A' + 10);
            throw std::invalid_argument("invalid hex digit");
        };
        Blob out;
        for (std::size_t i = 0; i < N; ++i)
            out.bytes[i] = static_cast<Byte>((nibble(text[2 * i]) << 4) | nibble(text[2 * i + 1]));
        return out;
    }
};

struct HashTag {};
struct AddressTag {};

//! 32-byte digest. Ordering is bytewise.
using Hash = Blob<32, HashTag>;
//! 20-byte miner coinbase address.
using Address = Blob<20, AddressTag>;

//! Incremental SHA-256 over OpenSSL's EVP interface.
class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("SHA-256 initialisation failed");
    }

    Sha256& update(std::span<const Byte> data) {
        if (!data.empty() && EVP_DigestUpdate(ctx_.get(), data.data(), data.size()) != 1)
            throw std::runtime_error("SHA-256 update failed");
        return *this;
    }

    Sha256& update(std::string_view text) {
        return update({reinterpret_cast<const Byte*>(text.data()), text.size()});
    }

    Hash finish() {
        Hash out;
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), out.bytes.data(), &len) != 1 || len != Hash::size)
            throw std::runtime_error("SHA-256 finalisation failed");
        EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr);
        return out;
    }

private:
    struct Free {
        void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
    };
    std::unique_ptr<EVP_MD_CTX, Free> ctx_;
};

inline Hash sha256(std::span<const Byte> data) {
    thread_local Sha256 ctx;
    return ctx.update(data).finish();
}

//! Digest underlying every id in the system: SHA-256 applied twice.
inline Hash hash_bytes(std::span<const Byte> data) {
    const Hash once = sha256(data);
    return sha256(once.bytes);
}

inline Hash hash_bytes(std::string_view text) {
    return hash_bytes({reinterpret_cast<const Byte*>(text.data()), text.size()});
}

//! Number of leading zero bits, most significant bit of byte 0 first.
inline int leading_zero_bits(const Hash& h) {
    int count = 0;
    for (auto b : h.bytes) {
        if (b == 0) {
            count += 8;
            continue;
        }
        for (int bit = 7; bit >= 0 && !(b & (1u << bit)); --bit)
            ++count;
        break;
    }
    return count;
}

} // namespace bap

template <std::size_t N, class Tag>
struct std::hash<bap::Blob<N, Tag>> {
    std::size_t operator()(const bap::Blob<N, Tag>& b) const noexcept {
        std::uint64_t v;
        std::memcpy(&v, b.bytes.data(), sizeof v);
        return static_cast<std::size_t>(v);
    }
};

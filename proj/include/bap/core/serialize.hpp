#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

#include "bap/core/hash.hpp"

namespace bap {

//! Canonical encoder: big-endian fixed-width integers, raw fixed-size blobs,
//! u32 length prefixes on lists. See docs/wire-format.md.
class Writer {
public:
    Writer& u8(std::uint8_t v) {
        buf_.push_back(v);
        return *this;
    }
    Writer& u16(std::uint16_t v) { return be(v, 2); }
    Writer& u32(std::uint32_t v) { return be(v, 4); }
    Writer& u64(std::uint64_t v) { return be(v, 8); }
    Writer& i32(std::int32_t v) { return be(static_cast<std::uint32_t>(v), 4); }
    Writer& i64(std::int64_t v) { return be(static_cast<std::uint64_t>(v), 8); }

    template <std::size_t N, class Tag>
    Writer& blob(const Blob<N, Tag>& b) {
        buf_.insert(buf_.end(), b.bytes.begin(), b.bytes.end());
        return *this;
    }

    Writer& list_size(std::size_t n) {
        if (n > std::numeric_limits<std::uint32_t>::max())
            throw std::length_error("list too long for canonical encoding");
        return u32(static_cast<std::uint32_t>(n));
    }

    [[nodiscard]] const Bytes& bytes() const& { return buf_; }
    [[nodiscard]] Bytes bytes() && { return std::move(buf_); }

private:
    Writer& be(std::uint64_t v, int width) {
        for (int shift = 8 * (width - 1); shift >= 0; shift -= 8)
            buf_.push_back(static_cast<Byte>(v >> shift));
        return *this;
    }

    Bytes buf_;
};

} // namespace bap

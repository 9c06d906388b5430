#pragma once

#include "bap/core/types.hpp"

namespace bap {

//! True iff the header hash meets the header's own difficulty target.
inline bool check_pow(const BlockHeader& header) {
    return header.difficulty_target.accepts(header_hash(header));
}

} // namespace bap

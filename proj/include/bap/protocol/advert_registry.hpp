#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>

#include "bap/protocol/messages.hpp"

namespace bap {

enum class RegisterResult { REGISTERED, DUPLICATE_REJECTED };

//! Known adverts keyed by (coinbase address, previous block hash). The first
//! advert seen for a key wins; later ones are rejected to stop spamming.
class AdvertRegistry {
public:
    using Key = std::pair<Address, Hash>;

    RegisterResult register_advert(const Advert& advert) {
        auto [it, inserted] = entries_.try_emplace(Key{advert.coinbase_address, advert.prev_block_hash}, advert);
        return inserted ? RegisterResult::REGISTERED : RegisterResult::DUPLICATE_REJECTED;
    }

    [[nodiscard]] const Advert* find(const Address& coinbase_address, const Hash& prev_block_hash) const {
        auto it = entries_.find(Key{coinbase_address, prev_block_hash});
        return it == entries_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] bool contains(const Address& c, const Hash& h) const { return find(c, h) != nullptr; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] const std::map<Key, Advert>& entries() const { return entries_; }

    //! Drop entries whose previous-block hash satisfies the predicate.
    template <class Pred>
    std::size_t evict_if(Pred&& stale_prev_hash) {
        return std::erase_if(entries_, [&](const auto& kv) { return stale_prev_hash(kv.first.second); });
    }

private:
    std::map<Key, Advert> entries_;
};

inline RegisterResult register_advert(AdvertRegistry& registry, const Advert& advert) {
    return registry.register_advert(advert);
}

} // namespace bap

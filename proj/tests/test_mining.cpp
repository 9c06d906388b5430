#include <gtest/gtest.h>

#include "bap/mining/miner.hpp"
#include "bap/mining/mining_time.hpp"
#include "support/oracles.hpp"

using namespace bap;

namespace {

BlockHeader golden_header(std::uint32_t nonce) {
    BlockHeader h;
    h.merkle_root.bytes.fill(0x55);
    h.difficulty_target = CompactTarget::of(8);
    h.nonce = nonce;
    return h;
}

BlockTemplate small_template(int bits, std::uint64_t salt = 0) {
    std::vector<Transaction> txs{testkit::spend_funding({0}, 300, salt), testkit::spend_funding({1, 2}, 400, salt + 9)};
    return BlockTemplate(hash_bytes("parent"), CoinbaseTransaction{testkit::address_of(salt), 50, 0, 200},
                         std::move(txs), CompactTarget::of(bits));
}

} // namespace

// First qualifying nonce found by a brute-force Python scan of the same header.
TEST(Pow, GoldenEightBits) {
    for (std::uint32_t n = 0; n < 90; ++n)
        EXPECT_FALSE(check_pow(golden_header(n))) << n;
    EXPECT_TRUE(check_pow(golden_header(90)));
    EXPECT_EQ(header_hash(golden_header(90)).hex(), "002285bc501238f4bc97908dd75fd92d81e4837b4bf24c4a327b71b363e9aab0");
}

TEST(Pow, ZeroBitsAlwaysPasses) {
    auto h = golden_header(0);
    h.difficulty_target = CompactTarget::of(0);
    EXPECT_TRUE(check_pow(h));
}

TEST(Miner, FindsTheFirstQualifyingNonce) {
    const auto tmpl = small_template(8);
    const auto r = mine(tmpl, MiningBudget(1 << 20));
    ASSERT_TRUE(r.block);
    EXPECT_TRUE(check_pow(r.block->header));
    EXPECT_EQ(r.hash_evaluations, r.block->header.nonce + 1u);
    auto h = r.block->header;
    for (std::uint32_t n = 0; n < r.block->header.nonce; ++n) {
        h.nonce = n;
        EXPECT_LT(testkit::oracle_zero_bits(header_hash(h)), 8);
    }
}

TEST(Miner, BlockCommitsToTemplate) {
    const auto tmpl = small_template(6, 5);
    const auto b = *mine(tmpl, MiningBudget(1 << 20)).block;
    EXPECT_EQ(b.header.prev_block_hash, tmpl.prev_block_hash());
    EXPECT_EQ(b.coinbase, tmpl.coinbase());
    EXPECT_EQ(b.transactions.size(), 2u);
    EXPECT_EQ(b.header.merkle_root, compute_merkle_root(b));
    EXPECT_EQ(b.header.timestamp, tmpl.base_timestamp());
}

TEST(Miner, Deterministic) {
    const auto a = mine(small_template(8, 3), MiningBudget(1 << 20));
    const auto b = mine(small_template(8, 3), MiningBudget(1 << 20));
    ASSERT_TRUE(a.block && b.block);
    EXPECT_EQ(*a.block, *b.block);
    EXPECT_EQ(a.hash_evaluations, b.hash_evaluations);
}

TEST(Miner, BudgetExhaustion) {
    const auto r = mine(small_template(40), MiningBudget(1000));
    EXPECT_FALSE(r.block);
    EXPECT_EQ(r.hash_evaluations, 1000u);
    EXPECT_THROW(MiningBudget(0), std::invalid_argument);
}

TEST(Miner, TemplateOverSizeCapRejected) {
    std::vector<Transaction> txs{testkit::spend_funding({0}, 999'721, 1)};
    EXPECT_THROW(BlockTemplate(Hash{}, CoinbaseTransaction{}, txs, CompactTarget::of(1)), std::invalid_argument);
    txs[0].nominal_size_bytes = 999'720;
    EXPECT_NO_THROW(BlockTemplate(Hash{}, CoinbaseTransaction{}, txs, CompactTarget::of(1)));
}

TEST(Miner, MeanEvaluationsNearTwoToTheBits) {
    double total = 0.0;
    const int trials = 600;
    for (int t = 0; t < trials; ++t)
        total += static_cast<double>(mine(small_template(4, 1000 + t), MiningBudget(1 << 20)).hash_evaluations);
    EXPECT_NEAR(total / trials, 16.0, 1.6);
}

TEST(MiningTime, Expected) {
    EXPECT_DOUBLE_EQ(expected_mining_time(HashRate(100.0), CompactTarget::of(10)), 10.24);
    EXPECT_THROW(HashRate(0.0), std::invalid_argument);
    EXPECT_THROW(HashRate(-1.0), std::invalid_argument);
    EXPECT_THROW(HashRate(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(MiningTime, SampleMean) {
    RandomStream rng(99);
    double total = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double t = sample_mining_time(HashRate(100.0), CompactTarget::of(10), rng);
        ASSERT_GE(t, 0.0);
        total += t;
    }
    EXPECT_NEAR(total / n, 10.24, 10.24 * 0.02);
}

TEST(MiningTime, SameSeedSameSamples) {
    RandomStream a(5), b(5);
    for (int i = 0; i < 50; ++i)
        EXPECT_EQ(sample_mining_time(HashRate(3.0), CompactTarget::of(4), a),
                  sample_mining_time(HashRate(3.0), CompactTarget::of(4), b));
}

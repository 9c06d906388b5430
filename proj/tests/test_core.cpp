#include <gtest/gtest.h>

#include <cmath>

#include "bap/core/merkle.hpp"
#include "bap/core/random.hpp"
#include "bap/core/size_model.hpp"
#include "bap/protocol/messages.hpp"
#include "support/oracles.hpp"

using namespace bap;

// Golden digests computed with Python hashlib over the byte layouts below.

TEST(Hash, DoubleSha256Golden) {
    EXPECT_EQ(hash_bytes(std::string_view{}).hex(), "5df6e0e2761359d30a8275058e299fcc0381534545f55cf43e41983f5d4c9456");
    EXPECT_EQ(hash_bytes("a").hex(), "bf5d3affb73efd2ec6c36ad3112dd933efed63c4e1cbffcfa88e2759c144f2d8");
    EXPECT_EQ(hash_bytes("b").hex(), "39361160903c6695c6804b7157c7bd10013e9ba89b1f954243bc8e3990b08db9");
    EXPECT_NE(hash_bytes("a"), hash_bytes("b"));
}

TEST(Hash, HexRoundTrip) {
    const Hash h = hash_bytes("round trip");
    EXPECT_EQ(Hash::from_hex(h.hex()), h);
    EXPECT_THROW(Hash::from_hex("abc"), std::invalid_argument);
    EXPECT_THROW(Hash::from_hex(std::string(64, 'g')), std::invalid_argument);
}

TEST(Hash, LeadingZeroBitsMatchesOracle) {
    for (int i = 0; i < 2000; ++i) {
        const Hash h = hash_bytes("lz" + std::to_string(i));
        EXPECT_EQ(leading_zero_bits(h), testkit::oracle_zero_bits(h));
    }
    EXPECT_EQ(leading_zero_bits(Hash{}), 256);
}

TEST(Encoding, TransactionGolden) {
    Transaction tx;
    tx.inputs.push_back({Hash::from_hex(std::string(64, '1')), 7});
    Address to;
    to.bytes.fill(0x22);
    tx.outputs.push_back({to, 1000});
    tx.nominal_size_bytes = 500;
    EXPECT_EQ(serialize(tx).size(), 77u);
    EXPECT_EQ(serialization_floor(tx), 77u);
    EXPECT_EQ(txid(tx).hex(), "9903961d35d594eb515e1220ca4cb68ee6bd613ffe4481197851cbcb63f43eb4");
}

TEST(Encoding, CoinbaseGolden) {
    CoinbaseTransaction cb;
    cb.coinbase_address.bytes.fill(0x33);
    cb.reward = 50;
    cb.extra_nonce = 3;
    cb.nominal_size_bytes = 200;
    EXPECT_EQ(serialize(cb).size(), 41u);
    EXPECT_EQ(txid(cb).hex(), "f0028eba6b17f2ee701993336df8e2c63ceb40a0995ccd2d441d90f79f56b827");
}

TEST(Encoding, HeaderGolden) {
    BlockHeader h;
    h.version = 1;
    h.prev_block_hash.bytes.fill(0x44);
    h.merkle_root.bytes.fill(0x55);
    h.timestamp = 1700000000;
    h.difficulty_target = CompactTarget::of(8);
    h.nonce = 12345;
    EXPECT_EQ(serialize(h).size(), 82u);
    EXPECT_EQ(header_hash(h).hex(), "d4eda5f22ba73513eda7b7a5725c27d47f00561e5169ad17e54723e7f469f6f6");
}

TEST(Encoding, NominalSizeIsPartOfTheId) {
    Transaction a = testkit::spend_funding({0}, 300, 1);
    Transaction b = a;
    b.nominal_size_bytes = 301;
    EXPECT_NE(txid(a), txid(b));
}

TEST(Encoding, StructuralErrors) {
    Transaction tx;
    tx.inputs.push_back({});
    EXPECT_FALSE(structural_error(tx).empty()); // no outputs
    tx.outputs.push_back({});
    tx.nominal_size_bytes = 76;
    EXPECT_FALSE(structural_error(tx).empty());
    tx.nominal_size_bytes = 77;
    EXPECT_TRUE(structural_error(tx).empty());
    CoinbaseTransaction cb;
    cb.nominal_size_bytes = 40;
    EXPECT_FALSE(structural_error(cb).empty());
}

TEST(CompactTarget, Bounds) {
    EXPECT_THROW(CompactTarget::of(-1), std::invalid_argument);
    EXPECT_THROW(CompactTarget::of(257), std::invalid_argument);
    EXPECT_TRUE(CompactTarget::of(0).accepts(hash_bytes("x")));
    EXPECT_FALSE(CompactTarget::of(256).accepts(Hash{}));
    EXPECT_TRUE(CompactTarget::of(255).accepts(Hash{}));
}

TEST(Merkle, GoldenThreeLeaves) {
    std::vector<Hash> leaves;
    for (std::uint8_t i = 0; i < 3; ++i)
        leaves.push_back(hash_bytes(std::span<const Byte>(&i, 1)));
    EXPECT_EQ(merkle_root(leaves).hex(), "e129dfe02f567fc612d126596d43406144f40a771810ac7143421d2df3e5c1d0");
}

TEST(Merkle, SingleLeafIsTheLeaf) {
    const Hash h = hash_bytes("only");
    EXPECT_EQ(merkle_root(std::vector<Hash>{h}), h);
}

TEST(Merkle, EmptyListThrows) { EXPECT_THROW(merkle_root(std::vector<Hash>{}), std::invalid_argument); }

TEST(Merkle, MatchesRecursiveOracle) {
    RandomStream rng(7);
    for (int c = 0; c < 400; ++c) {
        std::vector<Hash> leaves;
        const auto n = 1 + rng.below(16);
        for (std::uint64_t i = 0; i < n; ++i)
            leaves.push_back(hash_bytes(std::to_string(rng.next_u64())));
        EXPECT_EQ(merkle_root(leaves), testkit::oracle_merkle(leaves)) << "n=" << n;
    }
}

TEST(Merkle, OrderAndContentSensitive) {
    std::vector<Hash> leaves{hash_bytes("a"), hash_bytes("b"), hash_bytes("c")};
    const Hash root = merkle_root(leaves);
    std::swap(leaves[1], leaves[2]);
    EXPECT_NE(merkle_root(leaves), root);
}

TEST(SizeModel, TwoThousandTransactionBlock) {
    Block b;
    b.transactions.resize(2000);
    EXPECT_EQ(serialized_size(b), 1'000'280u);
    Advert a;
    a.tx_hashes.resize(2000);
    EXPECT_EQ(serialized_size(a), 64'060u);
    const double ratio = static_cast<double>(serialized_size(b)) / static_cast<double>(serialized_size(a));
    EXPECT_GE(ratio, 15.0);
    EXPECT_LE(ratio, 16.0);
}

TEST(SizeModel, MessageSizes) {
    EXPECT_EQ(serialized_size(BlockSeed{}), 300u);
    TxRequest r;
    r.tx_hashes.resize(3);
    EXPECT_EQ(serialized_size(r), 104u);
    TxResponse resp;
    resp.transactions.resize(2);
    resp.transactions[1].nominal_size_bytes = 300;
    EXPECT_EQ(serialized_size(resp), 800u);
    EXPECT_EQ(serialized_size(Advert{}), 60u);
    EXPECT_EQ(serialized_size(Block{}), 280u);
}

TEST(Random, DeterministicAndForked) {
    RandomStream a(42), b(42);
    for (int i = 0; i < 100; ++i)
        EXPECT_EQ(a.next_u64(), b.next_u64());
    RandomStream root(42);
    auto f1 = root.fork(1), f1b = root.fork(1), f2 = root.fork(2);
    EXPECT_EQ(f1.next_u64(), f1b.next_u64());
    EXPECT_NE(root.fork(1).next_u64(), f2.next_u64());
}

TEST(Random, UniformAndBelow) {
    RandomStream r(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform01();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_LT(r.below(7), 7u);
    }
}

TEST(Random, ExponentialMean) {
    RandomStream r(11);
    double total = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i)
        total += r.exponential(2.5);
    EXPECT_NEAR(total / n, 2.5, 2.5 * 0.02);
}

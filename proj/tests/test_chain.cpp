#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "chain.hpp"

using namespace feesim;

namespace {

FeePool pool_of(std::initializer_list<std::pair<double, double>> fees) {
    FeePool pool;
    for (auto [t, v] : fees) pool.add(t, v);
    return pool;
}

std::vector<std::pair<FeeId, double>> full(std::initializer_list<FeeId> ids) {
    std::vector<std::pair<FeeId, double>> out;
    for (FeeId id : ids) out.emplace_back(id, 1.0);
    return out;
}

}  // namespace

TEST_CASE("fee pool rejects out-of-order or negative events") {
    FeePool pool;
    pool.add(1.0, 2.0);
    CHECK_THROWS_AS(pool.add(0.5, 1.0), ValidationError);
    CHECK_THROWS_AS(pool.add(2.0, -1.0), ValidationError);
    CHECK_THROWS_AS(pool.add(-0.5, 1.0), ValidationError);
    pool.add(1.0, 3.0);  // equal arrival times are fine
    CHECK(pool.size() == 2);
    CHECK(pool.total_arrived(1.0) == doctest::Approx(5.0));
    CHECK(pool.total_arrived(0.5) == 0.0);
}

TEST_CASE("add_block height recurrence and fork width") {
    FeePool pool;
    BlockTree tree;
    BlockId b1 = tree.add_block(tree.genesis(), 0, {}, 1.0, pool);
    CHECK(tree.block(b1).height == 1);

    BlockId c1 = tree.add_block(b1, 0, {}, 2.0, pool);
    BlockId c2 = tree.add_block(b1, 1, {}, 2.5, pool);
    CHECK(tree.block(c1).height == 2);
    CHECK(tree.block(c2).height == 2);

    CHECK_THROWS_AS(tree.add_block(999, 0, {}, 3.0, pool), ValidationError);
}

TEST_CASE("add_block rejects bad claims") {
    FeePool pool = pool_of({{1.0, 3.0}, {2.0, 2.0}});
    BlockTree tree;
    BlockId b1 = tree.add_block(tree.genesis(), 0, full({0}), 1.5, pool);

    // double claim on the same chain
    CHECK_THROWS_AS(tree.add_block(b1, 0, full({0}), 3.0, pool), ValidationError);
    // claim before arrival
    CHECK_THROWS_AS(tree.add_block(b1, 0, full({1}), 1.6, pool), ValidationError);
    // unknown fee
    CHECK_THROWS_AS(tree.add_block(b1, 0, full({7}), 3.0, pool), ValidationError);
    // fraction outside (0,1]
    CHECK_THROWS_AS(tree.add_block(b1, 0, {{1, 1.5}}, 3.0, pool), ValidationError);
    // the same fee on a sibling branch is fine
    CHECK_NOTHROW(tree.add_block(tree.genesis(), 1, full({0}), 3.0, pool));
}

TEST_CASE("remaining fees: conservation, time filter") {
    SUBCASE("nothing claimed") {
        FeePool pool = pool_of({{0.5, 7.5}});
        BlockTree tree;
        CHECK(remaining_fees(tree, pool, tree.genesis(), 1.0) == doctest::Approx(7.5));
    }
    SUBCASE("chain claims 3 then 2 leaves 4") {
        FeePool pool = pool_of({{0.0, 3.0}, {0.0, 2.0}, {0.0, 4.0}});
        BlockTree tree;
        BlockId b1 = tree.add_block(tree.genesis(), 0, full({0}), 1.0, pool);
        BlockId b2 = tree.add_block(b1, 0, full({1}), 2.0, pool);
        CHECK(remaining_fees(tree, pool, b2, 2.0) == doctest::Approx(4.0));
    }
    SUBCASE("fee arriving after now is excluded") {
        FeePool pool = pool_of({{1.0, 3.0}, {9.0, 5.0}});
        BlockTree tree;
        CHECK(remaining_fees(tree, pool, tree.genesis(), 2.0) == doctest::Approx(3.0));
    }
    SUBCASE("unknown block") {
        FeePool pool;
        BlockTree tree;
        CHECK_THROWS_AS(remaining_fees(tree, pool, 42, 1.0), ValidationError);
    }
}

TEST_CASE("fractional claims subtract partially") {
    FeePool pool = pool_of({{0.0, 8.0}});
    BlockTree tree;
    BlockId b1 = tree.add_block(tree.genesis(), 0, {{0, 0.5}}, 1.0, pool);
    CHECK(remaining_fees(tree, pool, b1, 1.0) == doctest::Approx(4.0));
    BlockId b2 = tree.add_block(b1, 1, {{0, 0.5}}, 2.0, pool);
    CHECK(remaining_fees(tree, pool, b2, 2.0) == doctest::Approx(0.0));
    // cumulative fraction beyond 1 rejected
    CHECK_THROWS_AS(tree.add_block(b2, 0, {{0, 0.1}}, 3.0, pool), ValidationError);
}

TEST_CASE("fee conservation and monotonicity on random trees") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        FeePool pool;
        for (int f = 0; f < 12; ++f) pool.add(f * 0.25, 0.5 + 3.0 * uni(rng));
        BlockTree tree;
        std::vector<BlockId> blocks{tree.genesis()};
        double t = 0.3;
        for (int i = 0; i < 8; ++i) {
            BlockId parent = blocks[static_cast<std::size_t>(uni(rng) * blocks.size())];
            if (t < tree.block(parent).found_time) continue;
            auto avail = tree.available_fees(parent, t, pool);
            std::vector<std::pair<FeeId, double>> claims;
            for (auto [fee, rem] : avail)
                if (uni(rng) < 0.6) claims.emplace_back(fee, rem * (uni(rng) < 0.5 ? 1.0 : 0.5));
            blocks.push_back(tree.add_block(parent, i % 3, claims, t, pool));
            t += 0.4;
        }
        for (BlockId b : blocks) {
            const Block& blk = tree.block(b);
            double now = t + 1.0;
            // claimed along chain + remaining = total arrived
            CHECK(blk.cum_claimed_value + remaining_fees(tree, pool, b, now) ==
                  doctest::Approx(pool.total_arrived(now)).epsilon(1e-12));
            // remaining is nondecreasing in now
            double r1 = remaining_fees(tree, pool, b, blk.found_time);
            double r2 = remaining_fees(tree, pool, b, blk.found_time + 1.0);
            double r3 = remaining_fees(tree, pool, b, blk.found_time + 5.0);
            CHECK(r1 <= r2 + 1e-12);
            CHECK(r2 <= r3 + 1e-12);
        }
    }
}

TEST_CASE("best_tips ordering") {
    FeePool pool;
    BlockTree tree;

    SUBCASE("linear chain has a single tip") {
        BlockId b1 = tree.add_block(tree.genesis(), 0, {}, 1.0, pool);
        BlockId b2 = tree.add_block(b1, 1, {}, 2.0, pool);
        tree.publish(b1, 1.0);
        tree.publish(b2, 2.0);
        MinerView v{&tree, 2, 3.0};
        auto tips = best_tips(v);
        REQUIRE(tips.size() == 1);
        CHECK(tips[0] == b2);
    }

    SUBCASE("two tips ordered by first heard") {
        BlockId b1 = tree.add_block(tree.genesis(), 0, {}, 0.5, pool);
        tree.publish(b1, 0.5);
        BlockId t1 = tree.add_block(b1, 0, {}, 1.0, pool);
        BlockId t2 = tree.add_block(b1, 1, {}, 0.8, pool);
        tree.publish(t1, 1.0);
        tree.publish(t2, 2.0);  // found earlier but announced later
        MinerView v{&tree, 2, 3.0};
        auto tips = best_tips(v);
        REQUIRE(tips.size() == 2);
        CHECK(tips[0] == t1);
        CHECK(tips[1] == t2);
    }

    SUBCASE("private block above the public tip wins") {
        BlockId b1 = tree.add_block(tree.genesis(), 0, {}, 1.0, pool);
        tree.publish(b1, 1.0);
        BlockId pub = tree.add_block(b1, 0, {}, 2.0, pool);
        tree.publish(pub, 2.0);
        BlockId priv = tree.add_block(pub, 1, {}, 3.0, pool);  // unpublished
        MinerView mine{&tree, 1, 4.0};
        auto tips = best_tips(mine);
        REQUIRE(tips.size() == 1);
        CHECK(tips[0] == priv);
        // other miners do not see it
        MinerView other{&tree, 0, 4.0};
        CHECK(best_tips(other)[0] == pub);
    }
}

TEST_CASE("miner views are closed under parent") {
    FeePool pool;
    BlockTree tree;
    BlockId b1 = tree.add_block(tree.genesis(), 0, {}, 1.0, pool);
    tree.publish(b1, 1.0);
    BlockId b2 = tree.add_block(b1, 1, {}, 2.0, pool);
    BlockId b3 = tree.add_block(b2, 1, {}, 3.0, pool);
    tree.publish(b2, 3.5);
    tree.publish(b3, 3.5);
    for (MinerId m : {0, 1, 2}) {
        MinerView v{&tree, m, 4.0};
        for (BlockId id = 0; id < static_cast<BlockId>(tree.size()); ++id) {
            if (!v.knows(id)) continue;
            BlockId p = tree.block(id).parent;
            if (p != kNoBlock) CHECK(v.knows(p));
        }
    }
    // publishing a child before its parent is rejected
    BlockId b4 = tree.add_block(b3, 2, {}, 4.0, pool);
    BlockId b5 = tree.add_block(b4, 2, {}, 5.0, pool);
    CHECK_THROWS_AS(tree.publish(b5, 6.0), ValidationError);
}

TEST_CASE("jsonl round trip") {
    FeePool pool = pool_of({{0.0, 1.0}, {0.5, 2.0}, {1.0, 4.0}});
    BlockTree tree;
    BlockId b1 = tree.add_block(tree.genesis(), 0, {{0, 1.0}, {1, 0.5}}, 1.5, pool);
    tree.publish(b1, 1.6);
    ClaimSet cs;
    cs.range_begin = 2;
    cs.range_end = 3;
    BlockId b2 = tree.add_block_raw(b1, 1, cs, 4.0, 2.0);
    (void)b2;  // stays unpublished

    std::string text = tree_to_jsonl(tree);
    BlockTree back = tree_from_jsonl(text);
    REQUIRE(back.size() == tree.size());
    for (BlockId id = 0; id < static_cast<BlockId>(tree.size()); ++id) {
        const Block& a = tree.block(id);
        const Block& b = back.block(id);
        CHECK(a.parent == b.parent);
        CHECK(a.miner == b.miner);
        CHECK(a.height == b.height);
        CHECK(a.claimed_value == b.claimed_value);
        CHECK(a.found_time == b.found_time);
        CHECK(a.published_time == b.published_time);
        CHECK(a.claimed.range_begin == b.claimed.range_begin);
        CHECK(a.claimed.range_end == b.claimed.range_end);
        CHECK(a.claimed.partial == b.claimed.partial);
    }
    CHECK(tree_to_jsonl(back) == text);
}

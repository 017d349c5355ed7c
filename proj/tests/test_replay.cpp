#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gridcover/replay.hpp"

using namespace gridcover;

namespace {

Experience tagged(float reward) {
    Experience e;
    e.reward = reward;
    return e;
}

}  // namespace

TEST_CASE("fifo eviction keeps the newest items") {
    ReplayBuffer buf(3);
    for (int i = 1; i <= 4; ++i) buf.push(tagged(static_cast<float>(i)));
    CHECK(buf.size() == 3);
    CHECK(buf.at(0).reward == 2.0f);
    CHECK(buf.at(1).reward == 3.0f);
    CHECK(buf.at(2).reward == 4.0f);
}

TEST_CASE("eviction order stays exact over many wraps") {
    ReplayBuffer buf(7);
    for (int i = 0; i < 100; ++i) buf.push(tagged(static_cast<float>(i)));
    for (int k = 0; k < 7; ++k) CHECK(buf.at(k).reward == static_cast<float>(93 + k));
}

TEST_CASE("single stored item is what sampling returns") {
    ReplayBuffer buf(10);
    buf.push(tagged(42.0f));
    Rng rng(1);
    const auto batch = buf.sample(1, rng);
    REQUIRE(batch.size() == 1);
    CHECK(batch[0]->reward == 42.0f);
}

TEST_CASE("sampling zero items yields an empty batch") {
    ReplayBuffer buf(4);
    buf.push(tagged(1.0f));
    Rng rng(2);
    CHECK(buf.sample(0, rng).empty());
}

TEST_CASE("sampling more than stored is an error") {
    ReplayBuffer buf(4);
    buf.push(tagged(1.0f));
    Rng rng(3);
    CHECK_THROWS_AS(buf.sample(2, rng), std::runtime_error);
}

TEST_CASE("count never exceeds capacity") {
    ReplayBuffer buf(50000);
    for (int i = 0; i < 100000; ++i) {
        buf.push(tagged(0.0f));
        if (i % 9999 == 0) CHECK(buf.size() <= 50000u);
    }
    CHECK(buf.size() == 50000u);
}

TEST_CASE("sampling is uniform over the stored items") {
    ReplayBuffer buf(10);
    for (int i = 0; i < 10; ++i) buf.push(tagged(static_cast<float>(i)));
    Rng rng(4);
    const int rounds = 10000;  // 1e5 index draws in batches of the stored count
    int counts[10] = {};
    for (int r = 0; r < rounds; ++r)
        for (const Experience* e : buf.sample(10, rng))
            counts[static_cast<int>(e->reward)] += 1;
    // chi-square against uniform, 9 dof: mean 9, sd sqrt(18)
    double chi2 = 0.0;
    const double expect = rounds;
    for (const int c : counts) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(chi2 < 9.0 + 4.0 * std::sqrt(18.0));
}

TEST_CASE("sampling is deterministic under a fixed seed") {
    ReplayBuffer buf(10);
    for (int i = 0; i < 10; ++i) buf.push(tagged(static_cast<float>(i)));
    auto draw = [&](unsigned seed) {
        Rng rng(seed);
        std::vector<float> out;
        for (int round = 0; round < 8; ++round)
            for (const Experience* e : buf.sample(8, rng)) out.push_back(e->reward);
        return out;
    };
    CHECK(draw(7) == draw(7));
    CHECK(draw(7) != draw(8));
}

TEST_CASE("samples never point at evicted slots") {
    ReplayBuffer buf(5);
    for (int i = 0; i < 23; ++i) buf.push(tagged(static_cast<float>(i)));
    Rng rng(5);
    for (int round = 0; round < 40; ++round)
        for (const Experience* e : buf.sample(5, rng)) CHECK(e->reward >= 18.0f);
}

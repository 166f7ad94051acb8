#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <vector>

#include "incades/core.hpp"
#include "incades/kdtree.hpp"
#include "incades/streams.hpp"

using namespace incades;

namespace {

LabeledInstance inst(FeatureVector f, int label, std::int64_t seq) {
    return LabeledInstance{std::move(f), label, seq};
}

std::vector<LabeledInstance> randomInstances(std::size_t n, std::size_t dims, Rng& rng,
                                             double lo = 0.0, double hi = 1.0,
                                             std::int64_t seqBase = 0) {
    std::vector<LabeledInstance> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        FeatureVector f(dims);
        for (double& v : f) v = rng.uniform(lo, hi);
        out.push_back(inst(std::move(f), static_cast<int>(rng.nextUint(2)), seqBase + static_cast<std::int64_t>(i)));
    }
    return out;
}

/// Brute-force Canberra k-NN over a set, with the same tie discipline as the
/// tree's sorted output.
RegionOfCompetence bruteKnn(const std::vector<LabeledInstance>& pool, const FeatureVector& query,
                            std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
        d[i] = {canberra(pool[i].features, query), i};
    std::stable_sort(d.begin(), d.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    RegionOfCompetence roc;
    for (std::size_t i = 0; i < std::min(k, d.size()); ++i)
        roc.push_back({pool[d[i].second], d[i].first});
    return roc;
}

std::multiset<double> distanceMultiset(const RegionOfCompetence& roc) {
    std::multiset<double> out;
    for (const Neighbor& nb : roc) out.insert(nb.distance);
    return out;
}

}  // namespace

TEST_CASE("build on empty input yields empty tree") {
    OnlineKdTree tree = OnlineKdTree::build({}, 2);
    CHECK(tree.empty());
    CHECK(tree.totalNodes() == 0);
    CHECK(tree.search({0.5, 0.5}, 5).empty());
    CHECK_FALSE(tree.rebuildIfNeeded());
}

TEST_CASE("build picks the floor(n/2) median: 1-D {1,2,3}") {
    OnlineKdTree tree = OnlineKdTree::build(
        {inst({1.0}, 0, 0), inst({2.0}, 0, 1), inst({3.0}, 0, 2)}, 1);
    const auto nodes = tree.preorder();
    REQUIRE(nodes.size() == 3);
    CHECK(nodes[0].instance.features[0] == 2.0);
    CHECK(nodes[0].depth == 0);
    CHECK(nodes[0].split == 0);
    // Preorder: root, left, right.
    CHECK(nodes[1].instance.features[0] == 1.0);
    CHECK(nodes[1].depth == 1);
    CHECK(nodes[2].instance.features[0] == 3.0);
    CHECK(nodes[2].depth == 1);
    CHECK(tree.orderingInvariantsHold());
}

TEST_CASE("build 2-D example with cycling split dimensions") {
    OnlineKdTree tree = OnlineKdTree::build(
        {inst({1.0, 9.0}, 0, 0), inst({2.0, 1.0}, 0, 1), inst({3.0, 5.0}, 0, 2)}, 2);
    const auto nodes = tree.preorder();
    REQUIRE(nodes.size() == 3);
    CHECK(nodes[0].instance.features == FeatureVector{2.0, 1.0});
    CHECK(nodes[0].split == 0);
    CHECK(nodes[1].instance.features == FeatureVector{1.0, 9.0});
    CHECK(nodes[1].split == 1);
    CHECK(nodes[2].instance.features == FeatureVector{3.0, 5.0});
    CHECK(nodes[2].split == 1);
    CHECK(tree.orderingInvariantsHold());
}

TEST_CASE("duplicate median values all survive the build") {
    std::vector<LabeledInstance> points;
    for (int i = 0; i < 10; ++i) points.push_back(inst({1.0}, 0, i));
    OnlineKdTree tree = OnlineKdTree::build(points, 1);
    CHECK(tree.totalNodes() == 10);
    CHECK(tree.orderingInvariantsHold());
    CHECK(tree.search({1.0}, 10).size() == 10);
}

TEST_CASE("insert into empty tree becomes root with split 0") {
    OnlineKdTree tree(2);
    tree.insert(inst({0.3, 0.4}, 1, 0));
    const auto nodes = tree.preorder();
    REQUIRE(nodes.size() == 1);
    CHECK(nodes[0].split == 0);
    CHECK(nodes[0].depth == 0);
    CHECK(nodes[0].active);
}

TEST_CASE("insert equal-or-greater goes right") {
    OnlineKdTree tree(1);
    tree.insert(inst({3.0}, 0, 0));
    tree.insert(inst({5.0}, 0, 1));
    tree.insert(inst({3.0}, 0, 2));  // duplicate value also goes right
    const auto nodes = tree.preorder();
    REQUIRE(nodes.size() == 3);
    CHECK(nodes[0].instance.seq == 0);
    CHECK(nodes[1].depth == 1);  // right child of root
    CHECK(tree.orderingInvariantsHold());
}

TEST_CASE("1000 random inserts keep the ordering invariants") {
    Rng rng(7);
    OnlineKdTree tree(3);
    for (const auto& p : randomInstances(1000, 3, rng)) tree.insert(p);
    CHECK(tree.totalNodes() == 1000);
    CHECK(tree.orderingInvariantsHold());
}

TEST_CASE("lazyDelete flags the node and search ignores it") {
    OnlineKdTree tree(1);
    const LabeledInstance only = inst({4.0}, 1, 0);
    tree.insert(only);
    CHECK(tree.lazyDelete(only));
    CHECK(tree.totalNodes() == 1);
    CHECK(tree.inactiveNodes() == 1);
    CHECK(tree.search({4.0}, 1).empty());

    // Deleting a non-member changes nothing.
    CHECK_FALSE(tree.lazyDelete(inst({9.0}, 1, 5)));
    CHECK(tree.inactiveNodes() == 1);
}

TEST_CASE("search never returns a deleted instance") {
    Rng rng(11);
    auto points = randomInstances(200, 2, rng);
    OnlineKdTree tree(2);
    for (const auto& p : points) tree.insert(p);
    // Delete half of them.
    for (std::size_t i = 0; i < points.size(); i += 2) CHECK(tree.lazyDelete(points[i]));

    for (int q = 0; q < 200; ++q) {
        const FeatureVector query{rng.nextDouble(), rng.nextDouble()};
        for (const Neighbor& nb : tree.search(query, 5)) CHECK(nb.instance.seq % 2 == 1);
    }

    // Searching for a deleted point itself returns the nearest active one.
    const RegionOfCompetence near = tree.search(points[0].features, 1);
    REQUIRE(near.size() == 1);
    CHECK_FALSE(near[0].instance.sameDataPoint(points[0]));
}

TEST_CASE("duplicates are individually deletable") {
    OnlineKdTree tree(1);
    const LabeledInstance a = inst({2.0}, 0, 0);
    const LabeledInstance b = inst({2.0}, 0, 1);
    tree.insert(a);
    tree.insert(b);
    CHECK(tree.lazyDelete(b));
    CHECK_FALSE(tree.lazyDelete(b));
    const RegionOfCompetence got = tree.search({2.0}, 2);
    REQUIRE(got.size() == 1);
    CHECK(got[0].instance.seq == 0);
}

TEST_CASE("canberraSegment pruning bound") {
    CHECK(OnlineKdTree::canberraSegment(0.0, 0.0) == doctest::Approx(0.0));
    CHECK(OnlineKdTree::canberraSegment(1.0, 3.0) == doctest::Approx(0.5));
    CHECK(OnlineKdTree::canberraSegment(-1.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("search degenerate cases") {
    OnlineKdTree tree(2);
    tree.insert(inst({0.1, 0.2}, 3, 0));
    const RegionOfCompetence one = tree.search({0.9, 0.9}, 5);
    REQUIRE(one.size() == 1);
    CHECK(one[0].instance.label == 3);

    Rng rng(5);
    auto points = randomInstances(20, 2, rng);
    OnlineKdTree full = OnlineKdTree::build(points, 2);
    CHECK(full.search({0.5, 0.5}, 50).size() == 20);
}

TEST_CASE("search results are sorted ascending") {
    Rng rng(13);
    auto points = randomInstances(300, 2, rng);
    OnlineKdTree tree = OnlineKdTree::build(points, 2);
    for (int q = 0; q < 50; ++q) {
        const FeatureVector query{rng.nextDouble(), rng.nextDouble()};
        const RegionOfCompetence roc = tree.search(query, 5);
        for (std::size_t i = 1; i < roc.size(); ++i) CHECK(roc[i - 1].distance <= roc[i].distance);
    }
}

TEST_CASE("mean recall >= 0.9 against the brute-force oracle") {
    Rng rng(17);
    auto points = randomInstances(100, 2, rng, 0.0, 1.0);
    OnlineKdTree tree = OnlineKdTree::build(points, 2);
    double recallSum = 0.0;
    const int queries = 100;
    for (int q = 0; q < queries; ++q) {
        const FeatureVector query{rng.nextDouble(), rng.nextDouble()};
        const RegionOfCompetence approx = tree.search(query, 5);
        const RegionOfCompetence exact = bruteKnn(points, query, 5);
        std::size_t hits = 0;
        for (const Neighbor& a : approx)
            for (const Neighbor& e : exact)
                if (a.instance.sameDataPoint(e.instance)) {
                    ++hits;
                    break;
                }
        recallSum += static_cast<double>(hits) / static_cast<double>(exact.size());
    }
    CHECK(recallSum / queries >= 0.9);
}

TEST_CASE("pruning disabled equals brute force exactly") {
    Rng rng(19);
    auto points = randomInstances(500, 3, rng, -2.0, 2.0);
    OnlineKdTree tree = OnlineKdTree::build(points, 3);
    tree.setPruningEnabled(false);
    for (int q = 0; q < 50; ++q) {
        FeatureVector query{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                            rng.uniform(-2.0, 2.0)};
        CHECK(distanceMultiset(tree.search(query, 5)) ==
              distanceMultiset(bruteKnn(points, query, 5)));
    }
}

TEST_CASE("rebuild triggers") {
    Rng rng(23);
    auto points = randomInstances(100, 2, rng);

    SUBCASE("growth: totalNodes >= 2 * sizeAtBuild") {
        OnlineKdTree tree = OnlineKdTree::build(points, 2);
        auto extra = randomInstances(99, 2, rng, 0.0, 1.0, 1000);
        for (const auto& p : extra) tree.insert(p);
        CHECK_FALSE(tree.rebuildIfNeeded());  // 199 < 200
        tree.insert(inst({0.5, 0.5}, 0, 5000));
        CHECK(tree.rebuildIfNeeded());
        CHECK(tree.stats().sizeAtBuild == 200);
        CHECK(tree.orderingInvariantsHold());
    }

    SUBCASE("inactive fraction strictly above beta") {
        auto ten = randomInstances(10, 2, rng);
        OnlineKdTree tree = OnlineKdTree::build(ten, 2, 0.3);
        for (std::size_t i = 0; i < 3; ++i) CHECK(tree.lazyDelete(ten[i]));
        CHECK_FALSE(tree.rebuildIfNeeded());  // 0.3 is not > 0.3
        CHECK(tree.lazyDelete(ten[3]));
        CHECK(tree.rebuildIfNeeded());
        CHECK(tree.totalNodes() == 6);
        CHECK(tree.inactiveNodes() == 0);
    }
}

TEST_CASE("rebuild preserves the active set") {
    Rng rng(29);
    auto points = randomInstances(400, 2, rng);
    OnlineKdTree tree = OnlineKdTree::build(points, 2);
    std::vector<LabeledInstance> live;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i % 3 == 0) {
            CHECK(tree.lazyDelete(points[i]));
        } else {
            live.push_back(points[i]);
        }
    }

    // Reference results with pruning off, before the rebuild.
    std::vector<FeatureVector> queries;
    for (int q = 0; q < 30; ++q) queries.push_back({rng.nextDouble(), rng.nextDouble()});
    tree.setPruningEnabled(false);
    std::vector<std::multiset<double>> before;
    for (const auto& q : queries) before.push_back(distanceMultiset(tree.search(q, 5)));
    tree.setPruningEnabled(true);

    CHECK(tree.rebuildIfNeeded());
    CHECK(tree.totalNodes() == live.size());
    CHECK(tree.inactiveNodes() == 0);
    CHECK(tree.orderingInvariantsHold());

    std::vector<LabeledInstance> after = tree.activeInstances();
    auto bySeq = [](const LabeledInstance& a, const LabeledInstance& b) { return a.seq < b.seq; };
    std::sort(after.begin(), after.end(), bySeq);
    std::sort(live.begin(), live.end(), bySeq);
    REQUIRE(after.size() == live.size());
    for (std::size_t i = 0; i < live.size(); ++i) CHECK(after[i].sameDataPoint(live[i]));

    tree.setPruningEnabled(false);
    for (std::size_t i = 0; i < queries.size(); ++i)
        CHECK(distanceMultiset(tree.search(queries[i], 5)) == before[i]);
}

TEST_CASE("distance computations per query never exceed the active count") {
    Rng rng(31);
    auto points = randomInstances(600, 2, rng);
    OnlineKdTree tree = OnlineKdTree::build(points, 2);
    for (std::size_t i = 0; i < 100; ++i) CHECK(tree.lazyDelete(points[i]));
    for (int q = 0; q < 50; ++q) {
        const std::uint64_t beforeCount = tree.stats().distanceComputations;
        tree.search({rng.nextDouble(), rng.nextDouble()}, 5);
        CHECK(tree.stats().distanceComputations - beforeCount <= tree.activeCount());
    }
}

TEST_CASE("randomized interleaving keeps all invariants") {
    Rng rng(37);
    OnlineKdTree tree(2);
    std::vector<LabeledInstance> live;
    std::int64_t nextSeq = 0;
    for (int op = 0; op < 10000; ++op) {
        const double roll = rng.nextDouble();
        if (roll < 0.6 || live.empty()) {
            LabeledInstance p = inst({rng.nextDouble(), rng.nextDouble()},
                                     static_cast<int>(rng.nextUint(2)), nextSeq++);
            tree.insert(p);
            live.push_back(p);
        } else if (roll < 0.9) {
            const std::size_t pick = rng.nextUint(live.size());
            CHECK(tree.lazyDelete(live[pick]));
            live.erase(live.begin() + static_cast<std::ptrdiff_t>(pick));
        } else {
            tree.rebuildIfNeeded();
        }
        if (op % 500 == 0) CHECK(tree.orderingInvariantsHold());
    }
    CHECK(tree.orderingInvariantsHold());
    CHECK(tree.activeCount() == live.size());

    // No deleted instance is ever reachable.
    for (int q = 0; q < 100; ++q) {
        const FeatureVector query{rng.nextDouble(), rng.nextDouble()};
        for (const Neighbor& nb : tree.search(query, 5)) {
            const bool isLive = std::any_of(live.begin(), live.end(), [&](const LabeledInstance& p) {
                return p.sameDataPoint(nb.instance);
            });
            CHECK(isLive);
        }
    }
}

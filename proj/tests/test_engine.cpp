#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <functional>
#include <vector>

#include "incades/engine.hpp"
#include "incades/streams.hpp"

using namespace incades;

namespace {

LabeledInstance inst(FeatureVector f, int label, std::int64_t seq) {
    return LabeledInstance{std::move(f), label, seq};
}

Neighbor nb(double x, int label, std::int64_t seq, double distance) {
    return Neighbor{inst({x}, label, seq), distance};
}

/// Scriptable classifier for selection fixtures.
class FakeClassifier final : public IncrementalClassifier {
public:
    explicit FakeClassifier(std::function<int(const FeatureVector&)> fn) : fn_(std::move(fn)) {}
    void train(const LabeledInstance&) override { ++trained_; }
    int predict(const FeatureVector& f) const override { return fn_(f); }
    std::size_t trainedCount() const override { return trained_; }

private:
    std::function<int(const FeatureVector&)> fn_;
    std::size_t trained_ = 0;
};

EngineConfig smallConfig() {
    EngineConfig cfg;
    cfg.numClasses = 2;
    return cfg;
}

}  // namespace

TEST_CASE("overlap filter thresholds") {
    const double omega = 0.8;
    RegionOfCompetence unanimous{nb(0.0, 1, 0, 0.1), nb(0.1, 1, 1, 0.2), nb(0.2, 1, 2, 0.3),
                                 nb(0.3, 1, 3, 0.4), nb(0.4, 1, 4, 0.5)};
    CHECK(overlapFilter(unanimous, omega) == 1);

    RegionOfCompetence fourOfFive = unanimous;
    fourOfFive[4].instance.label = 0;
    CHECK(overlapFilter(fourOfFive, omega) == 1);

    RegionOfCompetence threeOfFive = fourOfFive;
    threeOfFive[3].instance.label = 0;
    CHECK_FALSE(overlapFilter(threeOfFive, omega).has_value());  // 0.6 < 0.8

    CHECK_FALSE(overlapFilter({}, omega).has_value());
}

TEST_CASE("overlap filter ties break toward the nearest tied label") {
    RegionOfCompetence tied{nb(0.0, 2, 0, 0.1), nb(0.1, 5, 1, 0.2), nb(0.2, 5, 2, 0.3),
                            nb(0.3, 2, 3, 0.4)};
    CHECK(overlapFilter(tied, 0.5) == 2);  // nearest neighbor holds label 2
}

TEST_CASE("knora-eliminate keeps classifiers correct on the whole neighborhood") {
    FakeClassifier right([](const FeatureVector&) { return 1; });
    FakeClassifier wrongOnFar([](const FeatureVector& f) { return f[0] < 0.35 ? 1 : 0; });
    FakeClassifier alwaysWrong([](const FeatureVector&) { return 0; });
    RegionOfCompetence roc{nb(0.0, 1, 0, 0.1), nb(0.1, 1, 1, 0.2), nb(0.2, 1, 2, 0.3),
                           nb(0.3, 1, 3, 0.4), nb(0.4, 1, 4, 0.5)};

    SUBCASE("only the fully correct classifier is selected") {
        const auto selected = knoraEliminate({&right, &wrongOnFar}, roc);
        CHECK(selected == std::vector<std::size_t>{0});
    }

    SUBCASE("all wrong on the farthest neighbor only: reduce and select") {
        // Both classifiers fail on the farthest (x=0.4) but pass on 1..4.
        FakeClassifier a([](const FeatureVector& f) { return f[0] < 0.35 ? 1 : 0; });
        FakeClassifier b([](const FeatureVector& f) { return f[0] < 0.35 ? 1 : 0; });
        const auto selected = knoraEliminate({&a, &b}, roc);
        CHECK(selected == std::vector<std::size_t>{0, 1});
    }

    SUBCASE("nothing survives any reduction: whole pool") {
        const auto selected = knoraEliminate({&alwaysWrong, &alwaysWrong}, roc);
        CHECK(selected == std::vector<std::size_t>{0, 1});
    }

    SUBCASE("invocation counter is advanced") {
        std::uint64_t calls = 0;
        knoraEliminate({&right}, roc, &calls);
        CHECK(calls == 5);
    }
}

TEST_CASE("fresh engine predicts class 0") {
    Engine engine(smallConfig());
    const Prediction p = engine.classify({0.5, 0.5});
    CHECK(p.label == 0);
    CHECK(p.ensembleSize == 0);
}

TEST_CASE("F cap: classifier rollover after exactly maxTrainPerClassifier") {
    EngineConfig cfg = smallConfig();
    cfg.maxTrainPerClassifier = 200;
    Engine engine(cfg);
    Rng rng(5);
    std::int64_t seq = 0;
    for (int i = 0; i < 200; ++i)
        engine.trainStep(inst({rng.nextDouble(), rng.nextDouble()},
                              static_cast<int>(rng.nextUint(2)), seq++));
    CHECK(engine.poolSize() == 1);
    CHECK(engine.newestTrainedCount() == 200);
    engine.trainStep(inst({0.5, 0.5}, 1, seq++));
    CHECK(engine.poolSize() == 2);
    CHECK(engine.newestTrainedCount() == 1);
}

TEST_CASE("D cap: pool size never exceeds maxPoolSize") {
    EngineConfig cfg = smallConfig();
    cfg.maxPoolSize = 3;
    cfg.maxTrainPerClassifier = 1;
    Engine engine(cfg);
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
        engine.trainStep(inst({rng.nextDouble()}, static_cast<int>(rng.nextUint(2)), i));
        CHECK(engine.poolSize() <= 3);
    }
    CHECK(engine.poolSize() == 3);
}

TEST_CASE("dimension mismatch is rejected") {
    Engine engine(smallConfig());
    engine.trainStep(inst({0.1, 0.2}, 0, 0));
    CHECK_THROWS_AS(engine.trainStep(inst({0.1}, 0, 1), Prediction{}), std::invalid_argument);
    CHECK_THROWS_AS(engine.trainStep(inst({0.1, 0.2, 0.3}, 0, 2)), std::invalid_argument);
}

TEST_CASE("unanimous neighborhood short-circuits without classifier calls") {
    Engine engine(smallConfig());
    Rng rng(7);
    // All label-1 neighborhood around (0,0).
    for (int i = 0; i < 50; ++i)
        engine.trainStep(inst({rng.nextDouble() * 0.1, rng.nextDouble() * 0.1}, 1, i));

    const std::uint64_t callsBefore = engine.counters().classifierInvocations;
    const Prediction p = engine.classify({0.05, 0.05});
    CHECK(p.route == PredictionRoute::OverlapFilter);
    CHECK(p.label == 1);
    CHECK(p.ensembleSize == 0);
    CHECK(engine.counters().classifierInvocations == callsBefore);
}

TEST_CASE("omega = 1.0 with any disagreement always invokes dynamic selection") {
    EngineConfig cfg = smallConfig();
    cfg.overlapThreshold = 1.0;
    cfg.backend = SearchBackend::BruteForce;
    Engine engine(cfg);
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.nextDouble();
        engine.trainStep(inst({x, rng.nextDouble()}, x < 0.5 ? 0 : 1, i));
    }
    int dsCount = 0;
    for (int q = 0; q < 100; ++q) {
        const FeatureVector f{rng.nextDouble(), rng.nextDouble()};
        const Prediction p = engine.classify(f);
        if (p.route == PredictionRoute::DynamicSelection) ++dsCount;
        // Recompute the neighborhood: with a disagreement, DS must have run.
        std::vector<std::pair<double, int>> d;
        for (const LabeledInstance& w : engine.window())
            d.emplace_back(canberra(w.features, f), w.label);
        std::stable_sort(d.begin(), d.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        const bool unanimous = std::all_of(d.begin(), d.begin() + 5, [&](const auto& e) {
            return e.second == d.front().second;
        });
        if (!unanimous) CHECK(p.route == PredictionRoute::DynamicSelection);
    }
    CHECK(dsCount > 0);
}

TEST_CASE("overlap route implies the recomputed majority rate meets omega") {
    EngineConfig cfg = smallConfig();
    cfg.backend = SearchBackend::BruteForce;  // roc recomputation must match
    Engine engine(cfg);
    Rng rng(9);
    for (int i = 0; i < 500; ++i) {
        const double x = rng.nextDouble();
        const int label = rng.bernoulli(0.2) ? static_cast<int>(rng.nextUint(2))
                                             : (x < 0.5 ? 0 : 1);
        engine.trainStep(inst({x, rng.nextDouble()}, label, i));
    }
    for (int q = 0; q < 200; ++q) {
        const FeatureVector f{rng.nextDouble(), rng.nextDouble()};
        const Prediction p = engine.classify(f);
        if (p.route != PredictionRoute::OverlapFilter) continue;
        std::vector<std::pair<double, int>> d;
        for (const LabeledInstance& w : engine.window())
            d.emplace_back(canberra(w.features, f), w.label);
        std::stable_sort(d.begin(), d.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        int votes[2] = {0, 0};
        for (int i = 0; i < 5; ++i) ++votes[d[static_cast<std::size_t>(i)].second];
        CHECK(static_cast<double>(std::max(votes[0], votes[1])) / 5.0 >= cfg.overlapThreshold);
    }
}

TEST_CASE("drift shrinks the window to the warning start") {
    // SEA with an abrupt concept flip forces genuine drifts.
    StreamSpec spec;
    spec.generator = GeneratorKind::Sea;
    spec.totalInstances = 12000;
    spec.abruptSchedule = {{4000, 2}, {8000, 1}};
    spec.noiseFraction = 0.0;
    spec.seed = 21;
    auto source = makeStream(spec);

    EngineConfig cfg = smallConfig();
    cfg.numClasses = 2;
    Engine engine(cfg);
    int drifts = 0;
    while (auto i = source->next()) {
        const DetectorSignal signal = engine.trainStep(*i);
        CHECK(engine.window().back().seq == i->seq);
        if (signal.level == DriftLevel::Drift) {
            ++drifts;
            REQUIRE(signal.warningStartSeq.has_value());
            if (*signal.warningStartSeq != i->seq) {
                for (const LabeledInstance& w : engine.window())
                    CHECK(w.seq >= *signal.warningStartSeq);
            } else {
                // Straight-to-drift keeps the most recent F instances.
                CHECK(engine.window().size() <= cfg.maxTrainPerClassifier);
            }
        }
    }
    CHECK(drifts >= 1);
    CHECK(engine.counters().drifts == static_cast<std::uint64_t>(drifts));
}

TEST_CASE("bounded window evicts the oldest instance") {
    EngineConfig cfg = smallConfig();
    cfg.maxWindowSize = 10;
    Engine engine(cfg);
    Rng rng(10);
    for (int i = 0; i < 100; ++i) {
        engine.trainStep(inst({rng.nextDouble()}, static_cast<int>(rng.nextUint(2)), i));
        CHECK(engine.window().size() <= 10);
    }
    CHECK(engine.window().front().seq == 90);
}

TEST_CASE("identical stream and config give identical prediction sequences") {
    StreamSpec spec;
    spec.generator = GeneratorKind::Sine;
    spec.totalInstances = 3000;
    spec.seed = 31;

    std::vector<int> runA;
    std::vector<int> runB;
    for (std::vector<int>* out : {&runA, &runB}) {
        auto source = makeStream(spec);
        Engine engine(smallConfig());
        while (auto i = source->next()) {
            const Prediction p = engine.classify(i->features);
            out->push_back(p.label);
            engine.trainStep(*i, p);
        }
    }
    CHECK(runA == runB);
}

TEST_CASE("bookkeeping invariants over a randomized run") {
    StreamSpec spec;
    spec.generator = GeneratorKind::Sea;
    spec.totalInstances = 20000;
    spec.abruptSchedule = recurrentSchedule(20000, 4000, 4);
    spec.seed = 41;
    auto source = makeStream(spec);

    Engine engine(smallConfig());
    while (auto i = source->next()) {
        engine.trainStep(*i);
        CHECK(engine.poolSize() <= engine.config().maxPoolSize);
        CHECK(engine.newestTrainedCount() <= engine.config().maxTrainPerClassifier);
    }
    const EngineCounters counters = engine.counters();
    CHECK(counters.instancesTrained == 20000);
    CHECK(counters.classifications >= 20000);
}

#ifndef INCADES_ENGINE_HPP
#define INCADES_ENGINE_HPP

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "incades/core.hpp"
#include "incades/detectors.hpp"
#include "incades/kdtree.hpp"
#include "incades/learners.hpp"

namespace incades {

enum class PredictionRoute { OverlapFilter, DynamicSelection };

struct Prediction {
    int label = 0;
    PredictionRoute route = PredictionRoute::DynamicSelection;
    std::size_t ensembleSize = 0;  ///< 0 when route == OverlapFilter
};

struct EngineCounters {
    std::uint64_t instancesTrained = 0;
    std::uint64_t drifts = 0;
    std::uint64_t warnings = 0;
    std::uint64_t classifications = 0;
    std::uint64_t overlapFilterHits = 0;
    std::uint64_t dsInvocations = 0;
    std::uint64_t ensembleSizeSum = 0;
    std::uint64_t classifierInvocations = 0;
    std::uint64_t distanceComputations = 0;
    std::uint64_t rebuilds = 0;

    double overlapHitRate() const {
        return classifications ? static_cast<double>(overlapFilterHits) /
                                     static_cast<double>(classifications)
                               : 0.0;
    }
    double meanEnsembleSize() const {
        return dsInvocations ? static_cast<double>(ensembleSizeSum) /
                                   static_cast<double>(dsInvocations)
                             : 0.0;
    }
};

/// Predict the RoC majority class when its rate reaches omega, otherwise
/// defer to dynamic selection (nullopt). Ties among equally common labels
/// break toward the label of the nearest neighbor holding a tied label.
std::optional<int> overlapFilter(const RegionOfCompetence& roc, double omega);

/// KNORA-Eliminate over `pool` indices: keep every classifier correct on all
/// RoC members; on failure drop the farthest neighbor and retry; if the
/// neighborhood empties, return the whole pool. The result is nonempty.
std::vector<std::size_t> knoraEliminate(
    const std::vector<const IncrementalClassifier*>& pool, const RegionOfCompetence& roc,
    std::uint64_t* invocationCounter = nullptr);

/// The streaming classification engine: incremental local-expert pool with
/// F/D caps, a drift-detector-driven adaptive validation window, and
/// overlap-filtered KNORA-Eliminate classification.
///
/// Single-owner state machine: trainStep and classify are never called
/// concurrently.
class Engine {
public:
    explicit Engine(EngineConfig config);

    /// Classify with the full pipeline: RoC lookup, overlap filter, then
    /// KNORA-Eliminate + plurality vote. Degenerate cases: empty window
    /// falls back to a whole-pool vote; empty window and pool answer class 0.
    Prediction classify(const FeatureVector& features);

    /// One training step: update the trigger with the pipeline's own
    /// prediction, maintain the window, manage the pool, train the newest
    /// classifier. Returns the detector signal.
    DetectorSignal trainStep(const LabeledInstance& instance);

    /// Same, reusing a prediction already computed against the current state
    /// (test-then-train avoids classifying twice).
    DetectorSignal trainStep(const LabeledInstance& instance, const Prediction& precomputed);

    const std::deque<LabeledInstance>& window() const { return window_; }
    std::size_t poolSize() const { return pool_.size(); }
    std::size_t newestTrainedCount() const {
        return pool_.empty() ? 0 : pool_.back().classifier->trainedCount();
    }
    const EngineConfig& config() const { return config_; }
    EngineCounters counters() const;

private:
    struct PoolMember {
        std::unique_ptr<IncrementalClassifier> classifier;
        std::uint64_t createdAt = 0;
    };

    RegionOfCompetence searchRoc(const FeatureVector& features);
    void appendToWindow(const LabeledInstance& instance);
    void shrinkWindowTo(std::int64_t minSeq);
    void shrinkWindowToLastF();
    void startFreshClassifier();
    int voteOf(const std::vector<std::size_t>& members, const FeatureVector& features);

    EngineConfig config_;
    std::deque<LabeledInstance> window_;
    std::optional<OnlineKdTree> tree_;
    std::vector<PoolMember> pool_;  // oldest -> newest
    std::unique_ptr<DriftDetector> detector_;
    DistanceFn distance_;
    std::size_t dimensions_ = 0;  // fixed by the first instance
    std::uint64_t creationCounter_ = 0;
    DriftLevel lastLevel_ = DriftLevel::Stable;
    EngineCounters counters_;
    std::uint64_t bruteForceDistances_ = 0;
};

}  // namespace incades

#endif

#ifndef INCADES_DETECTORS_HPP
#define INCADES_DETECTORS_HPP

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>

#include "incades/core.hpp"

namespace incades {

enum class DriftLevel { Stable, Warning, Drift };

/// Signal emitted by a detector after each outcome. `warningStartSeq` is the
/// arrival index of the first instance at/after the most recent transition
/// into Warning; it is always present for Warning and Drift. When a Drift
/// fires straight from Stable it equals the drift update's own seq.
struct DetectorSignal {
    DriftLevel level = DriftLevel::Stable;
    std::optional<std::int64_t> warningStartSeq;
};

/// Error-rate drift trigger: consumes one correct/incorrect outcome per
/// labeled instance, in stream order.
class DriftDetector {
public:
    virtual ~DriftDetector() = default;
    virtual DetectorSignal update(bool correct, std::int64_t seq) = 0;
    virtual void reset() = 0;
    virtual DriftLevel level() const = 0;
};

struct DdmParams {
    std::size_t minInstances = 30;
    double warningFactor = 2.0;
    double driftFactor = 3.0;
};

/// DDM: tracks the running error rate p and its binomial deviation s, latches
/// the minima of p+s, and escalates when p+s crosses pMin + 2·sMin (warning)
/// or pMin + 3·sMin (drift). A warning decays back to Stable when the
/// statistic recovers. Drift resets the statistics.
class DdmDetector : public DriftDetector {
public:
    explicit DdmDetector(DdmParams params = {});
    DetectorSignal update(bool correct, std::int64_t seq) override;
    void reset() override;
    DriftLevel level() const override { return level_; }

    double errorRate() const { return p_; }
    std::uint64_t seen() const { return n_; }

private:
    DdmParams params_;
    std::uint64_t n_ = 0;
    double p_ = 0.0;
    double s_ = 0.0;
    double pMin_ = 0.0;
    double sMin_ = 0.0;
    bool minimaSet_ = false;
    DriftLevel level_ = DriftLevel::Stable;
    std::optional<std::int64_t> warningStart_;
};

struct RddmParams {
    std::size_t minInstances = 129;
    std::size_t warnLimit = 1400;     ///< consecutive warnings that force a drift
    std::size_t maxHistory = 40000;   ///< stored outcomes for recomputation
    std::size_t minStableSize = 7000; ///< horizon kept when a long stable concept saturates
    double warningFactor = 2.0;
    double driftFactor = 3.0;
};

/// RDDM: the DDM core plus two reactivity fixes. A drift is forced when the
/// warning level persists for `warnLimit` consecutive updates, and after any
/// drift the statistics are recomputed from the stored outcomes that arrived
/// since the warning began, so the new concept starts warm. Outcomes are kept
/// in a bounded history; when a stable concept outgrows it the statistics are
/// shrunk to the most recent `minStableSize` outcomes, shedding stale minima
/// so the running error estimate keeps reacting.
class RddmDetector : public DriftDetector {
public:
    explicit RddmDetector(RddmParams params = {});
    DetectorSignal update(bool correct, std::int64_t seq) override;
    void reset() override;
    DriftLevel level() const override { return level_; }

private:
    struct Stored {
        bool error;
        std::int64_t seq;
    };

    void clearStats();
    void ingest(bool error);  // core statistic update, no signaling
    void recomputeFrom(std::int64_t startSeq);

    RddmParams params_;
    std::deque<Stored> history_;
    std::uint64_t n_ = 0;
    double p_ = 0.0;
    double s_ = 0.0;
    double pMin_ = 0.0;
    double sMin_ = 0.0;
    bool minimaSet_ = false;
    std::size_t consecutiveWarnings_ = 0;
    DriftLevel level_ = DriftLevel::Stable;
    std::optional<std::int64_t> warningStart_;
};

std::unique_ptr<DriftDetector> makeDetector(DetectorKind kind);

}  // namespace incades

#endif

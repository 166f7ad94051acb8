#include "incades/detectors.hpp"

#include <cmath>

namespace incades {

DdmDetector::DdmDetector(DdmParams params) : params_(params) { reset(); }

void DdmDetector::reset() {
    n_ = 0;
    p_ = 0.0;
    s_ = 0.0;
    pMin_ = 0.0;
    sMin_ = 0.0;
    minimaSet_ = false;
    level_ = DriftLevel::Stable;
    warningStart_.reset();
}

DetectorSignal DdmDetector::update(bool correct, std::int64_t seq) {
    const double error = correct ? 0.0 : 1.0;
    ++n_;
    p_ += (error - p_) / static_cast<double>(n_);
    s_ = std::sqrt(p_ * (1.0 - p_) / static_cast<double>(n_));

    if (n_ < params_.minInstances) {
        level_ = DriftLevel::Stable;
        return {level_, std::nullopt};
    }

    if (!minimaSet_ || p_ + s_ < pMin_ + sMin_) {
        pMin_ = p_;
        sMin_ = s_;
        minimaSet_ = true;
    }

    const double stat = p_ + s_;
    if (stat > pMin_ + params_.driftFactor * sMin_) {
        if (!warningStart_) warningStart_ = seq;  // straight from Stable
        DetectorSignal signal{DriftLevel::Drift, warningStart_};
        reset();
        return signal;
    }
    if (stat > pMin_ + params_.warningFactor * sMin_) {
        if (level_ != DriftLevel::Warning) warningStart_ = seq;
        level_ = DriftLevel::Warning;
        return {level_, warningStart_};
    }
    level_ = DriftLevel::Stable;
    warningStart_.reset();
    return {level_, std::nullopt};
}

RddmDetector::RddmDetector(RddmParams params) : params_(params) { reset(); }

void RddmDetector::reset() {
    history_.clear();
    clearStats();
    consecutiveWarnings_ = 0;
    level_ = DriftLevel::Stable;
    warningStart_.reset();
}

void RddmDetector::clearStats() {
    n_ = 0;
    p_ = 0.0;
    s_ = 0.0;
    pMin_ = 0.0;
    sMin_ = 0.0;
    minimaSet_ = false;
}

void RddmDetector::ingest(bool error) {
    ++n_;
    p_ += ((error ? 1.0 : 0.0) - p_) / static_cast<double>(n_);
    s_ = std::sqrt(p_ * (1.0 - p_) / static_cast<double>(n_));
    if (n_ >= params_.minInstances && (!minimaSet_ || p_ + s_ < pMin_ + sMin_)) {
        pMin_ = p_;
        sMin_ = s_;
        minimaSet_ = true;
    }
}

void RddmDetector::recomputeFrom(std::int64_t startSeq) {
    // Replay without latching minima: the thresholds must measure growth
    // relative to the replayed segment's end state, not its interior minimum,
    // otherwise an elevated post-drift error rate re-fires immediately.
    clearStats();
    for (const Stored& o : history_) {
        if (o.seq < startSeq) continue;
        ++n_;
        p_ += ((o.error ? 1.0 : 0.0) - p_) / static_cast<double>(n_);
    }
    s_ = n_ > 0 ? std::sqrt(p_ * (1.0 - p_) / static_cast<double>(n_)) : 0.0;
}

DetectorSignal RddmDetector::update(bool correct, std::int64_t seq) {
    const bool error = !correct;
    history_.push_back({error, seq});
    if (history_.size() > params_.maxHistory) history_.pop_front();
    ingest(error);

    if (level_ == DriftLevel::Stable && n_ >= params_.maxHistory) {
        // A long stable concept has saturated the horizon: shrink the
        // statistics to the recent past so the error estimate stays
        // reactive. Minima re-latch on the next update.
        const std::size_t keep = std::min(params_.minStableSize, history_.size());
        recomputeFrom(history_[history_.size() - keep].seq);
    }

    if (n_ < params_.minInstances) {
        level_ = DriftLevel::Stable;
        consecutiveWarnings_ = 0;
        return {level_, std::nullopt};
    }

    const double stat = p_ + s_;
    const bool driftHit = minimaSet_ && stat > pMin_ + params_.driftFactor * sMin_;
    const bool warningHit = minimaSet_ && stat > pMin_ + params_.warningFactor * sMin_;

    if (warningHit && !driftHit) {
        if (level_ != DriftLevel::Warning) {
            warningStart_ = seq;
            consecutiveWarnings_ = 0;
        }
        ++consecutiveWarnings_;
        level_ = DriftLevel::Warning;
        if (consecutiveWarnings_ >= params_.warnLimit) {
            // Warning stayed for too long: force the drift.
            DetectorSignal signal{DriftLevel::Drift, warningStart_};
            const std::int64_t start = *warningStart_;
            level_ = DriftLevel::Stable;
            warningStart_.reset();
            consecutiveWarnings_ = 0;
            recomputeFrom(start);
            return signal;
        }
        return {level_, warningStart_};
    }

    if (driftHit) {
        if (!warningStart_) warningStart_ = seq;
        DetectorSignal signal{DriftLevel::Drift, warningStart_};
        const std::int64_t start = *warningStart_;
        level_ = DriftLevel::Stable;
        warningStart_.reset();
        consecutiveWarnings_ = 0;
        recomputeFrom(start);
        return signal;
    }

    level_ = DriftLevel::Stable;
    warningStart_.reset();
    consecutiveWarnings_ = 0;
    return {level_, std::nullopt};
}

std::unique_ptr<DriftDetector> makeDetector(DetectorKind kind) {
    if (kind == DetectorKind::Ddm) return std::make_unique<DdmDetector>();
    return std::make_unique<RddmDetector>();
}

}  // namespace incades

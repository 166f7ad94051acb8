#include "incades/engine.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace incades {

std::optional<int> overlapFilter(const RegionOfCompetence& roc, double omega) {
    if (roc.empty()) return std::nullopt;

    std::vector<std::pair<int, std::size_t>> counts;  // first-seen order
    for (const Neighbor& nb : roc) {
        auto it = std::find_if(counts.begin(), counts.end(),
                               [&](const auto& p) { return p.first == nb.instance.label; });
        if (it == counts.end())
            counts.emplace_back(nb.instance.label, 1);
        else
            ++it->second;
    }

    std::size_t maxCount = 0;
    for (const auto& [label, count] : counts) maxCount = std::max(maxCount, count);
    if (static_cast<double>(maxCount) / static_cast<double>(roc.size()) < omega)
        return std::nullopt;

    std::vector<int> tied;
    for (const auto& [label, count] : counts)
        if (count == maxCount) tied.push_back(label);
    if (tied.size() == 1) return tied.front();

    // Tie: the nearest neighbor holding a tied label decides.
    for (const Neighbor& nb : roc)
        if (std::find(tied.begin(), tied.end(), nb.instance.label) != tied.end())
            return nb.instance.label;
    return tied.front();  // unreachable
}

std::vector<std::size_t> knoraEliminate(const std::vector<const IncrementalClassifier*>& pool,
                                        const RegionOfCompetence& roc,
                                        std::uint64_t* invocationCounter) {
    std::size_t keep = roc.size();  // roc is sorted ascending; drop from the back
    while (keep > 0) {
        std::vector<std::size_t> selected;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            bool allCorrect = true;
            for (std::size_t j = 0; j < keep; ++j) {
                if (invocationCounter) ++*invocationCounter;
                if (pool[i]->predict(roc[j].instance.features) != roc[j].instance.label) {
                    allCorrect = false;
                    break;
                }
            }
            if (allCorrect) selected.push_back(i);
        }
        if (!selected.empty()) return selected;
        --keep;
    }
    std::vector<std::size_t> all(pool.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
}

Engine::Engine(EngineConfig config) : config_(config) {
    config_.validate();
    detector_ = makeDetector(config_.detector);
    distance_ = distanceFunction(config_.distance);
}

RegionOfCompetence Engine::searchRoc(const FeatureVector& features) {
    if (window_.empty()) return {};
    const std::size_t k = config_.neighborhoodSize;
    if (config_.backend == SearchBackend::KdTree && tree_)
        return tree_->search(features, k);

    std::vector<std::size_t> order(window_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> dist(window_.size());
    for (std::size_t i = 0; i < window_.size(); ++i)
        dist[i] = distance_(window_[i].features, features);
    bruteForceDistances_ += window_.size();

    // Lexicographic (distance, window index) order matches a stable sort on
    // distance alone, so ties still resolve to the oldest window entry.
    const std::size_t take = std::min(k, window_.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                      });
    RegionOfCompetence roc;
    roc.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        roc.push_back({window_[order[i]], dist[order[i]]});
    return roc;
}

int Engine::voteOf(const std::vector<std::size_t>& members, const FeatureVector& features) {
    std::vector<int> predictions(members.size());
    std::vector<std::size_t> tally(config_.numClasses, 0);
    for (std::size_t i = 0; i < members.size(); ++i) {
        ++counters_.classifierInvocations;
        predictions[i] = pool_[members[i]].classifier->predict(features);
        if (predictions[i] >= 0 && static_cast<std::size_t>(predictions[i]) < tally.size())
            ++tally[static_cast<std::size_t>(predictions[i])];
    }
    std::size_t maxVotes = 0;
    for (std::size_t v : tally) maxVotes = std::max(maxVotes, v);
    std::size_t winners = 0;
    int winner = 0;
    for (std::size_t c = 0; c < tally.size(); ++c) {
        if (tally[c] == maxVotes) {
            ++winners;
            if (winners == 1) winner = static_cast<int>(c);
        }
    }
    // Tie: the most recently created ensemble member decides. Pool order is
    // creation order and `members` holds ascending pool indices.
    if (winners > 1) return predictions.back();
    return winner;
}

Prediction Engine::classify(const FeatureVector& features) {
    ++counters_.classifications;
    if (pool_.empty()) return {0, PredictionRoute::DynamicSelection, 0};

    RegionOfCompetence roc = searchRoc(features);
    if (config_.overlapFilterEnabled) {
        if (auto label = overlapFilter(roc, config_.overlapThreshold)) {
            ++counters_.overlapFilterHits;
            return {*label, PredictionRoute::OverlapFilter, 0};
        }
    }

    std::vector<std::size_t> ensemble;
    if (roc.empty()) {
        ensemble.resize(pool_.size());
        std::iota(ensemble.begin(), ensemble.end(), std::size_t{0});
    } else {
        std::vector<const IncrementalClassifier*> raw;
        raw.reserve(pool_.size());
        for (const PoolMember& m : pool_) raw.push_back(m.classifier.get());
        ensemble = knoraEliminate(raw, roc, &counters_.classifierInvocations);
    }
    ++counters_.dsInvocations;
    counters_.ensembleSizeSum += ensemble.size();
    return {voteOf(ensemble, features), PredictionRoute::DynamicSelection, ensemble.size()};
}

void Engine::appendToWindow(const LabeledInstance& instance) {
    window_.push_back(instance);
    if (config_.backend == SearchBackend::KdTree) {
        if (!tree_) tree_.emplace(dimensions_, config_.inactiveRebuildFraction);
        tree_->insert(instance);
    }
    if (config_.maxWindowSize > 0 && window_.size() > config_.maxWindowSize) {
        if (tree_) tree_->lazyDelete(window_.front());
        window_.pop_front();
    }
    if (tree_) tree_->rebuildIfNeeded();
}

void Engine::shrinkWindowTo(std::int64_t minSeq) {
    while (!window_.empty() && window_.front().seq < minSeq) window_.pop_front();
    if (tree_) tree_->rebuildFrom({window_.begin(), window_.end()});
}

void Engine::shrinkWindowToLastF() {
    while (window_.size() > config_.maxTrainPerClassifier) window_.pop_front();
    if (tree_) tree_->rebuildFrom({window_.begin(), window_.end()});
}

void Engine::startFreshClassifier() {
    if (pool_.size() == config_.maxPoolSize) pool_.erase(pool_.begin());
    pool_.push_back({makeLearner(config_.learner, config_.numClasses), creationCounter_++});
}

DetectorSignal Engine::trainStep(const LabeledInstance& instance) {
    if (dimensions_ != 0 && instance.features.size() != dimensions_)
        throw std::invalid_argument("instance dimensionality mismatch");
    const Prediction p = classify(instance.features);
    return trainStep(instance, p);
}

DetectorSignal Engine::trainStep(const LabeledInstance& instance, const Prediction& precomputed) {
    if (dimensions_ == 0)
        dimensions_ = instance.features.size();
    else if (instance.features.size() != dimensions_)
        throw std::invalid_argument("instance dimensionality mismatch");

    const DetectorSignal signal =
        detector_->update(precomputed.label == instance.label, instance.seq);
    if (signal.level == DriftLevel::Warning && lastLevel_ != DriftLevel::Warning)
        ++counters_.warnings;
    lastLevel_ = signal.level;

    appendToWindow(instance);

    if (signal.level == DriftLevel::Drift) {
        ++counters_.drifts;
        // A drift straight from Stable carries no warning phase; keep one
        // classifier's worth of the newest instances instead.
        if (signal.warningStartSeq && *signal.warningStartSeq != instance.seq)
            shrinkWindowTo(*signal.warningStartSeq);
        else
            shrinkWindowToLastF();
        startFreshClassifier();
    } else if (pool_.empty() ||
               pool_.back().classifier->trainedCount() >= config_.maxTrainPerClassifier) {
        startFreshClassifier();
    }

    pool_.back().classifier->train(instance);
    ++counters_.instancesTrained;
    return signal;
}

EngineCounters Engine::counters() const {
    EngineCounters snap = counters_;
    snap.distanceComputations = bruteForceDistances_;
    if (tree_) {
        const KdTreeStats st = tree_->stats();
        snap.distanceComputations += st.distanceComputations;
        snap.rebuilds = st.rebuilds;
    }
    return snap;
}

}  // namespace incades

#ifndef INCADES_CORE_HPP
#define INCADES_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace incades {

/// Dense feature vector. Length is fixed per stream; values must be finite.
using FeatureVector = std::vector<double>;

/// A labeled instance flowing through training, the DSEW and the tree.
/// `seq` is the strictly increasing arrival index within one stream.
struct LabeledInstance {
    FeatureVector features;
    int label = 0;
    std::int64_t seq = 0;

    bool sameDataPoint(const LabeledInstance& other) const {
        return seq == other.seq && label == other.label && features == other.features;
    }
};

/// One neighbor in a Region of Competence.
struct Neighbor {
    LabeledInstance instance;
    double distance = 0.0;
};

/// k nearest DSEW neighbors of a test instance, sorted ascending by distance.
using RegionOfCompetence = std::vector<Neighbor>;

/// Maps class names to dense integer ids in first-appearance (or, for ARFF,
/// declaration) order.
class LabelTable {
public:
    int intern(const std::string& name) {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return static_cast<int>(i);
        names_.push_back(name);
        return static_cast<int>(names_.size() - 1);
    }
    const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
};

enum class DetectorKind { Ddm, Rddm };
enum class DistanceKind { Canberra, Euclidean };
enum class SearchBackend { BruteForce, KdTree };
enum class LearnerKind { HoeffdingTree, NaiveBayes };

/// Engine hyperparameters. Defaults follow the framework's tuned values:
/// D=75, F=200, k=5, omega=0.8, beta=0.3, unbounded window, RDDM trigger,
/// Canberra distance.
struct EngineConfig {
    std::size_t maxWindowSize = 0;            ///< W; 0 means unbounded
    std::size_t maxPoolSize = 75;             ///< D
    std::size_t maxTrainPerClassifier = 200;  ///< F
    std::size_t neighborhoodSize = 5;         ///< k
    double overlapThreshold = 0.8;            ///< omega in (0, 1]
    bool overlapFilterEnabled = true;
    double inactiveRebuildFraction = 0.3;     ///< beta in [0, 1]
    DetectorKind detector = DetectorKind::Rddm;
    DistanceKind distance = DistanceKind::Canberra;
    SearchBackend backend = SearchBackend::KdTree;
    LearnerKind learner = LearnerKind::HoeffdingTree;
    std::size_t numClasses = 2;

    void validate() const {
        if (maxPoolSize < 1) throw std::invalid_argument("maxPoolSize must be >= 1");
        if (maxTrainPerClassifier < 1) throw std::invalid_argument("maxTrainPerClassifier must be >= 1");
        if (neighborhoodSize < 1) throw std::invalid_argument("neighborhoodSize must be >= 1");
        if (overlapThreshold <= 0.0 || overlapThreshold > 1.0)
            throw std::invalid_argument("overlapThreshold must be in (0, 1]");
        if (inactiveRebuildFraction < 0.0 || inactiveRebuildFraction > 1.0)
            throw std::invalid_argument("inactiveRebuildFraction must be in [0, 1]");
        if (numClasses < 1) throw std::invalid_argument("numClasses must be >= 1");
    }
};

/// Per-dimension normalized L1 distance. A term where both operands are zero
/// contributes zero. Each term lies in [0, 1], so the total is at most the
/// dimensionality.
double canberra(const FeatureVector& a, const FeatureVector& b);

/// Standard L2 distance.
double euclidean(const FeatureVector& a, const FeatureVector& b);

using DistanceFn = double (*)(const FeatureVector&, const FeatureVector&);

inline DistanceFn distanceFunction(DistanceKind kind) {
    return kind == DistanceKind::Canberra ? &canberra : &euclidean;
}

}  // namespace incades

#endif

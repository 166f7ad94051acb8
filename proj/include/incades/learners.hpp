#ifndef INCADES_LEARNERS_HPP
#define INCADES_LEARNERS_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "incades/core.hpp"

namespace incades {

/// Contract for incremental base classifiers. predict() is total: an
/// untrained classifier answers class id 0.
class IncrementalClassifier {
public:
    virtual ~IncrementalClassifier() = default;
    virtual void train(const LabeledInstance& instance) = 0;
    virtual int predict(const FeatureVector& features) const = 0;
    virtual std::size_t trainedCount() const = 0;
};

struct HoeffdingTreeParams {
    double delta = 1e-7;           ///< split confidence
    std::size_t gracePeriod = 200; ///< instances between split attempts at a leaf
    double tieThreshold = 0.05;
    std::size_t candidateThresholds = 10;  ///< per numeric attribute
};

/// Hoeffding Tree with Gaussian numeric-attribute estimators, information
/// gain splits and majority-class leaves. A leaf attempts a split every
/// gracePeriod instances; the split is taken when the gain advantage beats
/// the Hoeffding bound eps = sqrt(R^2 ln(1/delta) / 2n), R = log2(#classes),
/// or eps has shrunk below the tie threshold.
class HoeffdingTree : public IncrementalClassifier {
public:
    HoeffdingTree(std::size_t numClasses, HoeffdingTreeParams params = {});
    ~HoeffdingTree() override;
    HoeffdingTree(HoeffdingTree&&) noexcept;
    HoeffdingTree& operator=(HoeffdingTree&&) noexcept;

    void train(const LabeledInstance& instance) override;
    int predict(const FeatureVector& features) const override;
    std::size_t trainedCount() const override { return trained_; }

    std::size_t leafCount() const;

    static double hoeffdingBound(double range, double delta, double n);

private:
    struct Node;
    Node* routeToLeaf(const FeatureVector& features) const;
    void attemptSplit(Node* leaf);

    std::size_t numClasses_;
    HoeffdingTreeParams params_;
    std::size_t trained_ = 0;
    std::unique_ptr<Node> root_;
};

/// Incremental Gaussian Naive Bayes (test baseline).
class NaiveBayes : public IncrementalClassifier {
public:
    explicit NaiveBayes(std::size_t numClasses);

    void train(const LabeledInstance& instance) override;
    int predict(const FeatureVector& features) const override;
    std::size_t trainedCount() const override { return trained_; }

private:
    struct Moments {
        double count = 0.0;
        double mean = 0.0;
        double m2 = 0.0;
    };

    std::size_t numClasses_;
    std::size_t trained_ = 0;
    std::vector<double> classCounts_;
    std::vector<std::vector<Moments>> stats_;  // [class][attribute]
};

std::unique_ptr<IncrementalClassifier> makeLearner(LearnerKind kind, std::size_t numClasses);

}  // namespace incades

#endif

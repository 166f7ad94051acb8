#include "incades/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace incades {

namespace {

double entropy(const std::vector<double>& weights, double total) {
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double w : weights) {
        if (w <= 0.0) continue;
        const double p = w / total;
        h -= p * std::log2(p);
    }
    return h;
}

double gaussianCdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

}  // namespace

struct HoeffdingTree::Node {
    struct AttrClassStats {
        double count = 0.0;
        double mean = 0.0;
        double m2 = 0.0;
    };

    bool isLeaf = true;
    // leaf state
    std::vector<double> classCounts;
    std::vector<std::vector<AttrClassStats>> attrStats;  // [attr][class]
    std::vector<double> attrMin;
    std::vector<double> attrMax;
    double weightSinceAttempt = 0.0;
    // internal state
    std::size_t splitAttr = 0;
    double splitThreshold = 0.0;
    std::unique_ptr<Node> left;
    std::unique_ptr<Node> right;

    Node(std::size_t numClasses) : classCounts(numClasses, 0.0) {}

    void ensureAttrState(std::size_t numAttrs, std::size_t numClasses) {
        if (!attrStats.empty()) return;
        attrStats.assign(numAttrs, std::vector<AttrClassStats>(numClasses));
        attrMin.assign(numAttrs, std::numeric_limits<double>::infinity());
        attrMax.assign(numAttrs, -std::numeric_limits<double>::infinity());
    }

    int seedMajority = 0;  // parent's majority at split time, used while empty

    int majorityClass() const {
        if (totalWeight() <= 0.0) return seedMajority;
        int best = 0;
        for (std::size_t c = 1; c < classCounts.size(); ++c)
            if (classCounts[c] > classCounts[static_cast<std::size_t>(best)])
                best = static_cast<int>(c);
        return best;
    }

    double totalWeight() const {
        double t = 0.0;
        for (double w : classCounts) t += w;
        return t;
    }
};

HoeffdingTree::HoeffdingTree(std::size_t numClasses, HoeffdingTreeParams params)
    : numClasses_(numClasses), params_(params), root_(std::make_unique<Node>(numClasses)) {}

HoeffdingTree::~HoeffdingTree() = default;
HoeffdingTree::HoeffdingTree(HoeffdingTree&&) noexcept = default;
HoeffdingTree& HoeffdingTree::operator=(HoeffdingTree&&) noexcept = default;

double HoeffdingTree::hoeffdingBound(double range, double delta, double n) {
    return std::sqrt(range * range * std::log(1.0 / delta) / (2.0 * n));
}

HoeffdingTree::Node* HoeffdingTree::routeToLeaf(const FeatureVector& features) const {
    Node* cur = root_.get();
    while (!cur->isLeaf) {
        cur = features[cur->splitAttr] <= cur->splitThreshold ? cur->left.get()
                                                              : cur->right.get();
    }
    return cur;
}

void HoeffdingTree::train(const LabeledInstance& instance) {
    Node* leaf = routeToLeaf(instance.features);
    const std::size_t numAttrs = instance.features.size();
    leaf->ensureAttrState(numAttrs, numClasses_);

    const auto cls = static_cast<std::size_t>(instance.label);
    leaf->classCounts[cls] += 1.0;
    for (std::size_t a = 0; a < numAttrs; ++a) {
        const double v = instance.features[a];
        auto& st = leaf->attrStats[a][cls];
        st.count += 1.0;
        const double delta = v - st.mean;
        st.mean += delta / st.count;
        st.m2 += delta * (v - st.mean);
        leaf->attrMin[a] = std::min(leaf->attrMin[a], v);
        leaf->attrMax[a] = std::max(leaf->attrMax[a], v);
    }

    leaf->weightSinceAttempt += 1.0;
    ++trained_;
    if (leaf->weightSinceAttempt >= static_cast<double>(params_.gracePeriod)) {
        leaf->weightSinceAttempt = 0.0;
        attemptSplit(leaf);
    }
}

void HoeffdingTree::attemptSplit(Node* leaf) {
    const double total = leaf->totalWeight();
    const double parentEntropy = entropy(leaf->classCounts, total);
    if (parentEntropy == 0.0 || total <= 0.0) return;  // pure leaf

    double bestGain = 0.0;
    double secondGain = 0.0;
    std::size_t bestAttr = 0;
    double bestThreshold = 0.0;

    const std::size_t numAttrs = leaf->attrStats.size();
    std::vector<double> leftWeights(numClasses_);
    std::vector<double> rightWeights(numClasses_);
    for (std::size_t a = 0; a < numAttrs; ++a) {
        const double lo = leaf->attrMin[a];
        const double hi = leaf->attrMax[a];
        if (!(lo < hi)) continue;
        double attrBest = 0.0;
        double attrBestThreshold = 0.0;
        for (std::size_t j = 0; j < params_.candidateThresholds; ++j) {
            const double t = lo + (hi - lo) * static_cast<double>(j + 1) /
                                      static_cast<double>(params_.candidateThresholds + 1);
            double leftTotal = 0.0;
            double rightTotal = 0.0;
            for (std::size_t c = 0; c < numClasses_; ++c) {
                const auto& st = leaf->attrStats[a][c];
                if (st.count <= 0.0) {
                    leftWeights[c] = rightWeights[c] = 0.0;
                    continue;
                }
                double fracBelow;
                const double var = st.count > 1.0 ? st.m2 / (st.count - 1.0) : 0.0;
                if (var > 0.0)
                    fracBelow = gaussianCdf(t, st.mean, std::sqrt(var));
                else
                    fracBelow = st.mean <= t ? 1.0 : 0.0;
                leftWeights[c] = st.count * fracBelow;
                rightWeights[c] = st.count - leftWeights[c];
                leftTotal += leftWeights[c];
                rightTotal += rightWeights[c];
            }
            const double splitTotal = leftTotal + rightTotal;
            if (splitTotal <= 0.0) continue;
            const double childEntropy = (leftTotal * entropy(leftWeights, leftTotal) +
                                         rightTotal * entropy(rightWeights, rightTotal)) /
                                        splitTotal;
            const double gain = parentEntropy - childEntropy;
            if (gain > attrBest) {
                attrBest = gain;
                attrBestThreshold = t;
            }
        }
        if (attrBest > bestGain) {
            secondGain = bestGain;
            bestGain = attrBest;
            bestAttr = a;
            bestThreshold = attrBestThreshold;
        } else if (attrBest > secondGain) {
            secondGain = attrBest;
        }
    }

    if (bestGain <= 0.0) return;
    const double range = std::log2(static_cast<double>(std::max<std::size_t>(numClasses_, 2)));
    const double eps = hoeffdingBound(range, params_.delta, total);
    if (bestGain - secondGain > eps || eps < params_.tieThreshold) {
        leaf->isLeaf = false;
        leaf->splitAttr = bestAttr;
        leaf->splitThreshold = bestThreshold;
        leaf->left = std::make_unique<Node>(numClasses_);
        leaf->right = std::make_unique<Node>(numClasses_);
        leaf->left->seedMajority = leaf->majorityClass();
        leaf->right->seedMajority = leaf->left->seedMajority;
    }
}

int HoeffdingTree::predict(const FeatureVector& features) const {
    const Node* leaf = routeToLeaf(features);
    return leaf->majorityClass();
}

std::size_t HoeffdingTree::leafCount() const {
    std::vector<const Node*> stack{root_.get()};
    std::size_t leaves = 0;
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        if (n->isLeaf) {
            ++leaves;
        } else {
            stack.push_back(n->left.get());
            stack.push_back(n->right.get());
        }
    }
    return leaves;
}

NaiveBayes::NaiveBayes(std::size_t numClasses)
    : numClasses_(numClasses), classCounts_(numClasses, 0.0), stats_(numClasses) {}

void NaiveBayes::train(const LabeledInstance& instance) {
    const auto cls = static_cast<std::size_t>(instance.label);
    if (stats_[cls].empty()) stats_[cls].resize(instance.features.size());
    classCounts_[cls] += 1.0;
    for (std::size_t a = 0; a < instance.features.size(); ++a) {
        auto& m = stats_[cls][a];
        m.count += 1.0;
        const double delta = instance.features[a] - m.mean;
        m.mean += delta / m.count;
        m.m2 += delta * (instance.features[a] - m.mean);
    }
    ++trained_;
}

int NaiveBayes::predict(const FeatureVector& features) const {
    if (trained_ == 0) return 0;
    double bestLog = -std::numeric_limits<double>::infinity();
    int best = 0;
    const double total = static_cast<double>(trained_);
    for (std::size_t c = 0; c < numClasses_; ++c) {
        if (classCounts_[c] <= 0.0) continue;
        double logp = std::log(classCounts_[c] / total);
        for (std::size_t a = 0; a < features.size() && a < stats_[c].size(); ++a) {
            const auto& m = stats_[c][a];
            double var = m.count > 1.0 ? m.m2 / (m.count - 1.0) : 0.0;
            var = std::max(var, 1e-9);
            const double d = features[a] - m.mean;
            logp += -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
        }
        if (logp > bestLog) {
            bestLog = logp;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::unique_ptr<IncrementalClassifier> makeLearner(LearnerKind kind, std::size_t numClasses) {
    if (kind == LearnerKind::NaiveBayes) return std::make_unique<NaiveBayes>(numClasses);
    return std::make_unique<HoeffdingTree>(numClasses);
}

}  // namespace incades

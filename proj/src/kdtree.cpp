#include "incades/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace incades {

namespace {
constexpr double kInfinity = std::numeric_limits<double>::infinity();
}

OnlineKdTree::OnlineKdTree(std::size_t dimensions, double beta)
    : dimensions_(dimensions), beta_(beta) {
    if (dimensions_ == 0) throw std::invalid_argument("OnlineKdTree: dimensions must be >= 1");
    if (beta_ < 0.0 || beta_ > 1.0) throw std::invalid_argument("OnlineKdTree: beta must be in [0, 1]");
}

OnlineKdTree OnlineKdTree::build(const std::vector<LabeledInstance>& instances,
                                 std::size_t dimensions, double beta) {
    OnlineKdTree tree(dimensions, beta);
    std::vector<LabeledInstance> copy = instances;
    tree.root_ = buildRecursive(copy, 0, dimensions);
    tree.totalNodes_ = instances.size();
    tree.sizeAtBuild_ = instances.size();
    return tree;
}

std::unique_ptr<OnlineKdTree::Node> OnlineKdTree::buildRecursive(
    std::vector<LabeledInstance>& instances, std::size_t split, std::size_t dimensions) {
    if (instances.empty()) return nullptr;

    double median;
    {
        std::vector<double> values;
        values.reserve(instances.size());
        for (const auto& inst : instances) values.push_back(inst.features[split]);
        const std::size_t mid = values.size() / 2;
        std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                         values.end());
        median = values[mid];
    }

    // The first instance carrying the median value becomes the node; the
    // remaining ties keep the >=-right invariant by going right.
    auto node = std::make_unique<Node>();
    node->split = split;
    bool nodeChosen = false;
    std::vector<LabeledInstance> left;
    std::vector<LabeledInstance> right;
    for (auto& inst : instances) {
        const double v = inst.features[split];
        if (!nodeChosen && v == median) {
            node->instance = std::move(inst);
            nodeChosen = true;
        } else if (v < median) {
            left.push_back(std::move(inst));
        } else {
            right.push_back(std::move(inst));
        }
    }
    // Release the consumed input's capacity before recursing: duplicate-heavy
    // data builds a deep one-sided spine, and without this every ancestor
    // frame would pin a full-width scratch buffer for the whole descent.
    std::vector<LabeledInstance>().swap(instances);

    const std::size_t childSplit = (split + 1) % dimensions;
    node->left = buildRecursive(left, childSplit, dimensions);
    node->right = buildRecursive(right, childSplit, dimensions);
    return node;
}

void OnlineKdTree::insert(const LabeledInstance& instance) {
    if (instance.features.size() != dimensions_)
        throw std::invalid_argument("OnlineKdTree::insert: dimension mismatch");
    if (!root_) {
        root_ = std::make_unique<Node>();
        root_->instance = instance;
        root_->split = 0;
        totalNodes_ = 1;
        return;
    }
    Node* cur = root_.get();
    std::size_t depth = 0;
    for (;;) {
        const std::size_t s = cur->split;
        const bool goLeft = instance.features[s] < cur->instance.features[s];
        std::unique_ptr<Node>& slot = goLeft ? cur->left : cur->right;
        ++depth;
        if (!slot) {
            slot = std::make_unique<Node>();
            slot->instance = instance;
            slot->split = depth % dimensions_;
            ++totalNodes_;
            return;
        }
        cur = slot.get();
    }
}

bool OnlineKdTree::lazyDelete(const LabeledInstance& instance) {
    if (instance.features.size() != dimensions_) return false;
    Node* cur = root_.get();
    while (cur) {
        const std::size_t s = cur->split;
        if (instance.features[s] < cur->instance.features[s]) {
            cur = cur->left.get();
        } else {
            // Equal split values are stored right, so the match may be this
            // node or anywhere down the right branch.
            if (cur->active && cur->instance.sameDataPoint(instance)) {
                cur->active = false;
                ++inactiveNodes_;
                return true;
            }
            cur = cur->right.get();
        }
    }
    return false;
}

double OnlineKdTree::canberraSegment(double nodeValue, double queryValue) {
    const double denom = std::fabs(nodeValue) + std::fabs(queryValue);
    if (denom == 0.0) return 0.0;
    return std::fabs(nodeValue - queryValue) / denom;
}

double OnlineKdTree::Best::currentMax() const {
    if (nodes.size() < k) return kInfinity;
    double m = distances[0];
    for (double d : distances)
        if (d > m) m = d;
    return m;
}

void OnlineKdTree::Best::offer(const Node* node, double distance) {
    if (nodes.size() < k) {
        nodes.push_back(node);
        distances.push_back(distance);
        return;
    }
    std::size_t maxIndex = 0;
    for (std::size_t i = 1; i < distances.size(); ++i)
        if (distances[i] > distances[maxIndex]) maxIndex = i;
    if (distance <= distances[maxIndex]) {
        distances[maxIndex] = distance;
        nodes[maxIndex] = node;
    }
}

void OnlineKdTree::searchRecursive(const Node* node, const FeatureVector& query, Best& best) const {
    if (node->active) {
        ++distanceComputations_;
        best.offer(node, canberra(node->instance.features, query));
    }

    const Node* bestChild = nullptr;
    const Node* other = nullptr;
    const std::size_t s = node->split;
    if (node->left && node->right) {
        if (query[s] >= node->instance.features[s]) {
            bestChild = node->right.get();
            other = node->left.get();
        } else {
            bestChild = node->left.get();
            other = node->right.get();
        }
    } else if (node->left) {
        bestChild = node->left.get();
    } else if (node->right) {
        bestChild = node->right.get();
    } else {
        return;
    }

    // The query-side subtree is always descended; only the far side is
    // gated by the split-dimension segment bound.
    searchRecursive(bestChild, query, best);
    if (other) {
        const double seg = canberraSegment(node->instance.features[s], query[s]);
        if (!pruningEnabled_ || seg < best.currentMax()) searchRecursive(other, query, best);
    }
}

RegionOfCompetence OnlineKdTree::search(const FeatureVector& query, std::size_t k) const {
    if (k < 1) throw std::invalid_argument("OnlineKdTree::search: k must be >= 1");
    if (query.size() != dimensions_)
        throw std::invalid_argument("OnlineKdTree::search: dimension mismatch");
    RegionOfCompetence result;
    if (!root_) return result;

    Best best;
    best.k = k;
    best.nodes.reserve(k);
    best.distances.reserve(k);
    searchRecursive(root_.get(), query, best);

    std::vector<std::size_t> order(best.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return best.distances[a] < best.distances[b];
    });
    result.reserve(order.size());
    for (std::size_t i : order)
        result.push_back(Neighbor{best.nodes[i]->instance, best.distances[i]});
    return result;
}

void OnlineKdTree::collectActive(const Node* node, std::vector<LabeledInstance>& out) const {
    if (!node) return;
    collectActive(node->left.get(), out);
    if (node->active) out.push_back(node->instance);
    collectActive(node->right.get(), out);
}

std::vector<LabeledInstance> OnlineKdTree::activeInstances() const {
    std::vector<LabeledInstance> out;
    out.reserve(activeCount());
    collectActive(root_.get(), out);
    return out;
}

void OnlineKdTree::doRebuild() {
    std::vector<LabeledInstance> live = activeInstances();
    root_ = buildRecursive(live, 0, dimensions_);
    totalNodes_ = activeCount();
    inactiveNodes_ = 0;
    sizeAtBuild_ = totalNodes_;
    ++rebuilds_;
}

bool OnlineKdTree::rebuildIfNeeded() {
    if (!root_) return false;
    const bool grown = totalNodes_ >= 2 * sizeAtBuild_;
    const bool tooManyInactive =
        static_cast<double>(inactiveNodes_) > beta_ * static_cast<double>(totalNodes_);
    if (!grown && !tooManyInactive) return false;
    doRebuild();
    return true;
}

void OnlineKdTree::rebuildFrom(const std::vector<LabeledInstance>& instances) {
    std::vector<LabeledInstance> copy = instances;
    root_ = buildRecursive(copy, 0, dimensions_);
    totalNodes_ = instances.size();
    inactiveNodes_ = 0;
    sizeAtBuild_ = instances.size();
    ++rebuilds_;
}

std::vector<OnlineKdTree::NodeView> OnlineKdTree::preorder() const {
    std::vector<NodeView> out;
    out.reserve(totalNodes_);
    struct Frame {
        const Node* node;
        std::size_t depth;
    };
    std::vector<Frame> stack;
    if (root_) stack.push_back({root_.get(), 0});
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        out.push_back({f.node->instance, f.node->split, f.node->active, f.depth});
        if (f.node->right) stack.push_back({f.node->right.get(), f.depth + 1});
        if (f.node->left) stack.push_back({f.node->left.get(), f.depth + 1});
    }
    return out;
}

bool OnlineKdTree::orderingInvariantsHold() const {
    struct Checker {
        static bool subtreeWithin(const Node* node, std::size_t dim, double bound, bool isLeft) {
            if (!node) return true;
            const double v = node->instance.features[dim];
            if (isLeft ? !(v < bound) : !(v >= bound)) return false;
            return subtreeWithin(node->left.get(), dim, bound, isLeft) &&
                   subtreeWithin(node->right.get(), dim, bound, isLeft);
        }
        static bool check(const Node* node) {
            if (!node) return true;
            const std::size_t s = node->split;
            const double v = node->instance.features[s];
            return subtreeWithin(node->left.get(), s, v, true) &&
                   subtreeWithin(node->right.get(), s, v, false) &&
                   check(node->left.get()) && check(node->right.get());
        }
    };
    return Checker::check(root_.get());
}

KdTreeStats OnlineKdTree::stats() const {
    KdTreeStats s;
    s.totalNodes = totalNodes_;
    s.inactiveNodes = inactiveNodes_;
    s.sizeAtBuild = sizeAtBuild_;
    s.rebuilds = rebuilds_;
    s.distanceComputations = distanceComputations_;
    return s;
}

}  // namespace incades

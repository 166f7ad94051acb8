#ifndef INCADES_KDTREE_HPP
#define INCADES_KDTREE_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "incades/core.hpp"

namespace incades {

/// Snapshot of the tree's bookkeeping counters.
struct KdTreeStats {
    std::size_t totalNodes = 0;
    std::size_t inactiveNodes = 0;
    std::size_t sizeAtBuild = 0;
    std::uint64_t rebuilds = 0;
    std::uint64_t distanceComputations = 0;
};

/// Online K-d tree over labeled instances: bulk build with median splits,
/// leaf insertion, lazy deletion via active flags, and approximate k-NN
/// search with a per-dimension Canberra segment as the pruning bound.
///
/// Ordering invariants at every node t with split dimension s:
///   every instance in the left subtree has features[s] <  t.features[s]
///   every instance in the right subtree has features[s] >= t.features[s]
///
/// Single-writer discipline: mutating calls are serialized by the owner;
/// searches may run concurrently with each other but not with a mutation.
class OnlineKdTree {
public:
    /// `dimensions` is K; `beta` the inactive-node fraction that triggers a
    /// rebuild in rebuildIfNeeded().
    explicit OnlineKdTree(std::size_t dimensions, double beta = 0.3);

    /// Balanced build. The node at each level is the first instance whose
    /// value on the split dimension equals the median (index floor(n/2) of
    /// the sorted values); strictly smaller values go left, the remaining
    /// greater-or-equal ones go right. Child split = (parent + 1) mod K.
    static OnlineKdTree build(const std::vector<LabeledInstance>& instances,
                              std::size_t dimensions, double beta = 0.3);

    /// Attach as a new active leaf by binary descent (< left, >= right).
    void insert(const LabeledInstance& instance);

    /// Locate the node holding `instance` (matched by features, label and
    /// seq) and flag it inactive. Structure is untouched. Returns whether an
    /// active matching node was found.
    bool lazyDelete(const LabeledInstance& instance);

    /// Approximate k-NN by Canberra distance over active nodes only.
    /// Returns up to min(k, active) neighbors sorted ascending by distance.
    RegionOfCompetence search(const FeatureVector& query, std::size_t k) const;

    /// Rebuild from the active instances when the tree has doubled since the
    /// last build or the inactive fraction exceeds beta. Returns whether a
    /// rebuild happened.
    bool rebuildIfNeeded();

    /// Discard everything and build from `instances` (bulk reset after a
    /// window shrink). Counts as a rebuild.
    void rebuildFrom(const std::vector<LabeledInstance>& instances);

    /// All active instances, in tree order.
    std::vector<LabeledInstance> activeInstances() const;

    std::size_t totalNodes() const { return totalNodes_; }
    std::size_t inactiveNodes() const { return inactiveNodes_; }
    std::size_t activeCount() const { return totalNodes_ - inactiveNodes_; }
    std::size_t dimensions() const { return dimensions_; }
    bool empty() const { return root_ == nullptr; }
    KdTreeStats stats() const;

    /// Test hook: with pruning disabled every subtree is always searched, so
    /// the result equals brute-force k-NN over the active nodes.
    void setPruningEnabled(bool enabled) { pruningEnabled_ = enabled; }

    /// Test hook: one row per node, preorder.
    struct NodeView {
        LabeledInstance instance;
        std::size_t split = 0;
        bool active = true;
        std::size_t depth = 0;
    };
    std::vector<NodeView> preorder() const;

    /// Test hook: verify both subtree ordering invariants at every node.
    bool orderingInvariantsHold() const;

    /// Pruning bound: Canberra segment on the node's split dimension,
    /// zero when both operands are zero. The subtree is searched when the
    /// segment is strictly below the current maximum distance.
    static double canberraSegment(double nodeValue, double queryValue);

private:
    struct Node {
        LabeledInstance instance;
        std::size_t split = 0;
        bool active = true;
        std::unique_ptr<Node> left;
        std::unique_ptr<Node> right;
    };

    struct Best {
        std::vector<const Node*> nodes;
        std::vector<double> distances;
        std::size_t k = 0;
        double currentMax() const;
        void offer(const Node* node, double distance);
    };

    static std::unique_ptr<Node> buildRecursive(std::vector<LabeledInstance>& instances,
                                                std::size_t split, std::size_t dimensions);
    void searchRecursive(const Node* node, const FeatureVector& query, Best& best) const;
    void collectActive(const Node* node, std::vector<LabeledInstance>& out) const;
    void doRebuild();

    std::unique_ptr<Node> root_;
    std::size_t dimensions_;
    double beta_;
    std::size_t totalNodes_ = 0;
    std::size_t inactiveNodes_ = 0;
    std::size_t sizeAtBuild_ = 0;
    std::uint64_t rebuilds_ = 0;
    mutable std::uint64_t distanceComputations_ = 0;
    bool pruningEnabled_ = true;
};

}  // namespace incades

#endif

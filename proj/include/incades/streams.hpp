#ifndef INCADES_STREAMS_HPP
#define INCADES_STREAMS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "incades/core.hpp"

namespace incades {

/// Deterministic RNG with fixed transforms on top of mt19937_64, so streams
/// are byte-identical across platforms (std distributions are
/// implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1), 53-bit resolution.
    double nextDouble() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * nextDouble(); }

    /// Uniform integer in [0, bound).
    std::uint64_t nextUint(std::uint64_t bound) {
        return static_cast<std::uint64_t>(nextDouble() * static_cast<double>(bound));
    }

    bool bernoulli(double p) { return nextDouble() < p; }

    /// Standard normal via Box-Muller.
    double nextGaussian();

private:
    std::mt19937_64 engine_;
    bool hasSpare_ = false;
    double spare_ = 0.0;
};

enum class GeneratorKind { Sea, Sine, Stagger, Agrawal, Hyperplane, Led, RandomRbf };

/// Gradual transition window: the active concept is drawn per instance,
/// P(new) ramping linearly from 0 at `start` to 1 at `end`.
struct GradualWindow {
    std::int64_t start = 0;
    std::int64_t end = 0;
    int fromConcept = 0;
    int toConcept = 0;
};

struct StreamSpec {
    GeneratorKind generator = GeneratorKind::Sea;
    std::size_t totalInstances = 0;
    /// Abrupt switches: (position, newConceptId), strictly increasing.
    std::vector<std::pair<std::int64_t, int>> abruptSchedule;
    std::optional<GradualWindow> gradual;
    int initialConcept = 0;
    /// Negative means the generator's own default.
    double noiseFraction = -1.0;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Build an abrupt-recurrent schedule: switch every `period` instances,
/// cycling concept ids 0..numConcepts-1 round-robin.
std::vector<std::pair<std::int64_t, int>> recurrentSchedule(std::size_t totalInstances,
                                                            std::size_t period,
                                                            int numConcepts);

/// Pull-based labeled-instance producer. next() yields instances with
/// consecutive seq starting at 0, then nullopt forever.
class StreamSource {
public:
    virtual ~StreamSource() = default;
    virtual std::optional<LabeledInstance> next() = 0;
    virtual std::size_t numFeatures() const = 0;
    virtual std::size_t numClasses() const = 0;
};

std::unique_ptr<StreamSource> makeStream(const StreamSpec& spec);

/// Number of distinct concepts a generator defines (1 for the incremental
/// drifters Hyperplane and RandomRBF).
int conceptCount(GeneratorKind kind);

/// Drain a source into a vector.
std::vector<LabeledInstance> generateAll(StreamSource& source);
std::vector<LabeledInstance> generateAll(const StreamSpec& spec);

/// Reorder a dataset into locality chunks: pick a uniformly random remaining
/// anchor, emit it followed by its chunkSize-1 nearest remaining neighbors by
/// Euclidean distance, remove all, repeat. The output is a permutation of the
/// input; the final chunk may be short.
std::vector<LabeledInstance> induceVirtualDrift(const std::vector<LabeledInstance>& dataset,
                                                std::size_t chunkSize, std::uint64_t seed);

/// An in-memory dataset read from a file, replayable as a stream.
struct Dataset {
    std::vector<LabeledInstance> instances;
    std::size_t numFeatures = 0;
    LabelTable labels;
};

/// CSV reader. Columns that parse as numbers on every row become one feature
/// each; other columns are one-hot encoded over their value set in
/// first-appearance order. labelColumn < 0 selects the last column. Missing
/// values are an error (no imputation); errors name the 1-based line.
Dataset readCsv(const std::string& path, int labelColumn = -1, bool hasHeader = true);

/// ARFF reader: @relation/@attribute/@data with numeric and nominal
/// attributes. Nominal attributes are one-hot encoded in declaration order;
/// the last attribute is the label, interned in declaration order.
Dataset readArff(const std::string& path);

/// Wrap an in-memory dataset as a stream (seq reassigned to replay order).
std::unique_ptr<StreamSource> makeDatasetStream(Dataset dataset);

}  // namespace incades

#endif

#ifndef INCADES_EVAL_HPP
#define INCADES_EVAL_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "incades/engine.hpp"
#include "incades/streams.hpp"

namespace incades {

enum class ProtocolMode { TestThenTrain, DelayedPartial };

struct ProtocolSpec {
    ProtocolMode mode = ProtocolMode::TestThenTrain;
    std::size_t delay = 1000;        ///< DelayedPartial: instances between test and label arrival
    double labelFraction = 0.5;      ///< DelayedPartial: 1.0 = all labeled, else even-seq only
    std::size_t preqWindow = 1000;   ///< sliding accuracy window
};

struct RunResult {
    std::string datasetId;
    std::uint64_t seed = 0;
    ProtocolMode mode = ProtocolMode::TestThenTrain;
    std::size_t delay = 0;
    std::uint64_t totalInstances = 0;
    std::uint64_t correct = 0;
    double averageAccuracy = 0.0;
    double instancesPerSecond = 0.0;
    bool valid = true;
    std::vector<std::pair<std::int64_t, double>> prequentialSeries;  ///< (seq, windowed accuracy)
    EngineCounters counters;
};

/// Sliding-window mean of a correctness sequence; point t averages
/// outcomes [t-window+1, t], truncated at the start.
std::vector<double> prequentialAccuracy(const std::vector<bool>& outcomes, std::size_t window);

/// Test-then-train: every instance is classified, the outcome recorded, then
/// the instance trains the engine. Wall-clock covers both phases.
RunResult runTestThenTrain(Engine& engine, StreamSource& source, const ProtocolSpec& spec,
                           const std::string& datasetId = "", std::uint64_t seed = 0);

/// Delayed, partially labeled protocol: every instance is tested at arrival;
/// only even-seq instances are labelable (all when labelFraction = 1.0); a
/// labelable instance's label reaches training `delay` instances after its
/// test position. Labels still pending at stream end are dropped.
RunResult runDelayedPartial(Engine& engine, StreamSource& source, const ProtocolSpec& spec,
                            const std::string& datasetId = "", std::uint64_t seed = 0);

/// Write summary.csv (one row per run) and one `<dataset>_seed<seed>_series.csv`
/// per run into `directory` (created if absent).
void writeResults(const std::vector<RunResult>& results, const std::string& directory);

/// Execute independent run tasks on a bounded worker pool, preserving input
/// order in the output.
std::vector<RunResult> runParallel(const std::vector<std::function<RunResult()>>& tasks,
                                   std::size_t jobs);

}  // namespace incades

#endif

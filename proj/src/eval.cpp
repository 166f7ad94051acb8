#include "incades/eval.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace incades {

namespace {

using Clock = std::chrono::steady_clock;

double elapsedSeconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void finalize(RunResult& result, const std::vector<bool>& outcomes, std::size_t preqWindow,
              double seconds, Engine& engine) {
    result.totalInstances = outcomes.size();
    for (bool ok : outcomes) result.correct += ok ? 1 : 0;
    result.averageAccuracy =
        outcomes.empty() ? 0.0
                         : static_cast<double>(result.correct) / static_cast<double>(outcomes.size());
    result.instancesPerSecond =
        seconds > 0.0 ? static_cast<double>(outcomes.size()) / seconds : 0.0;
    const std::vector<double> series = prequentialAccuracy(outcomes, preqWindow);
    result.prequentialSeries.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i)
        result.prequentialSeries.emplace_back(static_cast<std::int64_t>(i), series[i]);
    result.counters = engine.counters();
}

}  // namespace

std::vector<double> prequentialAccuracy(const std::vector<bool>& outcomes, std::size_t window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    std::vector<double> series(outcomes.size());
    std::size_t inWindow = 0;
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        inWindow += outcomes[t] ? 1 : 0;
        if (t >= window && outcomes[t - window]) --inWindow;
        const std::size_t span = std::min(t + 1, window);
        series[t] = static_cast<double>(inWindow) / static_cast<double>(span);
    }
    return series;
}

RunResult runTestThenTrain(Engine& engine, StreamSource& source, const ProtocolSpec& spec,
                           const std::string& datasetId, std::uint64_t seed) {
    RunResult result;
    result.datasetId = datasetId;
    result.seed = seed;
    result.mode = ProtocolMode::TestThenTrain;

    std::vector<bool> outcomes;
    const auto start = Clock::now();
    try {
        while (auto inst = source.next()) {
            const Prediction p = engine.classify(inst->features);
            outcomes.push_back(p.label == inst->label);
            engine.trainStep(*inst, p);
        }
    } catch (const std::exception&) {
        result.valid = false;
    }
    finalize(result, outcomes, spec.preqWindow, elapsedSeconds(start), engine);
    return result;
}

RunResult runDelayedPartial(Engine& engine, StreamSource& source, const ProtocolSpec& spec,
                            const std::string& datasetId, std::uint64_t seed) {
    RunResult result;
    result.datasetId = datasetId;
    result.seed = seed;
    result.mode = ProtocolMode::DelayedPartial;
    result.delay = spec.delay;

    std::vector<bool> outcomes;
    std::deque<LabeledInstance> pending;  // labelable instances awaiting release
    const auto start = Clock::now();
    try {
        while (auto inst = source.next()) {
            const Prediction p = engine.classify(inst->features);
            outcomes.push_back(p.label == inst->label);

            const bool labelable = spec.labelFraction >= 1.0 || inst->seq % 2 == 0;
            if (labelable) pending.push_back(*inst);

            while (!pending.empty() &&
                   pending.front().seq + static_cast<std::int64_t>(spec.delay) <= inst->seq) {
                // Release-order guard: a label may only train at or after its
                // release position.
                if (pending.front().seq + static_cast<std::int64_t>(spec.delay) > inst->seq)
                    throw std::logic_error("label released early");
                engine.trainStep(pending.front());
                pending.pop_front();
            }
        }
    } catch (const std::exception&) {
        result.valid = false;
    }
    // Labels still pending are dropped.
    finalize(result, outcomes, spec.preqWindow, elapsedSeconds(start), engine);
    return result;
}

void writeResults(const std::vector<RunResult>& results, const std::string& directory) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) throw std::runtime_error("cannot create " + directory + ": " + ec.message());

    const fs::path dir(directory);
    std::ofstream summary(dir / "summary.csv");
    if (!summary) throw std::runtime_error("cannot write " + (dir / "summary.csv").string());
    summary.precision(10);
    summary << "dataset,seed,mode,delay,accuracy,ips,drifts,overlap_hit_rate\n";
    for (const RunResult& r : results) {
        const char* mode = r.mode == ProtocolMode::TestThenTrain ? "ttt" : "delayed";
        summary << r.datasetId << ',' << r.seed << ',' << mode << ',' << r.delay << ','
                << r.averageAccuracy << ',' << r.instancesPerSecond << ',' << r.counters.drifts
                << ',' << r.counters.overlapHitRate() << '\n';

        const fs::path seriesPath =
            dir / (r.datasetId + "_seed" + std::to_string(r.seed) + "_series.csv");
        std::ofstream series(seriesPath);
        if (!series) throw std::runtime_error("cannot write " + seriesPath.string());
        series.precision(10);
        series << "seq,accuracy\n";
        for (const auto& [seq, acc] : r.prequentialSeries) series << seq << ',' << acc << '\n';
    }
}

std::vector<RunResult> runParallel(const std::vector<std::function<RunResult()>>& tasks,
                                   std::size_t jobs) {
    std::vector<RunResult> results(tasks.size());
    if (jobs < 1) jobs = 1;
    std::atomic<std::size_t> nextTask{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = nextTask.fetch_add(1);
            if (i >= tasks.size()) return;
            results[i] = tasks[i]();
        }
    };
    std::vector<std::thread> threads;
    const std::size_t n = std::min(jobs, tasks.size());
    threads.reserve(n);
    for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
    return results;
}

}  // namespace incades

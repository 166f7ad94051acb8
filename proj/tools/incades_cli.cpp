// Command-line front end: reproducible runs of the streaming engine, stream
// generation to CSV, and a neighbor-search backend benchmark.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "incades/engine.hpp"
#include "incades/eval.hpp"
#include "incades/kdtree.hpp"
#include "incades/streams.hpp"

namespace {

using namespace incades;

std::string envName(const std::string& flag) {
    std::string name = "INCADES_";
    for (char c : flag)
        name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return name;
}

template <typename Opt>
Opt* withEnv(Opt* opt, const std::string& flag) {
    opt->envname(envName(flag));
    return opt;
}

GeneratorKind parseGenerator(const std::string& name) {
    if (name == "sea") return GeneratorKind::Sea;
    if (name == "sine") return GeneratorKind::Sine;
    if (name == "stagger") return GeneratorKind::Stagger;
    if (name == "agrawal") return GeneratorKind::Agrawal;
    if (name == "hyperplane") return GeneratorKind::Hyperplane;
    if (name == "led") return GeneratorKind::Led;
    if (name == "rbf") return GeneratorKind::RandomRbf;
    throw CLI::ValidationError("--stream", "unknown generator: " + name);
}

struct StreamFlags {
    std::string stream;
    std::string file;
    std::size_t instances = 100000;
    std::size_t driftEvery = 0;
    std::int64_t gradualStart = -1;
    std::int64_t gradualEnd = -1;
    int fromConcept = 0;
    int toConcept = 1;
    double noise = -1.0;
    int labelColumn = -1;
    bool noHeader = false;
};

void addStreamFlags(CLI::App* cmd, StreamFlags& f, bool fileAllowed) {
    withEnv(cmd->add_option("--stream", f.stream,
                            "Generator: sea, sine, stagger, agrawal, hyperplane, led, rbf"),
            "stream");
    if (fileAllowed) {
        withEnv(cmd->add_option("--file", f.file, "Dataset file (.csv or .arff) instead of a generator"),
                "file");
        withEnv(cmd->add_option("--label-column", f.labelColumn,
                                "CSV label column index (default: last)"),
                "label-column");
        withEnv(cmd->add_flag("--no-header", f.noHeader, "CSV file has no header row"), "no-header");
    }
    withEnv(cmd->add_option("--instances", f.instances, "Stream length"), "instances");
    withEnv(cmd->add_option("--drift-every", f.driftEvery,
                            "Abrupt recurrent drift period (0 = stationary)"),
            "drift-every");
    withEnv(cmd->add_option("--gradual-start", f.gradualStart, "Gradual drift window start"),
            "gradual-start");
    withEnv(cmd->add_option("--gradual-end", f.gradualEnd, "Gradual drift window end"),
            "gradual-end");
    withEnv(cmd->add_option("--from-concept", f.fromConcept, "Gradual drift: old concept id"),
            "from-concept");
    withEnv(cmd->add_option("--to-concept", f.toConcept, "Gradual drift: new concept id"),
            "to-concept");
    withEnv(cmd->add_option("--noise", f.noise, "Noise fraction (negative = generator default)"),
            "noise");
}

StreamSpec toSpec(const StreamFlags& f, std::uint64_t seed) {
    StreamSpec spec;
    spec.generator = parseGenerator(f.stream);
    spec.totalInstances = f.instances;
    if (f.driftEvery > 0)
        spec.abruptSchedule =
            recurrentSchedule(f.instances, f.driftEvery, conceptCount(spec.generator));
    if (f.gradualStart >= 0 && f.gradualEnd > f.gradualStart)
        spec.gradual = GradualWindow{f.gradualStart, f.gradualEnd, f.fromConcept, f.toConcept};
    spec.noiseFraction = f.noise;
    spec.seed = seed;
    return spec;
}

struct EngineFlags {
    EngineConfig config;
    std::string detector = "rddm";
    std::string distance = "canberra";
    std::string backend = "kd-tree";
    std::string learner = "ht";
    bool noOverlapFilter = false;
};

void addEngineFlags(CLI::App* cmd, EngineFlags& f) {
    withEnv(cmd->add_option("--window", f.config.maxWindowSize,
                            "Validation window cap W (0 = unbounded)"),
            "window");
    withEnv(cmd->add_option("--pool", f.config.maxPoolSize, "Classifier pool cap D"), "pool");
    withEnv(cmd->add_option("--train-cap", f.config.maxTrainPerClassifier,
                            "Training instances per classifier F"),
            "train-cap");
    withEnv(cmd->add_option("--neighbors", f.config.neighborhoodSize, "Neighborhood size k"),
            "neighbors");
    withEnv(cmd->add_option("--omega", f.config.overlapThreshold, "Overlap filter threshold"),
            "omega");
    withEnv(cmd->add_flag("--no-overlap-filter", f.noOverlapFilter, "Disable the overlap filter"),
            "no-overlap-filter");
    withEnv(cmd->add_option("--beta", f.config.inactiveRebuildFraction,
                            "Inactive-node fraction triggering a tree rebuild"),
            "beta");
    withEnv(cmd->add_option("--detector", f.detector, "Drift detector: ddm, rddm"), "detector");
    withEnv(cmd->add_option("--distance", f.distance, "Distance: canberra, euclidean"), "distance");
    withEnv(cmd->add_option("--backend", f.backend, "Neighbor search: kd-tree, brute-force"),
            "backend");
    withEnv(cmd->add_option("--learner", f.learner, "Base learner: ht, nb"), "learner");
}

EngineConfig toConfig(const EngineFlags& f, std::size_t numClasses) {
    EngineConfig cfg = f.config;
    cfg.overlapFilterEnabled = !f.noOverlapFilter;
    if (f.detector == "ddm")
        cfg.detector = DetectorKind::Ddm;
    else if (f.detector == "rddm")
        cfg.detector = DetectorKind::Rddm;
    else
        throw CLI::ValidationError("--detector", "unknown detector: " + f.detector);
    if (f.distance == "canberra")
        cfg.distance = DistanceKind::Canberra;
    else if (f.distance == "euclidean")
        cfg.distance = DistanceKind::Euclidean;
    else
        throw CLI::ValidationError("--distance", "unknown distance: " + f.distance);
    if (f.backend == "kd-tree")
        cfg.backend = SearchBackend::KdTree;
    else if (f.backend == "brute-force")
        cfg.backend = SearchBackend::BruteForce;
    else
        throw CLI::ValidationError("--backend", "unknown backend: " + f.backend);
    if (f.learner == "ht")
        cfg.learner = LearnerKind::HoeffdingTree;
    else if (f.learner == "nb")
        cfg.learner = LearnerKind::NaiveBayes;
    else
        throw CLI::ValidationError("--learner", "unknown learner: " + f.learner);
    cfg.numClasses = numClasses;
    return cfg;
}

Dataset readFile(const StreamFlags& f) {
    const std::string& path = f.file;
    const bool arff = path.size() >= 5 && path.substr(path.size() - 5) == ".arff";
    return arff ? readArff(path) : readCsv(path, f.labelColumn, !f.noHeader);
}

void writeStreamCsv(const std::vector<LabeledInstance>& instances, std::ostream& out) {
    if (instances.empty()) return;
    out.precision(17);
    const std::size_t k = instances.front().features.size();
    for (std::size_t a = 0; a < k; ++a) out << 'f' << a << ',';
    out << "label\n";
    for (const LabeledInstance& inst : instances) {
        for (double v : inst.features) out << v << ',';
        out << inst.label << '\n';
    }
}

int commandRun(const StreamFlags& streamFlags, const EngineFlags& engineFlags,
               const std::string& mode, std::size_t delay, double labelFraction,
               std::size_t seeds, std::uint64_t baseSeed, std::size_t jobs,
               const std::string& outDir) {
    ProtocolSpec protocol;
    if (mode == "ttt") {
        protocol.mode = ProtocolMode::TestThenTrain;
    } else if (mode == "delayed") {
        protocol.mode = ProtocolMode::DelayedPartial;
        protocol.delay = delay;
        protocol.labelFraction = labelFraction;
    } else {
        std::cerr << "unknown mode: " << mode << " (expected ttt or delayed)\n";
        return 1;
    }

    const bool fromFile = !streamFlags.file.empty();
    if (!fromFile && streamFlags.stream.empty()) {
        std::cerr << "one of --stream or --file is required\n";
        return 1;
    }

    Dataset fileData;
    if (fromFile) fileData = readFile(streamFlags);
    const std::string datasetId = fromFile ? streamFlags.file : streamFlags.stream;

    std::vector<std::function<RunResult()>> tasks;
    for (std::size_t i = 0; i < seeds; ++i) {
        const std::uint64_t seed = baseSeed + i;
        tasks.push_back([&, seed]() {
            std::unique_ptr<StreamSource> source;
            if (fromFile)
                source = makeDatasetStream(fileData);
            else
                source = makeStream(toSpec(streamFlags, seed));
            Engine engine(toConfig(engineFlags, source->numClasses()));
            return protocol.mode == ProtocolMode::TestThenTrain
                       ? runTestThenTrain(engine, *source, protocol, datasetId, seed)
                       : runDelayedPartial(engine, *source, protocol, datasetId, seed);
        });
    }

    const std::vector<RunResult> results = runParallel(tasks, jobs);
    writeResults(results, outDir);
    bool anyInvalid = false;
    for (const RunResult& r : results) {
        std::cout << r.datasetId << " seed=" << r.seed << " accuracy=" << r.averageAccuracy
                  << " ips=" << r.instancesPerSecond << " drifts=" << r.counters.drifts
                  << (r.valid ? "" : " INVALID") << '\n';
        anyInvalid = anyInvalid || !r.valid;
    }
    return anyInvalid ? 1 : 0;
}

int commandGenerate(const StreamFlags& streamFlags, std::uint64_t seed, std::size_t chunk,
                    const std::string& input, const std::string& outPath) {
    std::vector<LabeledInstance> instances;
    if (streamFlags.stream == "virtual") {
        if (input.empty()) {
            std::cerr << "--stream virtual requires --input\n";
            return 1;
        }
        const Dataset ds = readCsv(input, -1, true);
        instances = induceVirtualDrift(ds.instances, chunk, seed);
    } else {
        if (streamFlags.stream.empty()) {
            std::cerr << "--stream is required\n";
            return 1;
        }
        instances = generateAll(toSpec(streamFlags, seed));
    }
    if (outPath.empty() || outPath == "-") {
        writeStreamCsv(instances, std::cout);
    } else {
        std::ofstream out(outPath);
        if (!out) {
            std::cerr << "cannot write " << outPath << '\n';
            return 1;
        }
        writeStreamCsv(instances, out);
    }
    return 0;
}

int knnVote(const RegionOfCompetence& roc) {
    if (roc.empty()) return 0;
    std::vector<std::pair<int, std::size_t>> counts;
    for (const Neighbor& nb : roc) {
        auto it = std::find_if(counts.begin(), counts.end(),
                               [&](const auto& p) { return p.first == nb.instance.label; });
        if (it == counts.end())
            counts.emplace_back(nb.instance.label, 1);
        else
            ++it->second;
    }
    std::size_t maxCount = 0;
    for (const auto& [label, c] : counts) maxCount = std::max(maxCount, c);
    for (const Neighbor& nb : roc) {  // nearest among tied labels
        for (const auto& [label, c] : counts)
            if (label == nb.instance.label && c == maxCount) return label;
    }
    return roc.front().instance.label;
}

int commandBenchTree(const StreamFlags& streamFlags, std::vector<std::size_t> sizes,
                     std::size_t queries, std::size_t k, std::uint64_t seed,
                     const std::string& outPath) {
    using Clock = std::chrono::steady_clock;
    if (streamFlags.stream.empty()) {
        std::cerr << "--stream is required\n";
        return 1;
    }
    std::sort(sizes.begin(), sizes.end());
    const std::size_t maxSize = sizes.back();

    StreamFlags stationary = streamFlags;
    stationary.driftEvery = 0;
    stationary.instances = maxSize + queries;
    const std::vector<LabeledInstance> all = generateAll(toSpec(stationary, seed));
    const std::vector<LabeledInstance> queryInstances(all.end() - static_cast<std::ptrdiff_t>(queries),
                                                      all.end());

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!outPath.empty() && outPath != "-") {
        file.open(outPath);
        if (!file) {
            std::cerr << "cannot write " << outPath << '\n';
            return 1;
        }
        out = &file;
    }
    *out << "stream,n,backend,accuracy,seconds,ips,speedup\n";

    for (std::size_t n : sizes) {
        const std::vector<LabeledInstance> window(all.begin(),
                                                  all.begin() + static_cast<std::ptrdiff_t>(n));
        double bruteSeconds = 0.0;
        for (const std::string backend : {"brute-force", "kd-tree"}) {
            std::size_t correct = 0;
            const auto start = Clock::now();
            if (backend == "brute-force") {
                std::vector<std::pair<double, std::size_t>> dist(window.size());
                for (const LabeledInstance& q : queryInstances) {
                    for (std::size_t i = 0; i < window.size(); ++i)
                        dist[i] = {canberra(window[i].features, q.features), i};
                    const std::size_t take = std::min(k, dist.size());
                    std::partial_sort(dist.begin(),
                                      dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
                    RegionOfCompetence roc;
                    for (std::size_t i = 0; i < take; ++i)
                        roc.push_back({window[dist[i].second], dist[i].first});
                    if (knnVote(roc) == q.label) ++correct;
                }
            } else {
                OnlineKdTree tree =
                    OnlineKdTree::build(window, window.front().features.size());
                for (const LabeledInstance& q : queryInstances)
                    if (knnVote(tree.search(q.features, k)) == q.label) ++correct;
            }
            const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
            if (backend == "brute-force") bruteSeconds = seconds;
            const double ips = seconds > 0.0 ? static_cast<double>(queries) / seconds : 0.0;
            const double speedup = seconds > 0.0 ? bruteSeconds / seconds : 0.0;
            *out << streamFlags.stream << ',' << n << ',' << backend << ','
                 << static_cast<double>(correct) / static_cast<double>(queries) << ',' << seconds
                 << ',' << ips << ',' << speedup << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming dynamic-ensemble classification engine"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run an evaluation protocol");
    StreamFlags runStream;
    EngineFlags runEngine;
    std::string mode = "ttt";
    std::size_t delay = 1000;
    double labelFraction = 0.5;
    std::size_t seeds = 1;
    std::uint64_t baseSeed = 1;
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string outDir = "results";
    addStreamFlags(run, runStream, true);
    addEngineFlags(run, runEngine);
    withEnv(run->add_option("--mode", mode, "Protocol: ttt, delayed"), "mode");
    withEnv(run->add_option("--delay", delay, "Label delay (delayed mode)"), "delay");
    withEnv(run->add_option("--label-fraction", labelFraction,
                            "Labeled fraction (delayed mode): 1.0 or 0.5"),
            "label-fraction");
    withEnv(run->add_option("--seeds", seeds, "Number of repetitions"), "seeds");
    withEnv(run->add_option("--seed", baseSeed, "Base seed (run i uses base + i)"), "seed");
    withEnv(run->add_option("--jobs", jobs, "Parallel workers"), "jobs");
    withEnv(run->add_option("--out", outDir, "Output directory"), "out");

    // generate
    auto* gen = app.add_subcommand("generate", "Write a generated stream to CSV");
    StreamFlags genStream;
    std::uint64_t genSeed = 1;
    std::size_t chunk = 200;
    std::string input;
    std::string genOut;
    addStreamFlags(gen, genStream, false);
    withEnv(gen->add_option("--seed", genSeed, "Generator seed"), "seed");
    withEnv(gen->add_option("--chunk", chunk, "Chunk size for --stream virtual"), "chunk");
    withEnv(gen->add_option("--input", input, "Input CSV for --stream virtual"), "input");
    withEnv(gen->add_option("--out", genOut, "Output CSV path (default stdout)"), "out");

    // bench-tree
    auto* bench = app.add_subcommand("bench-tree", "Benchmark neighbor-search backends");
    StreamFlags benchStream;
    benchStream.stream = "sine";
    std::vector<std::size_t> sizes{1000, 10000, 25000, 50000};
    std::size_t queries = 100000;
    std::size_t k = 5;
    std::uint64_t benchSeed = 1;
    std::string benchOut;
    addStreamFlags(bench, benchStream, false);
    withEnv(bench->add_option("--sizes", sizes, "Window sizes to benchmark")->delimiter(','),
            "sizes");
    withEnv(bench->add_option("--queries", queries, "Classifications per backend"), "queries");
    withEnv(bench->add_option("--neighbors", k, "Neighborhood size"), "neighbors");
    withEnv(bench->add_option("--seed", benchSeed, "Generator seed"), "seed");
    withEnv(bench->add_option("--out", benchOut, "Output CSV path (default stdout)"), "out");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return commandRun(runStream, runEngine, mode, delay, labelFraction, seeds, baseSeed,
                              jobs, outDir);
        if (gen->parsed()) return commandGenerate(genStream, genSeed, chunk, input, genOut);
        if (bench->parsed())
            return commandBenchTree(benchStream, sizes, queries, k, benchSeed, benchOut);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

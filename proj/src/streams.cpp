#include "incades/streams.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace incades {

double Rng::nextGaussian() {
    if (hasSpare_) {
        hasSpare_ = false;
        return spare_;
    }
    double u1 = nextDouble();
    while (u1 <= 0.0) u1 = nextDouble();
    const double u2 = nextDouble();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    hasSpare_ = true;
    return r * std::cos(theta);
}

void StreamSpec::validate() const {
    if (totalInstances == 0) throw std::invalid_argument("totalInstances must be positive");
    std::int64_t prev = -1;
    for (const auto& [pos, conceptId] : abruptSchedule) {
        if (pos <= prev) throw std::invalid_argument("abrupt positions must be strictly increasing");
        if (pos >= static_cast<std::int64_t>(totalInstances))
            throw std::invalid_argument("abrupt position beyond stream end");
        if (conceptId < 0 || conceptId >= conceptCount(generator))
            throw std::invalid_argument("concept id out of range");
        prev = pos;
    }
    if (gradual) {
        if (gradual->start >= gradual->end)
            throw std::invalid_argument("gradual window must have start < end");
        if (gradual->end >= static_cast<std::int64_t>(totalInstances))
            throw std::invalid_argument("gradual window beyond stream end");
    }
    if (noiseFraction > 1.0) throw std::invalid_argument("noiseFraction must be <= 1");
}

int conceptCount(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::Sea: return 4;
        case GeneratorKind::Sine: return 4;
        case GeneratorKind::Stagger: return 3;
        case GeneratorKind::Agrawal: return 10;
        case GeneratorKind::Led: return 4;
        case GeneratorKind::Hyperplane:
        case GeneratorKind::RandomRbf: return 1;
    }
    return 1;
}

std::vector<std::pair<std::int64_t, int>> recurrentSchedule(std::size_t totalInstances,
                                                            std::size_t period,
                                                            int numConcepts) {
    std::vector<std::pair<std::int64_t, int>> schedule;
    int conceptId = 0;
    for (std::size_t pos = period; pos < totalInstances; pos += period) {
        conceptId = (conceptId + 1) % numConcepts;
        schedule.emplace_back(static_cast<std::int64_t>(pos), conceptId);
    }
    return schedule;
}

namespace {

double defaultNoise(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::Sea: return 0.10;
        case GeneratorKind::Hyperplane: return 0.05;
        case GeneratorKind::Led: return 0.10;
        default: return 0.0;
    }
}

/// Shared schedule plumbing: abrupt switches, gradual Bernoulli ramp, label
/// noise, seq numbering. Subclasses produce one (features, label) draw for
/// the active concept.
class SyntheticSource : public StreamSource {
public:
    explicit SyntheticSource(const StreamSpec& spec)
        : spec_(spec), rng_(spec.seed),
          noise_(spec.noiseFraction < 0.0 ? defaultNoise(spec.generator) : spec.noiseFraction) {
        spec_.validate();
    }

    std::optional<LabeledInstance> next() final {
        if (seq_ >= static_cast<std::int64_t>(spec_.totalInstances)) return std::nullopt;
        const int conceptId = activeConcept();
        LabeledInstance inst = sample(conceptId);
        inst.seq = seq_++;
        return inst;
    }

protected:
    virtual LabeledInstance sample(int conceptId) = 0;

    /// Label noise: flip a binary label, or redraw uniformly for multiclass.
    int noisyLabel(int label, int classes) {
        if (noise_ <= 0.0 || !rng_.bernoulli(noise_)) return label;
        if (classes == 2) return 1 - label;
        return static_cast<int>(rng_.nextUint(static_cast<std::uint64_t>(classes)));
    }

    double noise() const { return noise_; }
    Rng& rng() { return rng_; }
    const StreamSpec& spec() const { return spec_; }

private:
    int activeConcept() {
        int conceptId = spec_.initialConcept;
        while (scheduleIdx_ < spec_.abruptSchedule.size() &&
               spec_.abruptSchedule[scheduleIdx_].first <= seq_)
            ++scheduleIdx_;
        if (scheduleIdx_ > 0) conceptId = spec_.abruptSchedule[scheduleIdx_ - 1].second;
        if (spec_.gradual && spec_.gradual->fromConcept != spec_.gradual->toConcept) {
            const auto& g = *spec_.gradual;
            if (seq_ >= g.end) {
                conceptId = g.toConcept;
            } else if (seq_ >= g.start) {
                const double p = static_cast<double>(seq_ - g.start) /
                                 static_cast<double>(g.end - g.start);
                conceptId = rng_.bernoulli(p) ? g.toConcept : g.fromConcept;
            } else {
                conceptId = g.fromConcept;
            }
        }
        return conceptId;
    }

    StreamSpec spec_;
    Rng rng_;
    double noise_;
    std::int64_t seq_ = 0;
    std::size_t scheduleIdx_ = 0;
};

class SeaSource final : public SyntheticSource {
public:
    using SyntheticSource::SyntheticSource;
    std::size_t numFeatures() const override { return 3; }
    std::size_t numClasses() const override { return 2; }

protected:
    LabeledInstance sample(int conceptId) override {
        static constexpr std::array<double, 4> kThresholds{8.0, 9.0, 7.0, 9.5};
        LabeledInstance inst;
        inst.features = {rng().uniform(0.0, 10.0), rng().uniform(0.0, 10.0),
                         rng().uniform(0.0, 10.0)};
        const int label =
            inst.features[0] + inst.features[1] <= kThresholds[static_cast<std::size_t>(conceptId)]
                ? 1
                : 0;
        inst.label = noisyLabel(label, 2);
        return inst;
    }
};

class SineSource final : public SyntheticSource {
public:
    using SyntheticSource::SyntheticSource;
    std::size_t numFeatures() const override { return 2; }
    std::size_t numClasses() const override { return 2; }

protected:
    LabeledInstance sample(int conceptId) override {
        LabeledInstance inst;
        const double x = rng().nextDouble();
        const double y = rng().nextDouble();
        inst.features = {x, y};
        const double boundary = conceptId < 2 ? std::sin(x) : 0.5 + 0.3 * std::sin(3.0 * M_PI * x);
        bool positive = y < boundary;
        if (conceptId % 2 == 1) positive = !positive;  // inverted variants
        inst.label = noisyLabel(positive ? 1 : 0, 2);
        return inst;
    }
};

class StaggerSource final : public SyntheticSource {
public:
    using SyntheticSource::SyntheticSource;
    std::size_t numFeatures() const override { return 9; }
    std::size_t numClasses() const override { return 2; }

protected:
    LabeledInstance sample(int conceptId) override {
        // size: small/medium/large, color: red/green/blue,
        // shape: circle/square/triangle; one-hot in that order.
        const int size = static_cast<int>(rng().nextUint(3));
        const int color = static_cast<int>(rng().nextUint(3));
        const int shape = static_cast<int>(rng().nextUint(3));
        bool positive = false;
        switch (conceptId) {
            case 0: positive = size == 0 && color == 0; break;
            case 1: positive = color == 1 || shape == 0; break;
            default: positive = size == 1 || size == 2; break;
        }
        LabeledInstance inst;
        inst.features.assign(9, 0.0);
        inst.features[static_cast<std::size_t>(size)] = 1.0;
        inst.features[static_cast<std::size_t>(3 + color)] = 1.0;
        inst.features[static_cast<std::size_t>(6 + shape)] = 1.0;
        inst.label = noisyLabel(positive ? 1 : 0, 2);
        return inst;
    }
};

class AgrawalSource final : public SyntheticSource {
public:
    using SyntheticSource::SyntheticSource;
    std::size_t numFeatures() const override { return 9; }
    std::size_t numClasses() const override { return 2; }

protected:
    LabeledInstance sample(int conceptId) override {
        const double salary = rng().uniform(20000.0, 150000.0);
        const double commission = salary >= 75000.0 ? 0.0 : rng().uniform(10000.0, 75000.0);
        const double age = static_cast<double>(20 + rng().nextUint(61));
        const double elevel = static_cast<double>(rng().nextUint(5));
        const double car = static_cast<double>(1 + rng().nextUint(20));
        const double zipcode = static_cast<double>(rng().nextUint(9));
        const double hvalue = (9.0 - zipcode) * 100000.0 * rng().uniform(0.5, 1.5);
        const double hyears = static_cast<double>(1 + rng().nextUint(30));
        const double loan = rng().uniform(0.0, 500000.0);

        const bool groupA = classify(conceptId, salary, commission, age, elevel, hvalue, hyears, loan);
        LabeledInstance inst;
        inst.features = {salary, commission, age, elevel, car, zipcode, hvalue, hyears, loan};
        inst.label = noisyLabel(groupA ? 0 : 1, 2);
        return inst;
    }

private:
    static bool between(double v, double lo, double hi) { return v >= lo && v <= hi; }

    static bool classify(int function, double salary, double commission, double age,
                         double elevel, double hvalue, double hyears, double loan) {
        const double income = salary + commission;
        switch (function) {
            case 0: return age < 40.0 || age >= 60.0;
            case 1:
                if (age < 40.0) return between(salary, 50000.0, 100000.0);
                if (age < 60.0) return between(salary, 75000.0, 125000.0);
                return between(salary, 25000.0, 75000.0);
            case 2:
                if (age < 40.0) return elevel <= 1.0;
                if (age < 60.0) return between(elevel, 1.0, 3.0);
                return between(elevel, 2.0, 4.0);
            case 3:
                if (age < 40.0)
                    return elevel <= 1.0 ? between(salary, 25000.0, 75000.0)
                                         : between(salary, 50000.0, 100000.0);
                if (age < 60.0)
                    return between(elevel, 1.0, 3.0) ? between(salary, 50000.0, 100000.0)
                                                     : between(salary, 75000.0, 125000.0);
                return between(elevel, 2.0, 4.0) ? between(salary, 50000.0, 100000.0)
                                                 : between(salary, 25000.0, 75000.0);
            case 4:
                if (age < 40.0)
                    return between(salary, 50000.0, 100000.0) ? between(loan, 100000.0, 300000.0)
                                                              : between(loan, 200000.0, 400000.0);
                if (age < 60.0)
                    return between(salary, 75000.0, 125000.0) ? between(loan, 200000.0, 400000.0)
                                                              : between(loan, 300000.0, 500000.0);
                return between(salary, 25000.0, 75000.0) ? between(loan, 300000.0, 500000.0)
                                                         : between(loan, 100000.0, 300000.0);
            case 5:
                if (age < 40.0) return between(income, 50000.0, 100000.0);
                if (age < 60.0) return between(income, 75000.0, 125000.0);
                return between(income, 25000.0, 75000.0);
            case 6: return 2.0 * income / 3.0 - loan / 5.0 - 20000.0 > 0.0;
            case 7: return 2.0 * income / 3.0 - 5000.0 * elevel - 20000.0 > 0.0;
            case 8: return 2.0 * income / 3.0 - 5000.0 * elevel - loan / 5.0 - 10000.0 > 0.0;
            default: {
                const double equity = hyears < 20.0 ? 0.0 : hvalue * (hyears - 20.0) / 10.0;
                return 2.0 * income / 3.0 - 5000.0 * elevel + equity / 5.0 - 10000.0 > 0.0;
            }
        }
    }
};

class HyperplaneSource final : public SyntheticSource {
public:
    explicit HyperplaneSource(const StreamSpec& spec) : SyntheticSource(spec) {
        weights_.resize(kAttrs);
        for (double& w : weights_) w = rng().nextDouble();
        for (std::size_t i = 0; i < kDriftingWeights; ++i)
            directions_[i] = rng().bernoulli(0.5) ? 1.0 : -1.0;
    }

    std::size_t numFeatures() const override { return kAttrs; }
    std::size_t numClasses() const override { return 2; }

protected:
    LabeledInstance sample(int) override {
        // Weights move only inside the configured gradual window.
        if (spec().gradual) {
            const auto& g = *spec().gradual;
            if (seqForDrift_ >= g.start && seqForDrift_ < g.end)
                for (std::size_t i = 0; i < kDriftingWeights; ++i)
                    weights_[i] += directions_[i] * kDriftMagnitude;
        }
        ++seqForDrift_;

        LabeledInstance inst;
        inst.features.resize(kAttrs);
        double dot = 0.0;
        double weightSum = 0.0;
        for (std::size_t i = 0; i < kAttrs; ++i) {
            inst.features[i] = rng().nextDouble();
            dot += weights_[i] * inst.features[i];
            weightSum += weights_[i];
        }
        inst.label = noisyLabel(dot >= weightSum / 2.0 ? 1 : 0, 2);
        return inst;
    }

private:
    static constexpr std::size_t kAttrs = 10;
    static constexpr std::size_t kDriftingWeights = 2;
    static constexpr double kDriftMagnitude = 0.001;

    std::vector<double> weights_;
    std::array<double, kDriftingWeights> directions_{};
    std::int64_t seqForDrift_ = 0;
};

class LedSource final : public SyntheticSource {
public:
    using SyntheticSource::SyntheticSource;
    std::size_t numFeatures() const override { return kAttrs; }
    std::size_t numClasses() const override { return 10; }

protected:
    LabeledInstance sample(int conceptId) override {
        // Standard 7-segment encodings for digits 0..9.
        static constexpr std::array<std::array<int, 7>, 10> kSegments{{
            {1, 1, 1, 0, 1, 1, 1}, {0, 0, 1, 0, 0, 1, 0}, {1, 0, 1, 1, 1, 0, 1},
            {1, 0, 1, 1, 0, 1, 1}, {0, 1, 1, 1, 0, 1, 0}, {1, 1, 0, 1, 0, 1, 1},
            {1, 1, 0, 1, 1, 1, 1}, {1, 0, 1, 0, 0, 1, 0}, {1, 1, 1, 1, 1, 1, 1},
            {1, 1, 1, 1, 0, 1, 1}}};

        const int digit = static_cast<int>(rng().nextUint(10));
        LabeledInstance inst;
        inst.features.assign(kAttrs, 0.0);
        // The conceptId rotates which positions carry the segments.
        const std::size_t offset = static_cast<std::size_t>(conceptId) * 7 % kAttrs;
        std::array<bool, kAttrs> informative{};
        for (std::size_t s = 0; s < 7; ++s) {
            const std::size_t pos = (offset + s) % kAttrs;
            informative[pos] = true;
            int bit = kSegments[static_cast<std::size_t>(digit)][s];
            if (noise() > 0.0 && rng().bernoulli(noise())) bit = 1 - bit;
            inst.features[pos] = static_cast<double>(bit);
        }
        for (std::size_t a = 0; a < kAttrs; ++a)
            if (!informative[a]) inst.features[a] = rng().bernoulli(0.5) ? 1.0 : 0.0;
        inst.label = digit;
        return inst;
    }

private:
    static constexpr std::size_t kAttrs = 24;
};

class RandomRbfSource final : public SyntheticSource {
public:
    explicit RandomRbfSource(const StreamSpec& spec) : SyntheticSource(spec) {
        centroids_.resize(kCentroids);
        for (Centroid& c : centroids_) {
            c.center.resize(kAttrs);
            for (double& v : c.center) v = rng().nextDouble();
            c.label = static_cast<int>(rng().nextUint(kClasses));
            c.weight = rng().nextDouble();
            c.stddev = rng().nextDouble();
            c.direction = randomUnitVector();
            totalWeight_ += c.weight;
        }
    }

    std::size_t numFeatures() const override { return kAttrs; }
    std::size_t numClasses() const override { return kClasses; }

protected:
    LabeledInstance sample(int) override {
        for (Centroid& c : centroids_)
            for (std::size_t a = 0; a < kAttrs; ++a)
                c.center[a] += kDriftSpeed * c.direction[a];

        double pick = rng().nextDouble() * totalWeight_;
        std::size_t idx = 0;
        for (; idx + 1 < centroids_.size(); ++idx) {
            pick -= centroids_[idx].weight;
            if (pick <= 0.0) break;
        }
        const Centroid& c = centroids_[idx];

        const std::vector<double> dir = randomUnitVector();
        const double magnitude = rng().nextGaussian() * c.stddev;
        LabeledInstance inst;
        inst.features.resize(kAttrs);
        for (std::size_t a = 0; a < kAttrs; ++a)
            inst.features[a] = c.center[a] + dir[a] * magnitude;
        inst.label = noisyLabel(c.label, static_cast<int>(kClasses));
        return inst;
    }

private:
    struct Centroid {
        std::vector<double> center;
        int label = 0;
        double weight = 0.0;
        double stddev = 0.0;
        std::vector<double> direction;
    };

    std::vector<double> randomUnitVector() {
        std::vector<double> v(kAttrs);
        double norm = 0.0;
        for (double& x : v) {
            x = rng().uniform(-1.0, 1.0);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm <= 0.0) {
            v.assign(kAttrs, 0.0);
            v[0] = 1.0;
            return v;
        }
        for (double& x : v) x /= norm;
        return v;
    }

    static constexpr std::size_t kCentroids = 50;
    static constexpr std::size_t kAttrs = 10;
    static constexpr std::size_t kClasses = 2;
    static constexpr double kDriftSpeed = 0.0001;

    std::vector<Centroid> centroids_;
    double totalWeight_ = 0.0;
};

class DatasetSource final : public StreamSource {
public:
    explicit DatasetSource(Dataset dataset) : dataset_(std::move(dataset)) {}

    std::optional<LabeledInstance> next() override {
        if (idx_ >= dataset_.instances.size()) return std::nullopt;
        LabeledInstance inst = dataset_.instances[idx_];
        inst.seq = static_cast<std::int64_t>(idx_);
        ++idx_;
        return inst;
    }
    std::size_t numFeatures() const override { return dataset_.numFeatures; }
    std::size_t numClasses() const override { return std::max<std::size_t>(dataset_.labels.size(), 1); }

private:
    Dataset dataset_;
    std::size_t idx_ = 0;
};

}  // namespace

std::unique_ptr<StreamSource> makeStream(const StreamSpec& spec) {
    switch (spec.generator) {
        case GeneratorKind::Sea: return std::make_unique<SeaSource>(spec);
        case GeneratorKind::Sine: return std::make_unique<SineSource>(spec);
        case GeneratorKind::Stagger: return std::make_unique<StaggerSource>(spec);
        case GeneratorKind::Agrawal: return std::make_unique<AgrawalSource>(spec);
        case GeneratorKind::Hyperplane: return std::make_unique<HyperplaneSource>(spec);
        case GeneratorKind::Led: return std::make_unique<LedSource>(spec);
        case GeneratorKind::RandomRbf: return std::make_unique<RandomRbfSource>(spec);
    }
    throw std::invalid_argument("unknown generator kind");
}

std::vector<LabeledInstance> generateAll(StreamSource& source) {
    std::vector<LabeledInstance> out;
    while (auto inst = source.next()) out.push_back(std::move(*inst));
    return out;
}

std::vector<LabeledInstance> generateAll(const StreamSpec& spec) {
    auto source = makeStream(spec);
    return generateAll(*source);
}

std::vector<LabeledInstance> induceVirtualDrift(const std::vector<LabeledInstance>& dataset,
                                                std::size_t chunkSize, std::uint64_t seed) {
    if (chunkSize == 0) throw std::invalid_argument("chunkSize must be positive");
    Rng rng(seed);
    std::vector<std::size_t> remaining(dataset.size());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});

    std::vector<LabeledInstance> out;
    out.reserve(dataset.size());
    while (!remaining.empty()) {
        const std::size_t anchorPos = rng.nextUint(remaining.size());
        const std::size_t anchor = remaining[anchorPos];

        // Rank the other remaining instances by distance to the anchor;
        // ties keep dataset order.
        std::vector<std::pair<double, std::size_t>> ranked;
        ranked.reserve(remaining.size() - 1);
        for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
            if (pos == anchorPos) continue;
            const std::size_t i = remaining[pos];
            ranked.emplace_back(euclidean(dataset[anchor].features, dataset[i].features), i);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });

        const std::size_t neighbors = std::min(chunkSize - 1, ranked.size());
        std::vector<bool> taken(dataset.size(), false);
        taken[anchor] = true;
        out.push_back(dataset[anchor]);
        for (std::size_t j = 0; j < neighbors; ++j) {
            taken[ranked[j].second] = true;
            out.push_back(dataset[ranked[j].second]);
        }
        std::erase_if(remaining, [&](std::size_t i) { return taken[i]; });
    }
    return out;
}

namespace {

std::vector<std::string> splitCsvLine(const std::string& line, std::size_t lineNo) {
    std::vector<std::string> cells;
    std::string cell;
    bool inQuotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (inQuotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    inQuotes = false;
                }
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            inQuotes = true;
        } else if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    if (inQuotes)
        throw std::runtime_error("unterminated quote at line " + std::to_string(lineNo));
    cells.push_back(cell);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parseDouble(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

bool isMissing(const std::string& cell) {
    const std::string t = trim(cell);
    return t.empty() || t == "?";
}

}  // namespace

Dataset readCsv(const std::string& path, int labelColumn, bool hasHeader) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t lineNo = 0;
    std::size_t columns = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineNo;
        if (trim(line).empty()) continue;
        if (first && hasHeader) {
            first = false;
            continue;
        }
        first = false;
        std::vector<std::string> cells = splitCsvLine(line, lineNo);
        if (columns == 0) {
            columns = cells.size();
            if (columns < 2)
                throw std::runtime_error(path + ": need at least 2 columns at line " +
                                         std::to_string(lineNo));
        } else if (cells.size() != columns) {
            throw std::runtime_error(path + ": wrong cell count at line " + std::to_string(lineNo));
        }
        for (const std::string& c : cells)
            if (isMissing(c))
                throw std::runtime_error(path + ": missing value at line " + std::to_string(lineNo));
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");

    const std::size_t label = labelColumn < 0 ? columns - 1 : static_cast<std::size_t>(labelColumn);
    if (label >= columns) throw std::runtime_error(path + ": label column out of range");

    // Column typing: numeric iff every cell parses; otherwise nominal with a
    // first-appearance value set.
    std::vector<bool> numeric(columns, true);
    std::vector<std::vector<std::string>> valueSets(columns);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < columns; ++c) {
            double unused;
            if (numeric[c] && !parseDouble(row[c], unused)) numeric[c] = false;
        }
    }
    for (const auto& row : rows)
        for (std::size_t c = 0; c < columns; ++c)
            if (!numeric[c] && c != label) {
                auto& vs = valueSets[c];
                const std::string v = trim(row[c]);
                if (std::find(vs.begin(), vs.end(), v) == vs.end()) vs.push_back(v);
            }

    Dataset ds;
    for (std::size_t c = 0; c < columns; ++c) {
        if (c == label) continue;
        ds.numFeatures += numeric[c] ? 1 : valueSets[c].size();
    }
    ds.instances.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        LabeledInstance inst;
        inst.features.reserve(ds.numFeatures);
        for (std::size_t c = 0; c < columns; ++c) {
            if (c == label) continue;
            if (numeric[c]) {
                double v;
                parseDouble(rows[r][c], v);
                inst.features.push_back(v);
            } else {
                const std::string v = trim(rows[r][c]);
                for (const std::string& candidate : valueSets[c])
                    inst.features.push_back(candidate == v ? 1.0 : 0.0);
            }
        }
        inst.label = ds.labels.intern(trim(rows[r][label]));
        inst.seq = static_cast<std::int64_t>(r);
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

namespace {

std::string toLower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

Dataset readArff(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    struct Attribute {
        std::string name;
        bool numeric = true;
        std::vector<std::string> values;  // nominal domain, declaration order
    };
    std::vector<Attribute> attrs;
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t lineNo = 0;
    bool inData = false;
    while (std::getline(in, line)) {
        ++lineNo;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '%') continue;
        if (!inData) {
            const std::string lower = toLower(t);
            if (lower.rfind("@relation", 0) == 0) continue;
            if (lower.rfind("@data", 0) == 0) {
                inData = true;
                continue;
            }
            if (lower.rfind("@attribute", 0) == 0) {
                std::string rest = trim(t.substr(10));
                Attribute attr;
                if (!rest.empty() && (rest[0] == '\'' || rest[0] == '"')) {
                    const char q = rest[0];
                    const std::size_t close = rest.find(q, 1);
                    if (close == std::string::npos)
                        throw std::runtime_error(path + ": bad attribute name at line " +
                                                 std::to_string(lineNo));
                    attr.name = rest.substr(1, close - 1);
                    rest = trim(rest.substr(close + 1));
                } else {
                    const std::size_t sp = rest.find_first_of(" \t");
                    if (sp == std::string::npos)
                        throw std::runtime_error(path + ": bad attribute at line " +
                                                 std::to_string(lineNo));
                    attr.name = rest.substr(0, sp);
                    rest = trim(rest.substr(sp));
                }
                if (!rest.empty() && rest[0] == '{') {
                    const std::size_t close = rest.find('}');
                    if (close == std::string::npos)
                        throw std::runtime_error(path + ": unterminated nominal domain at line " +
                                                 std::to_string(lineNo));
                    attr.numeric = false;
                    std::stringstream ss(rest.substr(1, close - 1));
                    std::string v;
                    while (std::getline(ss, v, ',')) attr.values.push_back(trim(v));
                    if (attr.values.empty())
                        throw std::runtime_error(path + ": empty nominal domain at line " +
                                                 std::to_string(lineNo));
                } else {
                    const std::string kind = toLower(rest);
                    if (kind != "numeric" && kind != "real" && kind != "integer")
                        throw std::runtime_error(path + ": unsupported attribute type at line " +
                                                 std::to_string(lineNo));
                }
                attrs.push_back(std::move(attr));
                continue;
            }
            throw std::runtime_error(path + ": unrecognized header at line " +
                                     std::to_string(lineNo));
        }
        std::vector<std::string> cells = splitCsvLine(t, lineNo);
        if (cells.size() != attrs.size())
            throw std::runtime_error(path + ": wrong cell count at line " + std::to_string(lineNo));
        for (const std::string& c : cells)
            if (isMissing(c))
                throw std::runtime_error(path + ": missing value at line " + std::to_string(lineNo));
        rows.push_back(std::move(cells));
    }
    if (attrs.size() < 2) throw std::runtime_error(path + ": need at least 2 attributes");
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");

    const std::size_t label = attrs.size() - 1;
    Dataset ds;
    // Label ids follow the declaration order of the class attribute.
    if (!attrs[label].numeric)
        for (const std::string& v : attrs[label].values) ds.labels.intern(v);
    for (std::size_t a = 0; a < label; ++a)
        ds.numFeatures += attrs[a].numeric ? 1 : attrs[a].values.size();

    ds.instances.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        LabeledInstance inst;
        inst.features.reserve(ds.numFeatures);
        for (std::size_t a = 0; a < label; ++a) {
            const std::string cell = trim(rows[r][a]);
            if (attrs[a].numeric) {
                double v;
                if (!parseDouble(cell, v))
                    throw std::runtime_error(path + ": non-numeric cell in data row " +
                                             std::to_string(r + 1));
                inst.features.push_back(v);
            } else {
                if (std::find(attrs[a].values.begin(), attrs[a].values.end(), cell) ==
                    attrs[a].values.end())
                    throw std::runtime_error(path + ": undeclared nominal value in data row " +
                                             std::to_string(r + 1));
                for (const std::string& candidate : attrs[a].values)
                    inst.features.push_back(candidate == cell ? 1.0 : 0.0);
            }
        }
        const std::string labelCell = trim(rows[r][label]);
        if (attrs[label].numeric) {
            double v;
            if (!parseDouble(labelCell, v))
                throw std::runtime_error(path + ": non-numeric label in data row " +
                                         std::to_string(r + 1));
            inst.label = ds.labels.intern(labelCell);
        } else {
            if (std::find(attrs[label].values.begin(), attrs[label].values.end(), labelCell) ==
                attrs[label].values.end())
                throw std::runtime_error(path + ": undeclared label in data row " +
                                         std::to_string(r + 1));
            inst.label = ds.labels.intern(labelCell);
        }
        inst.seq = static_cast<std::int64_t>(r);
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

std::unique_ptr<StreamSource> makeDatasetStream(Dataset dataset) {
    return std::make_unique<DatasetSource>(std::move(dataset));
}

}  // namespace incades

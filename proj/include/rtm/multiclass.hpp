#pragma once

#include "rtm/convolution.hpp"
#include "rtm/machine.hpp"
#include "rtm/random.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rtm {

/// Index of the largest vote; ties go to the lowest index.
inline std::size_t argmax_vote(std::span<const int> votes) {
    if (votes.empty()) throw std::invalid_argument("no class votes");
    std::size_t best = 0;
    for (std::size_t i = 1; i < votes.size(); ++i)
        if (votes[i] > votes[best]) best = i;
    return best;
}

/// One-vs-rest composition: one binary machine (bank) per class label, all
/// sharing hyperparameters and feature space.
class MulticlassMachine {
public:
    MulticlassMachine() = default;

    template <RandomSource R>
    MulticlassMachine(std::vector<std::string> labels, std::size_t features, const HyperParams& params, R& rng)
        : labels_(std::move(labels)) {
        if (labels_.size() < 2) throw std::invalid_argument("need at least two classes");
        banks_.reserve(labels_.size());
        for (std::size_t i = 0; i < labels_.size(); ++i) banks_.emplace_back(features, params, rng);
    }

    /// Unrandomized banks (used when loading a model).
    MulticlassMachine(std::vector<std::string> labels, std::size_t features, const HyperParams& params)
        : labels_(std::move(labels)) {
        if (labels_.size() < 2) throw std::invalid_argument("need at least two classes");
        for (std::size_t i = 0; i < labels_.size(); ++i) banks_.emplace_back(features, params);
    }

    std::size_t classes() const { return banks_.size(); }
    std::size_t features() const { return banks_.front().features(); }
    const HyperParams& params() const { return banks_.front().params(); }
    std::span<const std::string> labels() const { return labels_; }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    TsetlinMachine& bank(std::size_t i) { return banks_.at(i); }
    const TsetlinMachine& bank(std::size_t i) const { return banks_.at(i); }

    std::size_t label_index(const std::string& name) const {
        auto it = std::find(labels_.begin(), labels_.end(), name);
        if (it == labels_.end()) throw std::invalid_argument("unknown class label: " + name);
        return static_cast<std::size_t>(it - labels_.begin());
    }

    std::vector<int> votes(std::span<const LiteralVector> windows) const {
        std::vector<int> out;
        out.reserve(banks_.size());
        for (const auto& b : banks_) out.push_back(b.vote_sum(windows, EvalMode::Classify));
        return out;
    }
    std::vector<int> votes(const WindowSet& ws) const { return votes(ws.windows()); }
    std::vector<int> votes(const LiteralVector& x) const { return votes(std::span(&x, 1)); }

    std::size_t predict(std::span<const LiteralVector> windows) const { return argmax_vote(votes(windows)); }
    std::size_t predict(const WindowSet& ws) const { return predict(ws.windows()); }
    std::size_t predict(const LiteralVector& x) const { return predict(std::span(&x, 1)); }

    /// Target bank learns y=1; one uniformly sampled other bank learns y=0.
    template <RandomSource R>
    void train_step(std::span<const LiteralVector> windows, std::size_t target, R& rng) {
        if (target >= banks_.size()) throw std::invalid_argument("unknown class index");
        std::size_t other = 1 - target;
        if (banks_.size() > 2) {
            other = static_cast<std::size_t>(rng.below(banks_.size() - 1));
            if (other >= target) ++other;
        }
        banks_[target].update(windows, true, rng);
        banks_[other].update(windows, false, rng);
    }
    template <RandomSource R>
    void train_step(const WindowSet& ws, std::size_t target, R& rng) { train_step(ws.windows(), target, rng); }
    template <RandomSource R>
    void train_step(const LiteralVector& x, std::size_t target, R& rng) { train_step(std::span(&x, 1), target, rng); }

    friend bool operator==(const MulticlassMachine&, const MulticlassMachine&) = default;

private:
    std::vector<std::string> labels_;
    std::vector<TsetlinMachine> banks_;
};

struct EncodedSample {
    WindowSet input;
    std::size_t label = 0;
};

template <RandomSource R>
void fit(MulticlassMachine& machine, std::span<const EncodedSample> samples, std::size_t epochs, R& rng) {
    if (samples.empty()) throw std::invalid_argument("empty training set");
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t e = 0; e < epochs; ++e) {
        shuffle(std::span(order), rng);
        for (auto i : order) machine.train_step(samples[i].input, samples[i].label, rng);
    }
}

struct Metrics {
    double accuracy = 0.0;
    double f_macro = 0.0;
    double f_micro = 0.0;
    std::vector<std::vector<std::size_t>> confusion; ///< [true][predicted]
    std::size_t total = 0;
};

/// Metrics from (true, predicted) label pairs over k classes. Macro F
/// averages per-class F1 over classes that occur as truth or prediction.
inline Metrics score(std::span<const std::size_t> truth, std::span<const std::size_t> predicted, std::size_t k) {
    if (truth.empty()) throw std::invalid_argument("empty dataset");
    if (truth.size() != predicted.size()) throw std::invalid_argument("truth/prediction size mismatch");
    Metrics m;
    m.total = truth.size();
    m.confusion.assign(k, std::vector<std::size_t>(k, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        m.confusion.at(truth[i]).at(predicted[i])++;
        correct += truth[i] == predicted[i];
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);

    double f_sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t tp = m.confusion[c][c], support = 0, predicted_c = 0;
        for (std::size_t j = 0; j < k; ++j) {
            support += m.confusion[c][j];
            predicted_c += m.confusion[j][c];
        }
        if (support == 0 && predicted_c == 0) continue;
        f_sum += 2.0 * static_cast<double>(tp) / static_cast<double>(support + predicted_c);
        ++counted;
    }
    m.f_macro = counted ? f_sum / static_cast<double>(counted) : 0.0;
    // Single-label multiclass: micro precision = micro recall = accuracy.
    m.f_micro = m.accuracy;
    return m;
}

inline Metrics evaluate(const MulticlassMachine& machine, std::span<const EncodedSample> dataset) {
    if (dataset.empty()) throw std::invalid_argument("empty dataset");
    std::vector<std::size_t> truth, predicted;
    truth.reserve(dataset.size());
    predicted.reserve(dataset.size());
    for (const auto& s : dataset) {
        truth.push_back(s.label);
        predicted.push_back(machine.predict(s.input));
    }
    return score(truth, predicted, machine.classes());
}

} // namespace rtm

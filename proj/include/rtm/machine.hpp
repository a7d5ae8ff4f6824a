#pragma once

#include "rtm/clause.hpp"
#include "rtm/convolution.hpp"
#include "rtm/literals.hpp"
#include "rtm/random.hpp"

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rtm {

struct HyperParams {
    std::size_t clauses = 200;   ///< per machine, half per polarity
    int threshold = 15;          ///< voting target T
    double specificity = 3.0;    ///< s
    int states = 100;            ///< N, states per action
    std::size_t epochs = 100;
    bool boost_true_positive = false;
    bool negative_literals = true;
    std::uint64_t seed = 1;

    void validate() const {
        if (clauses == 0 || clauses % 2 != 0) throw std::invalid_argument("clause count must be even and positive");
        if (threshold < 1) throw std::invalid_argument("threshold must be at least 1");
        if (!(specificity > 1.0)) throw std::invalid_argument("specificity must exceed 1");
        if (states < 1) throw std::invalid_argument("states per action must be positive");
        if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    }

    friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// Binary Tsetlin machine: clauses [0, n/2) vote for y=1, [n/2, n) against.
class TsetlinMachine {
public:
    TsetlinMachine() = default;

    /// Clauses are created in the Exclude-boundary state; call randomize()
    /// for the usual random start.
    TsetlinMachine(std::size_t features, const HyperParams& params)
        : features_(features), params_(params) {
        params_.validate();
        clauses_.reserve(params.clauses);
        for (std::size_t j = 0; j < params.clauses; ++j)
            clauses_.emplace_back(features, params.states,
                                  j < params.clauses / 2 ? Polarity::Positive : Polarity::Negative,
                                  params.negative_literals);
    }

    template <RandomSource R>
    TsetlinMachine(std::size_t features, const HyperParams& params, R& rng)
        : TsetlinMachine(features, params) {
        randomize(rng);
    }

    template <RandomSource R>
    void randomize(R& rng) {
        for (auto& c : clauses_) c.randomize(rng);
    }

    std::size_t features() const { return features_; }
    const HyperParams& params() const { return params_; }
    std::size_t half() const { return clauses_.size() / 2; }
    std::span<const ClauseTeam> clauses() const { return clauses_; }
    ClauseTeam& clause(std::size_t j) { return clauses_[j]; }
    const ClauseTeam& clause(std::size_t j) const { return clauses_[j]; }

    int vote_sum(std::span<const LiteralVector> windows, EvalMode mode = EvalMode::Classify) const {
        check_width(windows);
        int v = 0;
        for (const auto& c : clauses_)
            if (clause_evaluate_conv(c, windows, mode)) v += c.sign();
        return v;
    }
    int vote_sum(const LiteralVector& x, EvalMode mode = EvalMode::Classify) const {
        return vote_sum(std::span(&x, 1), mode);
    }
    int vote_sum(const WindowSet& ws, EvalMode mode = EvalMode::Classify) const {
        return vote_sum(ws.windows(), mode);
    }

    /// u(v >= 0)
    bool predict(const LiteralVector& x) const { return vote_sum(x) >= 0; }
    bool predict(const WindowSet& ws) const { return vote_sum(ws) >= 0; }

    /// One pass of the feedback loop for example (windows, y). A single
    /// window reproduces the plain propositional update exactly.
    template <RandomSource R>
    void update(std::span<const LiteralVector> windows, bool y, R& rng) {
        const int T = params_.threshold;
        const int vc = clip(vote_sum(windows, EvalMode::Learn), T);
        const int error = y ? T - vc : T + vc;
        const double p = static_cast<double>(error) / (2.0 * T);

        const std::size_t h = half();
        for (std::size_t j = 0; j < h; ++j) {
            ClauseTeam& pos = clauses_[j];
            ClauseTeam& neg = clauses_[h + j];
            if (y) {
                if (chance(rng, p)) type_i(pos, windows, rng);
                if (chance(rng, p)) type_ii(neg, windows, rng);
            } else {
                if (chance(rng, p)) type_ii(pos, windows, rng);
                if (chance(rng, p)) type_i(neg, windows, rng);
            }
        }
    }
    template <RandomSource R>
    void update(const LiteralVector& x, bool y, R& rng) { update(std::span(&x, 1), y, rng); }
    template <RandomSource R>
    void update(const WindowSet& ws, bool y, R& rng) { update(ws.windows(), y, rng); }

    friend bool operator==(const TsetlinMachine&, const TsetlinMachine&) = default;

private:
    template <RandomSource R>
    void type_i(ClauseTeam& c, std::span<const LiteralVector> windows, R& rng) {
        c.type_i(select_feedback_window(c, windows, rng), params_.specificity,
                 params_.boost_true_positive, rng);
    }
    template <RandomSource R>
    void type_ii(ClauseTeam& c, std::span<const LiteralVector> windows, R& rng) {
        c.type_ii(select_feedback_window(c, windows, rng));
    }

    void check_width(std::span<const LiteralVector> windows) const {
        if (windows.empty()) throw std::invalid_argument("empty window set");
        for (const auto& w : windows)
            if (w.features() != features_) throw std::invalid_argument("feature width mismatch");
    }

    std::size_t features_ = 0;
    HyperParams params_;
    std::vector<ClauseTeam> clauses_;
};

template <class Input>
struct LabeledSample {
    Input input;
    bool label;
};

/// Train for the given epochs, visiting samples in a fresh shuffled order
/// each epoch. Deterministic for a given rng state.
template <class Input, RandomSource R>
void fit(TsetlinMachine& machine, std::span<const LabeledSample<Input>> samples,
         std::size_t epochs, R& rng) {
    if (samples.empty()) throw std::invalid_argument("empty training set");
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t e = 0; e < epochs; ++e) {
        shuffle(std::span(order), rng);
        for (auto i : order) machine.update(samples[i].input, samples[i].label, rng);
    }
}

} // namespace rtm

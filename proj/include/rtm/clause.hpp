#pragma once

#include "rtm/automaton.hpp"
#include "rtm/literals.hpp"
#include "rtm/random.hpp"

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rtm {

enum class Polarity : int { Positive = 1, Negative = -1 };

/// Learn mode treats an empty clause as satisfied so fresh clauses can pick up
/// Type I feedback; Classify mode makes it silent.
enum class EvalMode { Learn, Classify };

/// A conjunctive clause and the team of 2f automata deciding its literals.
///
/// When negated literals are disabled, automata for the negated half are held
/// at Exclude (state N) and never receive feedback.
class ClauseTeam {
public:
    ClauseTeam() = default;

    ClauseTeam(std::size_t features, int states_per_action, Polarity polarity,
               bool negated_literals = true)
        : features_(features),
          states_per_action_(states_per_action),
          polarity_(polarity),
          negated_literals_(negated_literals),
          states_(2 * features, states_per_action),
          include_((2 * features + 63) / 64, 0) {
        if (states_per_action < 1) throw std::invalid_argument("states per action must be positive");
    }

    /// Every trainable automaton starts at N or N+1 with equal probability.
    template <RandomSource R>
    void randomize(R& rng) {
        for (std::size_t k = 0; k < trainable(); ++k)
            set_state(k, states_per_action_ + static_cast<int>(rng.below(2)));
    }

    std::size_t features() const { return features_; }
    std::size_t literals() const { return 2 * features_; }
    std::size_t trainable() const { return negated_literals_ ? 2 * features_ : features_; }
    int states_per_action() const { return states_per_action_; }
    Polarity polarity() const { return polarity_; }
    bool negated_literals() const { return negated_literals_; }
    int sign() const { return static_cast<int>(polarity_); }

    int state(std::size_t k) const { return states_[k]; }
    std::span<const int> states() const { return states_; }
    AutomatonState automaton(std::size_t k) const { return {states_[k], states_per_action_}; }

    void set_state(std::size_t k, int value) {
        if (value < 1 || value > 2 * states_per_action_)
            throw std::invalid_argument("automaton state out of range");
        if (k >= trainable() && value > states_per_action_)
            throw std::invalid_argument("negated literal cannot be included when disabled");
        const bool was = includes(k);
        states_[k] = value;
        const bool now = value > states_per_action_;
        if (was != now) {
            include_[k >> 6] ^= std::uint64_t{1} << (k & 63);
            include_count_ += now ? 1 : -1;
        }
    }

    bool includes(std::size_t k) const { return (include_[k >> 6] >> (k & 63)) & 1U; }
    std::size_t include_count() const { return static_cast<std::size_t>(include_count_); }

    std::vector<std::size_t> included_literals() const {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < literals(); ++k)
            if (includes(k)) out.push_back(k);
        return out;
    }

    /// Conjunction over the included literals.
    bool evaluate(const LiteralVector& x, EvalMode mode) const {
        if (x.features() != features_) throw std::invalid_argument("literal vector width mismatch");
        if (include_count_ == 0) return mode == EvalMode::Learn;
        const auto words = x.words();
        for (std::size_t w = 0; w < include_.size(); ++w)
            if (include_[w] & ~words[w]) return false;
        return true;
    }

    /// Type I feedback on literal vector x. Output is recomputed in Learn mode.
    template <RandomSource R>
    void type_i(const LiteralVector& x, double specificity, bool boost_true_positive, R& rng) {
        const bool output = evaluate(x, EvalMode::Learn);
        const double strong = boost_true_positive ? 1.0 : (specificity - 1.0) / specificity;
        const double weak = 1.0 / specificity;
        for (std::size_t k = 0; k < trainable(); ++k) {
            if (output && x[k]) {
                if (chance(rng, strong)) step(k, Feedback::Reward, Action::Include);
            } else {
                if (chance(rng, weak)) step(k, Feedback::Reward, Action::Exclude);
            }
        }
    }

    /// Type II feedback: when the clause fires, every excluded literal that is
    /// false moves one step toward Include.
    void type_ii(const LiteralVector& x) {
        if (!evaluate(x, EvalMode::Learn)) return;
        for (std::size_t k = 0; k < trainable(); ++k)
            if (!x[k] && !includes(k)) set_state(k, states_[k] + 1);
    }

    friend bool operator==(const ClauseTeam& a, const ClauseTeam& b) {
        return a.features_ == b.features_ && a.states_per_action_ == b.states_per_action_ &&
               a.polarity_ == b.polarity_ && a.negated_literals_ == b.negated_literals_ &&
               a.states_ == b.states_;
    }

private:
    // Apply the transition that rewards `favoured` (equivalently penalizes
    // the other action) to automaton k.
    void step(std::size_t k, Feedback event, Action favoured) {
        const AutomatonState s = automaton(k);
        const Feedback e = s.action() == favoured ? event
                           : (event == Feedback::Reward ? Feedback::Penalty : Feedback::Reward);
        set_state(k, ta_transition(s, e).value);
    }

    std::size_t features_ = 0;
    int states_per_action_ = 1;
    Polarity polarity_ = Polarity::Positive;
    bool negated_literals_ = true;
    std::vector<int> states_;
    std::vector<std::uint64_t> include_;
    long include_count_ = 0;
};

/// v = sum of positive outputs minus sum of negative outputs.
inline int vote_sum(std::span<const std::uint8_t> outputs, std::span<const Polarity> polarities) {
    if (outputs.size() != polarities.size()) throw std::invalid_argument("output/polarity size mismatch");
    int v = 0;
    for (std::size_t j = 0; j < outputs.size(); ++j)
        if (outputs[j]) v += static_cast<int>(polarities[j]);
    return v;
}

constexpr int clip(int v, int threshold) {
    return v < -threshold ? -threshold : (v > threshold ? threshold : v);
}

} // namespace rtm

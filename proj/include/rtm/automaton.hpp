#pragma once

#include <stdexcept>

namespace rtm {

enum class Action { Exclude, Include };
enum class Feedback { Reward, Penalty };

/// Two-action Tsetlin automaton with 2N states.
/// States 1..N select Exclude, N+1..2N select Include.
struct AutomatonState {
    int value = 1;
    int states_per_action = 1;

    constexpr Action action() const {
        return value > states_per_action ? Action::Include : Action::Exclude;
    }
    constexpr bool includes() const { return value > states_per_action; }
    constexpr int max_value() const { return 2 * states_per_action; }

    friend constexpr bool operator==(AutomatonState, AutomatonState) = default;
};

inline AutomatonState make_state(int value, int states_per_action) {
    if (states_per_action < 1) throw std::invalid_argument("states per action must be positive");
    if (value < 1 || value > 2 * states_per_action)
        throw std::invalid_argument("automaton state out of range");
    return {value, states_per_action};
}

/// Reward moves away from the N/N+1 boundary, Penalty moves toward and
/// across it. Saturates at 1 and 2N.
constexpr AutomatonState ta_transition(AutomatonState s, Feedback event) {
    const bool toward_include = (event == Feedback::Reward) == s.includes();
    int v = s.value + (toward_include ? 1 : -1);
    if (v < 1) v = 1;
    if (v > s.max_value()) v = s.max_value();
    return {v, s.states_per_action};
}

} // namespace rtm

#pragma once

#include "rtm/clause.hpp"
#include "rtm/literals.hpp"
#include "rtm/random.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rtm {

/// Nonempty set of equal-width literal vectors, one per variable assignment.
class WindowSet {
public:
    WindowSet() = default;

    explicit WindowSet(LiteralVector single) {
        add(std::move(single), 0);
    }

    explicit WindowSet(std::vector<LiteralVector> windows) {
        for (std::size_t i = 0; i < windows.size(); ++i) add(std::move(windows[i]), i);
    }

    void add(LiteralVector w, std::size_t permutation_id) {
        if (!windows_.empty() && w.features() != windows_.front().features())
            throw std::invalid_argument("window width mismatch");
        windows_.push_back(std::move(w));
        provenance_.push_back(permutation_id);
    }

    bool empty() const { return windows_.empty(); }
    std::size_t size() const { return windows_.size(); }
    std::size_t features() const { return windows_.empty() ? 0 : windows_.front().features(); }
    const LiteralVector& operator[](std::size_t i) const { return windows_[i]; }
    std::size_t provenance(std::size_t i) const { return provenance_[i]; }
    std::span<const LiteralVector> windows() const { return windows_; }

private:
    std::vector<LiteralVector> windows_;
    std::vector<std::size_t> provenance_;
};

/// Existential clause output: 1 iff some window satisfies the clause.
inline bool clause_evaluate_conv(const ClauseTeam& team, std::span<const LiteralVector> windows,
                                 EvalMode mode) {
    if (windows.empty()) throw std::invalid_argument("empty window set");
    for (const auto& w : windows)
        if (team.evaluate(w, mode)) return true;
    return false;
}

/// Pick the window a clause learns from: uniform among firing windows, or
/// uniform among all windows when none fires. A single window is returned
/// without consuming randomness.
template <RandomSource R>
const LiteralVector& select_feedback_window(const ClauseTeam& team,
                                            std::span<const LiteralVector> windows, R& rng) {
    if (windows.empty()) throw std::invalid_argument("empty window set");
    if (windows.size() == 1) return windows.front();

    std::size_t firing = 0;
    for (const auto& w : windows) firing += team.evaluate(w, EvalMode::Learn);
    if (firing == 0) return windows[rng.below(windows.size())];

    auto pick = rng.below(firing);
    for (const auto& w : windows) {
        if (!team.evaluate(w, EvalMode::Learn)) continue;
        if (pick-- == 0) return w;
    }
    return windows.front(); // unreachable
}

} // namespace rtm

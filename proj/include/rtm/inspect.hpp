#pragma once

#include "rtm/encoder.hpp"
#include "rtm/herbrand.hpp"
#include "rtm/multiclass.hpp"
#include "rtm/schema.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtm {

/// Feature names for a plain boolean problem: x1..xf.
inline std::vector<std::string> plain_feature_names(std::size_t features) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < features; ++i) out.push_back("x" + std::to_string(i + 1));
    return out;
}

/// Clause as "a AND NOT b"; the empty conjunction renders as TRUE.
inline std::string render_clause(const ClauseTeam& c, const std::vector<std::string>& names) {
    if (names.size() != c.features()) throw std::invalid_argument("feature name count mismatch");
    std::string s;
    for (auto k : c.included_literals()) {
        if (!s.empty()) s += " AND ";
        if (k >= c.features()) s += "NOT ";
        s += names[k % c.features()];
    }
    return s.empty() ? "TRUE" : s;
}

// ---------------------------------------------------------------------------
// Global view

/// One line per clause, ordered by class, polarity, clause index:
///
///     <label> <+|-> <index>: <conjunction>
///
/// where <conjunction> is TRUE or literals joined by " AND ", a negated
/// literal prefixed by "NOT ".
inline std::string global_dump(const MulticlassMachine& m, const std::vector<std::string>& names) {
    std::ostringstream os;
    for (std::size_t c = 0; c < m.classes(); ++c) {
        const auto& bank = m.bank(c);
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < bank.half(); ++j) {
                const std::size_t idx = pass == 0 ? j : bank.half() + j;
                os << m.label(c) << (pass == 0 ? " + " : " - ") << j << ": "
                   << render_clause(bank.clause(idx), names) << '\n';
            }
    }
    return os.str();
}

struct DumpLiteral {
    bool negated = false;
    std::string name;
    friend bool operator==(const DumpLiteral&, const DumpLiteral&) = default;
};

struct DumpEntry {
    std::string label;
    Polarity polarity = Polarity::Positive;
    std::size_t index = 0;
    std::vector<DumpLiteral> literals; ///< empty for TRUE
    friend bool operator==(const DumpEntry&, const DumpEntry&) = default;
};

inline std::vector<DumpEntry> parse_global_dump(std::string_view text) {
    std::vector<DumpEntry> out;
    std::istringstream is{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::istringstream ls(line);
        DumpEntry e;
        std::string sign, idx;
        if (!(ls >> e.label >> sign >> idx) || (sign != "+" && sign != "-") || idx.size() < 2 || idx.back() != ':')
            throw ParseError(line_no, "expected '<label> <+|-> <index>: <conjunction>'");
        e.polarity = sign == "+" ? Polarity::Positive : Polarity::Negative;
        try {
            e.index = std::stoul(idx.substr(0, idx.size() - 1));
        } catch (const std::exception&) {
            throw ParseError(line_no, "bad clause index");
        }
        std::string rest;
        std::getline(ls, rest);
        auto body = detail::trim(rest);
        if (body.empty()) throw ParseError(line_no, "missing conjunction");
        if (body != "TRUE") {
            std::size_t start = 0;
            while (true) {
                auto pos = body.find(" AND ", start);
                auto lit = detail::trim(body.substr(start, pos == std::string_view::npos ? body.npos : pos - start));
                DumpLiteral l;
                if (lit.substr(0, 4) == "NOT ") {
                    l.negated = true;
                    lit = detail::trim(lit.substr(4));
                }
                if (lit.empty()) throw ParseError(line_no, "empty literal");
                l.name = std::string(lit);
                e.literals.push_back(std::move(l));
                if (pos == std::string_view::npos) break;
                start = pos + 5;
            }
        }
        out.push_back(std::move(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Local view

struct SnapshotClause {
    std::size_t index = 0; ///< position within its polarity half
    Polarity polarity = Polarity::Positive;
    std::string text;
    int vote = 0;
};

struct ClassSnapshot {
    std::string label;
    std::vector<SnapshotClause> firing;
    int total = 0;
};

struct Snapshot {
    std::vector<ClassSnapshot> classes;
    std::size_t winner = 0;

    std::string str() const {
        std::ostringstream os;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const auto& cs = classes[c];
            os << "class " << cs.label << (c == winner ? "  <- predicted" : "") << '\n';
            for (const auto& f : cs.firing)
                os << "  " << (f.vote > 0 ? "+1 " : "-1 ") << f.text << '\n';
            os << "  total " << cs.total << '\n';
        }
        return os.str();
    }
};

/// Clauses that fire on this input (in any window), grouped by class.
inline Snapshot local_snapshot(const MulticlassMachine& m, std::span<const LiteralVector> windows,
                               const std::vector<std::string>& names) {
    Snapshot snap;
    std::vector<int> totals;
    for (std::size_t c = 0; c < m.classes(); ++c) {
        const auto& bank = m.bank(c);
        ClassSnapshot cs;
        cs.label = m.label(c);
        for (std::size_t j = 0; j < bank.clauses().size(); ++j) {
            const auto& cl = bank.clause(j);
            if (!clause_evaluate_conv(cl, windows, EvalMode::Classify)) continue;
            cs.firing.push_back({j < bank.half() ? j : j - bank.half(), cl.polarity(), render_clause(cl, names), cl.sign()});
            cs.total += cl.sign();
        }
        totals.push_back(cs.total);
        snap.classes.push_back(std::move(cs));
    }
    snap.winner = argmax_vote(totals);
    return snap;
}

inline Snapshot local_snapshot(const MulticlassMachine& m, const WindowSet& ws, const std::vector<std::string>& names) {
    return local_snapshot(m, ws.windows(), names);
}

// ---------------------------------------------------------------------------
// Horn export

struct HornExport {
    Program program;
    std::vector<std::string> warnings;

    std::string str() const { return program.str(); }
};

struct HornExportOptions {
    /// Head atom for a class label; nullopt skips the class.
    std::function<std::optional<Atom>(const std::string& label)> head_for;
    /// Query marker relation; its atoms are dropped from bodies after the
    /// clause is renamed so that the marker names the head's query variables.
    std::string query_relation = "Q";
    std::vector<std::string> query_variables;
    /// Clauses were trained over variable permutations, so renaming a
    /// clause's variables consistently preserves its meaning.
    bool permutation_invariant = false;
    bool generalized = true;
};

namespace detail {

inline Atom rename(const Atom& a, const std::map<std::string, std::string>& swap) {
    Atom out = a;
    for (auto& t : out.args)
        if (auto it = swap.find(t.name); it != swap.end()) t.name = it->second;
    return out;
}

} // namespace detail

/// Positive clauses of every class with a head become `head :- body.`;
/// excluded literals render as `not atom`.
inline HornExport export_horn(const MulticlassMachine& m, const AtomIndex& index, const HornExportOptions& opt) {
    if (!opt.generalized) throw std::invalid_argument("Horn export needs a generalized model (no variables in constants mode)");
    if (index.size() != m.features()) throw std::invalid_argument("atom index does not match model width");
    HornExport out;
    std::set<std::string> seen;
    for (std::size_t c = 0; c < m.classes(); ++c) {
        const auto head = opt.head_for ? opt.head_for(m.label(c)) : std::nullopt;
        if (!head) continue;
        const auto& bank = m.bank(c);
        for (std::size_t j = 0; j < bank.half(); ++j) {
            const auto& cl = bank.clause(j);
            const std::string where = m.label(c) + " +" + std::to_string(j);
            std::vector<Atom> body;
            for (auto k : cl.included_literals()) {
                Atom a = index.at(k % cl.features());
                a.negated = k >= cl.features();
                body.push_back(std::move(a));
            }
            if (body.empty()) {
                out.warnings.push_back("skipped empty clause " + where);
                continue;
            }

            // Rename so the (first) positive query marker speaks about the
            // head's query variables, then drop marker literals.
            std::map<std::string, std::string> swap;
            if (opt.permutation_invariant) {
                for (const auto& a : body) {
                    if (a.negated || a.relation != opt.query_relation) continue;
                    for (std::size_t i = 0; i < a.args.size() && i < opt.query_variables.size(); ++i) {
                        const auto& from = a.args[i].name;
                        const auto& to = opt.query_variables[i];
                        if (from != to && !swap.count(from) && !swap.count(to)) {
                            swap[from] = to;
                            swap[to] = from;
                        }
                    }
                    break;
                }
            }
            bool dead = false;
            std::vector<Atom> kept;
            for (const auto& a0 : body) {
                Atom a = detail::rename(a0, swap);
                if (a.relation != opt.query_relation) {
                    kept.push_back(std::move(a));
                    continue;
                }
                bool names_query = a.args.size() == opt.query_variables.size();
                for (std::size_t i = 0; names_query && i < a.args.size(); ++i)
                    names_query = a.args[i].name == opt.query_variables[i];
                if (names_query == a.negated) dead = true; // contradicts the single query
            }
            if (dead) {
                out.warnings.push_back("skipped clause that can never fire " + where);
                continue;
            }
            HornClause hc{*head, std::move(kept)};
            if (hc.body.empty()) {
                out.warnings.push_back("skipped clause with only query literals " + where);
                continue;
            }
            if (seen.insert(hc.str()).second) out.program.clauses.push_back(std::move(hc));
        }
    }
    return out;
}

/// True when `rule` and `target` derive the same head atoms from every set
/// of facts over `relations` and the given constants (exhaustive; the fact
/// universe must stay small).
inline bool rules_equivalent(const HornClause& rule, const HornClause& target,
                             const std::vector<RelationSymbol>& relations, const std::vector<std::string>& constants) {
    const auto base = herbrand_base(constants, relations);
    const std::vector<Atom> atoms(base.begin(), base.end());
    if (atoms.size() > 20) throw std::invalid_argument("fact universe too large for exhaustive check");
    const std::string head = target.head.relation;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << atoms.size()); ++mask) {
        Program a, b;
        a.clauses.push_back(rule);
        b.clauses.push_back(target);
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if ((mask >> i) & 1U) {
                a.add_fact(atoms[i]);
                b.add_fact(atoms[i]);
            }
        auto ma = least_herbrand_model(a, constants);
        auto mb = least_herbrand_model(b, constants);
        std::erase_if(ma, [&](const Atom& x) { return x.relation != head; });
        std::erase_if(mb, [&](const Atom& x) { return x.relation != head; });
        if (ma != mb) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Size and cost estimates

struct KbMetrics {
    std::size_t constants_width = 0;    ///< schema atoms with the full vocabulary
    std::size_t generalized_width = 0;  ///< schema atoms over placeholders
    std::size_t measured_constants = 0;   ///< distinct ground atoms seen in the data
    std::size_t measured_generalized = 0; ///< distinct generalized atoms seen in the data
    double ratio = 0.0;                 ///< constants_width / generalized_width
};

/// Widths from the two schemas; measured counts from the observations
/// encoded each way.
inline KbMetrics kb_metrics(const Schema& constants_schema, const Schema& generalized_schema,
                            const std::vector<std::vector<Atom>>& constant_observations,
                            const std::vector<std::vector<Atom>>& generalized_observations) {
    KbMetrics k;
    k.constants_width = AtomIndex::from_schema(constants_schema).size();
    k.generalized_width = AtomIndex::from_schema(generalized_schema).size();
    std::set<Atom> a, b;
    for (const auto& o : constant_observations) a.insert(o.begin(), o.end());
    for (const auto& o : generalized_observations) b.insert(o.begin(), o.end());
    k.measured_constants = a.size();
    k.measured_generalized = b.size();
    k.ratio = k.generalized_width ? static_cast<double>(k.constants_width) / static_cast<double>(k.generalized_width) : 0.0;
    return k;
}

struct CostParams {
    double alpha = 1.0; ///< conjunction
    double beta = 1.0;  ///< addition
    double gamma = 1.0; ///< automaton update
};

/// d * [gamma (2o+1) m + alpha 2o m (v! when convolutional) + beta (m-1)].
inline double cost_estimate(double d, double o, double m, std::size_t v, const CostParams& p, bool convolutional) {
    if (d < 0 || o < 0 || m < 0 || p.alpha < 0 || p.beta < 0 || p.gamma < 0)
        throw std::invalid_argument("cost inputs must be nonnegative");
    const double windows = convolutional ? static_cast<double>(factorial(v)) : 1.0;
    return d * (p.gamma * (2 * o + 1) * m + p.alpha * 2 * o * m * windows + p.beta * std::max(m - 1.0, 0.0));
}

} // namespace rtm

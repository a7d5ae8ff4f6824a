#pragma once

#include "rtm/encoder.hpp"
#include "rtm/herbrand.hpp"
#include "rtm/schema.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtm {

/// One story: ordered statements, a question and its answer.
struct QAInstance {
    std::size_t id = 0;
    std::vector<std::string> statements;
    std::string question;
    std::string answer;
    std::vector<std::size_t> supporting; ///< 1-based statement ids

    friend bool operator==(const QAInstance&, const QAInstance&) = default;
};

/// Sentence template bound to a relation.
///
/// Lexicon text grammar, one entry per line ('#' starts a comment line):
///
///     statement MoveTo($0, $1) = $0 went to the $1.
///     query Location($0, ?) = Where is $0?
///
/// `$k` captures the k-th single-token entity; `?` marks an unfilled
/// argument of a query. Tokens other than captures must match exactly.
struct LexiconEntry {
    bool query = false;
    std::string relation;
    std::vector<std::string> args; ///< "$k" or "?"
    std::vector<std::string> pattern;
};

namespace detail {

inline std::vector<std::string> tokenize_sentence(std::string_view text) {
    std::string s(trim(text));
    while (!s.empty() && (s.back() == '.' || s.back() == '?' || s.back() == '!')) s.pop_back();
    std::istringstream is(s);
    std::vector<std::string> tokens;
    std::string tok;
    while (is >> tok) tokens.push_back(tok);
    return tokens;
}

} // namespace detail

class Lexicon {
public:
    void add(LexiconEntry e) { entries_.push_back(std::move(e)); }
    const std::vector<LexiconEntry>& entries() const { return entries_; }

    /// Templates used by the bundled movement and parentage tasks.
    static Lexicon defaults() {
        return parse("statement MoveTo($0, $1) = $0 moved to the $1.\n"
                     "statement MoveTo($0, $1) = $0 went to the $1.\n"
                     "statement MoveTo($0, $1) = $0 walked to the $1.\n"
                     "statement Parent($0, $1) = $0 is a parent of $1.\n"
                     "query Location($0, ?) = Where is $0?\n"
                     "query Grandparent($0, $1) = Is $0 a grandparent of $1?\n"
                     "query Child($0, $1) = Is $0 a child of $1?\n");
    }

    static Lexicon parse(std::string_view text) {
        Lexicon lex;
        std::istringstream is{std::string(text)};
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            auto body = detail::trim(line);
            if (body.empty() || body.front() == '#') continue;
            LexiconEntry e;
            const auto sp = body.find(' ');
            const auto kind = body.substr(0, sp);
            if (kind == "query") e.query = true;
            else if (kind != "statement") throw ParseError(line_no, "expected 'statement' or 'query'");
            const auto eq = body.find('=');
            if (sp == std::string_view::npos || eq == std::string_view::npos)
                throw ParseError(line_no, "expected '<kind> Rel($0, ...) = pattern'");
            const auto head = detail::trim(body.substr(sp + 1, eq - sp - 1));
            const auto open = head.find('(');
            if (open == std::string_view::npos || head.back() != ')')
                throw ParseError(line_no, "bad relation template");
            e.relation = std::string(detail::trim(head.substr(0, open)));
            for (auto part : detail::split_body(head.substr(open + 1, head.size() - open - 2)))
                e.args.emplace_back(detail::trim(part));
            e.pattern = detail::tokenize_sentence(body.substr(eq + 1));
            for (const auto& a : e.args) {
                if (a == "?") {
                    if (!e.query) throw ParseError(line_no, "'?' is only allowed in queries");
                } else if (std::find(e.pattern.begin(), e.pattern.end(), a) == e.pattern.end()) {
                    throw ParseError(line_no, "capture " + a + " missing from pattern");
                }
            }
            lex.add(std::move(e));
        }
        return lex;
    }

    std::string str() const {
        std::string s;
        for (const auto& e : entries_) {
            s += e.query ? "query " : "statement ";
            s += e.relation + "(";
            for (std::size_t i = 0; i < e.args.size(); ++i) s += (i ? ", " : "") + e.args[i];
            s += ") =";
            for (const auto& t : e.pattern) s += " " + t;
            s += e.query ? "?\n" : ".\n";
        }
        return s;
    }

    /// Statement templates for `relation`, in declaration order.
    std::vector<const LexiconEntry*> templates(const std::string& relation, bool query) const {
        std::vector<const LexiconEntry*> out;
        for (const auto& e : entries_)
            if (e.relation == relation && e.query == query) out.push_back(&e);
        return out;
    }

private:
    std::vector<LexiconEntry> entries_;
};

struct ParsedSentence {
    Atom atom;
    bool query = false;
};

namespace detail {

inline std::optional<Atom> match_entry(const LexiconEntry& e, const std::vector<std::string>& tokens) {
    if (tokens.size() != e.pattern.size()) return std::nullopt;
    std::vector<std::pair<std::string, std::string>> captures;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& p = e.pattern[i];
        if (p.size() > 1 && p[0] == '$') {
            for (const auto& [k, v] : captures)
                if (k == p && v != tokens[i]) return std::nullopt;
            captures.emplace_back(p, tokens[i]);
        } else if (p != tokens[i]) {
            return std::nullopt;
        }
    }
    Atom a{e.relation, {}, false};
    for (const auto& arg : e.args) {
        if (arg == "?") {
            a.args.push_back(Term::variable("?"));
            continue;
        }
        for (const auto& [k, v] : captures)
            if (k == arg) {
                a.args.push_back(Term::constant(v));
                break;
            }
    }
    return a;
}

} // namespace detail

/// Map a simple sentence to its relation atom; queries carry `?` holes.
inline ParsedSentence parse_sentence(std::string_view text, const Lexicon& lexicon) {
    const auto tokens = detail::tokenize_sentence(text);
    std::optional<ParsedSentence> found;
    for (const auto& e : lexicon.entries()) {
        auto atom = detail::match_entry(e, tokens);
        if (!atom) continue;
        if (found && !(found->atom == *atom && found->query == e.query))
            throw std::invalid_argument("ambiguous sentence: '" + std::string(text) + "'");
        found = ParsedSentence{std::move(*atom), e.query};
    }
    if (!found) throw std::invalid_argument("no template matches: '" + std::string(text) + "'");
    return *found;
}

/// Render `atom` with the given template.
inline std::string render_sentence(const LexiconEntry& e, const Atom& atom) {
    std::string s;
    for (std::size_t i = 0; i < e.pattern.size(); ++i) {
        std::string tok = e.pattern[i];
        for (std::size_t k = 0; k < e.args.size(); ++k)
            if (e.args[k] == tok) tok = atom.args.at(k).name;
        s += (i ? " " : "") + tok;
    }
    s += e.query ? "?" : ".";
    return s;
}

/// Statement atoms in order plus the query atom.
struct ParsedInstance {
    std::vector<Atom> statements;
    Atom query;
};

inline ParsedInstance parse_instance(const QAInstance& inst, const Lexicon& lexicon) {
    if (inst.statements.empty()) throw std::invalid_argument("instance has no statements");
    ParsedInstance out;
    for (const auto& s : inst.statements) {
        auto p = parse_sentence(s, lexicon);
        if (p.query) throw std::invalid_argument("question among statements: '" + s + "'");
        out.statements.push_back(std::move(p.atom));
    }
    auto q = parse_sentence(inst.question, lexicon);
    if (!q.query) throw std::invalid_argument("last line is not a question: '" + inst.question + "'");
    out.query = std::move(q.atom);
    return out;
}

/// Constants of the query atom (holes dropped), as the query marker Q(...).
inline Atom query_marker(const Atom& query) {
    Atom q{"Q", {}, false};
    for (const auto& t : query.args)
        if (t.name != "?") q.args.push_back(t);
    return q;
}

/// Statement atoms, optionally tagged with their position S1, S2, ...
inline std::vector<Atom> encode_with_order(const std::vector<Atom>& statements, bool tag_sentence_order) {
    std::vector<Atom> out;
    for (std::size_t i = 0; i < statements.size(); ++i) {
        Atom a = statements[i];
        if (tag_sentence_order) a.args.insert(a.args.begin(), Term::constant("S" + std::to_string(i + 1)));
        out.push_back(std::move(a));
    }
    return out;
}

/// Observation whose inputs are the (tagged) statements plus the query
/// marker and whose target is the query atom.
inline Observation to_observation(const ParsedInstance& p, bool tag_sentence_order, bool with_query_marker = true) {
    Observation obs;
    obs.inputs = encode_with_order(p.statements, tag_sentence_order);
    if (with_query_marker) obs.inputs.push_back(query_marker(p.query));
    obs.targets.push_back(p.query);
    return obs;
}

/// Movement naming: Person -> Per<k>, Location -> Loc<k>, sentence slots kept.
inline VariableNaming movement_naming(const Schema& schema) {
    VariableNaming n;
    n.schema = &schema;
    n.prefixes = {{"Person", "Per"}, {"Location", "Loc"}};
    n.fixed_types = {"Slot"};
    return n;
}

struct GeneralizedInstance {
    Observation observation;  ///< inputs over placeholders
    VariableBinding binding;  ///< query entities first
    std::vector<std::string> answers; ///< location placeholders present, in order
};

/// Replace entities by typed placeholders: query entities first (Per1 is the
/// query person), then the rest by first occurrence within their type.
inline GeneralizedInstance generalize_entities(const ParsedInstance& p, const VariableNaming& naming,
                                               bool tag_sentence_order = false, bool with_query_marker = true) {
    auto [obs, binding] = variables_replace_constants(to_observation(p, tag_sentence_order, with_query_marker), naming);
    GeneralizedInstance g{std::move(obs), std::move(binding), {}};
    for (const auto& e : g.binding.entries)
        if (e.type == "Location") g.answers.push_back(e.variable);
    return g;
}

/// Windows for every permutation of the person placeholders (query person
/// included); locations and statement order stay fixed.
inline WindowSet permute_instance(const GeneralizedInstance& g, const AtomIndex& index) {
    std::vector<std::string> persons;
    for (const auto& e : g.binding.entries)
        if (e.type == "Person") persons.push_back(e.variable);
    if (persons.size() > kMaxFreeVariables) throw std::invalid_argument("too many persons to permute");
    WindowSet ws;
    std::size_t id = 0;
    for (const auto& w : permute_variables(g.observation.inputs, {persons})) ws.add(index.encode(w), id++);
    return ws;
}

/// Placeholder label -> original constant. With no binding (constants mode)
/// labels are constants already.
inline std::string label_to_constant(const VariableBinding* binding, const std::string& label) {
    if (!binding) return label;
    if (auto c = binding->constant_for(label)) return *c;
    throw std::invalid_argument("unmapped label: " + label);
}

inline std::string constant_to_label(const VariableBinding* binding, const std::string& constant) {
    if (!binding) return constant;
    if (auto v = binding->variable_for(constant)) return *v;
    throw std::invalid_argument("unmapped constant: " + constant);
}

} // namespace rtm

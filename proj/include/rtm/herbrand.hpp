#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtm {

/// Constant or variable symbol. In program text a symbol is a variable when
/// it is a single capital letter (X, P) or one of the placeholder families
/// Z<k>, Per<k>, Loc<k>; anything else (Bob, office, S1) is a constant.
struct Term {
    enum class Kind { Constant, Variable };
    Kind kind = Kind::Constant;
    std::string name;

    static Term constant(std::string n) { return {Kind::Constant, std::move(n)}; }
    static Term variable(std::string n) { return {Kind::Variable, std::move(n)}; }

    static bool looks_like_variable(std::string_view s) {
        auto digits_from = [&](std::size_t i) {
            if (i > s.size()) return false;
            for (std::size_t k = i; k < s.size(); ++k)
                if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
            return true;
        };
        if (s.empty()) return false;
        if (s == "?") return true;
        if (s.size() == 1 && std::isupper(static_cast<unsigned char>(s[0]))) return true;
        for (std::string_view prefix : {"Z", "Per", "Loc"})
            if (s.size() > prefix.size() && s.substr(0, prefix.size()) == prefix && digits_from(prefix.size()))
                return true;
        return false;
    }

    static Term parse(std::string_view s) {
        return looks_like_variable(s) ? variable(std::string(s)) : constant(std::string(s));
    }

    bool is_variable() const { return kind == Kind::Variable; }

    friend auto operator<=>(const Term&, const Term&) = default;
    friend bool operator==(const Term&, const Term&) = default;
};

struct RelationSymbol {
    std::string name;
    std::size_t arity = 1;
    friend auto operator<=>(const RelationSymbol&, const RelationSymbol&) = default;
    friend bool operator==(const RelationSymbol&, const RelationSymbol&) = default;
};

/// relation(args...). `negated` is only meaningful for body literals.
struct Atom {
    std::string relation;
    std::vector<Term> args;
    bool negated = false;

    static Atom ground(std::string rel, std::vector<std::string> constants) {
        Atom a{std::move(rel), {}, false};
        for (auto& c : constants) a.args.push_back(Term::constant(std::move(c)));
        return a;
    }

    bool is_ground() const {
        return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
    }

    Atom positive() const { return {relation, args, false}; }

    /// rel(a, b) or "not rel(a, b)".
    std::string str() const {
        std::string s = negated ? "not " : "";
        s += relation;
        s += '(';
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i) s += ", ";
            s += args[i].name;
        }
        s += ')';
        return s;
    }

    friend auto operator<=>(const Atom&, const Atom&) = default;
    friend bool operator==(const Atom&, const Atom&) = default;
};

struct HornClause {
    Atom head;
    std::vector<Atom> body;

    bool is_fact() const { return body.empty(); }

    std::string str() const {
        std::string s = head.str();
        if (!body.empty()) {
            s += " :- ";
            for (std::size_t i = 0; i < body.size(); ++i) {
                if (i) s += ", ";
                s += body[i].str();
            }
        }
        s += '.';
        return s;
    }

    friend bool operator==(const HornClause&, const HornClause&) = default;
};

struct Program {
    std::vector<HornClause> clauses;

    void add_fact(Atom a) { clauses.push_back({std::move(a), {}}); }
    void add_rule(Atom head, std::vector<Atom> body) { clauses.push_back({std::move(head), std::move(body)}); }

    std::string str() const {
        std::string s;
        for (const auto& c : clauses) {
            s += c.str();
            s += '\n';
        }
        return s;
    }

    friend bool operator==(const Program&, const Program&) = default;
};

using Interpretation = std::set<Atom>;

// ---------------------------------------------------------------------------
// Text format

struct ParseError : std::runtime_error {
    std::size_t line;
    ParseError(std::size_t line_no, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool is_symbol_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '?' || c == '\'';
}

inline Atom parse_atom_text(std::string_view text, std::size_t line_no) {
    text = trim(text);
    Atom a;
    if (text.size() > 4 && text.substr(0, 4) == "not ") {
        a.negated = true;
        text = trim(text.substr(4));
    }
    const auto open = text.find('(');
    if (open == std::string_view::npos || text.back() != ')')
        throw ParseError(line_no, "expected relation(args): '" + std::string(text) + "'");
    a.relation = std::string(trim(text.substr(0, open)));
    if (a.relation.empty() || !std::all_of(a.relation.begin(), a.relation.end(), is_symbol_char))
        throw ParseError(line_no, "bad relation name '" + a.relation + "'");
    std::string_view inner = text.substr(open + 1, text.size() - open - 2);
    std::size_t start = 0;
    while (true) {
        const auto comma = inner.find(',', start);
        const auto arg = trim(inner.substr(start, comma - start));
        if (arg.empty() || !std::all_of(arg.begin(), arg.end(), is_symbol_char))
            throw ParseError(line_no, "bad argument in '" + std::string(text) + "'");
        a.args.push_back(Term::parse(arg));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return a;
}

// Split a clause body on commas that are not inside parentheses.
inline std::vector<std::string_view> split_body(std::string_view body) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '(') ++depth;
        else if (body[i] == ')') --depth;
        else if (body[i] == ',' && depth == 0) {
            parts.push_back(body.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(body.substr(start));
    return parts;
}

} // namespace detail

inline Atom parse_atom(std::string_view text) { return detail::parse_atom_text(text, 0); }

inline HornClause parse_clause(std::string_view text, std::size_t line_no = 0) {
    text = detail::trim(text);
    if (text.empty() || text.back() != '.') throw ParseError(line_no, "clause must end with '.'");
    text.remove_suffix(1);
    HornClause c;
    const auto arrow = text.find(":-");
    c.head = detail::parse_atom_text(text.substr(0, arrow), line_no);
    if (c.head.negated) throw ParseError(line_no, "head cannot be negated");
    if (arrow != std::string_view::npos) {
        for (auto part : detail::split_body(text.substr(arrow + 2)))
            c.body.push_back(detail::parse_atom_text(part, line_no));
    }
    return c;
}

/// One clause per line: `head :- b1, not b2.` or `fact.`; blank lines and
/// lines starting with '%' or '#' are ignored.
inline Program parse_program(std::string_view text) {
    Program p;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        ++line_no;
        line = detail::trim(line);
        if (!line.empty() && line.front() != '%' && line.front() != '#')
            p.clauses.push_back(parse_clause(line, line_no));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Herbrand semantics

/// All ground atoms over the given constants and relations (sum of q^arity).
inline Interpretation herbrand_base(const std::vector<std::string>& constants,
                                    const std::vector<RelationSymbol>& relations) {
    if (constants.empty()) throw std::invalid_argument("herbrand base needs at least one constant");
    Interpretation hb;
    for (const auto& r : relations) {
        if (r.arity == 0) throw std::invalid_argument("zero-arity relation: " + r.name);
        std::vector<std::size_t> idx(r.arity, 0);
        while (true) {
            Atom a{r.name, {}, false};
            for (auto i : idx) a.args.push_back(Term::constant(constants[i]));
            hb.insert(std::move(a));
            std::size_t pos = r.arity;
            while (pos > 0 && ++idx[pos - 1] == constants.size()) idx[--pos] = 0;
            if (pos == 0) break;
        }
    }
    return hb;
}

/// Constants mentioned anywhere in the program, sorted.
inline std::vector<std::string> program_constants(const Program& p) {
    std::set<std::string> out;
    for (const auto& c : p.clauses) {
        for (const auto& t : c.head.args)
            if (!t.is_variable()) out.insert(t.name);
        for (const auto& b : c.body)
            for (const auto& t : b.args)
                if (!t.is_variable()) out.insert(t.name);
    }
    return {out.begin(), out.end()};
}

namespace detail {

using Substitution = std::map<std::string, std::string>;

inline std::vector<std::string> clause_variables(const HornClause& c) {
    std::vector<std::string> vars;
    auto collect = [&](const Atom& a) {
        for (const auto& t : a.args)
            if (t.is_variable() && std::find(vars.begin(), vars.end(), t.name) == vars.end())
                vars.push_back(t.name);
    };
    collect(c.head);
    for (const auto& b : c.body) collect(b);
    return vars;
}

inline Atom apply(const Atom& a, const Substitution& s) {
    Atom out{a.relation, {}, a.negated};
    out.args.reserve(a.args.size());
    for (const auto& t : a.args) {
        if (t.is_variable()) {
            auto it = s.find(t.name);
            out.args.push_back(it == s.end() ? t : Term::constant(it->second));
        } else {
            out.args.push_back(t);
        }
    }
    return out;
}

inline HornClause apply(const HornClause& c, const Substitution& s) {
    HornClause out{apply(c.head, s), {}};
    for (const auto& b : c.body) out.body.push_back(apply(b, s));
    return out;
}

// Enumerate every assignment of `vars[i..]` over `constants`.
inline void for_each_assignment(const std::vector<std::string>& vars, std::size_t i,
                                const std::vector<std::string>& constants, Substitution& s,
                                const std::function<void(const Substitution&)>& fn) {
    if (i == vars.size()) {
        fn(s);
        return;
    }
    if (s.count(vars[i])) {
        for_each_assignment(vars, i + 1, constants, s, fn);
        return;
    }
    for (const auto& c : constants) {
        s[vars[i]] = c;
        for_each_assignment(vars, i + 1, constants, s, fn);
    }
    s.erase(vars[i]);
}

} // namespace detail

/// Every clause instantiated under every substitution of its variables by
/// the given constants; variable-free clauses pass through unchanged.
inline Program ground(const Program& program, const std::vector<std::string>& constants) {
    Program out;
    for (const auto& c : program.clauses) {
        const auto vars = detail::clause_variables(c);
        if (vars.empty()) {
            out.clauses.push_back(c);
            continue;
        }
        detail::Substitution s;
        detail::for_each_assignment(vars, 0, constants, s,
                                    [&](const detail::Substitution& sub) { out.clauses.push_back(detail::apply(c, sub)); });
    }
    return out;
}

/// TP(I) over a ground program: heads of clauses whose positive body atoms
/// are all in I and whose negated body atoms are all absent from I, plus I.
inline Interpretation immediate_consequence_ground(const Program& ground_program, const Interpretation& I) {
    Interpretation out = I;
    for (const auto& c : ground_program.clauses) {
        if (!c.head.is_ground()) throw std::invalid_argument("program is not ground: " + c.str());
        bool ok = true;
        for (const auto& b : c.body) {
            if (!b.is_ground()) throw std::invalid_argument("program is not ground: " + c.str());
            const bool present = I.count(b.positive()) > 0;
            if (present == b.negated) {
                ok = false;
                break;
            }
        }
        if (ok) out.insert(c.head);
    }
    return out;
}

namespace detail {

// Join-based evaluation of one rule against I: positive body atoms are
// matched against I, variables left unbound range over `universe`.
inline void derive(const HornClause& c, const Interpretation& I,
                   const std::map<std::string, std::vector<const Atom*>>& by_relation,
                   const std::vector<std::string>& universe, Interpretation& out) {
    std::vector<const Atom*> positives, negatives;
    for (const auto& b : c.body) (b.negated ? negatives : positives).push_back(&b);
    const auto vars = clause_variables(c);
    Substitution s;

    std::function<void(std::size_t)> match = [&](std::size_t i) {
        if (i == positives.size()) {
            for_each_assignment(vars, 0, universe, s, [&](const Substitution& full) {
                for (const Atom* n : negatives)
                    if (I.count(apply(*n, full).positive())) return;
                out.insert(apply(c.head, full));
            });
            return;
        }
        const Atom& pattern = *positives[i];
        auto it = by_relation.find(pattern.relation);
        if (it == by_relation.end()) return;
        for (const Atom* fact : it->second) {
            if (fact->args.size() != pattern.args.size()) continue;
            std::vector<std::string> bound_here;
            bool ok = true;
            for (std::size_t k = 0; k < pattern.args.size() && ok; ++k) {
                const Term& t = pattern.args[k];
                const std::string& value = fact->args[k].name;
                if (!t.is_variable()) {
                    ok = t.name == value;
                } else if (auto b = s.find(t.name); b != s.end()) {
                    ok = b->second == value;
                } else {
                    s[t.name] = value;
                    bound_here.push_back(t.name);
                }
            }
            if (ok) match(i + 1);
            for (const auto& v : bound_here) s.erase(v);
        }
    };
    match(0);
}

inline std::map<std::string, std::vector<const Atom*>> index_by_relation(const Interpretation& I) {
    std::map<std::string, std::vector<const Atom*>> idx;
    for (const auto& a : I) idx[a.relation].push_back(&a);
    return idx;
}

} // namespace detail

/// TP(I) for a program with variables; equivalent to grounding over
/// `universe` first, without materializing the ground program.
inline Interpretation immediate_consequence(const Program& program, const Interpretation& I,
                                            const std::vector<std::string>& universe) {
    Interpretation out = I;
    const auto idx = detail::index_by_relation(I);
    for (const auto& c : program.clauses) detail::derive(c, I, idx, universe, out);
    return out;
}

inline Interpretation immediate_consequence(const Program& program, const Interpretation& I) {
    auto universe = program_constants(program);
    for (const auto& a : I)
        for (const auto& t : a.args) universe.push_back(t.name);
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    return immediate_consequence(program, I, universe);
}

/// Stratum per head relation: a negated dependency lifts the stratum by one.
/// Throws when the dependency graph is cyclic (recursive programs are
/// outside the supported fragment).
inline std::map<std::string, int> stratify(const Program& program) {
    std::map<std::string, std::vector<std::pair<std::string, bool>>> deps;
    std::set<std::string> relations;
    for (const auto& c : program.clauses) {
        relations.insert(c.head.relation);
        auto& d = deps[c.head.relation];
        for (const auto& b : c.body) {
            relations.insert(b.relation);
            d.emplace_back(b.relation, b.negated);
        }
    }
    std::map<std::string, int> stratum;
    std::set<std::string> visiting;
    std::function<int(const std::string&)> visit = [&](const std::string& r) -> int {
        if (auto it = stratum.find(r); it != stratum.end()) return it->second;
        if (!visiting.insert(r).second) throw std::invalid_argument("recursive program: cycle through " + r);
        int s = 0;
        for (const auto& [dep, neg] : deps[r]) s = std::max(s, visit(dep) + (neg ? 1 : 0));
        visiting.erase(r);
        return stratum[r] = s;
    };
    for (const auto& r : relations) visit(r);
    return stratum;
}

/// lfp(TP) computed stratum by stratum from the empty interpretation.
/// For positive programs this is the plain iteration of TP from the empty set.
inline Interpretation least_herbrand_model(const Program& program, std::vector<std::string> extra_constants = {}) {
    auto universe = program_constants(program);
    universe.insert(universe.end(), extra_constants.begin(), extra_constants.end());
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());

    const auto strata = stratify(program);
    int top = 0;
    for (const auto& [r, s] : strata) top = std::max(top, s);

    Interpretation I;
    for (int level = 0; level <= top; ++level) {
        Program layer;
        for (const auto& c : program.clauses)
            if (strata.at(c.head.relation) == level) layer.clauses.push_back(c);
        while (true) {
            auto next = immediate_consequence(layer, I, universe);
            if (next.size() == I.size()) break;
            I = std::move(next);
        }
    }
    return I;
}

} // namespace rtm

#pragma once

#include "rtm/herbrand.hpp"
#include "rtm/qa.hpp"
#include "rtm/random.hpp"

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtm {

using Dataset = std::vector<QAInstance>;

enum class QueryKind { Grandparent, Child };

struct GenConfig {
    std::vector<std::string> persons{"William", "Susan", "Mary", "John", "Bob", "Sandra"};
    std::vector<std::string> locations{"office", "garden", "pantry", "foyer", "kitchen"};
    std::size_t min_statements = 1;
    std::size_t max_statements = 3;
    std::size_t instances = 1000;
    double noise_rate = 0.0;
    std::uint64_t seed = 1;
    QueryKind query = QueryKind::Grandparent;

    void validate() const {
        if (persons.empty() || locations.empty()) throw std::invalid_argument("empty vocabulary");
        std::set<std::string> seen;
        for (const auto& v : {persons, locations})
            for (const auto& s : v)
                if (!seen.insert(s).second) throw std::invalid_argument("vocabulary symbol repeated: " + s);
        if (min_statements == 0 || min_statements > max_statements)
            throw std::invalid_argument("bad statement count range");
        if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw std::invalid_argument("noise rate outside [0,1]");
    }

    /// key=value lines; lists are comma-separated.
    static GenConfig parse(std::string_view text) {
        GenConfig c;
        std::istringstream is{std::string(text)};
        std::string line;
        std::size_t line_no = 0;
        auto list = [](std::string_view v) {
            std::vector<std::string> out;
            for (auto part : detail::split_body(v))
                if (auto t = detail::trim(part); !t.empty()) out.emplace_back(t);
            return out;
        };
        auto number = [&](std::string_view v, auto& out) {
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (ec != std::errc{} || p != v.data() + v.size()) throw ParseError(line_no, "bad number");
        };
        while (std::getline(is, line)) {
            ++line_no;
            auto body = detail::trim(line);
            if (body.empty() || body.front() == '#') continue;
            auto eq = body.find('=');
            if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
            auto key = detail::trim(body.substr(0, eq));
            auto value = detail::trim(body.substr(eq + 1));
            if (key == "persons") c.persons = list(value);
            else if (key == "locations") c.locations = list(value);
            else if (key == "min_statements") number(value, c.min_statements);
            else if (key == "max_statements") number(value, c.max_statements);
            else if (key == "instances") number(value, c.instances);
            else if (key == "seed") number(value, c.seed);
            else if (key == "noise_rate") c.noise_rate = std::stod(std::string(value));
            else if (key == "query") {
                if (value == "grandparent") c.query = QueryKind::Grandparent;
                else if (value == "child") c.query = QueryKind::Child;
                else throw ParseError(line_no, "unknown query kind");
            } else {
                throw ParseError(line_no, "unknown key: " + std::string(key));
            }
        }
        c.validate();
        return c;
    }
};

// ---------------------------------------------------------------------------
// Oracles

/// Facts MoveTo(S_i, P, L) and Later(S_i, S_j) for i < j, plus the
/// supersession rules: a person is where their last move took them.
inline Program movement_program(const std::vector<Atom>& moves) {
    Program p = parse_program("MovedLater(S, P) :- MoveTo(S, P, L), MoveTo(T, P, M), Later(S, T).\n"
                              "CurrentlyAt(P, L) :- MoveTo(S, P, L), not MovedLater(S, P).\n");
    const auto tagged = encode_with_order(moves, true);
    for (const auto& a : tagged) p.clauses.push_back({a, {}});
    for (std::size_t i = 0; i < moves.size(); ++i)
        for (std::size_t j = i + 1; j < moves.size(); ++j)
            p.add_fact(Atom::ground("Later", {"S" + std::to_string(i + 1), "S" + std::to_string(j + 1)}));
    return p;
}

/// Where the LHM places `person`; nullopt when the person never moved.
inline std::optional<std::string> movement_oracle(const std::vector<Atom>& moves, const std::string& person) {
    const auto model = least_herbrand_model(movement_program(moves));
    std::optional<std::string> found;
    for (const auto& a : model) {
        if (a.relation != "CurrentlyAt" || a.args[0].name != person) continue;
        if (found) throw std::logic_error("person in two places: " + person);
        found = a.args[1].name;
    }
    return found;
}

inline Program parentage_program(const std::vector<Atom>& facts) {
    Program p = parse_program("Grandparent(X, Y) :- Parent(X, Z), Parent(Z, Y).\n"
                              "Child(X, Y) :- Parent(Y, X).\n");
    for (const auto& f : facts) p.clauses.push_back({f, {}});
    return p;
}

inline bool parentage_oracle(const std::vector<Atom>& facts, const Atom& query) {
    return least_herbrand_model(parentage_program(facts)).count(query.positive()) > 0;
}

// ---------------------------------------------------------------------------
// Generators

namespace detail {

template <class T, RandomSource R>
const T& pick(const std::vector<T>& xs, R& rng) {
    return xs[static_cast<std::size_t>(rng.below(xs.size()))];
}

inline std::string render_statement(const Lexicon& lex, const Atom& a, Rng& rng) {
    auto ts = lex.templates(a.relation, false);
    if (ts.empty()) throw std::invalid_argument("no template for relation " + a.relation);
    return render_sentence(*pick(ts, rng), a);
}

inline std::string render_query(const Lexicon& lex, const Atom& a) {
    auto ts = lex.templates(a.relation, true);
    if (ts.empty()) throw std::invalid_argument("no query template for relation " + a.relation);
    return render_sentence(*ts.front(), a);
}

} // namespace detail

/// Movement stories: k ~ U[min,max] statements with no exact repeat of the
/// previous statement, a query about a mentioned person, and the LHM answer.
/// Instance i draws from its own stream derived from the seed.
inline Dataset generate_movement(const GenConfig& cfg, const Lexicon& lex = Lexicon::defaults()) {
    cfg.validate();
    if (cfg.locations.size() < 2) throw std::invalid_argument("movement needs at least two locations");
    Dataset out;
    out.reserve(cfg.instances);
    for (std::size_t i = 0; i < cfg.instances; ++i) {
        Rng rng(derive_seed(cfg.seed, i));
        const auto k = cfg.min_statements + rng.below(cfg.max_statements - cfg.min_statements + 1);
        std::vector<Atom> moves;
        while (moves.size() < k) {
            auto a = Atom::ground("MoveTo", {detail::pick(cfg.persons, rng), detail::pick(cfg.locations, rng)});
            if (!moves.empty() && moves.back() == a) continue;
            moves.push_back(std::move(a));
        }
        std::vector<std::string> mentioned;
        for (const auto& m : moves)
            if (std::find(mentioned.begin(), mentioned.end(), m.args[0].name) == mentioned.end())
                mentioned.push_back(m.args[0].name);
        const auto person = detail::pick(mentioned, rng);

        QAInstance inst;
        inst.id = i;
        for (const auto& m : moves) inst.statements.push_back(detail::render_statement(lex, m, rng));
        inst.question = detail::render_query(lex, Atom{"Location", {Term::constant(person), Term::variable("?")}, false});
        inst.answer = *movement_oracle(moves, person);
        for (std::size_t j = moves.size(); j-- > 0;)
            if (moves[j].args[0].name == person) {
                inst.supporting.push_back(j + 1);
                break;
            }
        out.push_back(std::move(inst));
    }
    return out;
}

/// Parentage stories: parent facts plus a yes/no grandparent or child query.
/// Half the instances are built around a positive pattern, the rest around
/// near misses (reversed, one generation, broken chain); every label comes
/// from the LHM oracle.
inline Dataset generate_parentage(const GenConfig& cfg, const Lexicon& lex = Lexicon::defaults()) {
    cfg.validate();
    if (cfg.persons.size() < 3) throw std::invalid_argument("parentage needs at least three persons");
    const bool grand = cfg.query == QueryKind::Grandparent;
    const std::size_t lo = std::max<std::size_t>(cfg.min_statements, grand ? 2 : 1);
    if (lo > cfg.max_statements) throw std::invalid_argument("too few statements for the query kind");
    Dataset out;
    out.reserve(cfg.instances);
    for (std::size_t i = 0; i < cfg.instances; ++i) {
        Rng rng(derive_seed(cfg.seed, i));
        auto people = cfg.persons;
        shuffle(std::span(people), rng);
        const auto& a = people[0];
        const auto& b = people[1];
        const auto& c = people[2];
        auto parent = [](const std::string& x, const std::string& y) { return Atom::ground("Parent", {x, y}); };

        std::vector<Atom> facts;
        std::pair<std::string, std::string> q;
        const bool positive = rng.below(2) == 0;
        const auto variant = rng.below(3);
        if (grand) {
            if (positive) {
                facts = {parent(a, b), parent(b, c)};
                q = {a, c};
            } else if (variant == 0) {
                facts = {parent(a, b), parent(b, c)};
                q = {c, a};
            } else if (variant == 1) {
                facts = {parent(a, b), parent(b, c)};
                q = {a, b};
            } else {
                const auto& d = people.size() > 3 ? people[3] : c;
                facts = {parent(a, b), parent(d, c)};
                q = {a, c};
            }
        } else {
            if (positive) {
                facts = {parent(b, a)};
                q = {a, b};
            } else if (variant == 0) {
                facts = {parent(a, b)};
                q = {a, b};
            } else if (variant == 1) {
                facts = {parent(c, a)};
                q = {a, b};
            } else {
                facts = {parent(b, c)};
                q = {a, b};
            }
        }
        const auto k = lo + rng.below(cfg.max_statements - lo + 1);
        for (std::size_t guard = 0; facts.size() < k && guard < 64; ++guard) {
            const auto& x = detail::pick(cfg.persons, rng);
            const auto& y = detail::pick(cfg.persons, rng);
            auto f = parent(x, y);
            if (x == y || std::find(facts.begin(), facts.end(), f) != facts.end()) continue;
            facts.push_back(std::move(f));
        }
        shuffle(std::span(facts), rng);

        const Atom query = Atom::ground(grand ? "Grandparent" : "Child", {q.first, q.second});
        QAInstance inst;
        inst.id = i;
        for (const auto& f : facts) inst.statements.push_back(detail::render_statement(lex, f, rng));
        inst.question = detail::render_query(lex, query);
        inst.answer = parentage_oracle(facts, query) ? "yes" : "no";
        out.push_back(std::move(inst));
    }
    return out;
}

inline std::pair<Dataset, Dataset> split_dataset(Dataset all, std::size_t train_count) {
    if (train_count > all.size()) throw std::invalid_argument("split larger than dataset");
    Dataset test(std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(train_count)),
                 std::make_move_iterator(all.end()));
    all.resize(train_count);
    for (std::size_t i = 0; i < test.size(); ++i) test[i].id = i;
    return {std::move(all), std::move(test)};
}

// ---------------------------------------------------------------------------
// Noise

using WrongAnswers = std::function<std::vector<std::string>(const QAInstance&)>;

/// Replace each answer, with probability `rate`, by a uniform draw from
/// wrong_answers(instance). Statements are never touched.
template <RandomSource R>
Dataset inject_noise(Dataset ds, double rate, R& rng, const WrongAnswers& wrong_answers) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("noise rate outside [0,1]");
    if (rate == 0.0) return ds;
    for (auto& inst : ds) {
        if (!chance(rng, rate)) continue;
        auto options = wrong_answers(inst);
        std::erase(options, inst.answer);
        if (options.empty()) continue;
        inst.answer = detail::pick(options, rng);
    }
    return ds;
}

/// Wrong movement answers: other locations mentioned in the story, or the
/// whole vocabulary when the story names only one location.
inline WrongAnswers movement_wrong_answers(Lexicon lex, std::vector<std::string> vocabulary) {
    return [lex = std::move(lex), vocab = std::move(vocabulary)](const QAInstance& inst) {
        std::vector<std::string> seen;
        for (const auto& s : inst.statements) {
            const auto loc = parse_sentence(s, lex).atom.args.back().name;
            if (loc != inst.answer && std::find(seen.begin(), seen.end(), loc) == seen.end()) seen.push_back(loc);
        }
        if (!seen.empty()) return seen;
        return vocab;
    };
}

inline WrongAnswers fixed_wrong_answers(std::vector<std::string> labels) {
    return [labels = std::move(labels)](const QAInstance&) { return labels; };
}

// ---------------------------------------------------------------------------
// bAbI text format

namespace detail {

inline std::size_t parse_line_id(std::string_view line, std::size_t line_no, std::string_view& rest) {
    std::size_t id = 0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), id);
    if (ec != std::errc{} || p == line.data() || p == line.data() + line.size() || *p != ' ')
        throw ParseError(line_no, "expected '<id> <text>'");
    rest = line.substr(static_cast<std::size_t>(p - line.data()) + 1);
    return id;
}

} // namespace detail

/// Stories separated by the id resetting to 1. Each question line closes an
/// instance made of the story's statements so far; supporting ids are
/// rewritten to positions within those statements.
inline Dataset read_babi(std::istream& is) {
    Dataset out;
    std::vector<std::string> statements;
    std::vector<std::size_t> statement_ids;
    std::size_t expected = 1, line_no = 0;
    bool pending = false;
    std::string line;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        std::string_view rest;
        const auto id = detail::parse_line_id(line, line_no, rest);
        if (id == 1) {
            if (pending) throw ParseError(line_no, "story ends without a question");
            statements.clear();
            statement_ids.clear();
        } else if (id != expected) {
            throw ParseError(line_no, "non-monotone line id " + std::to_string(id));
        }
        expected = id + 1;
        const auto tab = rest.find('\t');
        if (tab == std::string_view::npos) {
            statements.emplace_back(rest);
            statement_ids.push_back(id);
            pending = true;
            continue;
        }
        if (statements.empty()) throw ParseError(line_no, "question before statements");
        pending = false;
        QAInstance inst;
        inst.id = out.size();
        inst.statements = statements;
        inst.question = std::string(rest.substr(0, tab));
        auto tail = rest.substr(tab + 1);
        const auto tab2 = tail.find('\t');
        inst.answer = std::string(detail::trim(tail.substr(0, tab2)));
        if (inst.answer.empty()) throw ParseError(line_no, "missing answer");
        if (tab2 != std::string_view::npos) {
            std::istringstream ids{std::string(tail.substr(tab2 + 1))};
            std::string tok;
            while (ids >> tok) {
                std::size_t sid = 0;
                auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), sid);
                if (ec != std::errc{} || p != tok.data() + tok.size()) throw ParseError(line_no, "bad supporting id");
                auto it = std::find(statement_ids.begin(), statement_ids.end(), sid);
                if (it == statement_ids.end()) throw ParseError(line_no, "supporting id is not a statement");
                inst.supporting.push_back(static_cast<std::size_t>(it - statement_ids.begin()) + 1);
            }
        }
        out.push_back(std::move(inst));
    }
    if (pending) throw ParseError(line_no, "story ends without a question");
    return out;
}

inline void write_babi(std::ostream& os, const Dataset& ds) {
    for (const auto& inst : ds) {
        std::size_t id = 1;
        for (const auto& s : inst.statements) os << id++ << ' ' << s << '\n';
        os << id << ' ' << inst.question << '\t' << inst.answer << '\t';
        for (std::size_t i = 0; i < inst.supporting.size(); ++i) os << (i ? " " : "") << inst.supporting[i];
        os << '\n';
    }
}

inline Dataset read_babi(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_babi(in);
}

inline void write_babi(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_babi(out, ds);
}

/// One block of bAbI lines into a parsed instance.
inline std::pair<QAInstance, ParsedInstance> parse_instance(const std::vector<std::string>& lines,
                                                            const Lexicon& lexicon) {
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    std::istringstream is(text);
    auto ds = read_babi(is);
    if (ds.size() != 1) throw std::invalid_argument("expected exactly one question in block");
    auto parsed = parse_instance(ds.front(), lexicon);
    return {std::move(ds.front()), std::move(parsed)};
}

} // namespace rtm

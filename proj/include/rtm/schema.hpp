#pragma once

#include "rtm/herbrand.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtm {

struct TypedRelation {
    std::string name;
    std::vector<std::string> arg_types;

    std::size_t arity() const { return arg_types.size(); }
    friend bool operator==(const TypedRelation&, const TypedRelation&) = default;
};

/// Declares entity types with their vocabularies and typed relations.
///
/// Text grammar, one declaration per line ('#' starts a comment line):
///
///     type <Type> = <symbol> <symbol> ...
///     relation <Name>(<Type>, <Type>, ...)
class Schema {
public:
    void add_type(const std::string& type, std::vector<std::string> vocabulary) {
        if (vocabulary.empty()) throw std::invalid_argument("empty vocabulary for type " + type);
        for (const auto& sym : vocabulary)
            if (auto t = type_of(sym); t && *t != type)
                throw std::invalid_argument("symbol '" + sym + "' declared in two types");
        if (!types_.count(type)) order_.push_back(type);
        types_[type] = std::move(vocabulary);
    }

    void add_relation(TypedRelation r) {
        if (r.arg_types.empty()) throw std::invalid_argument("zero-arity relation: " + r.name);
        for (const auto& t : r.arg_types)
            if (!types_.count(t)) throw std::invalid_argument("relation " + r.name + " uses undeclared type " + t);
        for (const auto& existing : relations_)
            if (existing.name == r.name) throw std::invalid_argument("relation declared twice: " + r.name);
        relations_.push_back(std::move(r));
    }

    const std::vector<std::string>& vocabulary(const std::string& type) const {
        auto it = types_.find(type);
        if (it == types_.end()) throw std::invalid_argument("unknown type " + type);
        return it->second;
    }

    bool has_type(const std::string& type) const { return types_.count(type) > 0; }
    const std::vector<std::string>& type_names() const { return order_; }
    const std::vector<TypedRelation>& relations() const { return relations_; }

    const TypedRelation* relation(const std::string& name) const {
        for (const auto& r : relations_)
            if (r.name == name) return &r;
        return nullptr;
    }

    std::optional<std::string> type_of(const std::string& symbol) const {
        for (const auto& [type, vocab] : types_)
            if (std::find(vocab.begin(), vocab.end(), symbol) != vocab.end()) return type;
        return std::nullopt;
    }

    /// Every type-respecting ground atom of every relation.
    std::vector<Atom> atoms() const {
        std::vector<Atom> out;
        for (const auto& r : relations_) {
            std::vector<std::size_t> idx(r.arity(), 0);
            while (true) {
                Atom a{r.name, {}, false};
                for (std::size_t k = 0; k < r.arity(); ++k)
                    a.args.push_back(Term::parse(vocabulary(r.arg_types[k])[idx[k]]));
                out.push_back(std::move(a));
                std::size_t pos = r.arity();
                while (pos > 0 && ++idx[pos - 1] == vocabulary(r.arg_types[pos - 1]).size()) idx[--pos] = 0;
                if (pos == 0) break;
            }
        }
        return out;
    }

    std::string str() const {
        std::ostringstream os;
        for (const auto& t : order_) {
            os << "type " << t << " =";
            for (const auto& s : types_.at(t)) os << ' ' << s;
            os << '\n';
        }
        for (const auto& r : relations_) {
            os << "relation " << r.name << '(';
            for (std::size_t i = 0; i < r.arg_types.size(); ++i) os << (i ? ", " : "") << r.arg_types[i];
            os << ")\n";
        }
        return os.str();
    }

    static Schema parse(std::string_view text) {
        Schema s;
        std::istringstream is{std::string(text)};
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            auto body = detail::trim(line);
            if (body.empty() || body.front() == '#') continue;
            std::istringstream ls{std::string(body)};
            std::string keyword;
            ls >> keyword;
            if (keyword == "type") {
                std::string name, eq, sym;
                ls >> name >> eq;
                if (name.empty() || eq != "=") throw ParseError(line_no, "expected 'type <Name> = symbols...'");
                std::vector<std::string> vocab;
                while (ls >> sym) vocab.push_back(sym);
                s.add_type(name, std::move(vocab));
            } else if (keyword == "relation") {
                std::string rest;
                std::getline(ls, rest);
                auto r = detail::trim(rest);
                const auto open = r.find('(');
                if (open == std::string_view::npos || r.back() != ')')
                    throw ParseError(line_no, "expected 'relation <Name>(<Type>, ...)'");
                TypedRelation rel{std::string(detail::trim(r.substr(0, open))), {}};
                for (auto part : detail::split_body(r.substr(open + 1, r.size() - open - 2)))
                    rel.arg_types.emplace_back(detail::trim(part));
                s.add_relation(std::move(rel));
            } else {
                throw ParseError(line_no, "unknown declaration '" + keyword + "'");
            }
        }
        return s;
    }

private:
    std::map<std::string, std::vector<std::string>> types_;
    std::vector<std::string> order_;
    std::vector<TypedRelation> relations_;
};

} // namespace rtm

#pragma once

#include "rtm/machine.hpp"
#include "rtm/multiclass.hpp"

#include <charconv>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace rtm {

/// Plain-text model format:
///
///     rtm-model v1
///     key=value            (hyperparameters, then free-form metadata)
///     ...
///     <+|-> <class id> <state>,<state>,...   (one line per clause)
///
/// Clause lines are ordered by class, then clause index.
struct ModelFile {
    MulticlassMachine machine;
    std::map<std::string, std::string> meta;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("cannot format number");
    return {buf, end};
}

template <class T>
T parse_number(std::string_view text, const char* what) {
    T value{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw std::runtime_error(std::string("model: bad ") + what + ": '" + std::string(text) + "'");
    return value;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline const char* reserved_keys[] = {"clauses", "threshold", "specificity", "states", "epochs",
                                      "boost_true_positive", "negative_literals", "seed",
                                      "features", "classes", "labels"};

inline bool is_reserved(const std::string& key) {
    for (const char* k : reserved_keys)
        if (key == k) return true;
    return false;
}

} // namespace detail

inline void write_model(std::ostream& out, const MulticlassMachine& m,
                        const std::map<std::string, std::string>& meta = {}) {
    const HyperParams& p = m.params();
    out << "rtm-model v1\n";
    out << "clauses=" << p.clauses << '\n';
    out << "threshold=" << p.threshold << '\n';
    out << "specificity=" << detail::format_double(p.specificity) << '\n';
    out << "states=" << p.states << '\n';
    out << "epochs=" << p.epochs << '\n';
    out << "boost_true_positive=" << (p.boost_true_positive ? 1 : 0) << '\n';
    out << "negative_literals=" << (p.negative_literals ? 1 : 0) << '\n';
    out << "seed=" << p.seed << '\n';
    out << "features=" << m.features() << '\n';
    out << "classes=" << m.classes() << '\n';
    out << "labels=";
    for (std::size_t i = 0; i < m.classes(); ++i) out << (i ? "," : "") << m.label(i);
    out << '\n';
    for (const auto& [k, v] : meta) {
        if (detail::is_reserved(k)) throw std::invalid_argument("metadata key is reserved: " + k);
        if (k.find('=') != std::string::npos || v.find('\n') != std::string::npos || k.empty() ||
            k.front() == '+' || k.front() == '-')
            throw std::invalid_argument("metadata entry not representable: " + k);
        out << k << '=' << v << '\n';
    }
    for (std::size_t c = 0; c < m.classes(); ++c) {
        for (const auto& clause : m.bank(c).clauses()) {
            out << (clause.polarity() == Polarity::Positive ? '+' : '-') << ' ' << c << ' ';
            const auto states = clause.states();
            for (std::size_t k = 0; k < states.size(); ++k) out << (k ? "," : "") << states[k];
            out << '\n';
        }
    }
}

inline std::string to_model_text(const MulticlassMachine& m, const std::map<std::string, std::string>& meta = {}) {
    std::ostringstream os;
    write_model(os, m, meta);
    return os.str();
}

inline ModelFile read_model(std::istream& in) {
    using detail::parse_number;
    std::string line;
    if (!std::getline(in, line) || line != "rtm-model v1")
        throw std::runtime_error("model: missing 'rtm-model v1' header");

    std::map<std::string, std::string> kv;
    std::vector<std::string> clause_lines;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '+' || line[0] == '-') {
            clause_lines.push_back(line);
            continue;
        }
        if (!clause_lines.empty()) throw std::runtime_error("model: key after clause lines");
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("model: malformed line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }

    auto take = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error(std::string("model: missing key ") + key);
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    HyperParams p;
    p.clauses = parse_number<std::size_t>(take("clauses"), "clauses");
    p.threshold = parse_number<int>(take("threshold"), "threshold");
    p.specificity = parse_number<double>(take("specificity"), "specificity");
    p.states = parse_number<int>(take("states"), "states");
    p.epochs = parse_number<std::size_t>(take("epochs"), "epochs");
    p.boost_true_positive = parse_number<int>(take("boost_true_positive"), "flag") != 0;
    p.negative_literals = parse_number<int>(take("negative_literals"), "flag") != 0;
    p.seed = parse_number<std::uint64_t>(take("seed"), "seed");
    p.validate();
    const auto features = parse_number<std::size_t>(take("features"), "features");
    const auto classes = parse_number<std::size_t>(take("classes"), "classes");
    auto labels = detail::split(take("labels"), ',');
    if (labels.size() != classes) throw std::runtime_error("model: label count does not match classes");

    ModelFile model{MulticlassMachine(std::move(labels), features, p), std::move(kv)};

    if (clause_lines.size() != classes * p.clauses)
        throw std::runtime_error("model: expected " + std::to_string(classes * p.clauses) + " clause lines");
    for (std::size_t i = 0; i < clause_lines.size(); ++i) {
        const std::string& cl = clause_lines[i];
        const std::size_t c = i / p.clauses, j = i % p.clauses;
        const auto fields = detail::split(cl, ' ');
        if (fields.size() != 3) throw std::runtime_error("model: malformed clause line " + std::to_string(i));
        ClauseTeam& team = model.machine.bank(c).clause(j);
        const char pol = team.polarity() == Polarity::Positive ? '+' : '-';
        if (fields[0].size() != 1 || fields[0][0] != pol)
            throw std::runtime_error("model: polarity out of order at clause line " + std::to_string(i));
        if (parse_number<std::size_t>(fields[1], "class id") != c)
            throw std::runtime_error("model: class id out of order at clause line " + std::to_string(i));
        const auto values = detail::split(fields[2], ',');
        if (values.size() != 2 * features) throw std::runtime_error("model: wrong automaton count");
        for (std::size_t k = 0; k < values.size(); ++k)
            team.set_state(k, parse_number<int>(values[k], "state"));
    }
    return model;
}

inline ModelFile read_model_text(const std::string& text) {
    std::istringstream is(text);
    return read_model(is);
}

} // namespace rtm

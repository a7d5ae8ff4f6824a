#pragma once

#include "rtm/convolution.hpp"
#include "rtm/herbrand.hpp"
#include "rtm/literals.hpp"
#include "rtm/multiclass.hpp"
#include "rtm/schema.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rtm {

/// A possibly noisy (inputs, targets) observation. `truth` is the target
/// atoms' observed truth value.
struct Observation {
    std::vector<Atom> inputs;
    std::vector<Atom> targets;
    bool truth = true;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Bijection between atoms and feature positions, in lexicographic order of
/// (relation, argument symbols).
class AtomIndex {
public:
    AtomIndex() = default;

    explicit AtomIndex(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
        for (auto& a : atoms_) a.negated = false;
        std::sort(atoms_.begin(), atoms_.end(), lex_less);
        atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
        for (std::size_t i = 0; i < atoms_.size(); ++i) position_[atoms_[i]] = i;
    }

    static AtomIndex from_schema(const Schema& schema) { return AtomIndex(schema.atoms()); }

    /// Rebuild from rendered atom names, as stored in model files.
    static AtomIndex from_names(const std::vector<std::string>& names) {
        std::vector<Atom> atoms;
        for (const auto& n : names) atoms.push_back(parse_atom(n));
        AtomIndex idx(std::move(atoms));
        if (idx.size() != names.size()) throw std::invalid_argument("duplicate atoms in index");
        return idx;
    }

    std::size_t size() const { return atoms_.size(); }
    const Atom& at(std::size_t i) const { return atoms_.at(i); }
    const std::vector<Atom>& atoms() const { return atoms_; }

    std::optional<std::size_t> find(const Atom& a) const {
        auto it = position_.find(a.positive());
        if (it == position_.end()) return std::nullopt;
        return it->second;
    }

    /// Feature k is set iff atom k is present.
    LiteralVector encode(const std::vector<Atom>& atoms) const {
        LiteralVector x(atoms_.size());
        for (const auto& a : atoms) {
            auto k = find(a);
            if (!k) throw std::invalid_argument("atom outside schema: " + a.str());
            x.set_feature(*k, true);
        }
        return x;
    }

    std::vector<Atom> decode(const LiteralVector& x) const {
        if (x.features() != atoms_.size()) throw std::invalid_argument("literal vector width mismatch");
        std::vector<Atom> out;
        for (std::size_t k = 0; k < atoms_.size(); ++k)
            if (x.feature(k)) out.push_back(atoms_[k]);
        return out;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& a : atoms_) out.push_back(a.str());
        return out;
    }

    static bool lex_less(const Atom& a, const Atom& b) {
        if (a.relation != b.relation) return a.relation < b.relation;
        return std::lexicographical_compare(a.args.begin(), a.args.end(), b.args.begin(), b.args.end(),
                                            [](const Term& x, const Term& y) { return x.name < y.name; });
    }

private:
    std::vector<Atom> atoms_;
    std::map<Atom, std::size_t> position_;
};

/// Constants in first-appearance order, without duplicates.
inline std::vector<std::string> obtain_constants(const std::vector<Atom>& atoms) {
    std::vector<std::string> out;
    for (const auto& a : atoms)
        for (const auto& t : a.args)
            if (!t.is_variable() && std::find(out.begin(), out.end(), t.name) == out.end())
                out.push_back(t.name);
    return out;
}

/// How detached variables are named. Without a schema every constant becomes
/// Z1, Z2, ...; with one, each type draws from its own prefix (Per1, Loc1).
struct VariableNaming {
    const Schema* schema = nullptr;
    std::map<std::string, std::string> prefixes;
    std::string default_prefix = "Z";
    std::vector<std::string> fixed_types; ///< constants of these types are kept as-is

    bool is_fixed(const std::string& constant) const {
        if (!schema || fixed_types.empty()) return false;
        auto t = schema->type_of(constant);
        return t && std::find(fixed_types.begin(), fixed_types.end(), *t) != fixed_types.end();
    }

    std::string type_of(const std::string& constant) const {
        if (schema)
            if (auto t = schema->type_of(constant); t && prefixes.count(*t)) return *t;
        return {};
    }
    std::string prefix(const std::string& type) const {
        return type.empty() ? default_prefix : prefixes.at(type);
    }
};

/// Constant-to-variable map; the first `bound` entries come from the targets.
struct VariableBinding {
    struct Entry {
        std::string constant;
        std::string variable;
        std::string type;
    };
    std::vector<Entry> entries;
    std::size_t bound = 0;

    std::optional<std::string> variable_for(const std::string& constant) const {
        for (const auto& e : entries)
            if (e.constant == constant) return e.variable;
        return std::nullopt;
    }
    std::optional<std::string> constant_for(const std::string& variable) const {
        for (const auto& e : entries)
            if (e.variable == variable) return e.constant;
        return std::nullopt;
    }
    std::vector<std::string> free_variables() const {
        std::vector<std::string> out;
        for (std::size_t i = bound; i < entries.size(); ++i) out.push_back(entries[i].variable);
        return out;
    }

    /// Bind `constant` to the next variable of its type, if not yet bound.
    void bind(const std::string& constant, const VariableNaming& naming) {
        if (variable_for(constant) || naming.is_fixed(constant)) return;
        const std::string type = naming.type_of(constant);
        std::size_t n = 1;
        for (const auto& e : entries) n += e.type == type;
        entries.push_back({constant, naming.prefix(type) + std::to_string(n), type});
    }

    Atom apply(const Atom& a) const {
        Atom out{a.relation, {}, a.negated};
        for (const auto& t : a.args) {
            if (!t.is_variable())
                if (auto v = variable_for(t.name)) {
                    out.args.push_back(Term::variable(*v));
                    continue;
                }
            out.args.push_back(t);
        }
        return out;
    }
};

/// Replace target constants by variables left to right, apply the same
/// substitution to the inputs, then give each remaining input constant a
/// fresh free variable in first-appearance order.
inline std::pair<Observation, VariableBinding> variables_replace_constants(const Observation& obs,
                                                                           const VariableNaming& naming = {}) {
    VariableBinding binding;
    for (const auto& c : obtain_constants(obs.targets)) binding.bind(c, naming);
    binding.bound = binding.entries.size();
    for (const auto& c : obtain_constants(obs.inputs)) binding.bind(c, naming);

    Observation out{{}, {}, obs.truth};
    for (const auto& a : obs.inputs) out.inputs.push_back(binding.apply(a));
    for (const auto& a : obs.targets) out.targets.push_back(binding.apply(a));
    return {std::move(out), std::move(binding)};
}

inline constexpr std::size_t kMaxFreeVariables = 5;

inline std::size_t factorial(std::size_t n) {
    std::size_t f = 1;
    for (std::size_t i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Every renaming of `atoms` that permutes the variables within each group
/// among themselves. Groups are enumerated as a cartesian product of their
/// permutations in lexicographic order; the identity renaming comes first.
inline std::vector<std::vector<Atom>> permute_variables(const std::vector<Atom>& atoms,
                                                        const std::vector<std::vector<std::string>>& groups) {
    std::vector<std::vector<std::size_t>> perms;
    for (const auto& g : groups) {
        std::vector<std::size_t> p(g.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = i;
        perms.push_back(p);
    }
    std::vector<std::vector<Atom>> out;
    while (true) {
        std::map<std::string, std::string> rename;
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (std::size_t i = 0; i < groups[g].size(); ++i) rename[groups[g][i]] = groups[g][perms[g][i]];
        std::vector<Atom> window;
        for (const auto& a : atoms) {
            Atom r{a.relation, {}, a.negated};
            for (const auto& t : a.args) {
                auto it = t.is_variable() ? rename.find(t.name) : rename.end();
                r.args.push_back(it == rename.end() ? t : Term::variable(it->second));
            }
            window.push_back(std::move(r));
        }
        out.push_back(std::move(window));

        // Advance the odometer of per-group permutations.
        std::size_t g = groups.size();
        while (g > 0) {
            auto& p = perms[g - 1];
            if (std::next_permutation(p.begin(), p.end())) break;
            --g; // next_permutation already wrapped p back to the identity
        }
        if (g == 0) break;
    }
    return out;
}

/// One window per assignment of the free variables, grouped by type so
/// permutations never cross entity types. |windows| = prod over types of v_t!.
inline WindowSet generate_variable_permutations(const std::vector<Atom>& detached_inputs,
                                                const VariableBinding& binding, const AtomIndex& index) {
    std::map<std::string, std::vector<std::string>> by_type;
    std::size_t v = 0;
    for (std::size_t i = binding.bound; i < binding.entries.size(); ++i) {
        by_type[binding.entries[i].type].push_back(binding.entries[i].variable);
        ++v;
    }
    if (v > kMaxFreeVariables)
        throw std::invalid_argument("too many free variables (" + std::to_string(v) + " > " +
                                    std::to_string(kMaxFreeVariables) + ")");
    std::vector<std::vector<std::string>> groups;
    for (auto& [type, vars] : by_type) groups.push_back(std::move(vars));

    WindowSet ws;
    std::size_t id = 0;
    for (const auto& window : permute_variables(detached_inputs, groups)) ws.add(index.encode(window), id++);
    return ws;
}

enum class EncodingMode { Constants, Generalized };

struct WidthParams {
    std::vector<std::size_t> entity_set_sizes; ///< |E_1| .. |E_e|
    std::size_t relations_per_sample = 1;      ///< r
    std::size_t entities_per_relation = 1;     ///< e
};

/// Feature count estimate: (prod |E_i|) * r with constants, r^(e+1) after
/// generalization.
inline std::size_t feature_width(const WidthParams& p, EncodingMode mode) {
    if (mode == EncodingMode::Generalized) {
        std::size_t o = 1;
        for (std::size_t i = 0; i <= p.entities_per_relation; ++i) o *= p.relations_per_sample;
        return o;
    }
    std::size_t o = p.relations_per_sample;
    for (auto s : p.entity_set_sizes) o *= s;
    return o;
}

/// Maps observations to window sets: plain encoding over ground atoms when
/// `detach` is off, or variable detachment plus free-variable permutations.
struct RelationalEncoder {
    AtomIndex index;
    VariableNaming naming;
    bool detach = true;
    bool convolve = true;

    WindowSet windows(const Observation& obs) const {
        if (!detach) return WindowSet(index.encode(obs.inputs));
        auto [detached, binding] = variables_replace_constants(obs, naming);
        if (!convolve) return WindowSet(index.encode(detached.inputs));
        return generate_variable_permutations(detached.inputs, binding, index);
    }
};

/// Compose detachment, permutation and the convolutional update; the
/// observation's truth value selects the class bank (0 = false, 1 = true).
template <RandomSource R>
void relational_train_step(MulticlassMachine& banks, const RelationalEncoder& encoder,
                           const Observation& obs, R& rng) {
    if (banks.classes() != 2) throw std::invalid_argument("relational training expects false/true banks");
    banks.train_step(encoder.windows(obs), obs.truth ? 1 : 0, rng);
}

} // namespace rtm

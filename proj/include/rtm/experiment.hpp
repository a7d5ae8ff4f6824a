#pragma once

#include "rtm/dataset.hpp"
#include "rtm/encoder.hpp"
#include "rtm/inspect.hpp"
#include "rtm/model_io.hpp"
#include "rtm/multiclass.hpp"
#include "rtm/qa.hpp"
#include "rtm/schema.hpp"

#include <chrono>
#include <cstddef>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtm {

enum class Task { Movement, Parentage };

inline std::string to_string(Task t) { return t == Task::Movement ? "movement" : "parentage"; }
inline std::string to_string(EncodingMode m) { return m == EncodingMode::Constants ? "constants" : "generalized"; }
inline std::string to_string(QueryKind q) { return q == QueryKind::Grandparent ? "grandparent" : "child"; }

inline Task parse_task(const std::string& s) {
    if (s == "movement") return Task::Movement;
    if (s == "parentage") return Task::Parentage;
    throw std::invalid_argument("unknown task: " + s);
}
inline EncodingMode parse_mode(const std::string& s) {
    if (s == "constants") return EncodingMode::Constants;
    if (s == "generalized") return EncodingMode::Generalized;
    throw std::invalid_argument("unknown mode: " + s);
}
inline QueryKind parse_query(const std::string& s) {
    if (s == "grandparent") return QueryKind::Grandparent;
    if (s == "child") return QueryKind::Child;
    throw std::invalid_argument("unknown query kind: " + s);
}

/// How stories become literal windows.
struct PipelineConfig {
    Task task = Task::Movement;
    EncodingMode mode = EncodingMode::Generalized;
    bool conv = false;
    bool negative_literals = false; ///< also turns on sentence-order tags
    QueryKind query = QueryKind::Grandparent;
    std::size_t max_statements = 3;
    std::vector<std::string> persons = GenConfig{}.persons;
    std::vector<std::string> locations = GenConfig{}.locations;

    void validate() const {
        if (conv && mode == EncodingMode::Constants) throw std::invalid_argument("convolution needs generalized mode");
        if (max_statements == 0) throw std::invalid_argument("max_statements must be positive");
        if (persons.empty()) throw std::invalid_argument("no persons");
        if (task == Task::Movement && locations.empty()) throw std::invalid_argument("no locations");
        if (task == Task::Parentage && negative_literals)
            throw std::invalid_argument("negative literals are only supported for the movement task");
    }

    std::map<std::string, std::string> to_meta() const {
        auto join = [](const std::vector<std::string>& xs) {
            std::string s;
            for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + xs[i];
            return s;
        };
        std::map<std::string, std::string> m{{"task", to_string(task)},
                                             {"mode", to_string(mode)},
                                             {"conv", conv ? "on" : "off"},
                                             {"order_tags", negative_literals ? "on" : "off"},
                                             {"max_statements", std::to_string(max_statements)},
                                             {"persons", join(persons)}};
        if (task == Task::Movement) m["locations"] = join(locations);
        else m["query"] = to_string(query);
        return m;
    }

    static PipelineConfig from_meta(const std::map<std::string, std::string>& meta) {
        auto get = [&](const char* k) {
            auto it = meta.find(k);
            if (it == meta.end()) throw std::runtime_error(std::string("model: missing metadata ") + k);
            return it->second;
        };
        PipelineConfig c;
        c.task = parse_task(get("task"));
        c.mode = parse_mode(get("mode"));
        c.conv = get("conv") == "on";
        c.negative_literals = get("order_tags") == "on";
        c.max_statements = detail::parse_number<std::size_t>(get("max_statements"), "max_statements");
        c.persons = detail::split(get("persons"), ',');
        if (c.task == Task::Movement) c.locations = detail::split(get("locations"), ',');
        else c.query = parse_query(get("query"));
        c.validate();
        return c;
    }
};

/// One encoded story: its windows and, when the answer maps into the label
/// space, the class index.
struct EncodedInstance {
    WindowSet windows;
    std::optional<VariableBinding> binding;
    std::optional<std::size_t> label;
};

class Pipeline {
public:
    explicit Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        const std::size_t n = cfg_.max_statements;
        auto numbered = [](const std::string& prefix, std::size_t count) {
            std::vector<std::string> out;
            for (std::size_t i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
            return out;
        };
        if (cfg_.task == Task::Movement) {
            auto declare = [&](Schema& s, std::vector<std::string> people, std::vector<std::string> places) {
                s.add_type("Person", std::move(people));
                s.add_type("Location", std::move(places));
                if (cfg_.negative_literals) {
                    s.add_type("Slot", numbered("S", n));
                    s.add_relation({"MoveTo", {"Slot", "Person", "Location"}});
                } else {
                    s.add_relation({"MoveTo", {"Person", "Location"}});
                }
                s.add_relation({"Q", {"Person"}});
            };
            declare(constants_, cfg_.persons, cfg_.locations);
            if (cfg_.mode == EncodingMode::Generalized) {
                declare(working_, numbered("Per", n), numbered("Loc", n));
                labels_ = numbered("Loc", n);
            } else {
                working_ = constants_;
                labels_ = cfg_.locations;
                std::sort(labels_.begin(), labels_.end());
            }
            naming_ = movement_naming(constants_);
        } else {
            constants_.add_type("Person", cfg_.persons);
            constants_.add_relation({"Parent", {"Person", "Person"}});
            if (cfg_.mode == EncodingMode::Generalized) {
                working_.add_type("Person", numbered("Z", 2 * n + 2));
                working_.add_relation({"Parent", {"Person", "Person"}});
            } else {
                constants_.add_relation({"Q", {"Person", "Person"}});
                working_ = constants_;
            }
            labels_ = {"no", "yes"};
            naming_.schema = &constants_;
        }
        index_ = AtomIndex::from_schema(working_);
    }

    Pipeline(const Pipeline& o) : Pipeline(o.cfg_) {}
    Pipeline& operator=(const Pipeline& o) {
        if (this != &o) *this = Pipeline(o.cfg_);
        return *this;
    }
    Pipeline(Pipeline&& o) noexcept : Pipeline(static_cast<const Pipeline&>(o)) {}
    Pipeline& operator=(Pipeline&& o) noexcept {
        cfg_ = std::move(o.cfg_);
        constants_ = std::move(o.constants_);
        working_ = std::move(o.working_);
        index_ = std::move(o.index_);
        labels_ = std::move(o.labels_);
        naming_ = o.naming_;
        naming_.schema = &constants_;
        return *this;
    }

    const PipelineConfig& config() const { return cfg_; }
    const Schema& constants_schema() const { return constants_; }
    const Schema& schema() const { return working_; }
    const AtomIndex& index() const { return index_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::vector<std::string> feature_names() const { return index_.names(); }
    const VariableNaming& naming() const { return naming_; }
    const Lexicon& lexicon() const { return lexicon_; }

    /// Input atoms before encoding (placeholders in generalized mode).
    std::pair<std::vector<Atom>, std::optional<VariableBinding>> observation(const QAInstance& inst) const {
        const auto parsed = parse_instance(inst, lexicon_);
        if (parsed.statements.size() > cfg_.max_statements)
            throw std::invalid_argument("story longer than max_statements");
        const bool tags = cfg_.negative_literals;
        if (cfg_.mode == EncodingMode::Constants) return {to_observation(parsed, tags).inputs, std::nullopt};
        const bool marker = cfg_.task == Task::Movement;
        auto g = generalize_entities(parsed, naming_, tags, marker);
        return {std::move(g.observation.inputs), std::move(g.binding)};
    }

    EncodedInstance encode(const QAInstance& inst) const {
        const auto parsed = parse_instance(inst, lexicon_);
        if (parsed.statements.size() > cfg_.max_statements)
            throw std::invalid_argument("story longer than max_statements");
        EncodedInstance out;
        const bool tags = cfg_.negative_literals;
        if (cfg_.task == Task::Parentage) {
            RelationalEncoder enc{index_, naming_, cfg_.mode == EncodingMode::Generalized, cfg_.conv};
            auto obs = to_observation(parsed, false, cfg_.mode == EncodingMode::Constants);
            out.windows = enc.windows(obs);
            out.label = label_index(inst.answer);
            return out;
        }
        if (cfg_.mode == EncodingMode::Constants) {
            out.windows = WindowSet(index_.encode(to_observation(parsed, tags).inputs));
            out.label = label_index(inst.answer);
            return out;
        }
        auto g = generalize_entities(parsed, naming_, tags, true);
        out.windows = cfg_.conv ? permute_instance(g, index_) : WindowSet(index_.encode(g.observation.inputs));
        // A noisy answer may name a location absent from the story; it gets
        // the next free placeholder.
        if (!g.binding.variable_for(inst.answer) && naming_.schema->type_of(inst.answer) == "Location")
            g.binding.bind(inst.answer, naming_);
        if (auto v = g.binding.variable_for(inst.answer)) out.label = label_index(*v);
        out.binding = std::move(g.binding);
        return out;
    }

    /// Map a predicted class back to an answer constant ("" if the
    /// placeholder is not bound in this story).
    std::string answer(const EncodedInstance& e, std::size_t cls) const {
        const auto& label = labels_.at(cls);
        if (!e.binding) return label;
        return e.binding->constant_for(label).value_or("");
    }

    /// Head atom per class label, for Horn export.
    HornExportOptions export_options() const {
        HornExportOptions o;
        o.generalized = cfg_.mode == EncodingMode::Generalized;
        o.permutation_invariant = cfg_.conv;
        if (cfg_.task == Task::Movement) {
            o.query_variables = {"Per1"};
            o.head_for = [](const std::string& label) -> std::optional<Atom> {
                return parse_atom("CurrentlyAt(Per1, " + label + ")"); // placeholders stay variables
            };
        } else {
            const std::string rel = cfg_.query == QueryKind::Grandparent ? "Grandparent" : "Child";
            o.query_variables = {"Z1", "Z2"};
            o.head_for = [rel](const std::string& label) -> std::optional<Atom> {
                if (label != "yes") return std::nullopt;
                return parse_atom(rel + "(Z1, Z2)");
            };
        }
        return o;
    }

private:
    std::optional<std::size_t> label_index(const std::string& name) const {
        auto it = std::find(labels_.begin(), labels_.end(), name);
        if (it == labels_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - labels_.begin());
    }

    PipelineConfig cfg_;
    Schema constants_;
    Schema working_;
    AtomIndex index_;
    std::vector<std::string> labels_;
    VariableNaming naming_;
    Lexicon lexicon_ = Lexicon::defaults();
};

/// Encoded samples with a mappable label; `skipped` counts the rest.
inline std::vector<EncodedSample> encode_dataset(const Pipeline& p, const Dataset& ds, std::size_t* skipped = nullptr) {
    std::vector<EncodedSample> out;
    out.reserve(ds.size());
    std::size_t miss = 0;
    for (const auto& inst : ds) {
        auto e = p.encode(inst);
        if (!e.label) {
            ++miss;
            continue;
        }
        out.push_back({std::move(e.windows), *e.label});
    }
    if (skipped) *skipped = miss;
    return out;
}

struct TrainedModel {
    Pipeline pipeline;
    MulticlassMachine machine;
};

/// Initialise from params.seed and run params.epochs epochs.
inline TrainedModel train_model(const Pipeline& p, HyperParams params, const std::vector<EncodedSample>& train) {
    params.validate();
    Rng rng(params.seed);
    MulticlassMachine m(p.labels(), p.index().size(), params, rng);
    fit(m, std::span<const EncodedSample>(train), params.epochs, rng);
    return {p, std::move(m)};
}

/// Test accuracy over every story; a story whose answer cannot be expressed
/// in the label space counts as an error.
inline Metrics evaluate_model(const TrainedModel& tm, const Dataset& test) {
    if (test.empty()) throw std::invalid_argument("empty test set");
    std::vector<std::size_t> truth, predicted;
    const std::size_t k = tm.machine.classes();
    for (const auto& inst : test) {
        auto e = tm.pipeline.encode(inst);
        const auto pred = tm.machine.predict(e.windows);
        if (e.label) {
            truth.push_back(*e.label);
            predicted.push_back(pred);
        } else {
            truth.push_back(pred == 0 ? 1 : 0);
            predicted.push_back(pred);
        }
    }
    return score(truth, predicted, k);
}

inline void save_model(const TrainedModel& tm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_model(out, tm.machine, tm.pipeline.config().to_meta());
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    auto mf = read_model(in);
    Pipeline p(PipelineConfig::from_meta(mf.meta));
    if (p.index().size() != mf.machine.features()) throw std::runtime_error("model width does not match its schema");
    if (std::vector<std::string>(mf.machine.labels().begin(), mf.machine.labels().end()) != p.labels())
        throw std::runtime_error("model labels do not match its schema");
    return {std::move(p), std::move(mf.machine)};
}

/// Generated train and test splits for a pipeline configuration. The test
/// split is generated with its own seed stream and is never noised.
struct Splits {
    Dataset train;
    Dataset test;
};

inline Splits make_splits(const PipelineConfig& pc, std::size_t train_count, std::size_t test_count,
                          std::uint64_t seed, double noise_rate) {
    GenConfig g;
    g.persons = pc.persons;
    g.locations = pc.locations;
    g.max_statements = pc.max_statements;
    g.query = pc.query;
    g.seed = seed;
    g.instances = train_count + test_count;
    auto all = pc.task == Task::Movement ? generate_movement(g) : generate_parentage(g);
    auto [train, test] = split_dataset(std::move(all), train_count);
    if (noise_rate > 0) {
        Rng rng(derive_seed(seed, 0x6e6f697365ULL));
        auto wrong = pc.task == Task::Movement ? movement_wrong_answers(Lexicon::defaults(), pc.locations)
                                               : fixed_wrong_answers({"no", "yes"});
        train = inject_noise(std::move(train), noise_rate, rng, wrong);
    }
    return {std::move(train), std::move(test)};
}

} // namespace rtm

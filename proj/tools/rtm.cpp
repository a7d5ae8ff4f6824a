// Command-line driver: generate data, train, evaluate and inspect models.

#include "rtm/experiment.hpp"
#include "rtm/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace rtm;

namespace {

struct Options {
    std::string task = "movement";
    std::string mode = "generalized";
    std::string conv = "off";
    std::string negative_literals = "off";
    std::string query = "grandparent";
    std::string gen_config;
    std::size_t train_size = 10000;
    std::size_t test_size = 1000;
    std::optional<std::uint64_t> seed;
    double noise = 0.0;
    std::string train_path, test_path, model_path, out;
    std::size_t instance = 0;
    bool global = false;
    HyperParams hp;
};

bool on_off(const std::string& v) { return v == "on"; }

std::uint64_t resolve_seed(const Options& o) {
    if (o.seed) return *o.seed;
    if (const char* env = std::getenv("RTM_SEED")) return std::stoull(env);
    return 1;
}

PipelineConfig pipeline_config(const Options& o) {
    PipelineConfig pc;
    pc.task = parse_task(o.task);
    pc.mode = parse_mode(o.mode);
    pc.conv = on_off(o.conv);
    pc.negative_literals = on_off(o.negative_literals);
    pc.query = parse_query(o.query);
    if (!o.gen_config.empty()) {
        std::ifstream in(o.gen_config);
        if (!in) throw std::runtime_error("cannot open " + o.gen_config);
        std::string text((std::istreambuf_iterator<char>(in)), {});
        auto g = GenConfig::parse(text);
        pc.persons = g.persons;
        pc.locations = g.locations;
        pc.max_statements = g.max_statements;
        pc.query = g.query;
    }
    pc.validate();
    return pc;
}

Splits load_or_generate(const Options& o, const PipelineConfig& pc, std::uint64_t seed) {
    Splits s;
    if (o.train_path.empty() || o.test_path.empty()) s = make_splits(pc, o.train_size, o.test_size, seed, o.noise);
    if (!o.train_path.empty()) {
        s.train = read_babi(o.train_path);
        if (o.noise > 0) {
            Rng rng(derive_seed(seed, 0x6e6f697365ULL));
            auto wrong = pc.task == Task::Movement ? movement_wrong_answers(Lexicon::defaults(), pc.locations)
                                                   : fixed_wrong_answers({"no", "yes"});
            s.train = inject_noise(std::move(s.train), o.noise, rng, wrong);
        }
    }
    if (!o.test_path.empty()) s.test = read_babi(o.test_path);
    return s;
}

void write_report(const RunReport& r, const std::string& path) {
    const auto j = to_json(r).dump(2);
    if (path.empty()) {
        std::cout << j << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j << '\n';
}

RunReport make_report(const TrainedModel& tm, const Metrics& m, std::uint64_t seed, std::size_t train_size,
                      std::size_t test_size, double seconds) {
    RunReport r;
    r.config = tm.pipeline.config().to_meta();
    const auto& p = tm.machine.params();
    r.config["clauses"] = std::to_string(p.clauses);
    r.config["threshold"] = std::to_string(p.threshold);
    r.config["specificity"] = detail::format_double(p.specificity);
    r.config["states"] = std::to_string(p.states);
    r.config["epochs"] = std::to_string(p.epochs);
    r.seed = seed;
    r.labels = tm.pipeline.labels();
    r.metrics = m;
    r.feature_width = tm.machine.features();
    r.clauses = p.clauses;
    r.train_size = train_size;
    r.test_size = test_size;
    r.wall_seconds = seconds;
    return r;
}

int cmd_generate(const Options& o) {
    const auto pc = pipeline_config(o);
    const auto seed = resolve_seed(o);
    auto s = make_splits(pc, o.train_size, o.test_size, seed, o.noise);
    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    fs::create_directories(dir);
    write_babi(s.train, (dir / "train.txt").string());
    write_babi(s.test, (dir / "test.txt").string());
    std::cout << "wrote " << s.train.size() << " train and " << s.test.size() << " test stories to " << dir.string()
              << '\n';
    return 0;
}

int cmd_train(const Options& o) {
    const auto pc = pipeline_config(o);
    const auto seed = resolve_seed(o);
    auto hp = o.hp;
    hp.seed = seed;
    hp.negative_literals = pc.negative_literals;
    const auto t0 = std::chrono::steady_clock::now();
    auto splits = load_or_generate(o, pc, seed);
    Pipeline p(pc);
    std::size_t skipped = 0;
    const auto samples = encode_dataset(p, splits.train, &skipped);
    if (skipped) std::cerr << "warning: " << skipped << " training stories have answers outside the label space\n";
    auto tm = train_model(p, hp, samples);
    const auto m = evaluate_model(tm, splits.test);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    fs::create_directories(dir);
    save_model(tm, (dir / "model.txt").string());
    write_report(make_report(tm, m, seed, samples.size(), splits.test.size(), secs), (dir / "report.json").string());
    std::ofstream((dir / "clauses.txt").string()) << global_dump(tm.machine, p.feature_names());
    std::cout << "accuracy " << m.accuracy << " (f_macro " << m.f_macro << ") in " << secs << " s; model in "
              << dir.string() << '\n';
    return 0;
}

int cmd_eval(const Options& o) {
    if (o.model_path.empty() || o.test_path.empty()) throw std::invalid_argument("eval needs --model and --test");
    const auto t0 = std::chrono::steady_clock::now();
    const auto tm = load_model(o.model_path);
    const auto test = read_babi(o.test_path);
    const auto m = evaluate_model(tm, test);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report(make_report(tm, m, tm.machine.params().seed, 0, test.size(), secs), o.out);
    return 0;
}

int cmd_explain(const Options& o) {
    if (o.model_path.empty()) throw std::invalid_argument("explain needs --model");
    const auto tm = load_model(o.model_path);
    const auto names = tm.pipeline.feature_names();
    if (o.global) {
        std::cout << global_dump(tm.machine, names);
        return 0;
    }
    if (o.test_path.empty()) throw std::invalid_argument("explain needs --test (or --global)");
    const auto test = read_babi(o.test_path);
    if (o.instance >= test.size()) throw std::out_of_range("instance index past end of test file");
    const auto& inst = test[o.instance];
    for (const auto& s : inst.statements) std::cout << s << '\n';
    std::cout << inst.question << "  (answer: " << inst.answer << ")\n\n";
    const auto e = tm.pipeline.encode(inst);
    const auto snap = local_snapshot(tm.machine, e.windows, names);
    std::cout << snap.str();
    std::cout << "predicted answer: " << tm.pipeline.answer(e, snap.winner) << '\n';
    return 0;
}

int cmd_export(const Options& o) {
    if (o.model_path.empty()) throw std::invalid_argument("export-horn needs --model");
    const auto tm = load_model(o.model_path);
    const auto ex = export_horn(tm.machine, tm.pipeline.index(), tm.pipeline.export_options());
    for (const auto& w : ex.warnings) std::cerr << "warning: " << w << '\n';
    if (o.out.empty()) std::cout << ex.str();
    else std::ofstream(o.out) << ex.str();
    return 0;
}

int cmd_metrics(const Options& o) {
    auto pc = pipeline_config(o);
    const auto seed = resolve_seed(o);
    auto cpc = pc, gpc = pc;
    cpc.mode = EncodingMode::Constants;
    cpc.conv = false;
    gpc.mode = EncodingMode::Generalized;
    Pipeline cp(cpc), gp(gpc);
    Dataset ds = o.train_path.empty() ? make_splits(pc, o.train_size, 0, seed, 0.0).train : read_babi(o.train_path);
    std::vector<std::vector<Atom>> ca, ga;
    for (const auto& inst : ds) {
        ca.push_back(cp.observation(inst).first);
        ga.push_back(gp.observation(inst).first);
    }
    const auto k = kb_metrics(cp.schema(), gp.schema(), ca, ga);
    nlohmann::json j;
    j["constants_width"] = k.constants_width;
    j["generalized_width"] = k.generalized_width;
    j["measured_constants"] = k.measured_constants;
    j["measured_generalized"] = k.measured_generalized;
    j["ratio"] = k.ratio;
    const double d = static_cast<double>(ds.size());
    const double m = static_cast<double>(o.hp.clauses);
    j["cost_constants"] = cost_estimate(d, static_cast<double>(k.constants_width), m, 0, {}, false);
    j["cost_generalized"] = cost_estimate(d, static_cast<double>(k.generalized_width), m, 0, {}, false);
    j["cost_generalized_conv"] =
        cost_estimate(d, static_cast<double>(k.generalized_width), m, pc.max_statements, {}, true);
    std::cout << j.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relational Tsetlin machine for closed-domain question answering"};
    app.require_subcommand(1);
    Options o;

    auto data_flags = [&](CLI::App* c) {
        c->add_option("--task", o.task, "movement or parentage")->check(CLI::IsMember({"movement", "parentage"}));
        c->add_option("--mode", o.mode, "constants or generalized")->check(CLI::IsMember({"constants", "generalized"}));
        c->add_option("--conv", o.conv, "variable-permutation windows")->check(CLI::IsMember({"on", "off"}));
        c->add_option("--negative-literals", o.negative_literals, "allow negated literals (adds sentence order)")
            ->check(CLI::IsMember({"on", "off"}));
        c->add_option("--query", o.query, "parentage query: grandparent or child")
            ->check(CLI::IsMember({"grandparent", "child"}));
        c->add_option("--schema", o.gen_config, "vocabulary file (key=value lines)")->check(CLI::ExistingFile);
        c->add_option("--train-size", o.train_size, "generated training stories");
        c->add_option("--test-size", o.test_size, "generated test stories");
        c->add_option("--seed", o.seed, "random seed (falls back to RTM_SEED, then 1)");
        c->add_option("--noise", o.noise, "fraction of training answers replaced by wrong ones")
            ->check(CLI::Range(0.0, 1.0));
    };
    auto machine_flags = [&](CLI::App* c) {
        c->add_option("--clauses", o.hp.clauses, "clauses per class (even)");
        c->add_option("--threshold", o.hp.threshold, "voting target T");
        c->add_option("--specificity", o.hp.specificity, "specificity s");
        c->add_option("--states", o.hp.states, "states per action N");
        c->add_option("--epochs", o.hp.epochs, "training epochs");
        c->add_flag("--boost", o.hp.boost_true_positive, "boost true positive feedback");
    };

    auto* gen = app.add_subcommand("generate", "write train/test stories in bAbI format");
    data_flags(gen);
    gen->add_option("--out", o.out, "output directory");

    auto* train = app.add_subcommand("train", "train a model and write model, report and clause dump");
    data_flags(train);
    machine_flags(train);
    train->add_option("--train", o.train_path, "training stories (generated when absent)")->check(CLI::ExistingFile);
    train->add_option("--test", o.test_path, "test stories (generated when absent)")->check(CLI::ExistingFile);
    train->add_option("--out", o.out, "output directory");

    auto* eval = app.add_subcommand("eval", "score a saved model on a test file");
    eval->add_option("--model", o.model_path)->required()->check(CLI::ExistingFile);
    eval->add_option("--test", o.test_path)->required()->check(CLI::ExistingFile);
    eval->add_option("--out", o.out, "report path (stdout when absent)");

    auto* explain = app.add_subcommand("explain", "show the clauses behind one prediction");
    explain->add_option("--model", o.model_path)->required()->check(CLI::ExistingFile);
    explain->add_option("--test", o.test_path)->check(CLI::ExistingFile);
    explain->add_option("--instance", o.instance, "story index in the test file");
    explain->add_flag("--global", o.global, "dump every clause instead");

    auto* exp = app.add_subcommand("export-horn", "print positive clauses as Horn rules");
    exp->add_option("--model", o.model_path)->required()->check(CLI::ExistingFile);
    exp->add_option("--out", o.out, "output file (stdout when absent)");

    auto* met = app.add_subcommand("metrics", "knowledge-base width and cost estimates");
    data_flags(met);
    machine_flags(met);
    met->add_option("--train", o.train_path, "stories to measure (generated when absent)")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen) return cmd_generate(o);
        if (*train) return cmd_train(o);
        if (*eval) return cmd_eval(o);
        if (*explain) return cmd_explain(o);
        if (*exp) return cmd_export(o);
        if (*met) return cmd_metrics(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

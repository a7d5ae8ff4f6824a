#include "rtm/dataset.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace rtm;

namespace {

const Lexicon& lex() {
    static const Lexicon l = Lexicon::defaults();
    return l;
}

// Independent of the Horn program: scan moves from the end.
std::string last_move(const std::vector<Atom>& moves, const std::string& person) {
    for (auto it = moves.rbegin(); it != moves.rend(); ++it)
        if (it->args[0].name == person) return it->args[1].name;
    return {};
}

// Forward chaining over the two parent facts by hand.
bool brute_parentage(const std::vector<Atom>& facts, const Atom& q) {
    auto is_parent = [&](const std::string& x, const std::string& y) {
        return std::find(facts.begin(), facts.end(), Atom::ground("Parent", {x, y})) != facts.end();
    };
    const auto& x = q.args[0].name;
    const auto& y = q.args[1].name;
    if (q.relation == "Child") return is_parent(y, x);
    for (const auto& f : facts)
        if (is_parent(x, f.args[0].name) && is_parent(f.args[0].name, y)) return true;
    return false;
}

std::string to_text(const Dataset& ds) {
    std::ostringstream os;
    write_babi(os, ds);
    return os.str();
}

Dataset from_text(const std::string& s) {
    std::istringstream is(s);
    return read_babi(is);
}

} // namespace

TEST(GenConfig, ValidateAndParse) {
    GenConfig c;
    EXPECT_NO_THROW(c.validate());
    c.locations.push_back("Mary");
    EXPECT_THROW(c.validate(), std::invalid_argument);
    const auto p = GenConfig::parse("# small\npersons = Ann, Bob\nlocations = hall, attic\ninstances = 7\nseed=3\n");
    EXPECT_EQ(p.persons, (std::vector<std::string>{"Ann", "Bob"}));
    EXPECT_EQ(p.instances, 7u);
    EXPECT_EQ(p.seed, 3u);
    EXPECT_THROW(GenConfig::parse("colour = red\n"), ParseError);
    EXPECT_THROW(GenConfig::parse("instances = many\n"), ParseError);
    EXPECT_THROW(GenConfig::parse("noise_rate = 1.5\n"), std::invalid_argument);
}

TEST(MovementOracle, WilliamStory) {
    const std::vector<Atom> moves{Atom::ground("MoveTo", {"William", "office"}), Atom::ground("MoveTo", {"Susan", "garden"}),
                                  Atom::ground("MoveTo", {"William", "pantry"})};
    EXPECT_EQ(movement_oracle(moves, "William"), std::optional<std::string>("pantry"));
    EXPECT_EQ(movement_oracle(moves, "Susan"), std::optional<std::string>("garden"));
    EXPECT_EQ(movement_oracle(moves, "Mary"), std::nullopt);
}

TEST(GenerateMovement, WilliamStoryIsProducible) {
    GenConfig c;
    c.instances = 20000;
    c.persons = {"William", "Susan"};
    c.locations = {"office", "garden", "pantry"};
    bool found = false;
    for (const auto& inst : generate_movement(c)) {
        const auto p = parse_instance(inst, lex());
        if (p.statements.size() == 3 && p.statements[0] == Atom::ground("MoveTo", {"William", "office"}) &&
            p.statements[1] == Atom::ground("MoveTo", {"Susan", "garden"}) &&
            p.statements[2] == Atom::ground("MoveTo", {"William", "pantry"}) && p.query.args[0].name == "William") {
            EXPECT_EQ(inst.answer, "pantry");
            found = true;
            break;
        }
    }
    EXPECT_TRUE(found);
}

TEST(GenerateMovement, OnePersonOneStatement) {
    GenConfig c;
    c.persons = {"Ann"};
    c.max_statements = 1;
    c.instances = 100;
    for (const auto& inst : generate_movement(c)) {
        const auto p = parse_instance(inst, lex());
        ASSERT_EQ(p.statements.size(), 1u);
        ASSERT_EQ(inst.answer, p.statements[0].args[1].name);
    }
}

TEST(GenerateMovement, AgreesWithLastMoveScan) {
    GenConfig c;
    c.instances = 1000;
    c.seed = 17;
    std::size_t counts[4] = {};
    for (const auto& inst : generate_movement(c)) {
        const auto p = parse_instance(inst, lex());
        const auto& person = p.query.args[0].name;
        ASSERT_EQ(inst.answer, last_move(p.statements, person)) << inst.id;
        ASSERT_EQ(inst.supporting.size(), 1u);
        ASSERT_EQ(p.statements[inst.supporting[0] - 1].args[0].name, person);
        for (std::size_t i = 1; i < p.statements.size(); ++i) ASSERT_FALSE(p.statements[i] == p.statements[i - 1]);
        ++counts[p.statements.size()];
    }
    EXPECT_EQ(counts[0], 0u);
    for (int k = 1; k <= 3; ++k) EXPECT_NEAR(static_cast<double>(counts[k]) / 1000, 1.0 / 3, 0.05);
}

TEST(GenerateMovement, Errors) {
    GenConfig c;
    c.locations = {"hall"};
    EXPECT_THROW(generate_movement(c), std::invalid_argument);
}

TEST(GenerateParentage, SmallFamilyFacts) {
    const std::vector<Atom> facts{Atom::ground("Parent", {"Bob", "Mary"}), Atom::ground("Parent", {"Mary", "Peter"}),
                                  Atom::ground("Parent", {"Bob", "Jane"})};
    EXPECT_TRUE(parentage_oracle(facts, Atom::ground("Grandparent", {"Bob", "Peter"})));
    EXPECT_FALSE(parentage_oracle(facts, Atom::ground("Grandparent", {"Bob", "Jane"})));
    EXPECT_FALSE(parentage_oracle({Atom::ground("Parent", {"Bob", "Mary"})}, Atom::ground("Grandparent", {"Bob", "Mary"})));
    EXPECT_TRUE(parentage_oracle(facts, Atom::ground("Child", {"Jane", "Bob"})));
}

TEST(GenerateParentage, AgreesWithBruteForce) {
    for (auto kind : {QueryKind::Grandparent, QueryKind::Child}) {
        GenConfig c;
        c.instances = 500;
        c.query = kind;
        std::size_t yes = 0;
        for (const auto& inst : generate_parentage(c)) {
            const auto p = parse_instance(inst, lex());
            ASSERT_EQ(inst.answer == "yes", brute_parentage(p.statements, p.query)) << inst.id;
            yes += inst.answer == "yes";
        }
        EXPECT_GT(yes, 150u);
        EXPECT_LT(yes, 350u);
    }
}

TEST(GenerateParentage, Errors) {
    GenConfig c;
    c.persons = {"Ann", "Bob"};
    EXPECT_THROW(generate_parentage(c), std::invalid_argument);
    GenConfig one;
    one.max_statements = 1;
    EXPECT_THROW(generate_parentage(one), std::invalid_argument);
}

TEST(Generate, SeedDeterminism) {
    GenConfig c;
    c.instances = 300;
    EXPECT_EQ(to_text(generate_movement(c)), to_text(generate_movement(c)));
    EXPECT_EQ(to_text(generate_parentage(c)), to_text(generate_parentage(c)));
    auto d = c;
    d.seed = 2;
    EXPECT_NE(to_text(generate_movement(c)), to_text(generate_movement(d)));
}

TEST(Noise, RateZeroIsIdentity) {
    GenConfig c;
    c.instances = 200;
    const auto ds = generate_movement(c);
    Rng r(1);
    EXPECT_EQ(inject_noise(ds, 0.0, r, movement_wrong_answers(lex(), c.locations)), ds);
}

TEST(Noise, RateOneChangesEveryAnswer) {
    GenConfig c;
    c.instances = 500;
    const auto ds = generate_movement(c);
    Rng r(2);
    const auto noisy = inject_noise(ds, 1.0, r, movement_wrong_answers(lex(), c.locations));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        ASSERT_NE(noisy[i].answer, ds[i].answer);
        ASSERT_EQ(noisy[i].statements, ds[i].statements);
        ASSERT_EQ(noisy[i].question, ds[i].question);
    }
}

TEST(Noise, BinomialCount) {
    GenConfig c;
    c.instances = 2000;
    const auto ds = generate_movement(c);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng r(seed);
        const auto noisy = inject_noise(ds, 0.05, r, movement_wrong_answers(lex(), c.locations));
        std::size_t changed = 0;
        for (std::size_t i = 0; i < ds.size(); ++i) changed += noisy[i].answer != ds[i].answer;
        const double mean = 2000 * 0.05, sd = std::sqrt(2000 * 0.05 * 0.95);
        EXPECT_LE(std::abs(static_cast<double>(changed) - mean), 3 * sd) << changed;
    }
}

TEST(Noise, WrongAnswersPreferStoryLocations) {
    QAInstance q;
    q.statements = {"Ann went to the hall.", "Bob went to the attic."};
    q.question = "Where is Ann?";
    q.answer = "hall";
    const auto w = movement_wrong_answers(lex(), {"hall", "attic", "cellar"});
    EXPECT_EQ(w(q), (std::vector<std::string>{"attic"}));
    q.statements = {"Ann went to the hall."};
    EXPECT_EQ(w(q).size(), 3u);
    EXPECT_THROW({ Rng r(1); inject_noise(Dataset{}, -0.1, r, w); }, std::invalid_argument);
}

TEST(Babi, RoundTrip) {
    const std::string text = "1 William moved to the office.\n"
                             "2 Susan went to the garden.\n"
                             "3 William walked to the pantry.\n"
                             "4 Where is William?\tpantry\t3\n"
                             "1 John went to the kitchen.\n"
                             "2 Where is John?\tkitchen\t1\n";
    const auto ds = from_text(text);
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds[0].answer, "pantry");
    EXPECT_EQ(ds[0].statements.size(), 3u);
    EXPECT_EQ(ds[0].supporting, (std::vector<std::size_t>{3}));
    EXPECT_EQ(to_text(ds), text);

    GenConfig c;
    c.instances = 300;
    const auto gen = generate_movement(c);
    EXPECT_EQ(from_text(to_text(gen)), gen);
}

TEST(Babi, FileRoundTrip) {
    GenConfig c;
    c.instances = 50;
    const auto ds = generate_parentage(c);
    const auto path = (std::filesystem::temp_directory_path() / "rtm_babi_roundtrip.txt").string();
    write_babi(ds, path);
    EXPECT_EQ(read_babi(path), ds);
    std::filesystem::remove(path);
    EXPECT_THROW(read_babi(path), std::runtime_error);
}

TEST(Babi, Errors) {
    EXPECT_THROW(from_text("1 Where is John?\tkitchen\t1\n"), ParseError);
    EXPECT_THROW(from_text("1 John went to the kitchen.\n3 Where is John?\tkitchen\t1\n"), ParseError);
    EXPECT_THROW(from_text("1 John went to the kitchen.\n"), ParseError);
    EXPECT_THROW(from_text("1 John went to the kitchen.\n1 Ann went to the hall.\n2 Where is Ann?\thall\t1\n"), ParseError);
    EXPECT_THROW(from_text("John went to the kitchen.\n"), ParseError);
    EXPECT_THROW(from_text("1 John went to the kitchen.\n2 Where is John?\t\t1\n"), ParseError);
    EXPECT_THROW(from_text("1 John went to the kitchen.\n2 Where is John?\tkitchen\t5\n"), ParseError);
}

TEST(Babi, ParseInstanceBlock) {
    auto [inst, parsed] = parse_instance(
        std::vector<std::string>{"1 William moved to the office.", "2 Susan went to the garden.",
                                 "3 William walked to the pantry.", "4 Where is William?\tpantry\t3"},
        lex());
    EXPECT_EQ(parsed.statements.size(), 3u);
    EXPECT_EQ(query_marker(parsed.query).str(), "Q(William)");
    EXPECT_EQ(inst.answer, "pantry");
    auto [one, p1] = parse_instance(std::vector<std::string>{"1 John went to the kitchen.", "2 Where is John?\tkitchen\t1"}, lex());
    EXPECT_EQ(p1.statements.size(), 1u);
    EXPECT_ANY_THROW(parse_instance(std::vector<std::string>{"1 John went to the kitchen."}, lex()));
}

TEST(Split, TrainThenTest) {
    GenConfig c;
    c.instances = 100;
    const auto all = generate_movement(c);
    auto [train, test] = split_dataset(all, 80);
    ASSERT_EQ(train.size(), 80u);
    ASSERT_EQ(test.size(), 20u);
    EXPECT_EQ(test[0].id, 0u);
    EXPECT_EQ(test[0].statements, all[80].statements);
    EXPECT_THROW(split_dataset(all, 101), std::invalid_argument);
}

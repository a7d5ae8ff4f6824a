#include "invariants.hpp"

#include "rtm/encoder.hpp"
#include "rtm/schema.hpp"

#include <gtest/gtest.h>

using namespace rtm;

namespace {

std::vector<Atom> atoms(std::initializer_list<const char*> names) {
    std::vector<Atom> out;
    for (auto n : names) out.push_back(parse_atom(n));
    return out;
}

std::vector<std::string> rendered(const std::vector<Atom>& as) {
    std::vector<std::string> out;
    for (const auto& a : as) out.push_back(a.str());
    return out;
}

} // namespace

TEST(Schema, ParseAndEnumerate) {
    const auto s = Schema::parse("# movement\n"
                                 "type Person = Mary John\n"
                                 "type Location = office garden pantry\n"
                                 "relation MoveTo(Person, Location)\n");
    EXPECT_EQ(s.atoms().size(), 6u);
    EXPECT_EQ(s.type_of("garden"), std::optional<std::string>("Location"));
    EXPECT_EQ(Schema::parse(s.str()).str(), s.str());
    EXPECT_THROW(Schema::parse("relation R(Thing)\n"), std::invalid_argument);
    EXPECT_THROW(Schema::parse("type A = x\ntype B = x\n"), std::invalid_argument);
    EXPECT_THROW(Schema::parse("kind A = x\n"), ParseError);
}

TEST(AtomIndex, EightFeatures) {
    const auto hb = herbrand_base({"a1", "a2"}, {{"r1", 2}, {"r2", 2}});
    const AtomIndex idx(std::vector<Atom>(hb.begin(), hb.end()));
    ASSERT_EQ(idx.size(), 8u);
    const auto x = idx.encode(atoms({"r1(a1, a2)"}));
    std::size_t set = 0;
    for (std::size_t k = 0; k < 8; ++k) set += x.feature(k);
    EXPECT_EQ(set, 1u);
    EXPECT_EQ(idx.decode(x), atoms({"r1(a1, a2)"}));

    const auto empty = idx.encode({});
    for (std::size_t k = 0; k < 8; ++k) {
        EXPECT_FALSE(empty[k]);
        EXPECT_TRUE(empty[8 + k]);
    }
    EXPECT_THROW(idx.encode(atoms({"r3(a1, a1)"})), std::invalid_argument);
}

TEST(AtomIndex, LexicographicAndFromNames) {
    const AtomIndex idx(atoms({"b(x)", "a(y)", "a(x)", "a(x)"}));
    EXPECT_EQ(idx.names(), (std::vector<std::string>{"a(x)", "a(y)", "b(x)"}));
    EXPECT_EQ(AtomIndex::from_names(idx.names()).atoms(), idx.atoms());
    EXPECT_THROW(AtomIndex::from_names({"a(x)", "a(x)"}), std::invalid_argument);
}

TEST(Invariants, EncodeDecodeBijection) {
    const auto o = check::encode_decode(10000, 3);
    EXPECT_TRUE(o.ok()) << o.first_failure;
}

TEST(ObtainConstants, Examples) {
    EXPECT_EQ(obtain_constants(atoms({"child(Mary, Bob)"})), (std::vector<std::string>{"Mary", "Bob"}));
    EXPECT_TRUE(obtain_constants({}).empty());
    EXPECT_EQ(obtain_constants(atoms({"parent(Bob, Mary)", "parent(Bob, Jane)"})),
              (std::vector<std::string>{"Bob", "Mary", "Jane"}));
    EXPECT_EQ(obtain_constants(atoms({"parent(X, Mary)"})), (std::vector<std::string>{"Mary"}));
}

TEST(Detach, TargetBoundFirst) {
    Observation obs{atoms({"parent(Bob, Mary)"}), atoms({"child(Mary, Bob)"}), true};
    auto [d, b] = variables_replace_constants(obs);
    EXPECT_EQ(rendered(d.inputs), (std::vector<std::string>{"parent(Z2, Z1)"}));
    EXPECT_EQ(rendered(d.targets), (std::vector<std::string>{"child(Z1, Z2)"}));
    EXPECT_EQ(b.bound, 2u);
    EXPECT_TRUE(b.free_variables().empty());
}

TEST(Detach, FreeVariableForLeftover) {
    Observation obs{atoms({"parent(Bob, Mary)"}), atoms({"child(Jane, Bob)"}), false};
    auto [d, b] = variables_replace_constants(obs);
    EXPECT_EQ(rendered(d.inputs), (std::vector<std::string>{"parent(Z2, Z3)"}));
    EXPECT_EQ(rendered(d.targets), (std::vector<std::string>{"child(Z1, Z2)"}));
    EXPECT_FALSE(d.truth);
    EXPECT_EQ(b.free_variables(), (std::vector<std::string>{"Z3"}));
    EXPECT_EQ(b.constant_for("Z3"), std::optional<std::string>("Mary"));
}

TEST(Detach, InjectiveCompleteIdempotent) {
    Rng r(11);
    const std::vector<std::string> people{"Ann", "Bob", "Cy", "Dee", "Eve"};
    for (int trial = 0; trial < 2000; ++trial) {
        Observation obs;
        for (std::size_t i = 0, n = 1 + r.below(4); i < n; ++i)
            obs.inputs.push_back(Atom::ground("parent", {people[r.below(5)], people[r.below(5)]}));
        obs.targets.push_back(Atom::ground("child", {people[r.below(5)], people[r.below(5)]}));
        auto [d, b] = variables_replace_constants(obs);
        std::set<std::string> vars;
        for (const auto& e : b.entries) ASSERT_TRUE(vars.insert(e.variable).second);
        for (const auto& a : d.inputs)
            for (const auto& t : a.args) ASSERT_TRUE(t.is_variable());
        auto [again, b2] = variables_replace_constants(d);
        ASSERT_EQ(again, d);
        ASSERT_TRUE(b2.entries.empty());
    }
}

TEST(Detach, TypedNaming) {
    Schema s;
    s.add_type("Person", {"William", "Susan"});
    s.add_type("Location", {"office", "garden"});
    VariableNaming naming{&s, {{"Person", "Per"}, {"Location", "Loc"}}, "Z", {}};
    Observation obs{atoms({"MoveTo(Susan, office)", "MoveTo(William, garden)"}), atoms({"Location(William, ?)"}), true};
    auto [d, b] = variables_replace_constants(obs, naming);
    EXPECT_EQ(rendered(d.inputs), (std::vector<std::string>{"MoveTo(Per2, Loc1)", "MoveTo(Per1, Loc2)"}));
}

TEST(Permutations, WindowCounts) {
    // grandparent(Bob, Peter) with Mary and Jane left over
    Observation obs{atoms({"parent(Bob, Mary)", "parent(Mary, Peter)", "parent(Bob, Jane)"}),
                    atoms({"grandparent(Bob, Peter)"}), true};
    auto [d, b] = variables_replace_constants(obs);
    std::vector<Atom> universe;
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j)
            universe.push_back(parse_atom("parent(Z" + std::to_string(i) + ", Z" + std::to_string(j) + ")"));
    const AtomIndex idx(universe);
    const auto ws = generate_variable_permutations(d.inputs, b, idx);
    ASSERT_EQ(ws.size(), 2u);
    EXPECT_FALSE(ws[0] == ws[1]);
    EXPECT_EQ(rendered(idx.decode(ws[0])), (std::vector<std::string>{"parent(Z1, Z3)", "parent(Z1, Z4)", "parent(Z3, Z2)"}));
    EXPECT_EQ(rendered(idx.decode(ws[1])), (std::vector<std::string>{"parent(Z1, Z3)", "parent(Z1, Z4)", "parent(Z4, Z2)"}));

    Observation none{atoms({"parent(Bob, Mary)"}), atoms({"child(Mary, Bob)"}), true};
    auto [d0, b0] = variables_replace_constants(none);
    EXPECT_EQ(generate_variable_permutations(d0.inputs, b0, idx).size(), 1u);
}

TEST(Permutations, FactorialAndCap) {
    for (std::size_t v = 0; v <= 5; ++v) {
        std::vector<Atom> facts;
        for (std::size_t i = 0; i < v; ++i) {
            facts.push_back(Atom::ground("p", {"c" + std::to_string(i)}));
        }
        auto [d, b] = variables_replace_constants({facts, {}, true});
        std::vector<Atom> universe;
        for (std::size_t i = 1; i <= std::max<std::size_t>(v, 1); ++i) universe.push_back(parse_atom("q(Z" + std::to_string(i) + ")"));
        for (std::size_t i = 1; i <= v; ++i) universe.push_back(parse_atom("p(Z" + std::to_string(i) + ")"));
        const auto ws = generate_variable_permutations(d.inputs, b, AtomIndex(universe));
        EXPECT_EQ(ws.size(), factorial(v));
    }
    std::vector<Atom> six;
    for (int i = 0; i < 6; ++i) six.push_back(Atom::ground("p", {"c" + std::to_string(i)}));
    auto [d, b] = variables_replace_constants({six, {}, true});
    EXPECT_THROW(generate_variable_permutations(d.inputs, b, AtomIndex(d.inputs)), std::invalid_argument);
}

TEST(Permutations, DistinctWhenCandidatesDistinct) {
    // v = 3 over a chain: all 6 windows differ
    Observation obs{atoms({"p(a, b)", "p(b, c)", "p(c, d)"}), atoms({"t(a)"}), true};
    auto [d, b] = variables_replace_constants(obs);
    std::vector<Atom> universe;
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j)
            universe.push_back(parse_atom("p(Z" + std::to_string(i) + ", Z" + std::to_string(j) + ")"));
    const auto ws = generate_variable_permutations(d.inputs, b, AtomIndex(universe));
    ASSERT_EQ(ws.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j) EXPECT_FALSE(ws[i] == ws[j]);
}

TEST(FeatureWidth, Examples) {
    EXPECT_EQ(feature_width({{6, 5}, 3, 2}, EncodingMode::Constants), 90u);
    EXPECT_EQ(feature_width({{6, 5}, 3, 2}, EncodingMode::Generalized), 27u);
    EXPECT_EQ(feature_width({{60, 50}, 3, 2}, EncodingMode::Generalized), 27u);
}

TEST(RelationalTraining, ConstantsModeEquivalence) {
    const auto o = check::constants_equivalence(400, 200, 5);
    EXPECT_TRUE(o.ok()) << o.first_failure;
}

TEST(RelationalTraining, NoFreeVariablesMatchesPlainGeneralized) {
    HyperParams p;
    p.clauses = 8;
    p.threshold = 4;
    p.negative_literals = false;
    std::vector<Atom> universe;
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
            universe.push_back(parse_atom("parent(Z" + std::to_string(i) + ", Z" + std::to_string(j) + ")"));
    const AtomIndex idx(universe);
    RelationalEncoder conv{idx, {}, true, true}, plain{idx, {}, true, false};
    Rng r1(3), r2(3), data(4);
    MulticlassMachine a({"false", "true"}, idx.size(), p, r1), b({"false", "true"}, idx.size(), p, r2);
    const std::vector<std::string> people{"Ann", "Bob"};
    for (int i = 0; i < 300; ++i) {
        const std::string x = people[data.below(2)], y = x == "Ann" ? "Bob" : "Ann";
        const bool forward = data.below(2);
        Observation obs{{forward ? Atom::ground("parent", {y, x}) : Atom::ground("parent", {x, y})},
                        {Atom::ground("child", {x, y})}, forward};
        relational_train_step(a, conv, obs, r1);
        relational_train_step(b, plain, obs, r2);
    }
    EXPECT_EQ(a, b);
}

TEST(RelationalTraining, LearnsChildFromParent) {
    HyperParams p;
    p.clauses = 20;
    p.threshold = 5;
    p.negative_literals = true; // "false" needs NOT parent(Z2, Z1)
    std::vector<Atom> universe;
    for (int i = 1; i <= 6; ++i)
        for (int j = 1; j <= 6; ++j)
            universe.push_back(parse_atom("parent(Z" + std::to_string(i) + ", Z" + std::to_string(j) + ")"));
    const AtomIndex idx(universe);
    const RelationalEncoder enc{idx, {}, true, true};
    const std::vector<std::string> people{"Ann", "Bob", "Cy", "Dee", "Eve", "Fay"};
    auto sample = [&](Rng& g) {
        Observation obs;
        const auto x = people[g.below(6)];
        auto y = people[g.below(6)];
        while (y == x) y = people[g.below(6)];
        const bool truth = g.below(2);
        obs.inputs.push_back(truth ? Atom::ground("parent", {y, x}) : Atom::ground("parent", {x, y}));
        for (std::size_t k = 0, n = g.below(2); k < n; ++k) {
            auto u = people[g.below(6)], w = people[g.below(6)];
            if (u != w && !(u == y && w == x) && !(u == x && w == y)) obs.inputs.push_back(Atom::ground("parent", {u, w}));
        }
        obs.targets.push_back(Atom::ground("child", {x, y}));
        obs.truth = truth || std::find(obs.inputs.begin(), obs.inputs.end(), Atom::ground("parent", {y, x})) != obs.inputs.end();
        return obs;
    };
    Rng r(7), g(8);
    MulticlassMachine m({"false", "true"}, idx.size(), p, r);
    for (int i = 0; i < 3000; ++i) relational_train_step(m, enc, sample(g), r);
    int correct = 0;
    for (int i = 0; i < 300; ++i) {
        const auto obs = sample(g);
        correct += (m.predict(enc.windows(obs)) == 1) == obs.truth;
    }
    EXPECT_EQ(correct, 300);
    const auto key = *idx.find(parse_atom("parent(Z2, Z1)"));
    bool found = false;
    for (std::size_t j = 0; j < m.bank(1).half(); ++j) found = found || m.bank(1).clause(j).includes(key);
    EXPECT_TRUE(found);
}

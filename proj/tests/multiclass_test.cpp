#include "invariants.hpp"

#include "rtm/model_io.hpp"
#include "rtm/multiclass.hpp"

#include <gtest/gtest.h>

using namespace rtm;

namespace {

struct AlwaysFire {
    double uniform() { return 0.0; }
    std::uint64_t below(std::uint64_t) { return 0; }
};

HyperParams small_params() {
    HyperParams p;
    p.clauses = 6;
    p.threshold = 3;
    p.states = 8;
    return p;
}

} // namespace

TEST(Multiclass, ArgmaxAndTies) {
    const int table4[] = {-44, -88, 51};
    EXPECT_EQ(argmax_vote(table4), 2u);
    const int table3[] = {-35, 49, -36, -106, -113};
    EXPECT_EQ(argmax_vote(table3), 1u);
    const int ties[] = {4, 4, 4};
    EXPECT_EQ(argmax_vote(ties), 0u);
    EXPECT_THROW(argmax_vote(std::span<const int>()), std::invalid_argument);
}

TEST(Multiclass, ArgmaxShiftInvariant) {
    Rng r(1);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<int> v(2 + r.below(5));
        for (auto& x : v) x = static_cast<int>(r.below(21)) - 10;
        auto w = v;
        const int shift = static_cast<int>(r.below(41)) - 20;
        for (auto& x : w) x += shift;
        ASSERT_EQ(argmax_vote(v), argmax_vote(w));
    }
}

TEST(Multiclass, NeedsTwoClasses) {
    Rng r(1);
    EXPECT_THROW(MulticlassMachine({"a"}, 3, small_params(), r), std::invalid_argument);
}

TEST(Multiclass, UnknownLabelAndClass) {
    Rng r(1);
    MulticlassMachine m({"a", "b", "c"}, 3, small_params(), r);
    EXPECT_EQ(m.label_index("b"), 1u);
    EXPECT_THROW(m.label_index("z"), std::invalid_argument);
    EXPECT_THROW(m.train_step(LiteralVector(3), 3, r), std::invalid_argument);
}

TEST(Multiclass, WidthMismatch) {
    Rng r(1);
    MulticlassMachine m({"a", "b"}, 3, small_params(), r);
    EXPECT_THROW(m.predict(LiteralVector(4)), std::invalid_argument);
}

TEST(Multiclass, TrainingTouchesTwoBanks) {
    Rng r(5);
    for (int trial = 0; trial < 300; ++trial) {
        MulticlassMachine m({"a", "b", "c", "d"}, 4, small_params(), r);
        const auto before = m;
        const std::size_t target = r.below(4);
        m.train_step(check::random_input(4, r), target, r);
        std::size_t changed = 0;
        for (std::size_t c = 0; c < 4; ++c)
            if (!(m.bank(c) == before.bank(c))) {
                ++changed;
                EXPECT_TRUE(c == target || changed <= 2);
            }
        ASSERT_LE(changed, 2u);
    }
}

TEST(Multiclass, TwoClassOtherBankIsDeterministic) {
    // With two classes no draw picks the negative bank: the random stream
    // consumed equals that of the two coupled binary updates.
    const auto p = small_params();
    Rng r1(9), r2(9);
    MulticlassMachine m({"no", "yes"}, 3, p, r1);
    TsetlinMachine a(3, p, r2), b(3, p, r2);
    Rng data(2);
    for (int i = 0; i < 200; ++i) {
        const auto x = check::random_input(3, data);
        const std::size_t target = data.below(2);
        m.train_step(x, target, r1);
        (target == 0 ? a : b).update(x, true, r2);
        (target == 0 ? b : a).update(x, false, r2);
    }
    EXPECT_EQ(m.bank(0), a);
    EXPECT_EQ(m.bank(1), b);
}

TEST(Multiclass, QuiescentWhenBothBanksAtTarget) {
    auto p = small_params();
    p.threshold = 3;
    MulticlassMachine m({"a", "b"}, 2, p);
    // bank 0 positives fire on x1, bank 1 negatives fire on x1; the other
    // halves hold NOT x1 so they stay silent (empty clauses fire in Learn mode)
    for (std::size_t j = 0; j < 3; ++j) {
        m.bank(0).clause(j).set_state(0, 9);
        m.bank(0).clause(3 + j).set_state(2, 9);
        m.bank(1).clause(j).set_state(2, 9);
        m.bank(1).clause(3 + j).set_state(0, 9);
    }
    const auto before = m;
    AlwaysFire rng;
    LiteralVector x(2);
    x.set_feature(0, true);
    m.train_step(x, 0, rng);
    EXPECT_EQ(m, before);
}

TEST(Multiclass, DeterministicTraining) {
    std::vector<EncodedSample> data;
    Rng d(4);
    for (int i = 0; i < 60; ++i) {
        auto x = check::random_input(4, d);
        data.push_back({WindowSet(x), static_cast<std::size_t>(x.feature(0) + 2 * x.feature(1)) % 3});
    }
    auto run = [&] {
        Rng rng(123);
        MulticlassMachine m({"a", "b", "c"}, 4, small_params(), rng);
        fit(m, std::span<const EncodedSample>(data), 5, rng);
        return m;
    };
    EXPECT_EQ(run(), run());
}

TEST(Metrics, PerfectAndAllWrong) {
    const std::size_t truth[] = {0, 1, 1, 0};
    const auto perfect = score(truth, truth, 2);
    EXPECT_DOUBLE_EQ(perfect.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(perfect.f_macro, 1.0);
    const std::size_t flipped[] = {1, 0, 0, 1};
    const auto wrong = score(truth, flipped, 2);
    EXPECT_DOUBLE_EQ(wrong.accuracy, 0.0);
    EXPECT_DOUBLE_EQ(wrong.f_macro, 0.0);
    EXPECT_THROW(score(std::span<const std::size_t>(), std::span<const std::size_t>(), 2), std::invalid_argument);
}

TEST(Metrics, MacroAgainstHandComputation) {
    // class 0: tp 2, fp 1, fn 0 -> F = 4/5; class 1: tp 1, fp 0, fn 1 -> F = 2/3;
    // class 2 absent from truth and predictions: skipped.
    const std::size_t truth[] = {0, 0, 1, 1};
    const std::size_t pred[] = {0, 0, 1, 0};
    const auto m = score(truth, pred, 3);
    EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
    EXPECT_NEAR(m.f_macro, (0.8 + 2.0 / 3.0) / 2, 1e-12);
    EXPECT_DOUBLE_EQ(m.f_micro, 0.75);
    EXPECT_EQ(m.confusion[1][0], 1u);
    for (std::size_t c = 0; c < 3; ++c) {
        std::size_t row = 0, support = 0;
        for (auto v : m.confusion[c]) row += v;
        for (auto t : truth) support += t == c;
        EXPECT_EQ(row, support);
    }
}

TEST(ModelIo, RoundTripIsLossless) {
    Rng r(3);
    auto p = small_params();
    p.specificity = 3.7;
    p.boost_true_positive = true;
    p.seed = 99;
    MulticlassMachine m({"office", "garden", "pantry"}, 5, p, r);
    std::vector<EncodedSample> data;
    for (int i = 0; i < 30; ++i) data.push_back({WindowSet(check::random_input(5, r)), r.below(3)});
    fit(m, std::span<const EncodedSample>(data), 3, r);
    const std::map<std::string, std::string> meta{{"task", "movement"}, {"note", "x=y"}};
    const auto text = to_model_text(m, meta);
    EXPECT_EQ(text.rfind("rtm-model v1\n", 0), 0u);
    const auto back = read_model_text(text);
    EXPECT_EQ(back.machine, m);
    EXPECT_EQ(back.meta, meta);
    EXPECT_EQ(to_model_text(back.machine, back.meta), text);
}

TEST(ModelIo, RejectsDamage) {
    Rng r(3);
    MulticlassMachine m({"a", "b"}, 2, small_params(), r);
    const auto text = to_model_text(m);
    EXPECT_THROW(read_model_text("rtm-model v2\n" + text.substr(13)), std::runtime_error);
    auto truncated = text.substr(0, text.rfind('+'));
    EXPECT_THROW(read_model_text(truncated), std::runtime_error);
    auto bad_state = text;
    bad_state.replace(bad_state.rfind(',') + 1, 1, "99");
    EXPECT_ANY_THROW(read_model_text(bad_state));
    EXPECT_THROW(to_model_text(m, {{"clauses", "1"}}), std::invalid_argument);
}

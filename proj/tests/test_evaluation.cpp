#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "regcore/evaluation.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace regcore;
using regcore::testing::random_label_set;

namespace {

using Sets = std::vector<LabelSet>;

void random_instance(Rng& rng, Sets& gold, Sets& pred) {
    gold.clear();
    pred.clear();
    auto n = 1 + uniform_index(rng, 40);
    for (std::uint64_t i = 0; i < n; ++i) {
        gold.push_back(random_label_set(rng, 3));
        pred.push_back(random_label_set(rng, 3));
    }
}

}  // namespace

TEST(MicroF1, HandCheck) {
    Sets gold{{Register::NA}, {Register::IN, Register::OP}};
    Sets pred{{Register::NA, Register::IP}, {Register::IN}};
    auto c = count_labels(gold, pred);
    EXPECT_EQ(c.tp, 2u);
    EXPECT_EQ(c.predicted, 3u);
    EXPECT_EQ(c.gold, 3u);
    EXPECT_NEAR(micro_f1(gold, pred), 0.6667, 1e-4);
    EXPECT_NEAR(micro_f1(gold, pred), 2.0 / 3.0, 1e-12);
}

TEST(MicroF1, EdgeCases) {
    Sets gold{{Register::NA}, {Register::SP}};
    EXPECT_DOUBLE_EQ(micro_f1(gold, gold), 1.0);
    EXPECT_DOUBLE_EQ(micro_f1(gold, Sets{{}, {}}), 0.0);
    EXPECT_DOUBLE_EQ(micro_f1(Sets{{}}, Sets{{}}), 1.0);
    EXPECT_THROW(micro_f1(gold, Sets{{}}), EvalError);
}

TEST(PerClass, Conventions) {
    auto r = per_class_f1(Sets{{Register::NA}}, Sets{{Register::NA}});
    EXPECT_DOUBLE_EQ(r[0].f1, 1.0);
    for (std::size_t l = 1; l < kNumRegisters; ++l) {
        EXPECT_EQ(r[l].support, 0u);
        EXPECT_FALSE(r[l].defined());
    }
    auto e = evaluate(Sets{{Register::NA}, {Register::IN}}, Sets{{Register::NA}, {}});
    EXPECT_DOUBLE_EQ(e.macro_f1, 0.5);
}

TEST(Confusion, Examples) {
    EXPECT_EQ(collapse_class(LabelSet{Register::NA, Register::OP}), kHybridClass);
    EXPECT_EQ(collapse_class(LabelSet{Register::IN}), 1u);
    EXPECT_EQ(collapse_class(LabelSet{}), kEmptyClass);
    EXPECT_EQ(confusion_class_name(kEmptyClass), "∅");

    auto m = confusion(Sets{{Register::NA}, {Register::NA}}, Sets{{Register::NA}, {Register::NA, Register::OP}});
    EXPECT_DOUBLE_EQ(m.proportions[0][0], 0.5);
    EXPECT_DOUBLE_EQ(m.proportions[0][kHybridClass], 0.5);

    auto ly = confusion(Sets{{Register::LY}}, Sets{{}});
    EXPECT_DOUBLE_EQ(ly.proportions[6][kEmptyClass], 1.0);

    Sets all{{Register::NA}, {Register::IN}, {Register::NA, Register::IN}, {}};
    auto id = confusion(all, all);
    for (std::size_t r = 0; r < kNumConfusionClasses; ++r) {
        for (std::size_t c = 0; c < kNumConfusionClasses; ++c) {
            if (r != c) EXPECT_EQ(id.counts[r][c], 0u);
        }
    }
}

TEST(MeanStd, SampleStandardDeviation) {
    auto m = mean_std({60, 62, 64});
    EXPECT_DOUBLE_EQ(m.mean, 62.0);
    EXPECT_DOUBLE_EQ(m.std, 2.0);
    EXPECT_DOUBLE_EQ(mean_std({5}).std, 0.0);
    EXPECT_DOUBLE_EQ(mean_std({0.3, 0.3, 0.3}).std, 0.0);
    EXPECT_THROW(mean_std({}), EvalError);
}

TEST(Aggregate, IdenticalReportsHaveZeroSpread) {
    auto r = evaluate(Sets{{Register::NA}, {Register::IN}}, Sets{{Register::NA}, {Register::OP}});
    auto agg = aggregate_runs({r, r, r});
    EXPECT_EQ(agg.runs, 3u);
    EXPECT_DOUBLE_EQ(agg.micro_f1.mean, r.micro_f1);
    EXPECT_DOUBLE_EQ(agg.micro_f1.std, 0.0);
    EXPECT_TRUE(agg.class_defined[2]);
    EXPECT_FALSE(agg.class_defined[7]);
    EXPECT_THROW(aggregate_runs({}), EvalError);
}

TEST(Reports, Formatting) {
    EXPECT_EQ(percent(0.640349), "64.03");
    auto r = evaluate(Sets{{Register::NA}}, Sets{{Register::NA}});
    std::ostringstream text, tsv, conf;
    write_report_text(text, r);
    write_report_tsv(tsv, r);
    write_confusion_tsv(conf, confusion(Sets{{Register::NA}}, Sets{{Register::NA}}));
    EXPECT_NE(text.str().find("100.00"), std::string::npos);
    EXPECT_NE(tsv.str().find("micro_f1"), std::string::npos);
    auto header = conf.str().substr(0, conf.str().find('\n'));
    EXPECT_NE(header.find("NA\tIN\tOP\tID\tHI\tIP\tLY\tSP\tHYB\t∅"), std::string::npos) << header;
}

TEST(MetricProperty, MatchesBruteForceOracle) {
    Rng rng(2024);
    Sets gold, pred;
    for (int trial = 0; trial < 1000; ++trial) {
        random_instance(rng, gold, pred);
        auto brute = regcore::testing::brute_count(gold, pred);
        ASSERT_EQ(micro_f1(gold, pred), regcore::testing::brute_micro_f1(brute));
        auto pc = per_class_f1(gold, pred);
        for (std::size_t l = 0; l < kNumRegisters; ++l) {
            ASSERT_EQ(static_cast<long>(pc[l].tp), brute.tp[l]);
            ASSERT_EQ(static_cast<long>(pc[l].predicted - pc[l].tp), brute.fp[l]);
            ASSERT_EQ(static_cast<long>(pc[l].support - pc[l].tp), brute.fn[l]);
            ASSERT_EQ(pc[l].f1, regcore::testing::brute_class_f1(brute, l));
        }
        auto m = confusion(gold, pred);
        auto bm = regcore::testing::brute_confusion(gold, pred);
        for (std::size_t r = 0; r < kNumConfusionClasses; ++r) {
            for (std::size_t c = 0; c < kNumConfusionClasses; ++c) ASSERT_EQ(static_cast<long>(m.counts[r][c]), bm[r][c]);
        }
    }
}

TEST(MetricProperty, SymmetryBoundsAndRowSums) {
    Rng rng(77);
    Sets gold, pred;
    for (int trial = 0; trial < 300; ++trial) {
        random_instance(rng, gold, pred);
        EXPECT_EQ(micro_f1(gold, pred), micro_f1(pred, gold));
        auto r = evaluate(gold, pred);
        std::size_t support = 0, gold_labels = 0;
        for (const auto& c : r.per_class) {
            support += c.support;
            for (double v : {c.precision, c.recall, c.f1}) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
        }
        for (const auto& g : gold) gold_labels += g.size();
        EXPECT_EQ(support, gold_labels);
        for (double v : {r.micro_f1, r.micro_precision, r.micro_recall, r.macro_f1}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }

        auto m = confusion(gold, pred);
        std::array<std::size_t, kNumConfusionClasses> observed{};
        for (const auto& g : gold) ++observed[collapse_class(g)];
        for (std::size_t row = 0; row < kNumConfusionClasses; ++row) {
            EXPECT_EQ(m.row_total(row), observed[row]);
            double sum = 0.0;
            for (double p : m.proportions[row]) sum += p;
            if (observed[row]) EXPECT_NEAR(sum, 1.0, 1e-9);
        }
    }
}

TEST(MetricProperty, PerClassEqualsRestrictedMicro) {
    Rng rng(5);
    Sets gold, pred;
    for (int trial = 0; trial < 200; ++trial) {
        random_instance(rng, gold, pred);
        auto pc = per_class_f1(gold, pred);
        for (std::size_t l = 0; l < kNumRegisters; ++l) {
            LabelSet only{kAllRegisters[l]};
            Sets g, p;
            for (std::size_t i = 0; i < gold.size(); ++i) {
                g.push_back(gold[i] & only);
                p.push_back(pred[i] & only);
            }
            if (pc[l].defined()) EXPECT_DOUBLE_EQ(pc[l].f1, micro_f1(g, p));
        }
    }
}

// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance            data-free criteria (always runnable)
//   acceptance --corpora  criteria that need the released corpora and aligned
//                         vectors under $REGCORE_DATA_ROOT; exits 77 (skipped)
//                         when they are not there

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "reference_values.hpp"
#include "regcore/cnn.hpp"
#include "regcore/config.hpp"
#include "regcore/corpus.hpp"
#include "regcore/dedup.hpp"
#include "regcore/evaluation.hpp"
#include "regcore/experiment.hpp"
#include "regcore/splits.hpp"
#include "regcore/text.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace regcore;
using namespace regcore::testing;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status;
    std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- gradients

Outcome gradient_correctness() {
    auto t0 = std::chrono::steady_clock::now();
    const std::size_t instances = 25;
    double worst = 0.0;
    std::string worst_where;
    for (std::uint64_t seed = 1; seed <= instances; ++seed) {
        Rng rng(seed * 7919);
        bool fixed = seed <= 5;
        std::size_t f = fixed ? 3 : 1 + uniform_index(rng, 5);
        std::size_t k = fixed ? 2 : 1 + uniform_index(rng, 3);
        std::size_t d = fixed ? 4 : 1 + uniform_index(rng, 5);
        std::size_t l = fixed ? 2 : 1 + uniform_index(rng, 8);
        auto table = random_table("fi", 12, d, seed);
        auto params = CnnParams::zeros(f, k, d, l);
        for (auto* t : params.tensors()) {
            for (auto& v : *t) v = uniform_real(rng, -0.5, 0.5);
        }
        auto docs = random_docs(rng, 1 + uniform_index(rng, 4), table.rows(), 1, 8);
        std::vector<LabelSet> gold;
        Matrix targets(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(l));
        for (std::size_t i = 0; i < docs.size(); ++i) {
            LabelSet s;
            for (std::size_t j = 0; j < l; ++j) {
                bool on = uniform_index(rng, 2) == 1;
                if (on) s.insert(kAllRegisters[j]);
                targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = on ? 1.0 : 0.0;
            }
            gold.push_back(s);
        }
        auto analytic = gradients(params, docs, targets, table).grad;
        auto numeric = finite_difference_gradient(params, docs, gold, table, 1e-4);
        auto a = analytic.tensors();
        auto n = numeric.tensors();
        for (std::size_t t = 0; t < a.size(); ++t) {
            double err = relative_error(*a[t], *n[t]);
            if (err > worst) {
                worst = err;
                worst_where = std::string(kTensorNames[t]) + " @ instance " + std::to_string(seed);
            }
        }
    }
    double elapsed = seconds_since(t0);
    return pass_if(worst < 1e-4 && elapsed < 60.0,
                   std::to_string(instances) + " instances, h=1e-4, max relative error " + fmt("%.2e", worst) +
                       (worst_where.empty() ? "" : " (" + worst_where + ")") + ", " + fmt("%.2f", elapsed) + " s");
}

// ---------------------------------------------------------------- metrics

Outcome metric_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(20240601);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<LabelSet> gold, pred;
        auto n = 1 + uniform_index(rng, 50);
        for (std::uint64_t i = 0; i < n; ++i) {
            gold.push_back(random_label_set(rng, 3));
            pred.push_back(random_label_set(rng, 3));
        }
        auto brute = brute_count(gold, pred);
        bool ok = micro_f1(gold, pred) == brute_micro_f1(brute);
        auto pc = per_class_f1(gold, pred);
        for (std::size_t l = 0; l < kNumRegisters; ++l) {
            ok = ok && static_cast<long>(pc[l].tp) == brute.tp[l] &&
                 static_cast<long>(pc[l].predicted - pc[l].tp) == brute.fp[l] &&
                 static_cast<long>(pc[l].support - pc[l].tp) == brute.fn[l] && pc[l].f1 == brute_class_f1(brute, l);
        }
        auto m = confusion(gold, pred);
        auto bm = brute_confusion(gold, pred);
        for (std::size_t r = 0; r < kNumConfusionClasses; ++r) {
            for (std::size_t c = 0; c < kNumConfusionClasses; ++c) ok = ok && static_cast<long>(m.counts[r][c]) == bm[r][c];
        }
        mismatches += !ok;
    }
    return pass_if(mismatches == 0, "1000 random instances (L=8, 0-3 labels), " + std::to_string(mismatches) +
                                        " mismatches, " + fmt("%.2f", seconds_since(t0)) + " s");
}

Outcome hand_check() {
    std::vector<LabelSet> gold{{Register::NA}, {Register::IN, Register::OP}};
    std::vector<LabelSet> pred{{Register::NA, Register::IP}, {Register::IN}};
    double f1 = micro_f1(gold, pred);
    double oracle = brute_micro_f1(brute_count(gold, pred));
    std::string shown = fmt("%.4f", f1);
    return pass_if(std::abs(f1 - oracle) <= 1e-9 && shown == "0.6667",
                   "micro-F1 " + fmt("%.10f", f1) + " vs brute-force " + fmt("%.10f", oracle) + ", shown as " + shown);
}

// ---------------------------------------------------------------- dedup

/// ~10k documents of ~100 tokens; every seventh is an exact copy and every
/// fifth a lightly edited copy of an earlier document.
Corpus dedup_workload(std::size_t n, std::uint64_t seed) {
    auto c = random_corpus("en", n, seed, 2, 40, 160, 20000);
    Rng rng(seed + 1);
    for (std::size_t i = 1; i < n; ++i) {
        const auto& src = c.documents[uniform_index(rng, i)].text;
        if (i % 7 == 0) {
            c.documents[i].text = src;
        } else if (i % 5 == 0) {
            std::string text;
            for (auto tok : whitespace_tokens(src)) {
                if (!text.empty()) text += ' ';
                text += uniform_index(rng, 25) == 0 ? random_word(rng, 20000) : std::string(tok);
            }
            c.documents[i].text = text;
        }
    }
    return c;
}

Outcome dedup_properties() {
    // Exact duplicates.
    auto small = random_corpus("en", 50, 3, 1, 20, 60);
    auto dup = small.documents[10];
    dup.id = "copy-of-10";
    small.documents.push_back(dup);
    auto r_small = deduplicate(small);
    bool exact_ok = r_small.removed.size() == 1 && r_small.removed[0].id == "copy-of-10" && r_small.removed[0].ratio == 1.0;

    auto corpus = dedup_workload(10000, 42);
    std::set<std::string> planted;
    for (std::size_t i = 7; i < corpus.size(); i += 7) planted.insert(corpus.documents[i].id);

    auto t0 = std::chrono::steady_clock::now();
    auto result = deduplicate(corpus);
    double elapsed = seconds_since(t0);

    std::size_t planted_removed = 0;
    for (const auto& rm : result.removed) planted_removed += planted.count(rm.id);
    bool planted_ok = planted_removed == planted.size();

    double worst = 0.0;
    for (double ratio : kept_overlap_audit(result.kept, 5)) worst = std::max(worst, ratio);
    bool audit_ok = worst < 0.7;

    auto again = deduplicate(corpus);
    bool same = again.kept == result.kept && again.removed.size() == result.removed.size();
    for (std::size_t i = 0; same && i < again.removed.size(); ++i) {
        same = again.removed[i].id == result.removed[i].id && again.removed[i].ratio == result.removed[i].ratio;
    }
    bool partition = result.kept.size() + result.removed.size() == corpus.size();

    return pass_if(exact_ok && planted_ok && audit_ok && same && partition && elapsed < 10.0,
                   "exact copies removed: " + std::string(exact_ok && planted_ok ? "yes" : "NO") +
                       " (" + std::to_string(planted_removed) + "/" + std::to_string(planted.size()) +
                       "); audit max kept overlap " + fmt("%.3f", worst) + " < 0.7; rerun identical: " +
                       (same ? "yes" : "NO") + "; 10000 docs in " + fmt("%.2f", elapsed) + " s (" +
                       std::to_string(result.removed.size()) + " removed)");
}

// ---------------------------------------------------------------- splits

/// Corpus whose label mix resembles the web-register corpora: skewed single
/// labels, a block of hybrids, some very rare registers.
Corpus register_like_corpus(std::size_t n, std::uint64_t seed) {
    static const std::array<double, kNumRegisters> weight = {28, 27, 7, 4, 3, 17, 0.3, 0.5};
    Rng rng(seed);
    auto draw = [&]() {
        double total = 0;
        for (double w : weight) total += w;
        double u = uniform_unit(rng) * total;
        for (std::size_t l = 0; l < kNumRegisters; ++l) {
            if ((u -= weight[l]) < 0) return kAllRegisters[l];
        }
        return kAllRegisters[kNumRegisters - 1];
    };
    Corpus c;
    c.language = "sv";
    for (std::size_t i = 0; i < n; ++i) {
        LabelSet s{draw()};
        if (uniform_unit(rng) < 0.14) s.insert(draw());
        if (uniform_unit(rng) < 0.01) s = LabelSet{};
        c.documents.push_back(make_document("sv-" + std::to_string(i + 1), s, "text"));
    }
    return c;
}

Outcome split_properties() {
    std::size_t corpora = 0, strata_checked = 0, labels_checked = 0;
    double worst_stratum = 0.0, worst_pp = 0.0;
    bool partition = true, determinism = true;
    for (std::size_t n : {1818, 2182, 2226, 5000}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            ++corpora;
            auto corpus = register_like_corpus(n, seed * 31 + n);
            auto a = stratified_split(corpus, SplitRatios{}, seed);
            auto b = stratified_split(corpus, SplitRatios{}, seed);
            determinism = determinism && a.part_of == b.part_of &&
                          stratified_split(corpus, SplitRatios{}, seed + 100).part_of != a.part_of;
            auto parts = apply_split(corpus, a);
            partition = partition && a.part_of.size() == corpus.size() &&
                        parts.train.size() + parts.dev.size() + parts.test.size() == corpus.size();

            std::map<std::string, std::array<double, 4>> strata;
            for (const auto& d : corpus.documents) {
                auto& s = strata[stratum_key(d)];
                s[3] += 1;
                s[static_cast<std::size_t>(a.part_of.at(d.id))] += 1;
            }
            for (const auto& [key, s] : strata) {
                ++strata_checked;
                for (std::size_t p = 0; p < 3; ++p) {
                    double target = s[3] * a.ratios.fraction(static_cast<Part>(p));
                    worst_stratum = std::max(worst_stratum, std::abs(s[p] - target));
                }
            }

            for (std::size_t l = 0; l < kNumRegisters; ++l) {
                auto freq = [&](const Corpus& c) {
                    double hits = 0;
                    for (const auto& d : c.documents) hits += d.labels.contains(kAllRegisters[l]);
                    return c.empty() ? 0.0 : 100.0 * hits / static_cast<double>(c.size());
                };
                double support = freq(corpus) * static_cast<double>(corpus.size()) / 100.0;
                if (support < 20) continue;
                ++labels_checked;
                for (const Corpus* part : {&parts.train, &parts.dev, &parts.test}) {
                    worst_pp = std::max(worst_pp, std::abs(freq(*part) - freq(corpus)));
                }
            }
        }
    }
    bool ok = partition && determinism && worst_stratum <= 1.0 && worst_pp <= 2.0;
    return pass_if(ok, std::to_string(corpora) + " corpora: partition " + (partition ? "ok" : "BROKEN") +
                           ", per-seed determinism " + (determinism ? "ok" : "BROKEN") + ", max stratum deviation " +
                           fmt("%.2f", worst_stratum) + " docs over " + std::to_string(strata_checked) +
                           " strata, max label-share drift " + fmt("%.2f", worst_pp) + " pp over " +
                           std::to_string(labels_checked) + " label checks");
}

// ---------------------------------------------------------------- CNN (data-free)

Outcome cnn_degraded() {
    SeparableOptions o;
    o.dim = 8;
    auto table = separable_table("fi", o, 1);
    auto corpus = separable_corpus("fi", o, 2);

    std::size_t memorized = 0, attempts = 0;
    for (LabelSet target : {LabelSet{Register::OP}, LabelSet{Register::NA, Register::HI}, LabelSet{Register::SP},
                            LabelSet{}}) {
        for (std::size_t doc = 0; doc < 3; ++doc) {
            ++attempts;
            LabeledData one = labeled(Corpus{"fi", {corpus.documents[doc]}}, table);
            one.labels[0] = target;
            CnnConfig cfg;
            cfg.filters = 16;
            cfg.embedding_dim = o.dim;
            cfg.learning_rate = 1e-2;
            cfg.max_epochs = 300;
            cfg.patience = 300;
            auto r = train(cfg, one, one, table);
            memorized += predict(r.params, one.docs, table, 0.5)[0] == target;
        }
    }

    auto parts = split_parts(corpus, 1);
    auto tr = labeled(parts.train, table), dv = labeled(parts.dev, table);
    std::size_t identical = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        CnnConfig cfg;
        cfg.filters = 16;
        cfg.embedding_dim = o.dim;
        cfg.learning_rate = 3e-2;
        cfg.max_epochs = 10;
        cfg.seed = seed;
        auto a = train(cfg, tr, dv, table);
        auto b = train(cfg, tr, dv, table);
        identical += a.history.train_loss == b.history.train_loss && a.history.dev_f1 == b.history.dev_f1 &&
                     a.params == b.params;
    }
    return pass_if(memorized == attempts && identical == 3,
                   "degraded (no corpora/vectors): memorized " + std::to_string(memorized) + "/" +
                       std::to_string(attempts) + " single documents, bit-identical reruns " +
                       std::to_string(identical) + "/3 seeds");
}

// ---------------------------------------------------------------- learning curve

Outcome learning_curve_harness() {
    SeparableOptions o;
    o.dim = 8;
    o.docs_per_register = 50;
    o.cue_words = 6;
    MemoryDataSource data;
    data.add("fi", split_parts(separable_corpus("fi", o, 11), 1), separable_table("fi", o, 1));
    auto train_size = data.corpus("fi", Part::Train).size();

    ExperimentSpec spec;
    spec.train_language = spec.eval_language = "fi";
    spec.config.filters = 16;
    spec.config.embedding_dim = o.dim;
    spec.config.learning_rate = 3e-2;
    spec.config.max_epochs = 25;
    spec.config.patience = 8;

    CurveSpec curve;
    curve.sizes = {train_size / 8, train_size / 4, train_size / 2, 3 * train_size / 4, train_size};
    curve.seeds_per_size = 6;
    auto r = learning_curve(curve, spec, data);

    std::size_t inversions = 0;
    bool inversions_small = true;
    std::string means;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        means += (i ? " " : "") + std::to_string(r.points[i].size) + ":" + fmt("%.3f", r.points[i].test_f1.mean);
        if (i == 0) continue;
        const auto& prev = r.points[i - 1].test_f1;
        const auto& cur = r.points[i].test_f1;
        if (cur.mean < prev.mean) {
            ++inversions;
            inversions_small = inversions_small && prev.mean - cur.mean <= std::max(prev.std, cur.std);
        }
    }

    spec.seeds = {1, 2, 3, 4, 5, 6};
    MemoryDataSource full_data;
    full_data.add("fi", split_parts(separable_corpus("fi", o, 11), 1), separable_table("fi", o, 1));
    auto full = run_experiment(spec, full_data);
    const auto& last = r.points.back().test_f1;
    double diff = std::abs(last.mean - full.test.micro_f1.mean);
    bool matches = diff <= std::max(last.std, full.test.micro_f1.std);

    bool ok = inversions <= 1 && inversions_small && matches && r.runs_executed == 30;
    return pass_if(ok, "mean test F1 by size [" + means + "], " + std::to_string(inversions) +
                           " inversion(s); full-train point " + fmt("%.4f", last.mean) + " vs full run " +
                           fmt("%.4f", full.test.micro_f1.mean) + " (|diff| " + fmt("%.4f", diff) + ", " +
                           std::to_string(r.runs_executed) + " runs)");
}

// ---------------------------------------------------------------- corpora

bool corpora_available(std::string& why) {
    const char* root = std::getenv(kDataRootEnv);
    if (!root || !*root) {
        why = std::string(kDataRootEnv) + " is not set";
        return false;
    }
    FileDataSource files;
    std::vector<std::string> langs{"fi", "fr", "sv"};
    try {
        files.check_available(langs, false);
    } catch (const std::exception& e) {
        why = e.what();
        return false;
    }
    return true;
}

Corpus whole_corpus(FileDataSource& data, const std::string& lang) {
    auto all = resolve_data_path(lang + "/all.tsv");
    if (fs::is_regular_file(all)) return read_corpus_file(all, lang);
    Corpus c;
    c.language = lang;
    for (Part p : {Part::Train, Part::Dev, Part::Test}) {
        auto part = data.corpus(lang, p);
        c.documents.insert(c.documents.end(), part.documents.begin(), part.documents.end());
    }
    return c;
}

Outcome corpus_statistics() {
    FileDataSource data;
    bool ok = true;
    std::string detail;
    std::size_t checked = 0;
    for (const auto& ref : acceptance::kCorpusReference) {
        auto p = data.paths_for(ref.language);
        if (!fs::is_regular_file(p.train) && !fs::is_regular_file(resolve_data_path(std::string(ref.language) + "/all.tsv"))) {
            detail += std::string(detail.empty() ? "" : "; ") + ref.language + ": not present";
            if (std::string(ref.language) != "en") ok = false;
            continue;
        }
        auto stats = corpus_stats(whole_corpus(data, ref.language));
        double worst = 0.0;
        for (std::size_t b = 0; b < kNumBuckets; ++b) {
            worst = std::max(worst, std::abs(100.0 * stats.buckets[b].proportion - ref.percent[b]));
        }
        bool lang_ok = stats.total == ref.total && worst <= acceptance::kProportionTolerancePp;
        ok = ok && lang_ok;
        ++checked;
        detail += std::string(detail.empty() ? "" : "; ") + ref.language + " total " + std::to_string(stats.total) +
                  "/" + std::to_string(ref.total) + ", max share gap " + fmt("%.2f", worst) + " pp";
    }
    return pass_if(ok && checked >= 3, detail);
}

Outcome cnn_reproduction_full() {
    const bool english = std::getenv("REGCORE_ACCEPT_ENGLISH") != nullptr;
    bool ok = true;
    std::string detail;
    auto note = [&](const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; };

    for (const auto& ref : acceptance::kMonolingualReference) {
        if (std::string(ref.train_language) == "en" && !english) {
            note("en skipped (set REGCORE_ACCEPT_ENGLISH=1)");
            continue;
        }
        FileDataSource data;
        ExperimentSpec spec;
        spec.train_language = spec.eval_language = ref.train_language;
        if (std::string(ref.train_language) != "en") spec.grid = GridSpec{};
        auto r = run_experiment(spec, data);
        double got = 100.0 * r.test.micro_f1.mean;
        bool lang_ok = std::abs(got - ref.test_f1) <= acceptance::kMonolingualTolerance;
        ok = ok && lang_ok;
        note(std::string(ref.train_language) + " " + fmt("%.2f", got) + " vs " + fmt("%.2f", ref.test_f1) +
             (lang_ok ? "" : " OUT"));
    }

    if (!english) {
        note("zero-shot skipped (needs English training; set REGCORE_ACCEPT_ENGLISH=1)");
    } else {
        // Train English once per seed, then score each target language.
        FileDataSource data;
        CnnConfig cfg;
        const auto& en_table = data.table("en", cfg.embedding_dim);
        auto tr = labeled(data.corpus("en", Part::Train), en_table, cfg.max_len);
        auto dv = labeled(data.corpus("en", Part::Dev), en_table, cfg.max_len);
        std::vector<CnnParams> models;
        for (std::uint64_t seed : {1, 2, 3}) {
            cfg.seed = seed;
            models.push_back(train(cfg, tr, dv, en_table).params);
        }
        data.audit().mark_training_done();
        for (const auto& ref : acceptance::kZeroShotReference) {
            const auto& table = data.table(ref.eval_language, cfg.embedding_dim);
            auto test = data.corpus(ref.eval_language, Part::Test);
            auto docs = encode_corpus(test, table, cfg.max_len);
            std::vector<LabelSet> gold;
            for (const auto& d : test.documents) gold.push_back(d.labels);
            std::vector<double> f1;
            for (const auto& m : models) f1.push_back(micro_f1(gold, predict(m, docs, table, cfg.threshold)));
            double got = 100.0 * mean_std(f1).mean;
            bool lang_ok = std::abs(got - ref.test_f1) <= acceptance::kZeroShotTolerance;
            ok = ok && lang_ok;
            note(std::string("en-") + ref.eval_language + " " + fmt("%.2f", got) + " vs " + fmt("%.2f", ref.test_f1) +
                 (lang_ok ? "" : " OUT"));
        }
    }
    return pass_if(ok, detail);
}

int report(const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria) {
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {Status::Fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
        std::printf("%s  %-22s %s\n", tag, name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failures += o.status == Status::Fail;
    }
    return failures;
}

}  // namespace

int main(int argc, char** argv) {
    bool corpora = argc > 1 && std::string(argv[1]) == "--corpora";
    if (!corpora) {
        int failures = report({
            {"gradient_correctness", gradient_correctness},
            {"metric_oracle", metric_oracle},
            {"hand_check", hand_check},
            {"dedup_properties", dedup_properties},
            {"split_properties", split_properties},
            {"corpus_statistics",
             [] {
                 return Outcome{Status::Skip, "needs the released corpora; run `acceptance --corpora`"};
             }},
            {"cnn_reproduction", cnn_degraded},
            {"learning_curve", learning_curve_harness},
        });
        return failures == 0 ? 0 : 1;
    }

    std::string why;
    if (!corpora_available(why)) {
        std::printf("SKIP  %-22s %s\n", "corpus_statistics", why.c_str());
        std::printf("SKIP  %-22s %s\n", "cnn_reproduction", why.c_str());
        return 77;
    }
    int failures = report({
        {"corpus_statistics", corpus_statistics},
        {"cnn_reproduction", cnn_reproduction_full},
    });
    return failures == 0 ? 0 : 1;
}

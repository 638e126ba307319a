// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tasks/corpus.hpp"

#include <cmath>
#include <stdexcept>

#include "tasks/functions.hpp"

namespace prunelab {

namespace {

void validate_mix(const CorpusMix& mix) {
    const double s = mix.facts + mix.icl + mix.qa_drill;
    if (mix.facts < 0 || mix.icl < 0 || mix.qa_drill < 0 || std::abs(s - 1.0) > 1e-9) {
        throw std::invalid_argument("render_corpus: mixture weights must be nonnegative and sum to 1");
    }
}

template <class T>
T pick(Rng& rng, const std::vector<T>& xs) {
    return xs[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(xs.size()) - 1))];
}

}  // namespace

Corpus render_corpus(const FactUniverse& universe, const Vocab& vocab, std::uint64_t seed,
                     const CorpusMix& mix, long long n_tokens, const CorpusParams& params) {
    validate_mix(mix);
    if (n_tokens <= 0) throw std::invalid_argument("render_corpus: n_tokens must be positive");
    if (universe.records.empty()) throw std::invalid_argument("render_corpus: empty universe");

    Rng rng(seed);
    Corpus out;
    out.tokens.reserve(static_cast<std::size_t>(n_tokens) + 1024);

    // Fixed cyclic order for fact sentences.
    std::vector<int> fact_order(universe.records.size());
    for (std::size_t i = 0; i < fact_order.size(); ++i) fact_order[i] = static_cast<int>(i);
    rng.shuffle(fact_order);
    std::vector<long long> fact_emits(universe.records.size(), 0);
    std::size_t fact_cursor = 0;

    const double weights[3] = {mix.facts, mix.icl, mix.qa_drill};
    long long cat_tokens[3] = {0, 0, 0};
    int cat_segments[3] = {0, 0, 0};

    const int newline = vocab.newline_id();

    auto emit = [&](int category, const std::string& segment_text) {
        std::vector<int> ids = vocab.encode(segment_text);
        out.tokens.insert(out.tokens.end(), ids.begin(), ids.end());
        out.tokens.push_back(newline);  // blank line separates segments
        cat_tokens[category] += static_cast<long long>(ids.size()) + 1;
        cat_segments[category] += 1;
    };

    while (static_cast<long long>(out.tokens.size()) < n_tokens) {
        // Deficit rule: the category whose emitted share lags its weight most.
        const long long total = cat_tokens[0] + cat_tokens[1] + cat_tokens[2] + 1;
        int cat = -1;
        double best = -1e300;
        for (int c = 0; c < 3; ++c) {
            if (weights[c] <= 0.0) continue;
            const double deficit = weights[c] - static_cast<double>(cat_tokens[c]) / static_cast<double>(total);
            if (deficit > best) {
                best = deficit;
                cat = c;
            }
        }
        if (cat == 0) {
            std::string seg;
            for (int i = 0; i < params.fact_sentences_per_segment; ++i) {
                const int fi = fact_order[fact_cursor];
                fact_cursor = (fact_cursor + 1) % fact_order.size();
                ++fact_emits[static_cast<std::size_t>(fi)];
                seg += render_fact_sentence(universe.records[static_cast<std::size_t>(fi)]);
                seg += "\n";
            }
            emit(0, seg);
        } else if (cat == 1) {
            const int d = pick(rng, params.icl_dims);
            const int n = pick(rng, params.icl_exemplar_counts);
            const int fam = rng.uniform_int(0, 2);
            TaskInstance task;
            if (fam == 0) task = gen_linear_task(rng, d, n);
            else if (fam == 1) task = gen_nn_task(rng, d, n);
            else task = gen_tree_task(rng, d, n);
            // The completed form: the prompt plus its gold continuation.
            emit(1, task.prompt + " " + label_string(task.function, task.gold_label) + "\n");
        } else {
            const double u = rng.uniform01();
            QAMode mode = QAMode::closed_book;
            if (u >= params.drill_closed && u < params.drill_closed + params.drill_open) {
                mode = QAMode::open_book;
            } else if (u >= params.drill_closed + params.drill_open) {
                mode = QAMode::override_book;
            }
            QAInstance qa = gen_qa_instance(universe, mode, rng);
            emit(2, qa.prompt + " " + qa.gold_answer + "\n");
        }
    }

    out.meta.tokens_total = static_cast<long long>(out.tokens.size());
    out.meta.tokens_facts = cat_tokens[0];
    out.meta.tokens_icl = cat_tokens[1];
    out.meta.tokens_drill = cat_tokens[2];
    out.meta.segments_facts = cat_segments[0];
    out.meta.segments_icl = cat_segments[1];
    out.meta.segments_drill = cat_segments[2];
    long long min_cov = mix.facts > 0.0 ? fact_emits[0] : 0;
    for (long long c : fact_emits) min_cov = std::min(min_cov, c);
    out.meta.fact_min_coverage = static_cast<int>(min_cov);
    out.meta.coverage_warning = mix.facts > 0.0 && min_cov == 0;
    return out;
}

}  // namespace prunelab

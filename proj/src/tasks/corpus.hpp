// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "tasks/facts.hpp"
#include "tasks/vocab.hpp"

namespace prunelab {

// Mixture weights over the three corpus categories. Must be nonnegative and
// sum to 1.
struct CorpusMix {
    double facts = 0.30;      // declarative fact sentences, cyclic over the universe
    double icl = 0.50;        // completed exemplar sequences from throwaway functions
    double qa_drill = 0.20;   // question-answer format drills over the fact universe
};

struct CorpusParams {
    std::vector<int> icl_dims = {4};
    std::vector<int> icl_exemplar_counts = {8, 16, 32};
    int fact_sentences_per_segment = 8;
    // Drill sub-mix: closed-book / open-book / overriding format.
    double drill_closed = 0.5;
    double drill_open = 0.25;
    double drill_override = 0.25;
};

struct CorpusMeta {
    long long tokens_total = 0;
    long long tokens_facts = 0;
    long long tokens_icl = 0;
    long long tokens_drill = 0;
    int segments_facts = 0;
    int segments_icl = 0;
    int segments_drill = 0;
    int fact_min_coverage = 0;   // minimum emission count over all facts
    bool coverage_warning = false;  // true when some fact never appeared
};

struct Corpus {
    std::vector<int> tokens;
    CorpusMeta meta;
};

// Renders a token stream of length >= n_tokens. Segments end with a newline
// and are separated by one blank line. Category scheduling is a
// deterministic greedy deficit rule, so realized token shares track the
// mixture weights to within one segment length.
Corpus render_corpus(const FactUniverse& universe, const Vocab& vocab, std::uint64_t seed,
                     const CorpusMix& mix, long long n_tokens,
                     const CorpusParams& params = CorpusParams{});

}  // namespace prunelab

// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "model/checkpoint.hpp"
#include "tasks/dataset.hpp"
#include "tasks/vocab.hpp"

namespace prunelab {

// Normalized string equality: truncate at the first newline, strip leading
// and trailing whitespace, then compare byte-for-byte. No case folding.
bool exact_match(std::string_view prediction, std::string_view gold);

struct EvalInstanceRecord {
    int index = 0;
    std::string prediction;
    std::string gold;
    bool correct = false;
    std::string context_free;          // empty when not computed
    bool matches_context_free = false;
};

struct EvalResult {
    double accuracy = 0.0;
    long long n_instances = 0;
    std::vector<EvalInstanceRecord> records;
};

struct EvalLimits {
    int max_new_tokens = 4;
};

// Greedy-decode every instance and average exact_match. Context overflow on
// any instance raises an error naming the task and instance index; nothing
// is skipped silently. with_context_free additionally computes the
// context-free answer per instance (ICL datasets only).
EvalResult eval_task(const Checkpoint& model, const Vocab& vocab, const Dataset& dataset,
                     const EvalLimits& limits = EvalLimits{}, bool with_context_free = false);

// The label whose rendering, scored as a continuation of the bare query line
// (no exemplars), has the highest total log-likelihood. Ties resolve to the
// earliest label in label_strings() order.
std::string context_free_answer(const Checkpoint& model, const Vocab& vocab,
                                const TaskInstance& task);

struct Agreement {
    double frac_context_free = 0.0;  // predictions equal to the context-free answer
    double frac_gold = 0.0;          // predictions equal to gold
};

Agreement agreement_analysis(const std::vector<EvalInstanceRecord>& records);

// Ordered (sparsity, accuracy) pairs including the dense point at 0.
struct AccuracyCurve {
    std::vector<std::pair<double, double>> points;
};

// Largest grid sparsity s such that every point up to and including s stays
// at or above (1 - rel_drop) * dense accuracy (contiguous-from-zero rule).
// No-result when the dense accuracy is zero.
std::optional<double> max_sparsity_within_drop(const AccuracyCurve& curve,
                                               double rel_drop = 0.05);

}  // namespace prunelab

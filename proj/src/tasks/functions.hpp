// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/mat.hpp"
#include "core/rng.hpp"

namespace prunelab {

enum class FunctionVariant { linear, two_layer_nn, decision_tree };

std::string function_variant_name(FunctionVariant v);

// The hidden classifier realized by one in-context-learning trial.
// Internal labels are 0..K-1; rendering maps binary labels to "-1"/"1".
struct FunctionSpec {
    FunctionVariant variant = FunctionVariant::linear;

    // linear: label 1 iff w . x + b >= 0
    std::vector<double> w;
    double b = 0.0;

    // two_layer_nn: label = argmax(w2 * relu(w1 * x)), ties toward 0
    Mat w1;  // d x d
    Mat w2;  // 2 x d

    // decision_tree: full depth-2 tree; node_index = {root, left, right};
    // leaf_labels left-to-right; negative coordinate goes left.
    std::array<int, 3> node_index{};
    std::array<int, 4> leaf_labels{};

    int dim() const;
    int n_labels() const { return variant == FunctionVariant::decision_tree ? 4 : 2; }
    int eval(std::span<const int> x) const;
};

struct Exemplar {
    std::vector<int> x;
    int label = 0;
};

struct TaskInstance {
    FunctionSpec function;
    std::vector<Exemplar> exemplars;
    std::vector<int> query;
    int gold_label = 0;
    std::string prompt;
};

// Rendered label for an internal label id, and the documented candidate
// order used for likelihood scoring and tie-breaking.
std::string label_string(const FunctionSpec& fn, int label);
std::vector<std::string> label_strings(const FunctionSpec& fn);

// Task generators. Exemplar labels are split exactly evenly across the K
// labels via rejection sampling; exemplar order is shuffled afterwards.
// Input coordinates are integers in [-10, 10]. The query is resampled until
// it differs from every exemplar input.
TaskInstance gen_linear_task(Rng& rng, int d, int n_exemplars);
TaskInstance gen_nn_task(Rng& rng, int d, int n_exemplars);
TaskInstance gen_tree_task(Rng& rng, int d, int n_exemplars);

TaskInstance gen_linear_task(std::uint64_t seed, int d, int n_exemplars);
TaskInstance gen_nn_task(std::uint64_t seed, int d, int n_exemplars);
TaskInstance gen_tree_task(std::uint64_t seed, int d, int n_exemplars);

// Fills exemplars/query/gold/prompt for an externally constructed function
// (used by tests that force specific weights).
void populate_task(TaskInstance& task, Rng& rng, int n_exemplars);

// Prompt grammar (see docs/prompt_grammar.md):
//   exemplar line:  "[a, b, c, d] = L"   joined by single newlines
//   query line:     "[q0, q1, q2, q3] ="  (no trailing label, no newline)
std::string render_vector(std::span<const int> x);
std::string render_query_line(std::span<const int> query);
std::string render_icl_prompt(const TaskInstance& task);

struct ParsedIclPrompt {
    std::vector<std::vector<int>> inputs;      // exemplar inputs, in order
    std::vector<std::string> labels;           // rendered exemplar labels
    std::vector<int> query;
};

// Strict parser for the prompt grammar; throws std::invalid_argument on any
// deviation. parse_icl_prompt expects an unlabeled final line;
// parse_icl_segment expects every line labeled and newline-terminated
// (the corpus form: a prompt completed with its gold label).
ParsedIclPrompt parse_icl_prompt(std::string_view text);
std::vector<std::pair<std::vector<int>, std::string>> parse_icl_segment(std::string_view text);

}  // namespace prunelab

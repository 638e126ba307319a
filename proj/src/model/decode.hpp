// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>

#include "model/checkpoint.hpp"
#include "model/transformer.hpp"
#include "tasks/vocab.hpp"

namespace prunelab {

// Argmax with ties broken toward the lowest index.
int argmax_lowest(const double* x, int n);

// Greedy decoding: repeatedly append the argmax token until a newline token
// or max_new_tokens. Returns only the completion (newline excluded). Throws
// when the sequence would exceed the context length.
std::string greedy_decode(const Checkpoint& model, const Vocab& vocab, std::string_view prompt,
                          int max_new_tokens, Activations* acts = nullptr);

// exp(mean next-token NLL). The corpus is split into non-overlapping windows
// of context_length tokens; within each window every position from 1 on is a
// target. A trailing window of fewer than 2 tokens is skipped.
double perplexity(const Checkpoint& model, std::span<const int> corpus);

// Sum over continuation tokens of log p(token | prefix, earlier continuation).
double continuation_logprob(const Checkpoint& model, std::span<const int> prefix,
                            std::span<const int> continuation, Activations* acts = nullptr);

}  // namespace prunelab

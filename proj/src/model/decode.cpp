// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "model/decode.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace prunelab {

int argmax_lowest(const double* x, int n) {
    int best = 0;
    for (int j = 1; j < n; ++j) {
        if (x[j] > x[best]) best = j;
    }
    return best;
}

std::string greedy_decode(const Checkpoint& model, const Vocab& vocab, std::string_view prompt,
                          int max_new_tokens, Activations* acts) {
    std::vector<int> tokens = vocab.encode(prompt);
    if (tokens.empty()) throw std::invalid_argument("greedy_decode: empty prompt");
    Activations local;
    Activations& a = acts != nullptr ? *acts : local;
    std::vector<int> completion;
    while (static_cast<int>(completion.size()) < max_new_tokens) {
        if (static_cast<int>(tokens.size()) > model.config.context_length) {
            throw std::invalid_argument(
                "greedy_decode: context overflow at " + std::to_string(tokens.size()) +
                " tokens (context length " + std::to_string(model.config.context_length) +
                "); prompt begins \"" + std::string(prompt.substr(0, 32)) + "\"");
        }
        forward_window(model, tokens, a);
        const int next = argmax_lowest(a.logits.row(static_cast<int>(tokens.size()) - 1),
                                       model.config.vocab_size);
        if (next == vocab.newline_id()) break;
        completion.push_back(next);
        tokens.push_back(next);
    }
    return vocab.decode(completion);
}

double perplexity(const Checkpoint& model, std::span<const int> corpus) {
    if (corpus.size() < 2) throw std::invalid_argument("perplexity: corpus must have >= 2 tokens");
    const int ctx = model.config.context_length;
    Activations acts;
    double nll_sum = 0.0;
    long long n_targets = 0;
    for (std::size_t start = 0; start + 1 < corpus.size(); start += static_cast<std::size_t>(ctx)) {
        const std::size_t len = std::min<std::size_t>(ctx, corpus.size() - start);
        if (len < 2) break;
        const std::span<const int> window = corpus.subspan(start, len);
        forward_window(model, window.subspan(0, len - 1), acts);
        // Targets are window positions 1..len-1.
        for (std::size_t p = 0; p + 1 < len; ++p) {
            const double* row = acts.logits.row(static_cast<int>(p));
            double maxl = row[0];
            for (int j = 1; j < model.config.vocab_size; ++j)
                if (row[j] > maxl) maxl = row[j];
            double denom = 0.0;
            for (int j = 0; j < model.config.vocab_size; ++j) denom += std::exp(row[j] - maxl);
            nll_sum += maxl + std::log(denom) - row[window[p + 1]];
            ++n_targets;
        }
    }
    return std::exp(nll_sum / static_cast<double>(n_targets));
}

double continuation_logprob(const Checkpoint& model, std::span<const int> prefix,
                            std::span<const int> continuation, Activations* acts) {
    if (prefix.empty() || continuation.empty()) {
        throw std::invalid_argument("continuation_logprob: empty prefix or continuation");
    }
    std::vector<int> seq(prefix.begin(), prefix.end());
    seq.insert(seq.end(), continuation.begin(), continuation.end());
    seq.pop_back();  // the last continuation token is never an input
    Activations local;
    Activations& a = acts != nullptr ? *acts : local;
    forward_window(model, seq, a);
    const int v = model.config.vocab_size;
    double total = 0.0;
    for (std::size_t i = 0; i < continuation.size(); ++i) {
        const double* row = a.logits.row(static_cast<int>(prefix.size() + i) - 1);
        double maxl = row[0];
        for (int j = 1; j < v; ++j)
            if (row[j] > maxl) maxl = row[j];
        double denom = 0.0;
        for (int j = 0; j < v; ++j) denom += std::exp(row[j] - maxl);
        total += row[continuation[i]] - (maxl + std::log(denom));
    }
    return total;
}

}  // namespace prunelab

// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "model/checkpoint.hpp"

namespace prunelab {

// Optimizer and batching settings. Defaults are the documented desk-scale
// recipe; everything is overridable from the experiment config.
struct TrainSettings {
    double lr = 3e-3;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double eps = 1e-8;
    double weight_decay = 0.01;   // decoupled, matrices only
    double grad_clip = 1.0;       // global L2 norm; <= 0 disables
    int warmup_steps = 200;       // linear warmup, then cosine decay
    double final_lr_frac = 0.1;
    int batch_windows = 8;
    int window = 896;             // target tokens per full window
    std::uint64_t data_seed = 1;
    int log_every = 0;            // optimizer steps between progress lines; 0 = silent
};

// Next-token cross-entropy training for exactly token_budget target tokens.
// Window start offsets are drawn with data_seed, so training is a pure
// function of (model, corpus, settings, token_budget). Throws on a
// non-finite loss with the failing step in the message.
Checkpoint train(Checkpoint model, std::span<const int> corpus, const TrainSettings& settings,
                 long long token_budget);

}  // namespace prunelab

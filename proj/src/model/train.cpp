// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "model/train.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "core/rng.hpp"
#include "model/transformer.hpp"

namespace prunelab {

Checkpoint train(Checkpoint model, std::span<const int> corpus, const TrainSettings& s,
                 long long token_budget) {
    if (token_budget <= 0) throw std::invalid_argument("train: token_budget must be positive");
    if (s.window < 1 || s.batch_windows < 1) {
        throw std::invalid_argument("train: window and batch_windows must be >= 1");
    }
    const int window = std::min(s.window, model.config.context_length);
    if (static_cast<long long>(corpus.size()) < window + 1) {
        throw std::invalid_argument("train: corpus shorter than one window");
    }

    const long long n_windows =
        (token_budget + window - 1) / window;  // last window may be short
    const long long total_steps = (n_windows + s.batch_windows - 1) / s.batch_windows;

    Rng data_rng(s.data_seed);
    Activations acts;
    Gradients grads = Gradients::like(model);
    Gradients m1 = Gradients::like(model);
    Gradients m2 = Gradients::like(model);

    long long remaining = token_budget;
    long long step = 0;
    double step_loss = 0.0;

    std::vector<int> win;
    while (remaining > 0) {
        ++step;
        grads.zero();
        int windows_in_batch = 0;
        double batch_loss = 0.0;
        for (int b = 0; b < s.batch_windows && remaining > 0; ++b) {
            const int tgt = static_cast<int>(std::min<long long>(window, remaining));
            const int start =
                data_rng.uniform_int(0, static_cast<int>(corpus.size()) - tgt - 1);
            win.assign(corpus.begin() + start, corpus.begin() + start + tgt + 1);
            batch_loss += forward_backward(model, win, acts, grads);
            remaining -= tgt;
            ++windows_in_batch;
        }
        batch_loss /= windows_in_batch;
        if (!std::isfinite(batch_loss)) {
            throw std::runtime_error("train: loss diverged (non-finite) at step " +
                                     std::to_string(step));
        }
        grads.scale(1.0 / windows_in_batch);

        if (s.grad_clip > 0.0) {
            const double norm = grads.l2_norm();
            if (norm > s.grad_clip) grads.scale(s.grad_clip / norm);
        }

        // Linear warmup then cosine decay to final_lr_frac * lr.
        double lr = s.lr;
        if (step <= s.warmup_steps) {
            lr = s.lr * static_cast<double>(step) / s.warmup_steps;
        } else if (total_steps > s.warmup_steps) {
            const double progress = static_cast<double>(step - s.warmup_steps) /
                                    static_cast<double>(total_steps - s.warmup_steps);
            const double c = 0.5 * (1.0 + std::cos(M_PI * std::min(1.0, progress)));
            lr = s.lr * (s.final_lr_frac + (1.0 - s.final_lr_frac) * c);
        }

        const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(step));
        for (std::size_t ti = 0; ti < model.tensors.size(); ++ti) {
            Tensor& t = model.tensors[ti].second;
            const bool decay = t.is_matrix();
            double* w = t.w.data();
            double* gp = grads.g[ti].data();
            double* m1p = m1.g[ti].data();
            double* m2p = m2.g[ti].data();
            const std::size_t n = t.w.size();
#pragma omp parallel for schedule(static)
            for (long long j = 0; j < static_cast<long long>(n); ++j) {
                const double g = gp[j];
                m1p[j] = s.beta1 * m1p[j] + (1.0 - s.beta1) * g;
                m2p[j] = s.beta2 * m2p[j] + (1.0 - s.beta2) * g * g;
                const double mhat = m1p[j] / bc1;
                const double vhat = m2p[j] / bc2;
                double upd = mhat / (std::sqrt(vhat) + s.eps);
                if (decay) upd += s.weight_decay * w[j];
                w[j] -= lr * upd;
            }
        }
        step_loss = batch_loss;
        if (s.log_every > 0 && (step % s.log_every == 0 || remaining <= 0)) {
            std::printf("step %lld/%lld  lr %.2e  loss %.4f\n", step, total_steps, lr, batch_loss);
            std::fflush(stdout);
        }
    }

    model.trained_tokens += token_budget;
    model.final_loss = step_loss;
    return model;
}

}  // namespace prunelab

// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "core/mat.hpp"
#include "model/checkpoint.hpp"

namespace prunelab {

// Gradient buffers laid out parallel to Checkpoint::tensors.
struct Gradients {
    std::vector<std::vector<double>> g;

    static Gradients like(const Checkpoint& model);
    void zero();
    void scale(double s);
    double l2_norm() const;
};

// Where a fully-connected layer reads its input from.
enum class CapturePoint { ln1_out, attn_concat, ln2_out, ffw_hidden };

struct CaptureRequest {
    int block = 0;
    CapturePoint point = CapturePoint::ln1_out;
};

// Maps an FC tensor name to its input capture point. Throws
// std::invalid_argument for tensors that are not fully-connected layers.
CaptureRequest capture_point_for(const Checkpoint& model, std::string_view layer_name);

struct CaptureSink {
    CaptureRequest what;
    Mat* x = nullptr;       // features x samples, filled column-wise
    long long col0 = 0;     // first column to write
};

// Reusable buffers for one window. resize() is cheap when already large enough.
struct Activations {
    int t = 0;
    struct Layer {
        std::vector<double> ln1_in, ln1_out, q, k, v, att, x_mid, ln2_out;
        std::vector<double> ln1_mean, ln1_rstd, ln2_mean, ln2_rstd;
        std::vector<double> fc1_out, gelu_out;
    };
    std::vector<Layer> layers;
    std::vector<double> final_in, final_out, final_mean, final_rstd;
    Mat logits;
    // scratch
    std::vector<double> probs, dscores;
    std::vector<double> tmp_td;
    std::vector<double> d_res, d_x_mid, d_att, dq, dk, dv, d_ln, d_tmp;
    std::vector<double> d_f1, d_f2;

    void resize(const ModelConfig& config, int t_new);
};

// Runs the forward pass over one window; logits land in acts.logits.
// When sink is non-null, the requested layer input is copied into sink->x
// and the pass stops early after the capture point.
void forward_window(const Checkpoint& model, std::span<const int> tokens, Activations& acts,
                    const CaptureSink* sink = nullptr);

// Convenience wrapper returning the logits.
Mat forward(const Checkpoint& model, std::span<const int> tokens);

// Forward + backward over a window: the first window.size()-1 tokens are
// inputs, tokens 1.. are targets. Returns the mean next-token NLL for this
// window and accumulates parameter gradients (does not zero them).
double forward_backward(const Checkpoint& model, std::span<const int> window, Activations& acts,
                        Gradients& grads);

// Layer input activations over a calibration set: column j of the result is
// the input vector to the named FC layer at one (sequence, position) sample.
Mat collect_activations(const Checkpoint& model, const std::vector<std::vector<int>>& calib,
                        std::string_view layer_name);

}  // namespace prunelab

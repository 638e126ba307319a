// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace prunelab {

struct ModelConfig {
    int n_layers = 3;
    int d_model = 80;
    int n_heads = 4;
    int ffw_multiplier = 4;
    int vocab_size = 0;
    int context_length = 896;
    std::uint64_t seed = 1;

    void validate() const;  // throws std::invalid_argument
    int head_dim() const { return d_model / n_heads; }
    int ffw_dim() const { return d_model * ffw_multiplier; }
    long long param_count() const;
};

enum class LayerKind : std::uint8_t { attention_fc = 0, ffw_fc = 1, embedding = 2, lm_head = 3, norm = 4 };

std::string layer_kind_name(LayerKind kind);

struct Tensor {
    LayerKind kind = LayerKind::norm;
    int rows = 0;
    int cols = 0;  // 0 for 1-D tensors
    std::vector<double> w;

    bool is_matrix() const { return cols > 0; }
    long long nelem() const { return static_cast<long long>(w.size()); }
};

// Named weight tensors in forward order, each tagged with a layer kind.
struct Checkpoint {
    ModelConfig config;
    long long trained_tokens = 0;
    double final_loss = 0.0;
    std::vector<std::pair<std::string, Tensor>> tensors;

    int index_of(std::string_view name) const;  // -1 when absent
    Tensor& tensor(std::string_view name);
    const Tensor& tensor(std::string_view name) const;
};

// Tensor naming scheme:
//   tok_emb, pos_emb,
//   blocks.<i>.ln1.{gain,bias}, blocks.<i>.attn.{wq,wk,wv,wo},
//   blocks.<i>.ln2.{gain,bias}, blocks.<i>.ffw.{fc1,fc2},
//   final_ln.{gain,bias}, lm_head
std::string block_tensor_name(int block, const char* suffix);

// Pre-norm causal transformer with learned positional embeddings and a GELU
// feed-forward block. Weight matrices are drawn N(0, 0.02) in tensor order
// (row-major within a tensor); norm gains are 1 and biases 0.
Checkpoint init_model(const ModelConfig& config);

struct LayerInfo {
    std::string name;
    LayerKind kind;
    int rows = 0;
    int cols = 0;
    long long params = 0;
};

std::vector<LayerInfo> layer_inventory(const Checkpoint& model);
long long total_params(const Checkpoint& model);
// Fraction of parameters tagged attention_fc or ffw_fc.
double fc_param_fraction(const Checkpoint& model);

// Binary container with little-endian IEEE-754 double payloads; see
// docs/formats.md. Round-trips byte-exactly.
void save_checkpoint(const Checkpoint& model, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace prunelab

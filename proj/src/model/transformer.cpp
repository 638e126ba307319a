// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "model/transformer.hpp"

#include <cstring>
#include <stdexcept>
#include <string>

#include "kernels/kernels.hpp"

namespace prunelab {

namespace k = kernels;

Gradients Gradients::like(const Checkpoint& model) {
    Gradients g;
    g.g.reserve(model.tensors.size());
    for (const auto& [name, t] : model.tensors) g.g.emplace_back(t.w.size(), 0.0);
    return g;
}

void Gradients::zero() {
    for (auto& v : g) std::memset(v.data(), 0, v.size() * sizeof(double));
}

void Gradients::scale(double s) {
    for (auto& v : g) {
        for (double& x : v) x *= s;
    }
}

double Gradients::l2_norm() const {
    double acc = 0.0;
    for (const auto& v : g) {
        for (double x : v) acc += x * x;
    }
    return std::sqrt(acc);
}

CaptureRequest capture_point_for(const Checkpoint& model, std::string_view layer_name) {
    const int idx = model.index_of(layer_name);
    if (idx < 0) throw std::invalid_argument("no tensor named " + std::string(layer_name));
    const Tensor& t = model.tensors[static_cast<std::size_t>(idx)].second;
    if (t.kind != LayerKind::attention_fc && t.kind != LayerKind::ffw_fc) {
        throw std::invalid_argument("not a fully-connected layer: " + std::string(layer_name));
    }
    // blocks.<i>.<rest>
    const std::string name(layer_name);
    const std::size_t dot1 = name.find('.');
    const std::size_t dot2 = name.find('.', dot1 + 1);
    CaptureRequest req;
    req.block = std::stoi(name.substr(dot1 + 1, dot2 - dot1 - 1));
    const std::string rest = name.substr(dot2 + 1);
    if (rest == "attn.wq" || rest == "attn.wk" || rest == "attn.wv") req.point = CapturePoint::ln1_out;
    else if (rest == "attn.wo") req.point = CapturePoint::attn_concat;
    else if (rest == "ffw.fc1") req.point = CapturePoint::ln2_out;
    else if (rest == "ffw.fc2") req.point = CapturePoint::ffw_hidden;
    else throw std::invalid_argument("unrecognized fc layer: " + name);
    return req;
}

void Activations::resize(const ModelConfig& config, int t_new) {
    t = t_new;
    const std::size_t td = static_cast<std::size_t>(t) * config.d_model;
    const std::size_t tf = static_cast<std::size_t>(t) * config.ffw_dim();
    const std::size_t tt = static_cast<std::size_t>(t) * t;
    layers.resize(static_cast<std::size_t>(config.n_layers));
    for (auto& l : layers) {
        l.ln1_in.resize(td);
        l.ln1_out.resize(td);
        l.q.resize(td);
        l.k.resize(td);
        l.v.resize(td);
        l.att.resize(td);
        l.x_mid.resize(td);
        l.ln2_out.resize(td);
        l.ln1_mean.resize(static_cast<std::size_t>(t));
        l.ln1_rstd.resize(static_cast<std::size_t>(t));
        l.ln2_mean.resize(static_cast<std::size_t>(t));
        l.ln2_rstd.resize(static_cast<std::size_t>(t));
        l.fc1_out.resize(tf);
        l.gelu_out.resize(tf);
    }
    final_in.resize(td);
    final_out.resize(td);
    final_mean.resize(static_cast<std::size_t>(t));
    final_rstd.resize(static_cast<std::size_t>(t));
    if (logits.rows < t || logits.cols != config.vocab_size) logits = Mat(t, config.vocab_size);
    probs.resize(tt);
    dscores.resize(tt);
    tmp_td.resize(td);
    d_res.resize(td);
    d_x_mid.resize(td);
    d_att.resize(td);
    dq.resize(td);
    dk.resize(td);
    dv.resize(td);
    d_ln.resize(td);
    d_tmp.resize(td);
    d_f1.resize(tf);
    d_f2.resize(tf);
}

namespace {

void embed_tokens(const Checkpoint& m, std::span<const int> tokens, double* x) {
    const int d = m.config.d_model;
    const Tensor& wte = m.tensor("tok_emb");
    const Tensor& wpe = m.tensor("pos_emb");
    const int t = static_cast<int>(tokens.size());
    for (int p = 0; p < t; ++p) {
        const int tok = tokens[static_cast<std::size_t>(p)];
        if (tok < 0 || tok >= m.config.vocab_size) {
            throw std::invalid_argument("token id out of range: " + std::to_string(tok));
        }
        const double* te = wte.w.data() + static_cast<std::size_t>(tok) * d;
        const double* pe = wpe.w.data() + static_cast<std::size_t>(p) * d;
        double* out = x + static_cast<std::size_t>(p) * d;
        for (int i = 0; i < d; ++i) out[i] = te[i] + pe[i];
    }
}

// Copies a [t x features] activation buffer into sink->x columns.
void capture_to_sink(const double* act, int t, int features, const CaptureSink& sink) {
    Mat& x = *sink.x;
    for (int p = 0; p < t; ++p) {
        const double* row = act + static_cast<std::size_t>(p) * features;
        const long long col = sink.col0 + p;
        for (int i = 0; i < features; ++i) x(i, static_cast<int>(col)) = row[i];
    }
}

}  // namespace

void forward_window(const Checkpoint& m, std::span<const int> tokens, Activations& acts,
                    const CaptureSink* sink) {
    const ModelConfig& cfg = m.config;
    const int t = static_cast<int>(tokens.size());
    if (t == 0) throw std::invalid_argument("forward: empty token sequence");
    if (t > cfg.context_length) {
        throw std::invalid_argument("forward: sequence length " + std::to_string(t) +
                                    " exceeds context length " +
                                    std::to_string(cfg.context_length));
    }
    acts.resize(cfg, t);
    const int d = cfg.d_model;
    const int f = cfg.ffw_dim();

    embed_tokens(m, tokens, acts.layers[0].ln1_in.data());

    for (int i = 0; i < cfg.n_layers; ++i) {
        Activations::Layer& L = acts.layers[static_cast<std::size_t>(i)];
        const Tensor& ln1g = m.tensor(block_tensor_name(i, "ln1.gain"));
        const Tensor& ln1b = m.tensor(block_tensor_name(i, "ln1.bias"));
        const Tensor& wq = m.tensor(block_tensor_name(i, "attn.wq"));
        const Tensor& wk = m.tensor(block_tensor_name(i, "attn.wk"));
        const Tensor& wv = m.tensor(block_tensor_name(i, "attn.wv"));
        const Tensor& wo = m.tensor(block_tensor_name(i, "attn.wo"));
        const Tensor& ln2g = m.tensor(block_tensor_name(i, "ln2.gain"));
        const Tensor& ln2b = m.tensor(block_tensor_name(i, "ln2.bias"));
        const Tensor& fc1 = m.tensor(block_tensor_name(i, "ffw.fc1"));
        const Tensor& fc2 = m.tensor(block_tensor_name(i, "ffw.fc2"));

        k::layernorm_fwd(L.ln1_in.data(), ln1g.w.data(), ln1b.w.data(), L.ln1_out.data(),
                         L.ln1_mean.data(), L.ln1_rstd.data(), t, d);
        if (sink != nullptr && sink->what.block == i && sink->what.point == CapturePoint::ln1_out) {
            capture_to_sink(L.ln1_out.data(), t, d, *sink);
            return;
        }
        k::matmul_nt(L.ln1_out.data(), wq.w.data(), L.q.data(), t, d, d);
        k::matmul_nt(L.ln1_out.data(), wk.w.data(), L.k.data(), t, d, d);
        k::matmul_nt(L.ln1_out.data(), wv.w.data(), L.v.data(), t, d, d);
        k::attention_fwd(L.q.data(), L.k.data(), L.v.data(), L.att.data(), t, cfg.n_heads,
                         cfg.head_dim(), acts.probs.data());
        if (sink != nullptr && sink->what.block == i &&
            sink->what.point == CapturePoint::attn_concat) {
            capture_to_sink(L.att.data(), t, d, *sink);
            return;
        }
        k::matmul_nt(L.att.data(), wo.w.data(), acts.tmp_td.data(), t, d, d);
        for (std::size_t j = 0; j < L.x_mid.size(); ++j) L.x_mid[j] = L.ln1_in[j] + acts.tmp_td[j];

        k::layernorm_fwd(L.x_mid.data(), ln2g.w.data(), ln2b.w.data(), L.ln2_out.data(),
                         L.ln2_mean.data(), L.ln2_rstd.data(), t, d);
        if (sink != nullptr && sink->what.block == i && sink->what.point == CapturePoint::ln2_out) {
            capture_to_sink(L.ln2_out.data(), t, d, *sink);
            return;
        }
        k::matmul_nt(L.ln2_out.data(), fc1.w.data(), L.fc1_out.data(), t, d, f);
        k::gelu_fwd(L.fc1_out.data(), L.gelu_out.data(), static_cast<long long>(t) * f);
        if (sink != nullptr && sink->what.block == i &&
            sink->what.point == CapturePoint::ffw_hidden) {
            capture_to_sink(L.gelu_out.data(), t, f, *sink);
            return;
        }
        double* next = (i + 1 < cfg.n_layers) ? acts.layers[static_cast<std::size_t>(i) + 1].ln1_in.data()
                                              : acts.final_in.data();
        k::matmul_nt(L.gelu_out.data(), fc2.w.data(), next, t, f, d);
        for (std::size_t j = 0; j < L.x_mid.size(); ++j) next[j] += L.x_mid[j];
    }

    const Tensor& fln_g = m.tensor("final_ln.gain");
    const Tensor& fln_b = m.tensor("final_ln.bias");
    const Tensor& head = m.tensor("lm_head");
    k::layernorm_fwd(acts.final_in.data(), fln_g.w.data(), fln_b.w.data(), acts.final_out.data(),
                     acts.final_mean.data(), acts.final_rstd.data(), t, d);
    k::matmul_nt(acts.final_out.data(), head.w.data(), acts.logits.data(), t, d,
                 cfg.vocab_size);
}

Mat forward(const Checkpoint& model, std::span<const int> tokens) {
    Activations acts;
    forward_window(model, tokens, acts);
    Mat out(static_cast<int>(tokens.size()), model.config.vocab_size);
    std::memcpy(out.data(), acts.logits.data(), out.size() * sizeof(double));
    return out;
}

double forward_backward(const Checkpoint& m, std::span<const int> window, Activations& acts,
                        Gradients& grads) {
    if (window.size() < 2) throw std::invalid_argument("forward_backward: window too short");
    const ModelConfig& cfg = m.config;
    const int t = static_cast<int>(window.size()) - 1;
    const int d = cfg.d_model;
    const int f = cfg.ffw_dim();
    const int v = cfg.vocab_size;

    forward_window(m, window.subspan(0, static_cast<std::size_t>(t)), acts);

    std::vector<int> targets(window.begin() + 1, window.end());
    // dlogits overwrites acts.logits in place.
    Mat& logits = acts.logits;
    const double loss =
        k::softmax_xent(logits.data(), targets.data(), t, v, logits.data(), 1.0 / t) / t;

    auto g = [&](const char* name) -> double* {
        return grads.g[static_cast<std::size_t>(m.index_of(name))].data();
    };
    auto gb = [&](int i, const char* suffix) -> double* {
        return grads.g[static_cast<std::size_t>(m.index_of(block_tensor_name(i, suffix)))].data();
    };

    // lm head and final norm
    const Tensor& head = m.tensor("lm_head");
    k::matmul_tn_acc(logits.data(), acts.final_out.data(), g("lm_head"), t, v, d);
    k::matmul_nn(logits.data(), head.w.data(), acts.tmp_td.data(), t, v, d);
    const Tensor& fln_g = m.tensor("final_ln.gain");
    k::layernorm_bwd(acts.final_in.data(), fln_g.w.data(), acts.final_mean.data(),
                     acts.final_rstd.data(), acts.tmp_td.data(), acts.d_res.data(),
                     g("final_ln.gain"), g("final_ln.bias"), t, d);

    for (int i = cfg.n_layers - 1; i >= 0; --i) {
        Activations::Layer& L = acts.layers[static_cast<std::size_t>(i)];
        const Tensor& wq = m.tensor(block_tensor_name(i, "attn.wq"));
        const Tensor& wk = m.tensor(block_tensor_name(i, "attn.wk"));
        const Tensor& wv = m.tensor(block_tensor_name(i, "attn.wv"));
        const Tensor& wo = m.tensor(block_tensor_name(i, "attn.wo"));
        const Tensor& ln1g = m.tensor(block_tensor_name(i, "ln1.gain"));
        const Tensor& ln2g = m.tensor(block_tensor_name(i, "ln2.gain"));
        const Tensor& fc1 = m.tensor(block_tensor_name(i, "ffw.fc1"));
        const Tensor& fc2 = m.tensor(block_tensor_name(i, "ffw.fc2"));

        // d_res holds the gradient w.r.t. this block's output.
        // ffw path: out = x_mid + fc2(gelu(fc1(ln2(x_mid))))
        k::matmul_tn_acc(acts.d_res.data(), L.gelu_out.data(), gb(i, "ffw.fc2"), t, d, f);
        k::matmul_nn(acts.d_res.data(), fc2.w.data(), acts.d_f1.data(), t, d, f);
        k::gelu_bwd(L.fc1_out.data(), acts.d_f1.data(), acts.d_f2.data(),
                    static_cast<long long>(t) * f);
        k::matmul_tn_acc(acts.d_f2.data(), L.ln2_out.data(), gb(i, "ffw.fc1"), t, f, d);
        k::matmul_nn(acts.d_f2.data(), fc1.w.data(), acts.d_ln.data(), t, f, d);
        k::layernorm_bwd(L.x_mid.data(), ln2g.w.data(), L.ln2_mean.data(), L.ln2_rstd.data(),
                         acts.d_ln.data(), acts.d_x_mid.data(), gb(i, "ln2.gain"),
                         gb(i, "ln2.bias"), t, d);
        for (std::size_t j = 0; j < acts.d_x_mid.size(); ++j) acts.d_x_mid[j] += acts.d_res[j];

        // attention path: x_mid = ln1_in + wo(att)
        k::matmul_tn_acc(acts.d_x_mid.data(), L.att.data(), gb(i, "attn.wo"), t, d, d);
        k::matmul_nn(acts.d_x_mid.data(), wo.w.data(), acts.d_att.data(), t, d, d);
        k::attention_bwd(L.q.data(), L.k.data(), L.v.data(), acts.d_att.data(), acts.dq.data(),
                         acts.dk.data(), acts.dv.data(), t, cfg.n_heads, cfg.head_dim(),
                         acts.probs.data(), acts.dscores.data());
        k::matmul_tn_acc(acts.dq.data(), L.ln1_out.data(), gb(i, "attn.wq"), t, d, d);
        k::matmul_tn_acc(acts.dk.data(), L.ln1_out.data(), gb(i, "attn.wk"), t, d, d);
        k::matmul_tn_acc(acts.dv.data(), L.ln1_out.data(), gb(i, "attn.wv"), t, d, d);
        k::matmul_nn(acts.dq.data(), wq.w.data(), acts.d_ln.data(), t, d, d);
        k::matmul_nn(acts.dk.data(), wk.w.data(), acts.d_tmp.data(), t, d, d);
        for (std::size_t j = 0; j < acts.d_ln.size(); ++j) acts.d_ln[j] += acts.d_tmp[j];
        k::matmul_nn(acts.dv.data(), wv.w.data(), acts.d_tmp.data(), t, d, d);
        for (std::size_t j = 0; j < acts.d_ln.size(); ++j) acts.d_ln[j] += acts.d_tmp[j];
        k::layernorm_bwd(L.ln1_in.data(), ln1g.w.data(), L.ln1_mean.data(), L.ln1_rstd.data(),
                         acts.d_ln.data(), acts.d_res.data(), gb(i, "ln1.gain"), gb(i, "ln1.bias"),
                         t, d);
        for (std::size_t j = 0; j < acts.d_res.size(); ++j) acts.d_res[j] += acts.d_x_mid[j];
    }

    // embeddings: d_res is the gradient w.r.t. tok_emb[token] + pos_emb[pos].
    double* d_wte = g("tok_emb");
    double* d_wpe = g("pos_emb");
    for (int p = 0; p < t; ++p) {
        const int tok = window[static_cast<std::size_t>(p)];
        const double* src = acts.d_res.data() + static_cast<std::size_t>(p) * d;
        double* te = d_wte + static_cast<std::size_t>(tok) * d;
        double* pe = d_wpe + static_cast<std::size_t>(p) * d;
        for (int j = 0; j < d; ++j) {
            te[j] += src[j];
            pe[j] += src[j];
        }
    }
    return loss;
}

Mat collect_activations(const Checkpoint& model, const std::vector<std::vector<int>>& calib,
                        std::string_view layer_name) {
    if (calib.empty()) throw std::invalid_argument("collect_activations: empty calibration set");
    const CaptureRequest req = capture_point_for(model, layer_name);
    const Tensor& t = model.tensor(layer_name);
    const int features = t.cols;
    long long total = 0;
    for (const auto& seq : calib) total += static_cast<long long>(seq.size());
    Mat x(features, static_cast<int>(total));
    Activations acts;
    CaptureSink sink;
    sink.what = req;
    sink.x = &x;
    sink.col0 = 0;
    for (const auto& seq : calib) {
        forward_window(model, seq, acts, &sink);
        sink.col0 += static_cast<long long>(seq.size());
    }
    return x;
}

}  // namespace prunelab

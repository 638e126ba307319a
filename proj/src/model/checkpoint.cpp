// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "model/checkpoint.hpp"

#include <cstring>
#include <stdexcept>

#include "core/io.hpp"
#include "core/rng.hpp"

namespace prunelab {

void ModelConfig::validate() const {
    if (n_layers < 1) throw std::invalid_argument("ModelConfig: n_layers must be >= 1");
    if (d_model < 1) throw std::invalid_argument("ModelConfig: d_model must be >= 1");
    if (n_heads < 1) throw std::invalid_argument("ModelConfig: n_heads must be >= 1");
    if (d_model % n_heads != 0)
        throw std::invalid_argument("ModelConfig: d_model must be divisible by n_heads");
    if (ffw_multiplier < 1) throw std::invalid_argument("ModelConfig: ffw_multiplier must be >= 1");
    if (vocab_size < 2) throw std::invalid_argument("ModelConfig: vocab_size must be >= 2");
    if (context_length < 2) throw std::invalid_argument("ModelConfig: context_length must be >= 2");
}

long long ModelConfig::param_count() const {
    const long long d = d_model;
    const long long per_layer = 4 * d /*norms*/ + 4 * d * d /*attention*/ +
                                2 * static_cast<long long>(ffw_dim()) * d /*ffw*/;
    return static_cast<long long>(vocab_size) * d /*tok_emb*/ +
           static_cast<long long>(context_length) * d /*pos_emb*/ + n_layers * per_layer +
           2 * d /*final norm*/ + static_cast<long long>(vocab_size) * d /*lm_head*/;
}

std::string layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::attention_fc: return "attention_fc";
        case LayerKind::ffw_fc: return "ffw_fc";
        case LayerKind::embedding: return "embedding";
        case LayerKind::lm_head: return "lm_head";
        case LayerKind::norm: return "norm";
    }
    return "?";
}

int Checkpoint::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        if (tensors[i].first == name) return static_cast<int>(i);
    }
    return -1;
}

Tensor& Checkpoint::tensor(std::string_view name) {
    const int i = index_of(name);
    if (i < 0) throw std::invalid_argument("checkpoint: no tensor named " + std::string(name));
    return tensors[static_cast<std::size_t>(i)].second;
}

const Tensor& Checkpoint::tensor(std::string_view name) const {
    const int i = index_of(name);
    if (i < 0) throw std::invalid_argument("checkpoint: no tensor named " + std::string(name));
    return tensors[static_cast<std::size_t>(i)].second;
}

std::string block_tensor_name(int block, const char* suffix) {
    return "blocks." + std::to_string(block) + "." + suffix;
}

namespace {

Tensor make_tensor(LayerKind kind, int rows, int cols) {
    Tensor t;
    t.kind = kind;
    t.rows = rows;
    t.cols = cols;
    t.w.assign(static_cast<std::size_t>(rows) * (cols > 0 ? cols : 1), 0.0);
    return t;
}

constexpr double kInitStd = 0.02;

}  // namespace

Checkpoint init_model(const ModelConfig& config) {
    config.validate();
    Checkpoint m;
    m.config = config;
    const int d = config.d_model;
    const int f = config.ffw_dim();
    const int v = config.vocab_size;

    auto push = [&m](const std::string& name, Tensor t) {
        m.tensors.emplace_back(name, std::move(t));
    };

    push("tok_emb", make_tensor(LayerKind::embedding, v, d));
    push("pos_emb", make_tensor(LayerKind::embedding, config.context_length, d));
    for (int i = 0; i < config.n_layers; ++i) {
        push(block_tensor_name(i, "ln1.gain"), make_tensor(LayerKind::norm, d, 0));
        push(block_tensor_name(i, "ln1.bias"), make_tensor(LayerKind::norm, d, 0));
        push(block_tensor_name(i, "attn.wq"), make_tensor(LayerKind::attention_fc, d, d));
        push(block_tensor_name(i, "attn.wk"), make_tensor(LayerKind::attention_fc, d, d));
        push(block_tensor_name(i, "attn.wv"), make_tensor(LayerKind::attention_fc, d, d));
        push(block_tensor_name(i, "attn.wo"), make_tensor(LayerKind::attention_fc, d, d));
        push(block_tensor_name(i, "ln2.gain"), make_tensor(LayerKind::norm, d, 0));
        push(block_tensor_name(i, "ln2.bias"), make_tensor(LayerKind::norm, d, 0));
        push(block_tensor_name(i, "ffw.fc1"), make_tensor(LayerKind::ffw_fc, f, d));
        push(block_tensor_name(i, "ffw.fc2"), make_tensor(LayerKind::ffw_fc, d, f));
    }
    push("final_ln.gain", make_tensor(LayerKind::norm, d, 0));
    push("final_ln.bias", make_tensor(LayerKind::norm, d, 0));
    push("lm_head", make_tensor(LayerKind::lm_head, v, d));

    Rng rng(config.seed);
    for (auto& [name, t] : m.tensors) {
        if (t.kind == LayerKind::norm) {
            const bool is_gain = name.size() >= 4 && name.substr(name.size() - 4) == "gain";
            for (double& x : t.w) x = is_gain ? 1.0 : 0.0;
        } else {
            for (double& x : t.w) x = rng.normal(0.0, kInitStd);
        }
    }
    return m;
}

std::vector<LayerInfo> layer_inventory(const Checkpoint& model) {
    std::vector<LayerInfo> out;
    out.reserve(model.tensors.size());
    for (const auto& [name, t] : model.tensors) {
        out.push_back(LayerInfo{name, t.kind, t.rows, t.cols, t.nelem()});
    }
    return out;
}

long long total_params(const Checkpoint& model) {
    long long n = 0;
    for (const auto& [name, t] : model.tensors) n += t.nelem();
    return n;
}

double fc_param_fraction(const Checkpoint& model) {
    long long fc = 0, all = 0;
    for (const auto& [name, t] : model.tensors) {
        all += t.nelem();
        if (t.kind == LayerKind::attention_fc || t.kind == LayerKind::ffw_fc) fc += t.nelem();
    }
    return all == 0 ? 0.0 : static_cast<double>(fc) / static_cast<double>(all);
}

namespace {

constexpr char kMagic[4] = {'P', 'L', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::string& buf, const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    buf.append(p, sizeof(T));
}

template <class T>
T get(const std::vector<std::uint8_t>& buf, std::size_t& off) {
    if (off + sizeof(T) > buf.size()) throw std::runtime_error("checkpoint file truncated");
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& model, const std::string& path) {
    std::string buf;
    buf.append(kMagic, 4);
    put(buf, kVersion);
    put(buf, static_cast<std::int64_t>(model.config.n_layers));
    put(buf, static_cast<std::int64_t>(model.config.d_model));
    put(buf, static_cast<std::int64_t>(model.config.n_heads));
    put(buf, static_cast<std::int64_t>(model.config.ffw_multiplier));
    put(buf, static_cast<std::int64_t>(model.config.vocab_size));
    put(buf, static_cast<std::int64_t>(model.config.context_length));
    put(buf, static_cast<std::int64_t>(model.config.seed));
    put(buf, static_cast<std::int64_t>(model.trained_tokens));
    put(buf, model.final_loss);
    put(buf, static_cast<std::uint32_t>(model.tensors.size()));
    for (const auto& [name, t] : model.tensors) {
        put(buf, static_cast<std::uint32_t>(name.size()));
        buf.append(name);
        put(buf, static_cast<std::uint8_t>(t.kind));
        put(buf, static_cast<std::int64_t>(t.rows));
        put(buf, static_cast<std::int64_t>(t.cols));
    }
    for (const auto& [name, t] : model.tensors) {
        buf.append(reinterpret_cast<const char*>(t.w.data()), t.w.size() * sizeof(double));
    }
    write_file_atomic(path, buf);
}

Checkpoint load_checkpoint(const std::string& path) {
    const std::vector<std::uint8_t> buf = read_binary_file(path);
    std::size_t off = 0;
    if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw std::runtime_error("not a checkpoint file: " + path);
    }
    off = 4;
    const std::uint32_t version = get<std::uint32_t>(buf, off);
    if (version != kVersion) throw std::runtime_error("unsupported checkpoint version");
    Checkpoint m;
    m.config.n_layers = static_cast<int>(get<std::int64_t>(buf, off));
    m.config.d_model = static_cast<int>(get<std::int64_t>(buf, off));
    m.config.n_heads = static_cast<int>(get<std::int64_t>(buf, off));
    m.config.ffw_multiplier = static_cast<int>(get<std::int64_t>(buf, off));
    m.config.vocab_size = static_cast<int>(get<std::int64_t>(buf, off));
    m.config.context_length = static_cast<int>(get<std::int64_t>(buf, off));
    m.config.seed = static_cast<std::uint64_t>(get<std::int64_t>(buf, off));
    m.trained_tokens = get<std::int64_t>(buf, off);
    m.final_loss = get<double>(buf, off);
    const std::uint32_t n_tensors = get<std::uint32_t>(buf, off);
    m.tensors.reserve(n_tensors);
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        const std::uint32_t name_len = get<std::uint32_t>(buf, off);
        if (off + name_len > buf.size()) throw std::runtime_error("checkpoint file truncated");
        std::string name(reinterpret_cast<const char*>(buf.data() + off), name_len);
        off += name_len;
        Tensor t;
        t.kind = static_cast<LayerKind>(get<std::uint8_t>(buf, off));
        t.rows = static_cast<int>(get<std::int64_t>(buf, off));
        t.cols = static_cast<int>(get<std::int64_t>(buf, off));
        m.tensors.emplace_back(std::move(name), std::move(t));
    }
    for (auto& [name, t] : m.tensors) {
        const std::size_t n = static_cast<std::size_t>(t.rows) * (t.cols > 0 ? t.cols : 1);
        if (off + n * sizeof(double) > buf.size()) throw std::runtime_error("checkpoint file truncated");
        t.w.resize(n);
        std::memcpy(t.w.data(), buf.data() + off, n * sizeof(double));
        off += n * sizeof(double);
    }
    return m;
}

}  // namespace prunelab

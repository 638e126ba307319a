// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/prune.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "kernels/kernels.hpp"

namespace prunelab {

std::string prune_algorithm_name(PruneAlgorithm a) {
    switch (a) {
        case PruneAlgorithm::magnitude: return "magnitude";
        case PruneAlgorithm::act_weighted: return "act_weighted";
        case PruneAlgorithm::obs: return "obs";
    }
    return "?";
}

std::string prune_scope_name(PruneScope s) {
    switch (s) {
        case PruneScope::all_fc: return "all_fc";
        case PruneScope::attention_only: return "attention_only";
        case PruneScope::ffw_only: return "ffw_only";
    }
    return "?";
}

std::optional<PruneAlgorithm> parse_prune_algorithm(const std::string& s) {
    if (s == "magnitude") return PruneAlgorithm::magnitude;
    if (s == "act_weighted") return PruneAlgorithm::act_weighted;
    if (s == "obs") return PruneAlgorithm::obs;
    return std::nullopt;
}

std::optional<PruneScope> parse_prune_scope(const std::string& s) {
    if (s == "all_fc") return PruneScope::all_fc;
    if (s == "attention_only") return PruneScope::attention_only;
    if (s == "ffw_only") return PruneScope::ffw_only;
    return std::nullopt;
}

MaskGroup PruneSpec::effective_group() const {
    if (group.has_value()) return *group;
    return algorithm == PruneAlgorithm::act_weighted ? MaskGroup::per_output_row
                                                     : MaskGroup::per_layer;
}

void PruneSpec::validate() const {
    if (sparsity < 0.0 || sparsity > 1.0) {
        throw std::invalid_argument("PruneSpec: sparsity must be in [0, 1]");
    }
    if (damping < 0.0) throw std::invalid_argument("PruneSpec: damping must be >= 0");
    if (needs_activations() && calib_samples < 1) {
        throw std::invalid_argument("PruneSpec: activation-based algorithms need calib_samples >= 1");
    }
}

Mat magnitude_score(const Mat& w) {
    Mat s(w.rows, w.cols);
    for (std::size_t i = 0; i < w.a.size(); ++i) s.a[i] = std::abs(w.a[i]);
    return s;
}

Mat activation_weighted_score(const Mat& w, const Mat& x) {
    if (x.rows != w.cols) {
        throw std::invalid_argument("activation_weighted_score: X row count (" +
                                    std::to_string(x.rows) + ") must equal W column count (" +
                                    std::to_string(w.cols) + ")");
    }
    std::vector<double> feature_norm(static_cast<std::size_t>(x.rows), 0.0);
    for (int j = 0; j < x.rows; ++j) {
        const double* row = x.row(j);
        double acc = 0.0;
        for (int s = 0; s < x.cols; ++s) acc += row[s] * row[s];
        feature_norm[static_cast<std::size_t>(j)] = std::sqrt(acc);
    }
    Mat s(w.rows, w.cols);
    for (int r = 0; r < w.rows; ++r) {
        for (int c = 0; c < w.cols; ++c) {
            s(r, c) = std::abs(w(r, c)) * feature_norm[static_cast<std::size_t>(c)];
        }
    }
    return s;
}

bool cholesky_factor(Mat& a) {
    const int n = a.rows;
    for (int j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (int p = 0; p < j; ++p) diag -= a(j, p) * a(j, p);
        if (!(diag > 0.0)) return false;
        const double ljj = std::sqrt(diag);
        a(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double v = a(i, j);
            for (int p = 0; p < j; ++p) v -= a(i, p) * a(j, p);
            a(i, j) = v / ljj;
        }
        for (int c = j + 1; c < n; ++c) a(j, c) = 0.0;
    }
    return true;
}

void cholesky_solve(const Mat& l, std::vector<double>& b) {
    const int n = l.rows;
    for (int i = 0; i < n; ++i) {
        double v = b[static_cast<std::size_t>(i)];
        for (int p = 0; p < i; ++p) v -= l(i, p) * b[static_cast<std::size_t>(p)];
        b[static_cast<std::size_t>(i)] = v / l(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double v = b[static_cast<std::size_t>(i)];
        for (int p = i + 1; p < n; ++p) v -= l(p, i) * b[static_cast<std::size_t>(p)];
        b[static_cast<std::size_t>(i)] = v / l(i, i);
    }
}

namespace {

// H = X X^T over calibration samples.
Mat input_gram(const Mat& x) {
    Mat h(x.rows, x.rows);
    kernels::matmul_nt(x.data(), x.data(), h.data(), x.rows, x.cols, x.rows);
    return h;
}

double damped_ridge(const Mat& h, double damping) {
    double mean_diag = 0.0;
    for (int i = 0; i < h.rows; ++i) mean_diag += h(i, i);
    mean_diag /= h.rows;
    return damping * mean_diag;
}

}  // namespace

Mat obs_saliency(const Mat& w, const Mat& x, double damping) {
    if (x.rows != w.cols) {
        throw std::invalid_argument("obs_saliency: X row count must equal W column count");
    }
    Mat h = input_gram(x);
    const double ridge = damped_ridge(h, damping);
    for (int i = 0; i < h.rows; ++i) h(i, i) += ridge;
    Mat l = h;
    if (!cholesky_factor(l)) {
        throw std::runtime_error("obs_saliency: Hessian not positive definite; increase damping");
    }
    // [H^-1]_jj = || L^-1 e_j ||^2 via one forward substitution per column.
    const int n = h.rows;
    std::vector<double> inv_diag(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        std::vector<double> y(static_cast<std::size_t>(n - j), 0.0);
        // Solve L y = e_j; rows before j give zeros.
        for (int i = j; i < n; ++i) {
            double v = i == j ? 1.0 : 0.0;
            for (int p = j; p < i; ++p) v -= l(i, p) * y[static_cast<std::size_t>(p - j)];
            y[static_cast<std::size_t>(i - j)] = v / l(i, i);
        }
        double acc = 0.0;
        for (double t : y) acc += t * t;
        inv_diag[static_cast<std::size_t>(j)] = acc;
    }
    Mat s(w.rows, w.cols);
    for (int r = 0; r < w.rows; ++r) {
        for (int c = 0; c < w.cols; ++c) {
            s(r, c) = w(r, c) * w(r, c) / inv_diag[static_cast<std::size_t>(c)];
        }
    }
    return s;
}

std::vector<std::uint8_t> select_mask(const Mat& scores, double sparsity, MaskGroup group) {
    if (sparsity < 0.0 || sparsity > 1.0) {
        throw std::invalid_argument("select_mask: sparsity must be in [0, 1]");
    }
    const long long total = static_cast<long long>(scores.a.size());
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(total), 1);

    auto prune_group = [&](long long begin, long long len) {
        const long long k = static_cast<long long>(std::floor(sparsity * static_cast<double>(len)));
        if (k <= 0) return;
        std::vector<long long> idx(static_cast<std::size_t>(len));
        for (long long i = 0; i < len; ++i) idx[static_cast<std::size_t>(i)] = begin + i;
        std::sort(idx.begin(), idx.end(), [&](long long a, long long b) {
            const double sa = scores.a[static_cast<std::size_t>(a)];
            const double sb = scores.a[static_cast<std::size_t>(b)];
            if (sa != sb) return sa < sb;
            return a < b;  // ties: lowest (row, column) first
        });
        for (long long i = 0; i < k; ++i) mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 0;
    };

    if (group == MaskGroup::per_layer) {
        prune_group(0, total);
    } else {
        for (int r = 0; r < scores.rows; ++r) {
            prune_group(static_cast<long long>(r) * scores.cols, scores.cols);
        }
    }
    return mask;
}

Mat reconstruct_update(const Mat& w, const Mat& x, const std::vector<std::uint8_t>& mask,
                       double damping) {
    if (x.rows != w.cols) {
        throw std::invalid_argument("reconstruct_update: X row count must equal W column count");
    }
    if (mask.size() != w.a.size()) {
        throw std::invalid_argument("reconstruct_update: mask size must match W");
    }
    Mat h = input_gram(x);
    const double ridge = damped_ridge(h, damping);
    for (int i = 0; i < h.rows; ++i) h(i, i) += ridge;

    Mat out(w.rows, w.cols);
    std::atomic<bool> singular{false};
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < w.rows; ++r) {
        if (singular.load(std::memory_order_relaxed)) continue;
        const std::uint8_t* mrow = mask.data() + static_cast<std::size_t>(r) * w.cols;
        std::vector<int> kept;
        kept.reserve(static_cast<std::size_t>(w.cols));
        for (int c = 0; c < w.cols; ++c) {
            if (mrow[c] != 0) kept.push_back(c);
        }
        if (kept.empty()) continue;  // row fully pruned -> all zeros
        const int k = static_cast<int>(kept.size());
        Mat hkk(k, k);
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                hkk(i, j) = h(kept[static_cast<std::size_t>(i)], kept[static_cast<std::size_t>(j)]);
            }
        }
        // rhs_i = (H_damped w_r)[kept_i]
        std::vector<double> rhs(static_cast<std::size_t>(k), 0.0);
        const double* wrow = w.row(r);
        for (int i = 0; i < k; ++i) {
            const double* hrow = h.row(kept[static_cast<std::size_t>(i)]);
            double acc = 0.0;
            for (int c = 0; c < w.cols; ++c) acc += hrow[c] * wrow[c];
            rhs[static_cast<std::size_t>(i)] = acc;
        }
        if (!cholesky_factor(hkk)) {
            singular.store(true, std::memory_order_relaxed);
            continue;
        }
        cholesky_solve(hkk, rhs);
        double* orow = out.row(r);
        for (int i = 0; i < k; ++i) orow[kept[static_cast<std::size_t>(i)]] = rhs[static_cast<std::size_t>(i)];
    }
    if (singular.load()) {
        throw std::runtime_error(
            "reconstruct_update: restricted system is singular; use damping > 0");
    }
    return out;
}

namespace {

bool kind_in_scope(LayerKind kind, PruneScope scope) {
    switch (scope) {
        case PruneScope::all_fc:
            return kind == LayerKind::attention_fc || kind == LayerKind::ffw_fc;
        case PruneScope::attention_only: return kind == LayerKind::attention_fc;
        case PruneScope::ffw_only: return kind == LayerKind::ffw_fc;
    }
    return false;
}

// sqrt of sum_r (w_r - what_r) H (w_r - what_r)^T  ==  ||W X - What X||_F.
double recon_error(const Mat& w, const Mat& what, const Mat& h) {
    double total = 0.0;
    for (int r = 0; r < w.rows; ++r) {
        const double* a = w.row(r);
        const double* b = what.row(r);
        double acc = 0.0;
        for (int i = 0; i < w.cols; ++i) {
            const double di = a[i] - b[i];
            if (di == 0.0) continue;
            const double* hrow = h.row(i);
            for (int j = 0; j < w.cols; ++j) acc += di * hrow[j] * (a[j] - b[j]);
        }
        total += acc;
    }
    return std::sqrt(std::max(0.0, total));
}

Mat tensor_as_mat(const Tensor& t) {
    Mat m(t.rows, t.cols);
    m.a = t.w;
    return m;
}

}  // namespace

std::pair<Checkpoint, PruneReport> prune_model(const Checkpoint& model, const PruneSpec& spec,
                                               const std::vector<std::vector<int>>& calib) {
    spec.validate();
    if ((spec.needs_activations() || spec.update_weights) && calib.empty()) {
        throw std::invalid_argument("prune_model: calibration sequences required for this spec");
    }
    // When calibration data is present it is also used to report per-layer
    // reconstruction errors for algorithms that would not otherwise need it.
    const bool have_acts = !calib.empty();

    Checkpoint pruned = model;
    PruneReport report;

    long long scope_total = 0, scope_pruned = 0;
    long long attn_total = 0, attn_pruned = 0, ffw_total = 0, ffw_pruned = 0;
    for (const auto& [name, t] : model.tensors) {
        if (t.kind == LayerKind::attention_fc) attn_total += t.nelem();
        if (t.kind == LayerKind::ffw_fc) ffw_total += t.nelem();
    }

    // In-scope FC tensors grouped by shared capture point, forward order.
    struct Target {
        std::string name;
        bool fresh_capture;  // recompute activations before this tensor
    };
    std::vector<Target> targets;
    for (int i = 0; i < model.config.n_layers; ++i) {
        const bool attn_scoped = kind_in_scope(LayerKind::attention_fc, spec.scope);
        const bool ffw_scoped = kind_in_scope(LayerKind::ffw_fc, spec.scope);
        if (attn_scoped) {
            targets.push_back({block_tensor_name(i, "attn.wq"), true});
            targets.push_back({block_tensor_name(i, "attn.wk"), false});
            targets.push_back({block_tensor_name(i, "attn.wv"), false});
            targets.push_back({block_tensor_name(i, "attn.wo"), true});
        }
        if (ffw_scoped) {
            targets.push_back({block_tensor_name(i, "ffw.fc1"), true});
            targets.push_back({block_tensor_name(i, "ffw.fc2"), true});
        }
    }

    Mat x;  // current capture, shared by wq/wk/wv
    for (const Target& target : targets) {
        try {
            Tensor& t = pruned.tensor(target.name);
            const long long n = t.nelem();
            const MaskGroup group = spec.effective_group();
            long long plan_pruned = 0;
            if (group == MaskGroup::per_layer) {
                plan_pruned = static_cast<long long>(std::floor(spec.sparsity * static_cast<double>(n)));
            } else {
                plan_pruned = static_cast<long long>(t.rows) *
                              static_cast<long long>(std::floor(spec.sparsity * t.cols));
            }
            scope_total += n;
            if (plan_pruned == 0) {
                report.layers.push_back(LayerPruneStats{target.name, n, 0, 0.0, 0.0});
                continue;
            }
            if (have_acts && target.fresh_capture) {
                x = collect_activations(pruned, calib, target.name);
            }
            const Mat w = tensor_as_mat(t);
            Mat scores;
            switch (spec.algorithm) {
                case PruneAlgorithm::magnitude: scores = magnitude_score(w); break;
                case PruneAlgorithm::act_weighted: scores = activation_weighted_score(w, x); break;
                case PruneAlgorithm::obs: scores = obs_saliency(w, x, spec.damping); break;
            }
            const std::vector<std::uint8_t> mask = select_mask(scores, spec.sparsity, group);

            Mat masked(w.rows, w.cols);
            for (std::size_t j = 0; j < w.a.size(); ++j) masked.a[j] = mask[j] ? w.a[j] : 0.0;
            Mat result = spec.update_weights ? reconstruct_update(w, x, mask, spec.damping)
                                             : masked;

            LayerPruneStats stats;
            stats.name = target.name;
            long long pruned_count = 0;
            for (std::uint8_t b : mask) pruned_count += b == 0 ? 1 : 0;
            stats.pruned = pruned_count;
            stats.kept = n - pruned_count;
            if (have_acts) {
                const Mat h = input_gram(x);
                stats.err_before = recon_error(w, masked, h);
                stats.err_after = spec.update_weights ? recon_error(w, result, h) : stats.err_before;
            }
            t.w = std::move(result.a);
            scope_pruned += pruned_count;
            if (t.kind == LayerKind::attention_fc) attn_pruned += pruned_count;
            if (t.kind == LayerKind::ffw_fc) ffw_pruned += pruned_count;
            report.layers.push_back(std::move(stats));
        } catch (const std::exception& e) {
            throw std::runtime_error("prune_model: layer " + target.name + ": " + e.what());
        }
    }

    report.global_sparsity =
        scope_total > 0 ? static_cast<double>(scope_pruned) / static_cast<double>(scope_total) : 0.0;
    report.attention_sparsity =
        attn_total > 0 ? static_cast<double>(attn_pruned) / static_cast<double>(attn_total) : 0.0;
    report.ffw_sparsity =
        ffw_total > 0 ? static_cast<double>(ffw_pruned) / static_cast<double>(ffw_total) : 0.0;
    return {std::move(pruned), std::move(report)};
}

double module_sparsity(const Checkpoint& pruned, LayerKind kind, const Checkpoint& baseline) {
    if (pruned.tensors.size() != baseline.tensors.size()) {
        throw std::invalid_argument("module_sparsity: checkpoints have different architectures");
    }
    long long zeroed = 0, total = 0;
    for (std::size_t i = 0; i < pruned.tensors.size(); ++i) {
        const auto& [pname, pt] = pruned.tensors[i];
        const auto& [bname, bt] = baseline.tensors[i];
        if (pname != bname || pt.rows != bt.rows || pt.cols != bt.cols) {
            throw std::invalid_argument("module_sparsity: checkpoints have different architectures");
        }
        if (pt.kind != kind) continue;
        total += pt.nelem();
        for (std::size_t j = 0; j < pt.w.size(); ++j) {
            if (pt.w[j] == 0.0 && bt.w[j] != 0.0) ++zeroed;
        }
    }
    return total > 0 ? static_cast<double>(zeroed) / static_cast<double>(total) : 0.0;
}

std::string PruneReport::to_json() const {
    nlohmann::ordered_json j;
    j["global_sparsity"] = global_sparsity;
    j["module_sparsity"] = {{"attention_fc", attention_sparsity}, {"ffw_fc", ffw_sparsity}};
    nlohmann::ordered_json layers_json = nlohmann::ordered_json::array();
    for (const LayerPruneStats& s : layers) {
        nlohmann::ordered_json l;
        l["name"] = s.name;
        l["kept"] = s.kept;
        l["pruned"] = s.pruned;
        if (s.err_before >= 0.0) {
            l["reconstruction_error_before"] = s.err_before;
            l["reconstruction_error_after"] = s.err_after;
        }
        layers_json.push_back(std::move(l));
    }
    j["layers"] = std::move(layers_json);
    return j.dump(2);
}

}  // namespace prunelab

// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/mat.hpp"
#include "model/checkpoint.hpp"
#include "model/transformer.hpp"

namespace prunelab {

enum class PruneAlgorithm { magnitude, act_weighted, obs };
enum class PruneScope { all_fc, attention_only, ffw_only };
enum class MaskGroup { per_output_row, per_layer };

std::string prune_algorithm_name(PruneAlgorithm a);
std::string prune_scope_name(PruneScope s);
std::optional<PruneAlgorithm> parse_prune_algorithm(const std::string& s);
std::optional<PruneScope> parse_prune_scope(const std::string& s);

struct PruneSpec {
    PruneAlgorithm algorithm = PruneAlgorithm::obs;
    double sparsity = 0.5;    // fraction in [0, 1]
    PruneScope scope = PruneScope::all_fc;
    bool update_weights = true;
    int calib_samples = 128;  // calibration sequences
    double damping = 0.01;    // lambda, scaled by mean Hessian diagonal
    std::optional<MaskGroup> group;  // default depends on the algorithm

    // act_weighted compares scores within each output row; magnitude and obs
    // compare across the whole layer.
    MaskGroup effective_group() const;
    bool needs_activations() const { return algorithm != PruneAlgorithm::magnitude; }
    void validate() const;
};

// Importance scores. S_ij = |W_ij| for magnitude; |W_ij| * ||X_j||_2 for the
// activation-weighted criterion; W_ij^2 / [H^-1]_jj with
// H = X X^T + damping * mean(diag(X X^T)) * I for the saliency criterion.
Mat magnitude_score(const Mat& w);
Mat activation_weighted_score(const Mat& w, const Mat& x);
Mat obs_saliency(const Mat& w, const Mat& x, double damping);

// Binary mask, 1 = keep. Within each group exactly floor(sparsity * group
// size) lowest-scoring entries are pruned; ties break toward the lowest
// (row, column) index.
std::vector<std::uint8_t> select_mask(const Mat& scores, double sparsity, MaskGroup group);

// Exact masked least-squares update. Independently per output row r,
// minimizes ||(w_r - what) X||^2 + lambda_bar ||w_r - what||^2 over vectors
// supported on the kept columns, with lambda_bar = damping * mean(diag(XX^T)).
// Rows with empty kept support come back all zero. Throws when the restricted
// system is singular and damping == 0.
Mat reconstruct_update(const Mat& w, const Mat& x, const std::vector<std::uint8_t>& mask,
                       double damping);

struct LayerPruneStats {
    std::string name;
    long long kept = 0;
    long long pruned = 0;
    double err_before = -1.0;  // ||WX - (mask . W)X||_F; -1 when no calibration data
    double err_after = -1.0;   // ||WX - What X||_F
};

struct PruneReport {
    std::vector<LayerPruneStats> layers;
    double global_sparsity = 0.0;          // pruned / total over in-scope tensors
    double attention_sparsity = 0.0;       // introduced zeros / attention_fc params
    double ffw_sparsity = 0.0;             // introduced zeros / ffw_fc params
    std::string to_json() const;
};

// One-shot pruning with sequential propagation: fully-connected layers are
// processed in forward order and calibration activations are recomputed from
// the already-pruned prefix of the network. Out-of-scope tensors are
// byte-identical to the input. Layers where floor(s * n) == 0 are untouched.
std::pair<Checkpoint, PruneReport> prune_model(const Checkpoint& model, const PruneSpec& spec,
                                               const std::vector<std::vector<int>>& calib);

// Fraction of weights of the given kind zeroed relative to the baseline.
double module_sparsity(const Checkpoint& pruned, LayerKind kind, const Checkpoint& baseline);

// Lower-triangular Cholesky solve helpers shared with the tests.
// Factors a into l (in place allowed); returns false when not positive
// definite.
bool cholesky_factor(Mat& a);
void cholesky_solve(const Mat& l, std::vector<double>& b);

}  // namespace prunelab

// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eval/metrics.hpp"
#include "pruner/prune.hpp"
#include "tasks/dataset.hpp"

namespace prunelab {

struct SweepRow {
    std::string model_id;
    long long train_tokens = 0;
    std::string task_id;
    std::string algorithm;  // prune algorithm, or "dense" for size-grid rows
    std::string scope;
    double sparsity = 0.0;  // percent, 0..100
    double accuracy = 0.0;
    double perplexity = 0.0;
    double agree_context_free = -1.0;  // -1 = not applicable
    double agree_gold = -1.0;
    long long n_instances = 0;
    std::string status = "ok";  // "ok" or "error"
    std::string error;
};

struct SweepReport {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<SweepRow> rows;

    std::string to_csv() const;
    static SweepReport from_csv(const std::string& text);
};

struct SweepOptions {
    std::string model_id = "default";
    std::vector<PruneAlgorithm> algorithms = {PruneAlgorithm::magnitude,
                                              PruneAlgorithm::act_weighted, PruneAlgorithm::obs};
    std::vector<PruneScope> scopes = {PruneScope::all_fc};
    std::vector<int> sparsities_pct = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90};
    double damping = 0.01;
    EvalLimits limits;
    std::string cache_dir;  // empty disables key caching
    std::string config_hash;
    std::uint64_t seed = 0;
    bool verbose = false;
};

// Cited-method defaults: the saliency-based algorithm updates the remaining
// weights after removal, the other two do not.
PruneSpec default_prune_spec(PruneAlgorithm algorithm, double sparsity_fraction, PruneScope scope,
                             double damping);

// Full grid sweep: prune once per (algorithm, scope, sparsity), evaluate
// every task on the pruned model, and record held-out perplexity. Keys whose
// cache files exist are loaded instead of recomputed; per-key failures are
// recorded in the report and the sweep continues.
SweepReport run_sweep(const Checkpoint& model, const Vocab& vocab,
                      const std::vector<Dataset>& tasks,
                      const std::vector<std::vector<int>>& calib, std::span<const int> heldout,
                      const SweepOptions& options);

// (sparsity, accuracy) curve for one (task, algorithm, scope) slice of the
// report, sorted by sparsity. Error rows are excluded.
AccuracyCurve extract_curve(const SweepReport& report, const std::string& task_id,
                            const std::string& algorithm, const std::string& scope);

// Shortest round-trip double formatting used by every report writer.
std::string format_double(double v);

}  // namespace prunelab

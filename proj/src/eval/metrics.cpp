// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "eval/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "model/decode.hpp"
#include "model/transformer.hpp"

namespace prunelab {

namespace {

std::string normalize_answer(std::string_view s) {
    const std::size_t nl = s.find('\n');
    if (nl != std::string_view::npos) s = s.substr(0, nl);
    const char* ws = " \t\r";
    const std::size_t begin = s.find_first_not_of(ws);
    if (begin == std::string_view::npos) return std::string();
    const std::size_t end = s.find_last_not_of(ws);
    return std::string(s.substr(begin, end - begin + 1));
}

}  // namespace

bool exact_match(std::string_view prediction, std::string_view gold) {
    return normalize_answer(prediction) == normalize_answer(gold);
}

std::string context_free_answer(const Checkpoint& model, const Vocab& vocab,
                                const TaskInstance& task) {
    const std::vector<int> prefix = vocab.encode(render_query_line(task.query));
    const std::vector<std::string> candidates = label_strings(task.function);
    Activations acts;
    int best = 0;
    double best_score = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const std::vector<int> cont = vocab.encode(" " + candidates[i]);
        const double score = continuation_logprob(model, prefix, cont, &acts);
        if (i == 0 || score > best_score) {
            best = static_cast<int>(i);
            best_score = score;
        }
    }
    return candidates[static_cast<std::size_t>(best)];
}

EvalResult eval_task(const Checkpoint& model, const Vocab& vocab, const Dataset& dataset,
                     const EvalLimits& limits, bool with_context_free) {
    const long long n = static_cast<long long>(dataset.size());
    if (n == 0) throw std::invalid_argument("eval_task: empty dataset " + dataset.task_id);

    // Context check up front so an overflow names its instance.
    for (long long i = 0; i < n; ++i) {
        const std::string& prompt = dataset.icl_kind ? dataset.icl[static_cast<std::size_t>(i)].prompt
                                                     : dataset.qa[static_cast<std::size_t>(i)].prompt;
        const long long len = static_cast<long long>(vocab.encode(prompt).size());
        if (len + limits.max_new_tokens > model.config.context_length) {
            throw std::invalid_argument(
                "eval_task: task " + dataset.task_id + " instance " + std::to_string(i) +
                ": prompt of " + std::to_string(len) + " tokens plus completion budget " +
                std::to_string(limits.max_new_tokens) + " exceeds context length " +
                std::to_string(model.config.context_length));
        }
    }

    EvalResult out;
    out.n_instances = n;
    out.records.resize(static_cast<std::size_t>(n));
    std::vector<std::string> errors(static_cast<std::size_t>(n));

#pragma omp parallel
    {
        Activations acts;
#pragma omp for schedule(dynamic)
        for (long long i = 0; i < n; ++i) {
            EvalInstanceRecord& rec = out.records[static_cast<std::size_t>(i)];
            rec.index = static_cast<int>(i);
            try {
                if (dataset.icl_kind) {
                    const TaskInstance& t = dataset.icl[static_cast<std::size_t>(i)];
                    rec.gold = label_string(t.function, t.gold_label);
                    rec.prediction = greedy_decode(model, vocab, t.prompt, limits.max_new_tokens, &acts);
                    if (with_context_free) {
                        rec.context_free = context_free_answer(model, vocab, t);
                        rec.matches_context_free = exact_match(rec.prediction, rec.context_free);
                    }
                } else {
                    const QAInstance& q = dataset.qa[static_cast<std::size_t>(i)];
                    rec.gold = q.gold_answer;
                    rec.prediction = greedy_decode(model, vocab, q.prompt, limits.max_new_tokens, &acts);
                }
                rec.correct = exact_match(rec.prediction, rec.gold);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(i)] = e.what();
            }
        }
    }
    for (long long i = 0; i < n; ++i) {
        if (!errors[static_cast<std::size_t>(i)].empty()) {
            throw std::runtime_error("eval_task: task " + dataset.task_id + " instance " +
                                     std::to_string(i) + ": " + errors[static_cast<std::size_t>(i)]);
        }
    }

    long long correct = 0;
    for (const auto& rec : out.records) correct += rec.correct ? 1 : 0;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return out;
}

Agreement agreement_analysis(const std::vector<EvalInstanceRecord>& records) {
    Agreement a;
    if (records.empty()) return a;
    long long cf = 0, gold = 0;
    for (const auto& rec : records) {
        cf += rec.matches_context_free ? 1 : 0;
        gold += rec.correct ? 1 : 0;
    }
    a.frac_context_free = static_cast<double>(cf) / static_cast<double>(records.size());
    a.frac_gold = static_cast<double>(gold) / static_cast<double>(records.size());
    return a;
}

std::optional<double> max_sparsity_within_drop(const AccuracyCurve& curve, double rel_drop) {
    if (curve.points.empty() || curve.points.front().first != 0.0) {
        throw std::invalid_argument("max_sparsity_within_drop: curve must start at sparsity 0");
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        if (curve.points[i].first <= curve.points[i - 1].first) {
            throw std::invalid_argument("max_sparsity_within_drop: sparsities must increase");
        }
    }
    const double dense = curve.points.front().second;
    if (dense <= 0.0) return std::nullopt;
    const double threshold = (1.0 - rel_drop) * dense;
    double best = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        if (curve.points[i].second >= threshold) best = curve.points[i].first;
        else break;
    }
    return best;
}

}  // namespace prunelab

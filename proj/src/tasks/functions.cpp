// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tasks/functions.hpp"

#include <algorithm>
#include <stdexcept>

namespace prunelab {

std::string function_variant_name(FunctionVariant v) {
    switch (v) {
        case FunctionVariant::linear: return "linear";
        case FunctionVariant::two_layer_nn: return "two_layer_nn";
        case FunctionVariant::decision_tree: return "decision_tree";
    }
    return "?";
}

int FunctionSpec::dim() const {
    switch (variant) {
        case FunctionVariant::linear: return static_cast<int>(w.size());
        case FunctionVariant::two_layer_nn: return w1.cols;
        case FunctionVariant::decision_tree: {
            int d = 0;
            for (int idx : node_index) d = std::max(d, idx + 1);
            return d;
        }
    }
    return 0;
}

int FunctionSpec::eval(std::span<const int> x) const {
    switch (variant) {
        case FunctionVariant::linear: {
            double acc = b;
            for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
            return acc >= 0.0 ? 1 : 0;
        }
        case FunctionVariant::two_layer_nn: {
            const int d = w1.cols;
            std::vector<double> h(static_cast<std::size_t>(d), 0.0);
            for (int r = 0; r < w1.rows; ++r) {
                double acc = 0.0;
                for (int c = 0; c < d; ++c) acc += w1(r, c) * x[static_cast<std::size_t>(c)];
                h[static_cast<std::size_t>(r)] = acc > 0.0 ? acc : 0.0;
            }
            double logit0 = 0.0, logit1 = 0.0;
            for (int c = 0; c < w2.cols; ++c) {
                logit0 += w2(0, c) * h[static_cast<std::size_t>(c)];
                logit1 += w2(1, c) * h[static_cast<std::size_t>(c)];
            }
            return logit1 > logit0 ? 1 : 0;
        }
        case FunctionVariant::decision_tree: {
            const bool root_right = x[static_cast<std::size_t>(node_index[0])] >= 0;
            const int child = root_right ? node_index[2] : node_index[1];
            const bool child_right = x[static_cast<std::size_t>(child)] >= 0;
            const int leaf = (root_right ? 2 : 0) + (child_right ? 1 : 0);
            return leaf_labels[static_cast<std::size_t>(leaf)];
        }
    }
    return 0;
}

std::string label_string(const FunctionSpec& fn, int label) {
    if (fn.variant == FunctionVariant::decision_tree) return std::to_string(label);
    return label == 1 ? "1" : "-1";
}

std::vector<std::string> label_strings(const FunctionSpec& fn) {
    if (fn.variant == FunctionVariant::decision_tree) return {"0", "1", "2", "3"};
    return {"-1", "1"};
}

namespace {

std::vector<int> sample_input(Rng& rng, int d) {
    std::vector<int> x(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = rng.uniform_int(-10, 10);
    return x;
}

// Fill exemplars by rejection until every label holds exactly n/k entries.
// Returns false when a label quota cannot be met in a bounded number of
// draws (a degenerate function); the caller then resamples the function.
bool fill_exemplars(TaskInstance& task, Rng& rng, int n) {
    const int k = task.function.n_labels();
    const int quota = n / k;
    const int d = task.function.dim();
    std::vector<int> have(static_cast<std::size_t>(k), 0);
    task.exemplars.clear();
    task.exemplars.reserve(static_cast<std::size_t>(n));
    long long attempts = 0;
    const long long max_attempts = 2000LL * n;
    while (static_cast<int>(task.exemplars.size()) < n) {
        if (++attempts > max_attempts) return false;
        std::vector<int> x = sample_input(rng, d);
        const int label = task.function.eval(x);
        if (have[static_cast<std::size_t>(label)] >= quota) continue;
        ++have[static_cast<std::size_t>(label)];
        task.exemplars.push_back(Exemplar{std::move(x), label});
    }
    rng.shuffle(task.exemplars);
    return true;
}

void fill_query(TaskInstance& task, Rng& rng) {
    const int d = task.function.dim();
    for (;;) {
        std::vector<int> q = sample_input(rng, d);
        bool collides = false;
        for (const Exemplar& e : task.exemplars) {
            if (e.x == q) {
                collides = true;
                break;
            }
        }
        if (!collides) {
            task.gold_label = task.function.eval(q);
            task.query = std::move(q);
            return;
        }
    }
}

void require_balanced(int n, int k, const char* who) {
    if (n <= 0 || n % k != 0) {
        throw std::invalid_argument(std::string(who) + ": exemplar count must be a positive " +
                                    "multiple of " + std::to_string(k));
    }
}

FunctionSpec sample_linear(Rng& rng, int d) {
    FunctionSpec fn;
    fn.variant = FunctionVariant::linear;
    fn.b = 0.0;
    for (;;) {
        fn.w.assign(static_cast<std::size_t>(d), 0.0);
        bool nonzero = false;
        for (int i = 0; i < d; ++i) {
            fn.w[static_cast<std::size_t>(i)] = rng.normal();
            nonzero = nonzero || fn.w[static_cast<std::size_t>(i)] != 0.0;
        }
        if (nonzero) return fn;
    }
}

FunctionSpec sample_nn(Rng& rng, int d) {
    FunctionSpec fn;
    fn.variant = FunctionVariant::two_layer_nn;
    fn.w1 = Mat(d, d);
    fn.w2 = Mat(2, d);
    for (double& v : fn.w1.a) v = rng.normal();
    for (double& v : fn.w2.a) v = rng.normal();
    return fn;
}

FunctionSpec sample_tree(Rng& rng, int d) {
    if (d < 2) {
        // With one input dimension every path through a depth-2 tree repeats
        // the root comparison, so one leaf per side is unreachable and a
        // balanced exemplar set cannot exist.
        throw std::invalid_argument("gen_tree_task: input dimension must be >= 2");
    }
    FunctionSpec fn;
    fn.variant = FunctionVariant::decision_tree;
    // Indices are drawn with replacement, except that a child repeating the
    // root index would make one of its leaves unreachable.
    fn.node_index[0] = rng.uniform_int(0, d - 1);
    do {
        fn.node_index[1] = rng.uniform_int(0, d - 1);
    } while (fn.node_index[1] == fn.node_index[0]);
    do {
        fn.node_index[2] = rng.uniform_int(0, d - 1);
    } while (fn.node_index[2] == fn.node_index[0]);
    std::vector<int> labels = {0, 1, 2, 3};
    rng.shuffle(labels);
    std::copy(labels.begin(), labels.end(), fn.leaf_labels.begin());
    return fn;
}

template <class SampleFn>
TaskInstance gen_task(Rng& rng, int d, int n, SampleFn sample) {
    if (d < 1) throw std::invalid_argument("task generator: dimension must be >= 1");
    TaskInstance task;
    for (int tries = 0; tries < 100; ++tries) {
        task.function = sample(rng, d);
        if (fill_exemplars(task, rng, n)) {
            fill_query(task, rng);
            task.prompt = render_icl_prompt(task);
            return task;
        }
    }
    throw std::runtime_error("task generator: could not balance exemplar labels");
}

}  // namespace

void populate_task(TaskInstance& task, Rng& rng, int n_exemplars) {
    require_balanced(n_exemplars, task.function.n_labels(), "populate_task");
    if (!fill_exemplars(task, rng, n_exemplars)) {
        throw std::runtime_error("populate_task: could not balance exemplar labels");
    }
    fill_query(task, rng);
    task.prompt = render_icl_prompt(task);
}

TaskInstance gen_linear_task(Rng& rng, int d, int n) {
    require_balanced(n, 2, "gen_linear_task");
    return gen_task(rng, d, n, sample_linear);
}

TaskInstance gen_nn_task(Rng& rng, int d, int n) {
    require_balanced(n, 2, "gen_nn_task");
    return gen_task(rng, d, n, sample_nn);
}

TaskInstance gen_tree_task(Rng& rng, int d, int n) {
    require_balanced(n, 4, "gen_tree_task");
    return gen_task(rng, d, n, sample_tree);
}

TaskInstance gen_linear_task(std::uint64_t seed, int d, int n) {
    Rng rng(seed);
    return gen_linear_task(rng, d, n);
}

TaskInstance gen_nn_task(std::uint64_t seed, int d, int n) {
    Rng rng(seed);
    return gen_nn_task(rng, d, n);
}

TaskInstance gen_tree_task(std::uint64_t seed, int d, int n) {
    Rng rng(seed);
    return gen_tree_task(rng, d, n);
}

std::string render_vector(std::span<const int> x) {
    std::string out = "[";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i > 0) out += ", ";
        out += std::to_string(x[i]);
    }
    out += "]";
    return out;
}

std::string render_query_line(std::span<const int> query) { return render_vector(query) + " ="; }

std::string render_icl_prompt(const TaskInstance& task) {
    std::string out;
    for (const Exemplar& e : task.exemplars) {
        out += render_vector(e.x) + " = " + label_string(task.function, e.label) + "\n";
    }
    out += render_query_line(task.query);
    return out;
}

namespace {

[[noreturn]] void parse_fail(const std::string& why) {
    throw std::invalid_argument("icl prompt parse error: " + why);
}

// Parses "[a, b, c]" from text at pos; advances pos past the ']'.
std::vector<int> parse_vector(std::string_view text, std::size_t& pos) {
    if (pos >= text.size() || text[pos] != '[') parse_fail("expected '['");
    ++pos;
    std::vector<int> out;
    for (;;) {
        bool neg = false;
        if (pos < text.size() && text[pos] == '-') {
            neg = true;
            ++pos;
        }
        if (pos >= text.size() || text[pos] < '0' || text[pos] > '9') parse_fail("expected digit");
        long v = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            v = v * 10 + (text[pos] - '0');
            ++pos;
        }
        out.push_back(static_cast<int>(neg ? -v : v));
        if (pos < text.size() && text[pos] == ']') {
            ++pos;
            return out;
        }
        if (pos + 1 >= text.size() || text[pos] != ',' || text[pos + 1] != ' ')
            parse_fail("expected ', ' or ']'");
        pos += 2;
    }
}

std::string parse_label(std::string_view line, std::size_t& pos) {
    std::size_t start = pos;
    if (pos < line.size() && line[pos] == '-') ++pos;
    while (pos < line.size() && line[pos] >= '0' && line[pos] <= '9') ++pos;
    if (pos == start) parse_fail("expected label");
    return std::string(line.substr(start, pos - start));
}

}  // namespace

ParsedIclPrompt parse_icl_prompt(std::string_view text) {
    ParsedIclPrompt out;
    std::size_t pos = 0;
    for (;;) {
        std::vector<int> vec = parse_vector(text, pos);
        if (text.substr(pos, 2) != " =") parse_fail("expected ' ='");
        pos += 2;
        if (pos == text.size()) {
            // Unlabeled final line: the query.
            out.query = std::move(vec);
            return out;
        }
        if (text[pos] != ' ') parse_fail("expected ' ' before label");
        ++pos;
        std::string label = parse_label(text, pos);
        out.inputs.push_back(std::move(vec));
        out.labels.push_back(std::move(label));
        if (pos >= text.size() || text[pos] != '\n') parse_fail("expected newline after label");
        ++pos;
        if (pos == text.size()) parse_fail("missing query line");
    }
}

std::vector<std::pair<std::vector<int>, std::string>> parse_icl_segment(std::string_view text) {
    std::vector<std::pair<std::vector<int>, std::string>> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::vector<int> vec = parse_vector(text, pos);
        if (text.substr(pos, 3) != " = ") parse_fail("expected ' = '");
        pos += 3;
        std::string label = parse_label(text, pos);
        if (pos >= text.size() || text[pos] != '\n') parse_fail("expected newline after label");
        ++pos;
        out.emplace_back(std::move(vec), std::move(label));
    }
    if (out.empty()) parse_fail("empty segment");
    return out;
}

}  // namespace prunelab

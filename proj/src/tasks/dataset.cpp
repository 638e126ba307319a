// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tasks/dataset.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "core/io.hpp"

namespace prunelab {

using ordered_json = nlohmann::ordered_json;

Dataset make_icl_dataset(const std::string& task_id, FunctionVariant family, std::uint64_t seed,
                         int dim, int n_exemplars, int n_instances) {
    Dataset ds;
    ds.task_id = task_id;
    ds.icl_kind = true;
    ds.icl.reserve(static_cast<std::size_t>(n_instances));
    Rng rng(seed);
    for (int i = 0; i < n_instances; ++i) {
        switch (family) {
            case FunctionVariant::linear: ds.icl.push_back(gen_linear_task(rng, dim, n_exemplars)); break;
            case FunctionVariant::two_layer_nn: ds.icl.push_back(gen_nn_task(rng, dim, n_exemplars)); break;
            case FunctionVariant::decision_tree: ds.icl.push_back(gen_tree_task(rng, dim, n_exemplars)); break;
        }
    }
    return ds;
}

Dataset make_qa_dataset(const std::string& task_id, const FactUniverse& universe, QAMode mode,
                        std::uint64_t seed, int n_instances) {
    Dataset ds;
    ds.task_id = task_id;
    ds.icl_kind = false;
    ds.qa.reserve(static_cast<std::size_t>(n_instances));
    Rng rng(seed);
    for (int i = 0; i < n_instances; ++i) ds.qa.push_back(gen_qa_instance(universe, mode, rng));
    return ds;
}

namespace {

ordered_json function_to_json(const FunctionSpec& fn) {
    ordered_json j;
    j["variant"] = function_variant_name(fn.variant);
    switch (fn.variant) {
        case FunctionVariant::linear:
            j["w"] = fn.w;
            j["b"] = fn.b;
            break;
        case FunctionVariant::two_layer_nn: {
            ordered_json w1 = ordered_json::array();
            for (int r = 0; r < fn.w1.rows; ++r) {
                w1.push_back(std::vector<double>(fn.w1.row(r), fn.w1.row(r) + fn.w1.cols));
            }
            ordered_json w2 = ordered_json::array();
            for (int r = 0; r < fn.w2.rows; ++r) {
                w2.push_back(std::vector<double>(fn.w2.row(r), fn.w2.row(r) + fn.w2.cols));
            }
            j["w1"] = std::move(w1);
            j["w2"] = std::move(w2);
            break;
        }
        case FunctionVariant::decision_tree:
            j["node_index"] = fn.node_index;
            j["leaf_labels"] = fn.leaf_labels;
            break;
    }
    return j;
}

FunctionSpec function_from_json(const ordered_json& j) {
    FunctionSpec fn;
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "linear") {
        fn.variant = FunctionVariant::linear;
        fn.w = j.at("w").get<std::vector<double>>();
        fn.b = j.at("b").get<double>();
    } else if (variant == "two_layer_nn") {
        fn.variant = FunctionVariant::two_layer_nn;
        const auto& w1 = j.at("w1");
        const auto& w2 = j.at("w2");
        const int d = static_cast<int>(w1.size());
        fn.w1 = Mat(d, d);
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) fn.w1(r, c) = w1[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
        }
        fn.w2 = Mat(2, d);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < d; ++c) fn.w2(r, c) = w2[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
        }
    } else if (variant == "decision_tree") {
        fn.variant = FunctionVariant::decision_tree;
        for (int i = 0; i < 3; ++i) fn.node_index[static_cast<std::size_t>(i)] = j.at("node_index")[static_cast<std::size_t>(i)].get<int>();
        for (int i = 0; i < 4; ++i) fn.leaf_labels[static_cast<std::size_t>(i)] = j.at("leaf_labels")[static_cast<std::size_t>(i)].get<int>();
    } else {
        throw std::invalid_argument("dataset: unknown function variant " + variant);
    }
    return fn;
}

int label_from_string(const FunctionSpec& fn, const std::string& s) {
    const std::vector<std::string> names = label_strings(fn);
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == s) return static_cast<int>(i);
    }
    throw std::invalid_argument("dataset: unknown label string " + s);
}

ordered_json icl_to_json(const TaskInstance& t) {
    ordered_json j;
    j["function"] = function_to_json(t.function);
    ordered_json ex = ordered_json::array();
    for (const Exemplar& e : t.exemplars) {
        ordered_json je;
        je["x"] = e.x;
        je["label"] = label_string(t.function, e.label);
        ex.push_back(std::move(je));
    }
    j["exemplars"] = std::move(ex);
    j["query"] = t.query;
    j["gold"] = label_string(t.function, t.gold_label);
    j["prompt"] = t.prompt;
    return j;
}

TaskInstance icl_from_json(const ordered_json& j) {
    TaskInstance t;
    t.function = function_from_json(j.at("function"));
    for (const auto& je : j.at("exemplars")) {
        Exemplar e;
        e.x = je.at("x").get<std::vector<int>>();
        e.label = label_from_string(t.function, je.at("label").get<std::string>());
        t.exemplars.push_back(std::move(e));
    }
    t.query = j.at("query").get<std::vector<int>>();
    t.gold_label = label_from_string(t.function, j.at("gold").get<std::string>());
    t.prompt = j.at("prompt").get<std::string>();
    return t;
}

ordered_json qa_to_json(const QAInstance& q) {
    ordered_json j;
    j["mode"] = qa_mode_name(q.mode);
    ordered_json demo;
    demo["evidence"] = q.demo.evidence.has_value() ? ordered_json(*q.demo.evidence) : ordered_json(nullptr);
    demo["question"] = q.demo.question;
    demo["answer"] = q.demo.answer;
    j["demo"] = std::move(demo);
    j["evidence"] = q.evidence.has_value() ? ordered_json(*q.evidence) : ordered_json(nullptr);
    j["question"] = q.question;
    j["gold"] = q.gold_answer;
    j["prompt"] = q.prompt;
    j["subject"] = q.subject;
    j["relation"] = q.relation;
    return j;
}

QAInstance qa_from_json(const ordered_json& j) {
    QAInstance q;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "closed_book") q.mode = QAMode::closed_book;
    else if (mode == "open_book") q.mode = QAMode::open_book;
    else if (mode == "override") q.mode = QAMode::override_book;
    else throw std::invalid_argument("dataset: unknown qa mode " + mode);
    const auto& demo = j.at("demo");
    if (!demo.at("evidence").is_null()) q.demo.evidence = demo.at("evidence").get<std::string>();
    q.demo.question = demo.at("question").get<std::string>();
    q.demo.answer = demo.at("answer").get<std::string>();
    if (!j.at("evidence").is_null()) q.evidence = j.at("evidence").get<std::string>();
    q.question = j.at("question").get<std::string>();
    q.gold_answer = j.at("gold").get<std::string>();
    q.prompt = j.at("prompt").get<std::string>();
    q.subject = j.at("subject").get<int>();
    q.relation = j.at("relation").get<int>();
    return q;
}

}  // namespace

void save_dataset_jsonl(const Dataset& ds, const std::string& path) {
    std::string out;
    if (ds.icl_kind) {
        for (const TaskInstance& t : ds.icl) out += icl_to_json(t).dump() + "\n";
    } else {
        for (const QAInstance& q : ds.qa) out += qa_to_json(q).dump() + "\n";
    }
    write_file_atomic(path, out);
}

Dataset load_dataset_jsonl(const std::string& path) {
    Dataset ds;
    std::istringstream in(read_text_file(path));
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line);
        if (first) {
            ds.icl_kind = j.contains("function");
            first = false;
        }
        if (ds.icl_kind) ds.icl.push_back(icl_from_json(j));
        else ds.qa.push_back(qa_from_json(j));
    }
    return ds;
}

}  // namespace prunelab

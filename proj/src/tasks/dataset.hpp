// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tasks/facts.hpp"
#include "tasks/functions.hpp"

namespace prunelab {

// An evaluation dataset: either ICL task instances or QA instances.
struct Dataset {
    std::string task_id;
    bool icl_kind = false;
    std::vector<TaskInstance> icl;
    std::vector<QAInstance> qa;

    std::size_t size() const { return icl_kind ? icl.size() : qa.size(); }
};

Dataset make_icl_dataset(const std::string& task_id, FunctionVariant family, std::uint64_t seed,
                         int dim, int n_exemplars, int n_instances);
Dataset make_qa_dataset(const std::string& task_id, const FactUniverse& universe, QAMode mode,
                        std::uint64_t seed, int n_instances);

// One JSON object per line; field names are part of the on-disk contract
// (see docs/formats.md).
void save_dataset_jsonl(const Dataset& ds, const std::string& path);
Dataset load_dataset_jsonl(const std::string& path);

}  // namespace prunelab

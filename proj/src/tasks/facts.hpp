// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace prunelab {

// One synthetic fact: (subject, relation) -> object, with the sentence
// template used whenever the fact is rendered as text.
struct FactRecord {
    int subject = 0;
    int relation = 0;
    int object = 0;
    int sentence_template_id = 0;
};

struct FactUniverse {
    int n_subjects = 0;
    int n_relations = 0;
    int n_objects = 0;
    std::vector<FactRecord> records;  // exactly n_subjects * n_relations, key-ordered

    const FactRecord& fact(int subject, int relation) const {
        return records[static_cast<std::size_t>(subject) * n_relations + relation];
    }
};

// Deterministic universe with one true object per (subject, relation) key,
// objects drawn uniformly. Throws std::invalid_argument when any count < 2.
FactUniverse gen_fact_universe(std::uint64_t seed, int n_subjects, int n_relations, int n_objects);

// Single-line declarative rendering used for pretraining text and as
// open-book evidence. Template 0: "s3 r1 o7 ."  Template 1: "s3 r1 is o7 ."
std::string render_fact_sentence(const FactRecord& fact);
// Same templates with the object overridden (overriding evidence).
std::string render_fact_sentence_with_object(const FactRecord& fact, int object);

// Question text for a (subject, relation) key: "s3 r1 ?"
std::string render_question(int subject, int relation);

enum class QAMode { closed_book, open_book, override_book };

std::string qa_mode_name(QAMode mode);

struct QADemo {
    std::optional<std::string> evidence;
    std::string question;
    std::string answer;
};

struct QAInstance {
    QAMode mode = QAMode::closed_book;
    QADemo demo;
    std::optional<std::string> evidence;
    std::string question;
    std::string gold_answer;
    std::string prompt;
    int subject = 0;    // test fact key, for audits
    int relation = 0;
};

// One evaluation instance for the given mode. The demonstration triplet is
// drawn from a different subject than the test question. Overriding mode
// samples a uniformly random wrong object as the gold answer and requires
// at least two objects in the universe.
QAInstance gen_qa_instance(const FactUniverse& universe, QAMode mode, Rng& rng);

// Byte-exact prompt rendering:
//   "Answer these questions:\n"
//   [demo]  "Context: <evidence>\n"?  "Q: <question>\n"  "A: <answer>\n"
//   [test]  "Context: <evidence>\n"?  "Q: <question>\n"  "A:"
std::string render_qa_prompt(const QAInstance& qa);

}  // namespace prunelab

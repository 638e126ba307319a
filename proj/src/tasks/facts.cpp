// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tasks/facts.hpp"

#include <stdexcept>

#include "tasks/vocab.hpp"

namespace prunelab {

FactUniverse gen_fact_universe(std::uint64_t seed, int n_subjects, int n_relations,
                               int n_objects) {
    if (n_subjects < 2 || n_relations < 2 || n_objects < 2) {
        throw std::invalid_argument("gen_fact_universe: all counts must be >= 2");
    }
    FactUniverse u;
    u.n_subjects = n_subjects;
    u.n_relations = n_relations;
    u.n_objects = n_objects;
    u.records.reserve(static_cast<std::size_t>(n_subjects) * n_relations);
    Rng rng(seed);
    for (int s = 0; s < n_subjects; ++s) {
        for (int r = 0; r < n_relations; ++r) {
            FactRecord f;
            f.subject = s;
            f.relation = r;
            f.object = rng.uniform_int(0, n_objects - 1);
            f.sentence_template_id = rng.uniform_int(0, 1);
            u.records.push_back(f);
        }
    }
    return u;
}

std::string render_fact_sentence_with_object(const FactRecord& fact, int object) {
    const std::string s = Vocab::subject_name(fact.subject);
    const std::string r = Vocab::relation_name(fact.relation);
    const std::string o = Vocab::object_name(object);
    if (fact.sentence_template_id == 1) return s + " " + r + " is " + o + " .";
    return s + " " + r + " " + o + " .";
}

std::string render_fact_sentence(const FactRecord& fact) {
    return render_fact_sentence_with_object(fact, fact.object);
}

std::string render_question(int subject, int relation) {
    return Vocab::subject_name(subject) + " " + Vocab::relation_name(relation) + " ?";
}

std::string qa_mode_name(QAMode mode) {
    switch (mode) {
        case QAMode::closed_book: return "closed_book";
        case QAMode::open_book: return "open_book";
        case QAMode::override_book: return "override";
    }
    return "?";
}

namespace {

// Uniform object id different from `avoid`.
int sample_other_object(const FactUniverse& u, int avoid, Rng& rng) {
    int o = rng.uniform_int(0, u.n_objects - 2);
    if (o >= avoid) ++o;
    return o;
}

}  // namespace

QAInstance gen_qa_instance(const FactUniverse& universe, QAMode mode, Rng& rng) {
    if (universe.records.empty()) throw std::invalid_argument("gen_qa_instance: empty universe");
    if (mode == QAMode::override_book && universe.n_objects < 2) {
        throw std::invalid_argument("gen_qa_instance: override mode needs >= 2 objects");
    }

    const int test_subject = rng.uniform_int(0, universe.n_subjects - 1);
    const int test_relation = rng.uniform_int(0, universe.n_relations - 1);
    const FactRecord& test_fact = universe.fact(test_subject, test_relation);

    int demo_subject = rng.uniform_int(0, universe.n_subjects - 2);
    if (demo_subject >= test_subject) ++demo_subject;
    const int demo_relation = rng.uniform_int(0, universe.n_relations - 1);
    const FactRecord& demo_fact = universe.fact(demo_subject, demo_relation);

    QAInstance qa;
    qa.mode = mode;
    qa.subject = test_subject;
    qa.relation = test_relation;
    qa.question = render_question(test_subject, test_relation);
    qa.demo.question = render_question(demo_subject, demo_relation);

    switch (mode) {
        case QAMode::closed_book:
            qa.gold_answer = Vocab::object_name(test_fact.object);
            qa.demo.answer = Vocab::object_name(demo_fact.object);
            break;
        case QAMode::open_book:
            qa.gold_answer = Vocab::object_name(test_fact.object);
            qa.evidence = render_fact_sentence(test_fact);
            qa.demo.answer = Vocab::object_name(demo_fact.object);
            qa.demo.evidence = render_fact_sentence(demo_fact);
            break;
        case QAMode::override_book: {
            const int fake = sample_other_object(universe, test_fact.object, rng);
            qa.gold_answer = Vocab::object_name(fake);
            qa.evidence = render_fact_sentence_with_object(test_fact, fake);
            const int demo_fake = sample_other_object(universe, demo_fact.object, rng);
            qa.demo.answer = Vocab::object_name(demo_fake);
            qa.demo.evidence = render_fact_sentence_with_object(demo_fact, demo_fake);
            break;
        }
    }
    qa.prompt = render_qa_prompt(qa);
    return qa;
}

std::string render_qa_prompt(const QAInstance& qa) {
    std::string out = "Answer these questions:\n";
    if (qa.demo.evidence.has_value()) out += "Context: " + *qa.demo.evidence + "\n";
    out += "Q: " + qa.demo.question + "\n";
    out += "A: " + qa.demo.answer + "\n";
    if (qa.evidence.has_value()) out += "Context: " + *qa.evidence + "\n";
    out += "Q: " + qa.question + "\n";
    out += "A:";
    return out;
}

}  // namespace prunelab

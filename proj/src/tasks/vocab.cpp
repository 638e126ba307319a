// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tasks/vocab.hpp"

#include <cctype>
#include <stdexcept>

namespace prunelab {

namespace {
// Structural single-character tokens, fixed order.
const char* kChars = "\n 0123456789-[],=:?.";
// Scaffolding words used by the prompt formats and fact sentences.
const char* const kWords[] = {"Q", "A", "Context", "Answer", "these", "questions", "is"};
}  // namespace

Vocab::Vocab(int n_subjects, int n_relations, int n_objects)
    : n_subjects_(n_subjects), n_relations_(n_relations), n_objects_(n_objects) {
    for (const char* c = kChars; *c != '\0'; ++c) add(std::string(1, *c));
    newline_id_ = 0;
    for (const char* w : kWords) add(w);
    subject0_ = size();
    for (int i = 0; i < n_subjects; ++i) add(subject_name(i));
    relation0_ = size();
    for (int i = 0; i < n_relations; ++i) add(relation_name(i));
    object0_ = size();
    for (int i = 0; i < n_objects; ++i) add(object_name(i));
}

void Vocab::add(const std::string& tok) {
    lookup_.emplace(tok, size());
    tokens_.push_back(tok);
}

std::vector<int> Vocab::encode(std::string_view text) const {
    std::vector<int> out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isalpha(static_cast<unsigned char>(c))) {
            // Maximal [A-Za-z]+[0-9]* chunk: a word or an entity name.
            std::size_t j = i + 1;
            while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            const std::string chunk(text.substr(i, j - i));
            auto it = lookup_.find(chunk);
            if (it == lookup_.end())
                throw std::invalid_argument("vocab: unknown word '" + chunk + "'");
            out.push_back(it->second);
            i = j;
        } else {
            auto it = lookup_.find(std::string(1, c));
            if (it == lookup_.end())
                throw std::invalid_argument(std::string("vocab: unknown character '") + c + "'");
            out.push_back(it->second);
            ++i;
        }
    }
    return out;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
        if (id < 0 || id >= size()) throw std::invalid_argument("vocab: token id out of range");
        out += tokens_[static_cast<std::size_t>(id)];
    }
    return out;
}

}  // namespace prunelab

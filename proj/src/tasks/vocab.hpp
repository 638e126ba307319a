// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace prunelab {

// Closed vocabulary over the synthetic language: word-level tokens for
// entities and question-answer scaffolding, one token per character for
// digits, signs, brackets, comma, space, newline, '=' and friends.
//
// Token id order is a pure function of (n_subjects, n_relations, n_objects),
// so two universes with equal counts share a vocabulary.
class Vocab {
  public:
    Vocab() = default;
    Vocab(int n_subjects, int n_relations, int n_objects);

    int size() const { return static_cast<int>(tokens_.size()); }
    const std::string& token(int id) const { return tokens_[static_cast<std::size_t>(id)]; }

    // Throws std::invalid_argument on text outside the closed vocabulary.
    std::vector<int> encode(std::string_view text) const;
    std::string decode(const std::vector<int>& ids) const;

    int newline_id() const { return newline_id_; }

    int subject_id(int idx) const { return subject0_ + idx; }
    int relation_id(int idx) const { return relation0_ + idx; }
    int object_id(int idx) const { return object0_ + idx; }

    static std::string subject_name(int idx) { return "s" + std::to_string(idx); }
    static std::string relation_name(int idx) { return "r" + std::to_string(idx); }
    static std::string object_name(int idx) { return "o" + std::to_string(idx); }

    int n_subjects() const { return n_subjects_; }
    int n_relations() const { return n_relations_; }
    int n_objects() const { return n_objects_; }

  private:
    void add(const std::string& tok);

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> lookup_;
    int newline_id_ = -1;
    int subject0_ = -1, relation0_ = -1, object0_ = -1;
    int n_subjects_ = 0, n_relations_ = 0, n_objects_ = 0;
};

}  // namespace prunelab

// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prunelab {

std::string read_text_file(const std::string& path);
std::vector<std::uint8_t> read_binary_file(const std::string& path);

// Durable write: write to <path>.tmp then rename. Creates parent directories.
void write_file_atomic(const std::string& path, const void* data, std::size_t n);
void write_file_atomic(const std::string& path, const std::string& text);

void ensure_dir(const std::string& path);
bool file_exists(const std::string& path);

// 16 lowercase hex digits of fnv1a64.
std::string hash_hex(const std::string& payload);

}  // namespace prunelab

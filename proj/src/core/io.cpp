// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "core/rng.hpp"

namespace prunelab {

namespace fs = std::filesystem;

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open file: " + path);
    std::string out((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return out;
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open file: " + path);
    std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
    return out;
}

void ensure_dir(const std::string& path) {
    if (!path.empty()) fs::create_directories(path);
}

bool file_exists(const std::string& path) { return fs::exists(path); }

void write_file_atomic(const std::string& path, const void* data, std::size_t n) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open file for writing: " + tmp);
        f.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

void write_file_atomic(const std::string& path, const std::string& text) {
    write_file_atomic(path, text.data(), text.size());
}

std::string hash_hex(const std::string& payload) {
    std::uint64_t h = fnv1a64(payload);
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace prunelab

// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace prunelab {

// Dense row-major matrix of doubles. Value semantics; no views.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }

    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t size() const { return a.size(); }
    double* data() { return a.data(); }
    const double* data() const { return a.data(); }
};

}  // namespace prunelab

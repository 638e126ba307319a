// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Row-level kernel bodies shared by the OpenMP and serial entry points.
// Keeping a single definition of each inner loop guarantees the two
// variants perform the same floating-point operations in the same order.

#pragma once

#include <cmath>

namespace prunelab::kernels::detail {

inline double dot(const double* __restrict x, const double* __restrict y, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

// c_row[n] = a_row[k] dot each row of b[n x k]
inline void matmul_nt_row(const double* __restrict a_row, const double* __restrict b,
                          double* __restrict c_row, int k, int n) {
    for (int j = 0; j < n; ++j) {
        c_row[j] = dot(a_row, b + static_cast<long long>(j) * k, k);
    }
}

// c_row[n] = sum_p a_row[p] * b[p, :]
inline void matmul_nn_row(const double* __restrict a_row, const double* __restrict b,
                          double* __restrict c_row, int k, int n) {
    for (int j = 0; j < n; ++j) c_row[j] = 0.0;
    for (int p = 0; p < k; ++p) {
        const double av = a_row[p];
        const double* __restrict b_row = b + static_cast<long long>(p) * n;
        for (int j = 0; j < n; ++j) c_row[j] += av * b_row[j];
    }
}

// c[kc, :] += sum_m a[m, kc] * b[m, :]   for one output row kc
inline void matmul_tn_acc_row(const double* __restrict a, const double* __restrict b,
                              double* __restrict c_row, int kc, int m, int k, int n) {
    for (int r = 0; r < m; ++r) {
        const double av = a[static_cast<long long>(r) * k + kc];
        const double* __restrict b_row = b + static_cast<long long>(r) * n;
        for (int j = 0; j < n; ++j) c_row[j] += av * b_row[j];
    }
}

inline void layernorm_fwd_row(const double* __restrict x, const double* __restrict gain,
                              const double* __restrict bias, double* __restrict y,
                              double* __restrict mean, double* __restrict rstd, int d) {
    double mu = 0.0;
    for (int i = 0; i < d; ++i) mu += x[i];
    mu /= d;
    double var = 0.0;
    for (int i = 0; i < d; ++i) {
        const double c = x[i] - mu;
        var += c * c;
    }
    var /= d;
    const double rs = 1.0 / std::sqrt(var + 1e-5);
    for (int i = 0; i < d; ++i) y[i] = (x[i] - mu) * rs * gain[i] + bias[i];
    *mean = mu;
    *rstd = rs;
}

inline void layernorm_bwd_row(const double* __restrict x, const double* __restrict gain,
                              double mean, double rstd, const double* __restrict dy,
                              double* __restrict dx, int d) {
    // dx = rstd * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat))
    double s1 = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < d; ++i) {
        const double xhat = (x[i] - mean) * rstd;
        const double dxh = dy[i] * gain[i];
        s1 += dxh;
        s2 += dxh * xhat;
    }
    s1 /= d;
    s2 /= d;
    for (int i = 0; i < d; ++i) {
        const double xhat = (x[i] - mean) * rstd;
        const double dxh = dy[i] * gain[i];
        dx[i] = rstd * (dxh - s1 - xhat * s2);
    }
}

inline double gelu_one(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

inline double gelu_grad_one(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
    const double pdf = std::exp(-0.5 * x * x) * 0.3989422804014326779;  // 1/sqrt(2*pi)
    return cdf + x * pdf;
}

// One query position of causal attention for one head.
inline void attention_fwd_row(const double* __restrict q, const double* __restrict k,
                              const double* __restrict v, double* __restrict out, int qt, int t,
                              int stride, int offset, int head_dim, double* __restrict probs_row) {
    (void)t;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    const double* qv = q + static_cast<long long>(qt) * stride + offset;
    double maxs = -1e300;
    for (int u = 0; u <= qt; ++u) {
        const double s = dot(qv, k + static_cast<long long>(u) * stride + offset, head_dim) * scale;
        probs_row[u] = s;
        if (s > maxs) maxs = s;
    }
    double denom = 0.0;
    for (int u = 0; u <= qt; ++u) {
        const double e = std::exp(probs_row[u] - maxs);
        probs_row[u] = e;
        denom += e;
    }
    const double inv = 1.0 / denom;
    for (int u = 0; u <= qt; ++u) probs_row[u] *= inv;
    double* o = out + static_cast<long long>(qt) * stride + offset;
    for (int i = 0; i < head_dim; ++i) o[i] = 0.0;
    for (int u = 0; u <= qt; ++u) {
        const double p = probs_row[u];
        const double* vv = v + static_cast<long long>(u) * stride + offset;
        for (int i = 0; i < head_dim; ++i) o[i] += p * vv[i];
    }
}

// dlogits may alias logits (in-place use): each element is read before it is
// written and the target logit is saved up front.
inline double softmax_xent_row(const double* logits, int target, int v, double* dlogits,
                               double grad_scale) {
    double maxl = logits[0];
    for (int j = 1; j < v; ++j)
        if (logits[j] > maxl) maxl = logits[j];
    double denom = 0.0;
    for (int j = 0; j < v; ++j) denom += std::exp(logits[j] - maxl);
    const double lse = maxl + std::log(denom);
    const double nll = lse - logits[target];
    if (dlogits != nullptr) {
        const double inv = 1.0 / denom;
        for (int j = 0; j < v; ++j) {
            const double p = std::exp(logits[j] - maxl) * inv;
            dlogits[j] = (p - (j == target ? 1.0 : 0.0)) * grad_scale;
        }
    }
    return nll;
}

}  // namespace prunelab::kernels::detail

// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Serial reference kernels. These share their inner-loop bodies with the
// OpenMP variants, so the tests can require exact agreement.

#include <cmath>
#include <vector>

#include "kernels/kernels.hpp"
#include "kernels/kernels_detail.hpp"

namespace prunelab::kernels::ref {

using namespace detail;

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        matmul_nt_row(a + static_cast<long long>(i) * k, b, c + static_cast<long long>(i) * n, k,
                      n);
    }
}

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        matmul_nn_row(a + static_cast<long long>(i) * k, b, c + static_cast<long long>(i) * n, k,
                      n);
    }
}

void matmul_tn_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int kc = 0; kc < k; ++kc) {
        matmul_tn_acc_row(a, b, c + static_cast<long long>(kc) * n, kc, m, k, n);
    }
}

void layernorm_fwd(const double* x, const double* gain, const double* bias, double* y,
                   double* mean, double* rstd, int t, int d) {
    for (int r = 0; r < t; ++r) {
        const long long off = static_cast<long long>(r) * d;
        layernorm_fwd_row(x + off, gain, bias, y + off, mean + r, rstd + r, d);
    }
}

void layernorm_bwd(const double* x, const double* gain, const double* mean, const double* rstd,
                   const double* dy, double* dx, double* dgain, double* dbias, int t, int d) {
    for (int r = 0; r < t; ++r) {
        const long long off = static_cast<long long>(r) * d;
        layernorm_bwd_row(x + off, gain, mean[r], rstd[r], dy + off, dx + off, d);
    }
    for (int r = 0; r < t; ++r) {
        const long long off = static_cast<long long>(r) * d;
        for (int i = 0; i < d; ++i) {
            const double xhat = (x[off + i] - mean[r]) * rstd[r];
            dgain[i] += dy[off + i] * xhat;
            dbias[i] += dy[off + i];
        }
    }
}

void gelu_fwd(const double* x, double* y, long long n) {
    for (long long i = 0; i < n; ++i) y[i] = gelu_one(x[i]);
}

void gelu_bwd(const double* x, const double* dy, double* dx, long long n) {
    for (long long i = 0; i < n; ++i) dx[i] = dy[i] * gelu_grad_one(x[i]);
}

void attention_fwd(const double* q, const double* k, const double* v, double* out, int t,
                   int n_heads, int head_dim, double* probs_scratch) {
    const int stride = n_heads * head_dim;
    for (int h = 0; h < n_heads; ++h) {
        const int offset = h * head_dim;
        for (int qt = 0; qt < t; ++qt) {
            attention_fwd_row(q, k, v, out, qt, t, stride, offset, head_dim,
                              probs_scratch + static_cast<long long>(qt) * t);
        }
    }
}

void attention_bwd(const double* q, const double* k, const double* v, const double* dout,
                   double* dq, double* dk, double* dv, int t, int n_heads, int head_dim,
                   double* probs_scratch, double* dscores_scratch) {
    const int stride = n_heads * head_dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    for (int h = 0; h < n_heads; ++h) {
        const int offset = h * head_dim;
        for (int qt = 0; qt < t; ++qt) {
            double* p = probs_scratch + static_cast<long long>(qt) * t;
            const double* qv = q + static_cast<long long>(qt) * stride + offset;
            double maxs = -1e300;
            for (int u = 0; u <= qt; ++u) {
                const double s =
                    dot(qv, k + static_cast<long long>(u) * stride + offset, head_dim) * scale;
                p[u] = s;
                if (s > maxs) maxs = s;
            }
            double denom = 0.0;
            for (int u = 0; u <= qt; ++u) {
                const double e = std::exp(p[u] - maxs);
                p[u] = e;
                denom += e;
            }
            const double inv = 1.0 / denom;
            for (int u = 0; u <= qt; ++u) p[u] *= inv;
        }
        for (int qt = 0; qt < t; ++qt) {
            const double* p = probs_scratch + static_cast<long long>(qt) * t;
            double* ds = dscores_scratch + static_cast<long long>(qt) * t;
            const double* do_row = dout + static_cast<long long>(qt) * stride + offset;
            double inner = 0.0;
            for (int u = 0; u <= qt; ++u) {
                const double s =
                    dot(do_row, v + static_cast<long long>(u) * stride + offset, head_dim);
                ds[u] = s;
                inner += p[u] * s;
            }
            for (int u = 0; u <= qt; ++u) ds[u] = p[u] * (ds[u] - inner);
        }
        for (int qt = 0; qt < t; ++qt) {
            const double* ds = dscores_scratch + static_cast<long long>(qt) * t;
            double* dq_row = dq + static_cast<long long>(qt) * stride + offset;
            for (int i = 0; i < head_dim; ++i) dq_row[i] = 0.0;
            for (int u = 0; u <= qt; ++u) {
                const double w = ds[u] * scale;
                const double* kv = k + static_cast<long long>(u) * stride + offset;
                for (int i = 0; i < head_dim; ++i) dq_row[i] += w * kv[i];
            }
        }
        for (int u = 0; u < t; ++u) {
            double* dk_row = dk + static_cast<long long>(u) * stride + offset;
            double* dv_row = dv + static_cast<long long>(u) * stride + offset;
            for (int i = 0; i < head_dim; ++i) {
                dk_row[i] = 0.0;
                dv_row[i] = 0.0;
            }
            for (int qt = u; qt < t; ++qt) {
                const double w = dscores_scratch[static_cast<long long>(qt) * t + u] * scale;
                const double p = probs_scratch[static_cast<long long>(qt) * t + u];
                const double* q_row = q + static_cast<long long>(qt) * stride + offset;
                const double* do_row = dout + static_cast<long long>(qt) * stride + offset;
                for (int i = 0; i < head_dim; ++i) {
                    dk_row[i] += w * q_row[i];
                    dv_row[i] += p * do_row[i];
                }
            }
        }
    }
}

double softmax_xent(const double* logits, const int* targets, int t, int v, double* dlogits,
                    double grad_scale) {
    double total = 0.0;
    for (int r = 0; r < t; ++r) {
        const long long off = static_cast<long long>(r) * v;
        total += softmax_xent_row(logits + off, targets[r], v,
                                  dlogits == nullptr ? nullptr : dlogits + off, grad_scale);
    }
    return total;
}

}  // namespace prunelab::kernels::ref

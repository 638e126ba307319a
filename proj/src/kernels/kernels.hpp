// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense double-precision kernels for the transformer forward/backward pass.
//
// Every parallel kernel is partitioned over independent output rows, and
// each output element is accumulated in a fixed serial order. Results are
// therefore bit-identical regardless of the number of OpenMP threads, and
// bit-identical to the serial reference implementations in kernels::ref.

#pragma once

namespace prunelab::kernels {

// c[m x n] = a[m x k] * b[n x k]^T   (b holds one output feature per row)
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);

// c[m x n] = a[m x k] * b[k x n]
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);

// c[k x n] += a[m x k]^T * b[m x n]   (weight-gradient accumulation)
void matmul_tn_acc(const double* a, const double* b, double* c, int m, int k, int n);

// Per-position layer norm over rows of x[t x d]; saves mean/rstd for backward.
void layernorm_fwd(const double* x, const double* gain, const double* bias, double* y,
                   double* mean, double* rstd, int t, int d);
void layernorm_bwd(const double* x, const double* gain, const double* mean, const double* rstd,
                   const double* dy, double* dx, double* dgain, double* dbias, int t, int d);

// Exact GELU: 0.5 * x * (1 + erf(x / sqrt(2))).
void gelu_fwd(const double* x, double* y, long long n);
void gelu_bwd(const double* x, const double* dy, double* dx, long long n);

// Causal multi-head self-attention over a single window. q, k, v, out are
// [t x (n_heads * head_dim)] with heads packed contiguously per position.
// probs_scratch must hold t*t doubles; dscores_scratch likewise for backward.
void attention_fwd(const double* q, const double* k, const double* v, double* out, int t,
                   int n_heads, int head_dim, double* probs_scratch);
void attention_bwd(const double* q, const double* k, const double* v, const double* dout,
                   double* dq, double* dk, double* dv, int t, int n_heads, int head_dim,
                   double* probs_scratch, double* dscores_scratch);

// Softmax cross entropy over rows of logits[t x v] against targets[t].
// Returns the summed negative log likelihood. When dlogits is non-null it
// receives (softmax - onehot) * grad_scale per row.
double softmax_xent(const double* logits, const int* targets, int t, int v, double* dlogits,
                    double grad_scale);

// Single-row softmax (serial; used by decoding and tests).
void softmax_row(const double* x, double* y, int n);

namespace ref {
// Serial reference implementations with identical contracts.
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_tn_acc(const double* a, const double* b, double* c, int m, int k, int n);
void layernorm_fwd(const double* x, const double* gain, const double* bias, double* y,
                   double* mean, double* rstd, int t, int d);
void layernorm_bwd(const double* x, const double* gain, const double* mean, const double* rstd,
                   const double* dy, double* dx, double* dgain, double* dbias, int t, int d);
void gelu_fwd(const double* x, double* y, long long n);
void gelu_bwd(const double* x, const double* dy, double* dx, long long n);
void attention_fwd(const double* q, const double* k, const double* v, double* out, int t,
                   int n_heads, int head_dim, double* probs_scratch);
void attention_bwd(const double* q, const double* k, const double* v, const double* dout,
                   double* dq, double* dk, double* dv, int t, int n_heads, int head_dim,
                   double* probs_scratch, double* dscores_scratch);
double softmax_xent(const double* logits, const int* targets, int t, int v, double* dlogits,
                    double grad_scale);
}  // namespace ref

}  // namespace prunelab::kernels

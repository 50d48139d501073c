// SPDX-License-Identifier: Apache-2.0
// ----------------------------------------------------------------------------
// Copyright 2026 The polcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at:
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.
// ----------------------------------------------------------------------------

#pragma once

// Differentiable operations. Every op validates shapes, computes its forward
// values eagerly and, when any input tracks gradients, records a backward
// closure. Batch-parallel loops reduce per-sample partial gradients in sample
// order so results do not depend on the thread count.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "polcast/nn/tensor.hpp"

namespace polcast::nn {

namespace detail {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

struct ConvGeometry {
    int ci, h, w, k, stride, pad, ho, wo;
    int rows() const { return ci * k * k; }
    int cols() const { return ho * wo; }
    bool is_pointwise() const { return k == 1 && stride == 1 && pad == 0; }
};

template <class T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
    const int hw = g.cols();
    for (int c = 0; c < g.ci; ++c) {
        for (int ky = 0; ky < g.k; ++ky) {
            for (int kx = 0; kx < g.k; ++kx) {
                T* row = col + static_cast<std::size_t>((c * g.k + ky) * g.k + kx) * hw;
                for (int oy = 0; oy < g.ho; ++oy) {
                    const int iy = oy * g.stride - g.pad + ky;
                    T* dst = row + static_cast<std::size_t>(oy) * g.wo;
                    if (iy < 0 || iy >= g.h) {
                        std::fill(dst, dst + g.wo, T(0));
                        continue;
                    }
                    const T* src = x + (static_cast<std::size_t>(c) * g.h + iy) * g.w;
                    for (int ox = 0; ox < g.wo; ++ox) {
                        const int ix = ox * g.stride - g.pad + kx;
                        dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : T(0);
                    }
                }
            }
        }
    }
}

template <class T>
void col2im_add(const T* col, const ConvGeometry& g, T* x) {
    const int hw = g.cols();
    for (int c = 0; c < g.ci; ++c) {
        for (int ky = 0; ky < g.k; ++ky) {
            for (int kx = 0; kx < g.k; ++kx) {
                const T* row = col + static_cast<std::size_t>((c * g.k + ky) * g.k + kx) * hw;
                for (int oy = 0; oy < g.ho; ++oy) {
                    const int iy = oy * g.stride - g.pad + ky;
                    if (iy < 0 || iy >= g.h) continue;
                    const T* src = row + static_cast<std::size_t>(oy) * g.wo;
                    T* dst = x + (static_cast<std::size_t>(c) * g.h + iy) * g.w;
                    for (int ox = 0; ox < g.wo; ++ox) {
                        const int ix = ox * g.stride - g.pad + kx;
                        if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

template <class T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DomainError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
}

}  // namespace detail

/// Cross-correlation with zero padding. `w` is (Co, Ci, k, k) with odd k,
/// `b` (optional) is (1, Co, 1, 1).
template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride = 1, int padding = 0) {
    const int co = w.n();
    const int k = w.h();
    if (x.c() != w.c()) throw DomainError("conv2d: input channels " + std::to_string(x.c()) + " != kernel channels " + std::to_string(w.c()));
    if (w.h() != w.w() || k % 2 == 0) throw DomainError("conv2d: kernel must be square and odd-sized");
    if (stride < 1 || padding < 0) throw DomainError("conv2d: invalid stride or padding");
    if (b.defined() && b.shape() != Shape{1, co, 1, 1}) throw DomainError("conv2d: bias must be (1, Co, 1, 1)");
    const int ho = (x.h() + 2 * padding - k) / stride + 1;
    const int wo = (x.w() + 2 * padding - k) / stride + 1;
    if (ho < 1 || wo < 1) throw DomainError("conv2d: kernel larger than padded input");

    const detail::ConvGeometry g{x.c(), x.h(), x.w(), k, stride, padding, ho, wo};
    const int batch = x.n();
    const std::size_t in_stride = static_cast<std::size_t>(g.ci) * g.h * g.w;
    const std::size_t out_stride = static_cast<std::size_t>(co) * g.cols();

    std::vector<std::shared_ptr<Node<T>>> parents{x.node_ptr(), w.node_ptr()};
    if (b.defined()) parents.push_back(b.node_ptr());

    Node<T>* xn = x.node();
    Node<T>* wn = w.node();
    Node<T>* bn = b.defined() ? b.node() : nullptr;

    Tensor<T> out = make_result<T>({batch, co, ho, wo}, "conv2d", std::move(parents), [=](Node<T>& self) {
        const detail::ConstMatMap<T> wmat(wn->value.data(), co, g.rows());
        std::vector<detail::RowMat<T>> wparts(wn->requires_grad ? batch : 0);
#pragma omp parallel for schedule(static) if (batch > 1)
        for (int n = 0; n < batch; ++n) {
            const detail::ConstMatMap<T> gout(self.grad.data() + n * out_stride, co, g.cols());
            std::vector<T> colbuf;
            const T* col = xn->value.data() + n * in_stride;
            if (!g.is_pointwise()) {
                colbuf.resize(static_cast<std::size_t>(g.rows()) * g.cols());
                detail::im2col(xn->value.data() + n * in_stride, g, colbuf.data());
                col = colbuf.data();
            }
            if (wn->requires_grad) {
                wparts[n].noalias() = gout * detail::ConstMatMap<T>(col, g.rows(), g.cols()).transpose();
            }
            if (xn->requires_grad) {
                T* xg = xn->grad.data() + n * in_stride;
                if (g.is_pointwise()) {
                    detail::MatMap<T>(xg, g.rows(), g.cols()).noalias() += wmat.transpose() * gout;
                } else {
                    detail::RowMat<T> dcol = wmat.transpose() * gout;
                    detail::col2im_add(dcol.data(), g, xg);
                }
            }
        }
        if (wn->requires_grad) {
            detail::MatMap<T> wg(wn->grad.data(), co, g.rows());
            for (int n = 0; n < batch; ++n) wg += wparts[n];
        }
        if (bn && bn->requires_grad) {
            for (int n = 0; n < batch; ++n) {
                const detail::ConstMatMap<T> gout(self.grad.data() + n * out_stride, co, g.cols());
                for (int c = 0; c < co; ++c) bn->grad[c] += gout.row(c).sum();
            }
        }
    });
    // Gradient buffers are sized before the (possibly parallel) backward pass.
    if (out.requires_grad()) {
        Node<T>* self = out.node();
        auto inner = std::move(self->backward);
        self->backward = [=, inner = std::move(inner)](Node<T>& s) {
            if (xn->requires_grad) xn->ensure_grad();
            if (wn->requires_grad) wn->ensure_grad();
            if (bn && bn->requires_grad) bn->ensure_grad();
            inner(s);
        };
    }

    const detail::ConstMatMap<T> wmat(w.values().data(), co, g.rows());
    T* ov = out.values().data();
    const T* xv = x.values().data();
    const T* bv = b.defined() ? b.values().data() : nullptr;
#pragma omp parallel for schedule(static) if (batch > 1)
    for (int n = 0; n < batch; ++n) {
        detail::MatMap<T> omat(ov + n * out_stride, co, g.cols());
        if (g.is_pointwise()) {
            omat.noalias() = wmat * detail::ConstMatMap<T>(xv + n * in_stride, g.rows(), g.cols());
        } else {
            std::vector<T> colbuf(static_cast<std::size_t>(g.rows()) * g.cols());
            detail::im2col(xv + n * in_stride, g, colbuf.data());
            omat.noalias() = wmat * detail::ConstMatMap<T>(colbuf.data(), g.rows(), g.cols());
        }
        if (bv) {
            for (int c = 0; c < co; ++c) omat.row(c).array() += bv[c];
        }
    }
    debug_check_finite(out);
    return out;
}

template <class T>
Tensor<T> relu(const Tensor<T>& x) {
    Node<T>* xn = x.node();
    Tensor<T> out = make_result<T>(x.shape(), "relu", {x.node_ptr()}, [xn](Node<T>& self) {
        auto& g = xn->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (xn->value[i] > T(0)) g[i] += self.grad[i];
        }
    });
    auto ov = out.values();
    auto xv = x.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = xv[i] > T(0) ? xv[i] : T(0);
    return out;
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    Node<T>* xn = x.node();
    Tensor<T> out = make_result<T>(x.shape(), "sigmoid", {x.node_ptr()}, [xn](Node<T>& self) {
        auto& g = xn->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const T s = self.value[i];
            g[i] += self.grad[i] * s * (T(1) - s);
        }
    });
    auto ov = out.values();
    auto xv = x.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = T(1) / (T(1) + std::exp(-xv[i]));
    return out;
}

/// Nearest-neighbour x2 upsampling in both spatial dimensions.
template <class T>
Tensor<T> upsample_nearest(const Tensor<T>& x) {
    const Shape s = x.shape();
    const Shape so{s[0], s[1], 2 * s[2], 2 * s[3]};
    Node<T>* xn = x.node();
    Tensor<T> out = make_result<T>(so, "upsample_nearest", {x.node_ptr()}, [xn, s, so](Node<T>& self) {
        auto& g = xn->ensure_grad();
        for (int p = 0; p < s[0] * s[1]; ++p) {
            for (int y = 0; y < so[2]; ++y) {
                for (int x = 0; x < so[3]; ++x) {
                    g[(static_cast<std::size_t>(p) * s[2] + y / 2) * s[3] + x / 2] +=
                        self.grad[(static_cast<std::size_t>(p) * so[2] + y) * so[3] + x];
                }
            }
        }
    });
    auto ov = out.values();
    auto xv = x.values();
    for (int p = 0; p < s[0] * s[1]; ++p) {
        for (int y = 0; y < so[2]; ++y) {
            for (int xx = 0; xx < so[3]; ++xx) {
                ov[(static_cast<std::size_t>(p) * so[2] + y) * so[3] + xx] =
                    xv[(static_cast<std::size_t>(p) * s[2] + y / 2) * s[3] + xx / 2];
            }
        }
    }
    return out;
}

/// Concatenation along the channel axis.
template <class T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts) {
    if (parts.empty()) throw DomainError("concat: no inputs");
    const Shape s0 = parts.front().shape();
    int channels = 0;
    std::vector<std::shared_ptr<Node<T>>> parents;
    std::vector<Node<T>*> nodes;
    for (const auto& p : parts) {
        if (p.n() != s0[0] || p.h() != s0[2] || p.w() != s0[3]) {
            throw DomainError("concat: batch/spatial mismatch " + shape_str(p.shape()) + " vs " + shape_str(s0));
        }
        channels += p.c();
        parents.push_back(p.node_ptr());
        nodes.push_back(p.node());
    }
    const std::size_t plane = static_cast<std::size_t>(s0[2]) * s0[3];
    const Shape so{s0[0], channels, s0[2], s0[3]};
    Tensor<T> out = make_result<T>(so, "concat", std::move(parents), [nodes, plane, so](Node<T>& self) {
        for (int n = 0; n < so[0]; ++n) {
            std::size_t offset = static_cast<std::size_t>(n) * so[1] * plane;
            for (Node<T>* p : nodes) {
                const std::size_t len = static_cast<std::size_t>(p->shape[1]) * plane;
                if (p->requires_grad) {
                    auto& g = p->ensure_grad();
                    T* dst = g.data() + static_cast<std::size_t>(n) * len;
                    const T* src = self.grad.data() + offset;
                    for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
                }
                offset += len;
            }
        }
    });
    auto ov = out.values();
    for (int n = 0; n < so[0]; ++n) {
        std::size_t offset = static_cast<std::size_t>(n) * so[1] * plane;
        for (const auto& p : parts) {
            const std::size_t len = static_cast<std::size_t>(p.c()) * plane;
            std::copy_n(p.values().data() + static_cast<std::size_t>(n) * len, len, ov.data() + offset);
            offset += len;
        }
    }
    return out;
}

/// Divides each pixel's channel vector by max(norm, eps).
template <class T>
Tensor<T> l2_normalize(const Tensor<T>& x, T eps = T(1e-8)) {
    const Shape s = x.shape();
    const std::size_t plane = static_cast<std::size_t>(s[2]) * s[3];
    auto norms = std::make_shared<std::vector<T>>(static_cast<std::size_t>(s[0]) * plane);
    Node<T>* xn = x.node();
    Tensor<T> out = make_result<T>(s, "l2_normalize", {x.node_ptr()}, [xn, s, plane, norms, eps](Node<T>& self) {
        auto& g = xn->ensure_grad();
        for (int n = 0; n < s[0]; ++n) {
            const std::size_t base = static_cast<std::size_t>(n) * s[1] * plane;
            for (std::size_t p = 0; p < plane; ++p) {
                const T len = (*norms)[static_cast<std::size_t>(n) * plane + p];
                if (len > eps) {
                    T dot = 0;
                    for (int c = 0; c < s[1]; ++c) dot += self.value[base + c * plane + p] * self.grad[base + c * plane + p];
                    for (int c = 0; c < s[1]; ++c) {
                        const std::size_t i = base + c * plane + p;
                        g[i] += (self.grad[i] - self.value[i] * dot) / len;
                    }
                } else {
                    for (int c = 0; c < s[1]; ++c) g[base + c * plane + p] += self.grad[base + c * plane + p] / eps;
                }
            }
        }
    });
    auto ov = out.values();
    auto xv = x.values();
    for (int n = 0; n < s[0]; ++n) {
        const std::size_t base = static_cast<std::size_t>(n) * s[1] * plane;
        for (std::size_t p = 0; p < plane; ++p) {
            T sq = 0;
            for (int c = 0; c < s[1]; ++c) sq += xv[base + c * plane + p] * xv[base + c * plane + p];
            const T len = std::sqrt(sq);
            (*norms)[static_cast<std::size_t>(n) * plane + p] = len;
            const T denom = std::max(len, eps);
            for (int c = 0; c < s[1]; ++c) ov[base + c * plane + p] = xv[base + c * plane + p] / denom;
        }
    }
    return out;
}

namespace detail {

/// Index map for a tensor broadcast against (N, C, H, W) where each of its
/// batch/spatial dims is either 1 or the full size.
struct Broadcast {
    Shape s;
    std::size_t operator()(int n, int c, int h, int w) const {
        const int nn = s[0] == 1 ? 0 : n;
        const int hh = s[2] == 1 ? 0 : h;
        const int ww = s[3] == 1 ? 0 : w;
        return ((static_cast<std::size_t>(nn) * s[1] + c) * s[2] + hh) * s[3] + ww;
    }
};

inline void check_broadcast(const Shape& p, const Shape& x, const char* what) {
    const bool ok = (p[0] == 1 || p[0] == x[0]) && p[1] == x[1] && (p[2] == 1 || p[2] == x[2]) &&
                    (p[3] == 1 || p[3] == x[3]);
    if (!ok) throw DomainError(std::string("film: ") + what + " " + shape_str(p) + " does not broadcast over " + shape_str(x));
}

}  // namespace detail

/// Feature-wise linear modulation: out = gamma * x + beta, with gamma/beta
/// per channel (N or 1, C, 1, 1) or per pixel (N or 1, C, H, W).
template <class T>
Tensor<T> film(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta) {
    const Shape s = x.shape();
    detail::check_broadcast(gamma.shape(), s, "gamma");
    detail::check_broadcast(beta.shape(), s, "beta");
    const detail::Broadcast gi{gamma.shape()};
    const detail::Broadcast bi{beta.shape()};
    Node<T>* xn = x.node();
    Node<T>* gn = gamma.node();
    Node<T>* bn = beta.node();
    Tensor<T> out = make_result<T>(s, "film", {x.node_ptr(), gamma.node_ptr(), beta.node_ptr()},
                                   [=](Node<T>& self) {
                                       if (xn->requires_grad) xn->ensure_grad();
                                       if (gn->requires_grad) gn->ensure_grad();
                                       if (bn->requires_grad) bn->ensure_grad();
                                       std::size_t i = 0;
                                       for (int n = 0; n < s[0]; ++n)
                                           for (int c = 0; c < s[1]; ++c)
                                               for (int h = 0; h < s[2]; ++h)
                                                   for (int w = 0; w < s[3]; ++w, ++i) {
                                                       const T g = self.grad[i];
                                                       const std::size_t gk = gi(n, c, h, w);
                                                       if (xn->requires_grad) xn->grad[i] += gn->value[gk] * g;
                                                       if (gn->requires_grad) gn->grad[gk] += xn->value[i] * g;
                                                       if (bn->requires_grad) bn->grad[bi(n, c, h, w)] += g;
                                                   }
                                   });
    auto ov = out.values();
    auto xv = x.values();
    auto gv = gamma.values();
    auto bv = beta.values();
    std::size_t i = 0;
    for (int n = 0; n < s[0]; ++n)
        for (int c = 0; c < s[1]; ++c)
            for (int h = 0; h < s[2]; ++h)
                for (int w = 0; w < s[3]; ++w, ++i) ov[i] = gv[gi(n, c, h, w)] * xv[i] + bv[bi(n, c, h, w)];
    debug_check_finite(out);
    return out;
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    detail::require_same_shape(a, b, "add");
    Node<T>* an = a.node();
    Node<T>* bn = b.node();
    Tensor<T> out = make_result<T>(a.shape(), "add", {a.node_ptr(), b.node_ptr()}, [an, bn](Node<T>& self) {
        for (Node<T>* p : {an, bn}) {
            if (!p->requires_grad) continue;
            auto& g = p->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = a.values()[i] + b.values()[i];
    return out;
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
    Node<T>* an = a.node();
    Tensor<T> out = make_result<T>(a.shape(), "scale", {a.node_ptr()}, [an, factor](Node<T>& self) {
        auto& g = an->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
    });
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = factor * a.values()[i];
    return out;
}

namespace detail {

template <class T>
std::size_t count_mask(const Tensor<T>& mask) {
    std::size_t count = 0;
    for (T m : mask.values()) count += m > T(0.5) ? 1 : 0;
    return count;
}

template <class T>
void check_loss_shapes(const Tensor<T>& pred, const Tensor<T>& target, const Tensor<T>& mask, const char* op) {
    require_same_shape(pred, target, op);
    if (mask.shape() != Shape{pred.n(), 1, pred.h(), pred.w()}) {
        throw DomainError(std::string(op) + ": mask must be (N, 1, H, W)");
    }
}

}  // namespace detail

/// Clamp margin that keeps d/dx acos(x) finite at perfect alignment.
inline constexpr double kAngularClamp = 1e-7;

/// Mean over masked pixels of the angle (radians) between predicted and
/// target normals. Both are (N, 3, H, W); `mask` is (N, 1, H, W) of 0/1.
template <class T>
Tensor<T> masked_mean_angular_error(const Tensor<T>& pred, const Tensor<T>& target, const Tensor<T>& mask) {
    detail::check_loss_shapes(pred, target, mask, "masked_mean_angular_error");
    if (pred.c() != 3) throw DomainError("masked_mean_angular_error: expected 3 channels");
    const std::size_t count = detail::count_mask(mask);
    if (count == 0) throw DomainError("masked_mean_angular_error: empty mask");
    const Shape s = pred.shape();
    const std::size_t plane = static_cast<std::size_t>(s[2]) * s[3];
    const T lo = T(-1) + T(kAngularClamp);
    const T hi = T(1) - T(kAngularClamp);

    auto dots = std::make_shared<std::vector<T>>(static_cast<std::size_t>(s[0]) * plane, T(0));
    T total = 0;
    auto pv = pred.values();
    auto tv = target.values();
    auto mv = mask.values();
    for (int n = 0; n < s[0]; ++n) {
        const std::size_t base = static_cast<std::size_t>(n) * 3 * plane;
        for (std::size_t p = 0; p < plane; ++p) {
            if (!(mv[n * plane + p] > T(0.5))) continue;
            T d = 0;
            for (int c = 0; c < 3; ++c) d += pv[base + c * plane + p] * tv[base + c * plane + p];
            (*dots)[n * plane + p] = d;
            total += std::acos(std::clamp(d, lo, hi));
        }
    }

    Node<T>* pn = pred.node();
    Node<T>* tn = target.node();
    Node<T>* mn = mask.node();
    Tensor<T> out = make_result<T>({1, 1, 1, 1}, "masked_mean_angular_error", {pred.node_ptr(), target.node_ptr()},
                                   [=](Node<T>& self) {
                                       const T upstream = self.grad[0] / static_cast<T>(count);
                                       for (int n = 0; n < s[0]; ++n) {
                                           const std::size_t base = static_cast<std::size_t>(n) * 3 * plane;
                                           for (std::size_t p = 0; p < plane; ++p) {
                                               if (!(mn->value[n * plane + p] > T(0.5))) continue;
                                               const T d = (*dots)[n * plane + p];
                                               if (d <= lo || d >= hi) continue;
                                               const T dacos = -upstream / std::sqrt(T(1) - d * d);
                                               for (int c = 0; c < 3; ++c) {
                                                   const std::size_t i = base + c * plane + p;
                                                   if (pn->requires_grad) pn->ensure_grad()[i] += dacos * tn->value[i];
                                                   if (tn->requires_grad) tn->ensure_grad()[i] += dacos * pn->value[i];
                                               }
                                           }
                                       }
                                   });
    out.values()[0] = total / static_cast<T>(count);
    debug_check_finite(out);
    return out;
}

/// Mean absolute difference over masked pixels and all channels.
template <class T>
Tensor<T> masked_l1(const Tensor<T>& pred, const Tensor<T>& target, const Tensor<T>& mask) {
    detail::check_loss_shapes(pred, target, mask, "masked_l1");
    const std::size_t count = detail::count_mask(mask) * static_cast<std::size_t>(pred.c());
    if (count == 0) throw DomainError("masked_l1: empty mask");
    const Shape s = pred.shape();
    const std::size_t plane = static_cast<std::size_t>(s[2]) * s[3];
    Node<T>* pn = pred.node();
    Node<T>* tn = target.node();
    Node<T>* mn = mask.node();
    Tensor<T> out = make_result<T>({1, 1, 1, 1}, "masked_l1", {pred.node_ptr(), target.node_ptr()}, [=](Node<T>& self) {
        const T upstream = self.grad[0] / static_cast<T>(count);
        for (int n = 0; n < s[0]; ++n) {
            for (int c = 0; c < s[1]; ++c) {
                for (std::size_t p = 0; p < plane; ++p) {
                    if (!(mn->value[n * plane + p] > T(0.5))) continue;
                    const std::size_t i = (static_cast<std::size_t>(n) * s[1] + c) * plane + p;
                    const T diff = pn->value[i] - tn->value[i];
                    const T sign = diff > T(0) ? T(1) : (diff < T(0) ? T(-1) : T(0));
                    if (pn->requires_grad) pn->ensure_grad()[i] += upstream * sign;
                    if (tn->requires_grad) tn->ensure_grad()[i] -= upstream * sign;
                }
            }
        }
    });
    T total = 0;
    for (int n = 0; n < s[0]; ++n) {
        for (int c = 0; c < s[1]; ++c) {
            for (std::size_t p = 0; p < plane; ++p) {
                if (!(mask.values()[n * plane + p] > T(0.5))) continue;
                const std::size_t i = (static_cast<std::size_t>(n) * s[1] + c) * plane + p;
                total += std::abs(pred.values()[i] - target.values()[i]);
            }
        }
    }
    out.values()[0] = total / static_cast<T>(count);
    return out;
}

}  // namespace polcast::nn

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <tuple>
#include <utility>
#include <vector>

#include "mailocr/tensor.hpp"

namespace mailocr {

enum class BnMode { Train, Infer };

template <class S>
struct BnRunning {
    TensorT<S> mean;
    TensorT<S> var;
};

// Eager reverse-mode tape. Every op computes its value immediately and
// appends a node whose closure scatters the output gradient back to the
// inputs; inputs therefore always precede their consumers. Gradient
// accumulation is additive, so a node consumed k times receives the sum of
// its k contributions.
template <class S>
class TapeT {
public:
    using NodeId = int;

    NodeId leaf(TensorT<S> value) { return push(std::move(value), {}, nullptr); }

    // Detaches a value from the graph: same tensor, no gradient flow.
    NodeId stop_gradient(NodeId x) { return leaf(value(x)); }

    const TensorT<S>& value(NodeId id) const { return nodes_[idx(id)].value; }

    // Zero tensor until backward() has deposited something.
    const TensorT<S>& grad(NodeId id) {
        ensure_grad(id);
        return nodes_[idx(id)].grad;
    }

    std::size_t node_count() const { return nodes_.size(); }

    void reset() { nodes_.clear(); }

    NodeId add(NodeId a, NodeId b) {
        const auto& av = value(a);
        const auto& bv = value(b);
        if (!av.same_shape(bv)) throw ShapeError("add: shape mismatch");
        TensorT<S> out(av.shape);
        for (std::int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] + bv[i];
        return push(std::move(out), {a, b}, [a, b](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            auto& ga = t.gmut(a);
            auto& gb = t.gmut(b);
            for (std::int64_t i = 0; i < g.numel(); ++i) {
                ga[i] += g[i];
                gb[i] += g[i];
            }
        });
    }

    NodeId mul(NodeId a, NodeId b) {
        const auto& av = value(a);
        const auto& bv = value(b);
        if (!av.same_shape(bv)) throw ShapeError("mul: shape mismatch");
        TensorT<S> out(av.shape);
        for (std::int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] * bv[i];
        return push(std::move(out), {a, b}, [a, b](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            const auto& av = t.value(a);
            const auto& bv = t.value(b);
            auto& ga = t.gmut(a);
            auto& gb = t.gmut(b);
            for (std::int64_t i = 0; i < g.numel(); ++i) {
                ga[i] += g[i] * bv[i];
                gb[i] += g[i] * av[i];
            }
        });
    }

    NodeId scale(NodeId a, S c) {
        const auto& av = value(a);
        TensorT<S> out(av.shape);
        for (std::int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] * c;
        return push(std::move(out), {a}, [a, c](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            auto& ga = t.gmut(a);
            for (std::int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * c;
        });
    }

    NodeId relu(NodeId a) {
        const auto& av = value(a);
        TensorT<S> out(av.shape);
        for (std::int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] > S(0) ? av[i] : S(0);
        return push(std::move(out), {a}, [a](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            const auto& av = t.value(a);
            auto& ga = t.gmut(a);
            for (std::int64_t i = 0; i < g.numel(); ++i) {
                if (av[i] > S(0)) ga[i] += g[i];
            }
        });
    }

    NodeId reshape(NodeId a, std::vector<int> shape) {
        const auto& av = value(a);
        if (TensorT<S>::count(shape) != av.numel()) throw ShapeError("reshape: numel mismatch");
        TensorT<S> out(std::move(shape));
        out.data = av.data;
        return push(std::move(out), {a}, [a](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            auto& ga = t.gmut(a);
            for (std::int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
        });
    }

    // x[rest...] -> [n, rest...], value repeated along the new axis.
    NodeId broadcast_batch(NodeId a, int n) {
        const auto& av = value(a);
        std::vector<int> shape;
        shape.push_back(n);
        shape.insert(shape.end(), av.shape.begin(), av.shape.end());
        TensorT<S> out(std::move(shape));
        const std::int64_t m = av.numel();
        for (int b = 0; b < n; ++b) {
            for (std::int64_t i = 0; i < m; ++i) out[b * m + i] = av[i];
        }
        return push(std::move(out), {a}, [a, n, m](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            auto& ga = t.gmut(a);
            for (int b = 0; b < n; ++b) {
                for (std::int64_t i = 0; i < m; ++i) ga[i] += g[b * m + i];
            }
        });
    }

    NodeId sum(NodeId a) {
        const auto& av = value(a);
        double acc = 0;
        for (std::int64_t i = 0; i < av.numel(); ++i) acc += static_cast<double>(av[i]);
        TensorT<S> out({1});
        out[0] = static_cast<S>(acc);
        return push(std::move(out), {a}, [a](TapeT& t, NodeId self) {
            const S g = t.gref(self)[0];
            auto& ga = t.gmut(a);
            for (std::int64_t i = 0; i < ga.numel(); ++i) ga[i] += g;
        });
    }

    // y = x W + b with x[N,D], W[D,M], b[M]
    NodeId linear(NodeId x, NodeId w, NodeId b) {
        const auto& xv = value(x);
        const auto& wv = value(w);
        const auto& bv = value(b);
        if (xv.rank() != 2 || wv.rank() != 2 || bv.rank() != 1) {
            throw ShapeError("linear: expected x[N,D], W[D,M], b[M]");
        }
        const int N = xv.dim(0), D = xv.dim(1), M = wv.dim(1);
        if (wv.dim(0) != D || bv.dim(0) != M) throw ShapeError("linear: inner extents disagree");
        TensorT<S> out({N, M});
        for (int n = 0; n < N; ++n) {
            S* yrow = &out.at(n, 0);
            for (int m = 0; m < M; ++m) yrow[m] = bv[m];
            const S* xrow = &xv.at(n, 0);
            for (int d = 0; d < D; ++d) {
                const S a = xrow[d];
                const S* wrow = &wv.at(d, 0);
                for (int m = 0; m < M; ++m) yrow[m] += a * wrow[m];
            }
        }
        return push(std::move(out), {x, w, b}, [x, w, b, N, D, M](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            const auto& xv = t.value(x);
            const auto& wv = t.value(w);
            auto& gx = t.gmut(x);
            auto& gw = t.gmut(w);
            auto& gb = t.gmut(b);
            for (int n = 0; n < N; ++n) {
                const S* grow = &g.at(n, 0);
                for (int m = 0; m < M; ++m) gb[m] += grow[m];
                S* gxrow = &gx.at(n, 0);
                const S* xrow = &xv.at(n, 0);
                for (int d = 0; d < D; ++d) {
                    const S* wrow = &wv.at(d, 0);
                    S acc = 0;
                    for (int m = 0; m < M; ++m) acc += grow[m] * wrow[m];
                    gxrow[d] += acc;
                    S* gwrow = &gw.at(d, 0);
                    const S a = xrow[d];
                    for (int m = 0; m < M; ++m) gwrow[m] += a * grow[m];
                }
            }
        });
    }

    NodeId matmul(NodeId x, NodeId w) {
        const auto& wv = value(w);
        if (wv.rank() != 2) throw ShapeError("matmul: W must be 2-d");
        TensorT<S> zero({wv.dim(1)});
        return linear(x, w, leaf(std::move(zero)));
    }

    // 3x3 cross-correlation, stride 1, zero padding 1 ("same" output size).
    NodeId conv2d(NodeId x, NodeId k, NodeId bias) {
        const auto& xv = value(x);
        const auto& kv = value(k);
        const auto& bv = value(bias);
        if (xv.rank() != 4 || kv.rank() != 4 || bv.rank() != 1) {
            throw ShapeError("conv2d: expected x[N,C,H,W], k[Co,Ci,3,3], bias[Co]");
        }
        const int N = xv.dim(0), Ci = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
        const int Co = kv.dim(0);
        if (kv.dim(1) != Ci) throw ShapeError("conv2d: channel mismatch");
        if (kv.dim(2) != 3 || kv.dim(3) != 3) throw ShapeError("conv2d: kernel must be 3x3");
        if (bv.dim(0) != Co) throw ShapeError("conv2d: bias extent mismatch");

        const int Hp = H + 2, Wp = W + 2;
        TensorT<S> xpad({N, Ci, Hp, Wp});
        for (int n = 0; n < N; ++n) {
            for (int ci = 0; ci < Ci; ++ci) {
                for (int y = 0; y < H; ++y) {
                    const S* src = &xv.at(n, ci, y, 0);
                    S* dst = &xpad.at(n, ci, y + 1, 1);
                    for (int xx = 0; xx < W; ++xx) dst[xx] = src[xx];
                }
            }
        }

        TensorT<S> out({N, Co, H, W});
        for (int n = 0; n < N; ++n) {
            for (int co = 0; co < Co; ++co) {
                S* yplane = &out.at(n, co, 0, 0);
                const S bval = bv[co];
                for (std::int64_t i = 0; i < static_cast<std::int64_t>(H) * W; ++i) {
                    yplane[i] = bval;
                }
                for (int ci = 0; ci < Ci; ++ci) {
                    const S* xplane = &xpad.at(n, ci, 0, 0);
                    for (int ky = 0; ky < 3; ++ky) {
                        for (int kx = 0; kx < 3; ++kx) {
                            const S wgt = kv.at(co, ci, ky, kx);
                            for (int yy = 0; yy < H; ++yy) {
                                const S* xrow = xplane + (yy + ky) * Wp + kx;
                                S* yrow = yplane + static_cast<std::int64_t>(yy) * W;
                                for (int xx = 0; xx < W; ++xx) yrow[xx] += wgt * xrow[xx];
                            }
                        }
                    }
                }
            }
        }

        auto saved_pad = std::make_shared<TensorT<S>>(std::move(xpad));
        return push(std::move(out), {x, k, bias},
                    [x, k, bias, N, Ci, H, W, Co, Hp, Wp, saved_pad](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            const auto& kv = t.value(k);
            auto& gx = t.gmut(x);
            auto& gk = t.gmut(k);
            auto& gb = t.gmut(bias);
            const TensorT<S>& xpad = *saved_pad;

            for (int co = 0; co < Co; ++co) {
                double acc = 0;
                for (int n = 0; n < N; ++n) {
                    const S* gplane = &g.at(n, co, 0, 0);
                    for (std::int64_t i = 0; i < static_cast<std::int64_t>(H) * W; ++i) {
                        acc += static_cast<double>(gplane[i]);
                    }
                }
                gb[co] += static_cast<S>(acc);
            }

            TensorT<S> gpad({N, Ci, Hp, Wp});
            for (int n = 0; n < N; ++n) {
                for (int co = 0; co < Co; ++co) {
                    const S* gplane = &g.at(n, co, 0, 0);
                    for (int ci = 0; ci < Ci; ++ci) {
                        const S* xplane = &xpad.at(n, ci, 0, 0);
                        S* gxplane = &gpad.at(n, ci, 0, 0);
                        for (int ky = 0; ky < 3; ++ky) {
                            for (int kx = 0; kx < 3; ++kx) {
                                const S wgt = kv.at(co, ci, ky, kx);
                                S dk = 0;
                                for (int yy = 0; yy < H; ++yy) {
                                    const S* grow = gplane + static_cast<std::int64_t>(yy) * W;
                                    const S* xrow = xplane + (yy + ky) * Wp + kx;
                                    S* gxrow = gxplane + (yy + ky) * Wp + kx;
                                    S dot = 0;
                                    for (int xx = 0; xx < W; ++xx) {
                                        dot += grow[xx] * xrow[xx];
                                        gxrow[xx] += wgt * grow[xx];
                                    }
                                    dk += dot;
                                }
                                gk.at(co, ci, ky, kx) += dk;
                            }
                        }
                    }
                }
            }
            for (int n = 0; n < N; ++n) {
                for (int ci = 0; ci < Ci; ++ci) {
                    for (int y = 0; y < H; ++y) {
                        const S* src = &gpad.at(n, ci, y + 1, 1);
                        S* dst = &gx.at(n, ci, y, 0);
                        for (int xx = 0; xx < W; ++xx) dst[xx] += src[xx];
                    }
                }
            }
        });
    }

    NodeId maxpool2x2(NodeId x) {
        const auto& xv = value(x);
        if (xv.rank() != 4) throw ShapeError("maxpool2x2: expected [N,C,H,W]");
        const int N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
        if (H % 2 != 0 || W % 2 != 0) throw ShapeError("maxpool2x2: H and W must be even");
        const int Ho = H / 2, Wo = W / 2;
        TensorT<S> out({N, C, Ho, Wo});
        auto arg = std::make_shared<std::vector<std::int64_t>>(out.data.size());
        std::int64_t o = 0;
        for (int n = 0; n < N; ++n) {
            for (int c = 0; c < C; ++c) {
                const S* plane = &xv.at(n, c, 0, 0);
                const std::int64_t base =
                    (static_cast<std::int64_t>(n) * C + c) * H * W;
                for (int y = 0; y < Ho; ++y) {
                    for (int xx = 0; xx < Wo; ++xx) {
                        // first maximum in scan order wins; keeps ties deterministic
                        std::int64_t best = static_cast<std::int64_t>(2 * y) * W + 2 * xx;
                        S bv = plane[best];
                        const std::int64_t cands[3] = {best + 1, best + W, best + W + 1};
                        for (std::int64_t cand : cands) {
                            if (plane[cand] > bv) {
                                bv = plane[cand];
                                best = cand;
                            }
                        }
                        out[o] = bv;
                        (*arg)[static_cast<std::size_t>(o)] = base + best;
                        ++o;
                    }
                }
            }
        }
        return push(std::move(out), {x}, [x, arg](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            auto& gx = t.gmut(x);
            for (std::int64_t i = 0; i < g.numel(); ++i) {
                gx[(*arg)[static_cast<std::size_t>(i)]] += g[i];
            }
        });
    }

    // Per-channel normalization over (N,H,W). Train mode uses batch
    // statistics (biased variance) and optionally folds them into the
    // running averages; infer mode uses the running statistics.
    NodeId batchnorm2d(NodeId x, NodeId gamma, NodeId beta, S eps, BnMode mode,
                       BnRunning<S>& running, S momentum = S(0.9),
                       bool update_running = true) {
        const auto& xv = value(x);
        if (xv.rank() != 4) throw ShapeError("batchnorm2d: expected [N,C,H,W]");
        const int N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
        const auto& gv = value(gamma);
        const auto& bv = value(beta);
        if (gv.numel() != C || bv.numel() != C) throw ShapeError("batchnorm2d: param extent");
        if (running.mean.numel() != C || running.var.numel() != C) {
            throw ShapeError("batchnorm2d: running stats extent");
        }
        const std::int64_t M = static_cast<std::int64_t>(N) * H * W;
        const std::int64_t plane = static_cast<std::int64_t>(H) * W;

        TensorT<S> out(xv.shape);
        auto xhat = std::make_shared<TensorT<S>>(xv.shape);
        auto inv_std = std::make_shared<std::vector<S>>(static_cast<std::size_t>(C));

        if (mode == BnMode::Train) {
            if (M < 2) throw DegenerateBatchError("batchnorm2d: need N*H*W >= 2 in train mode");
            for (int c = 0; c < C; ++c) {
                double s1 = 0, s2 = 0;
                for (int n = 0; n < N; ++n) {
                    const S* p = &xv.at(n, c, 0, 0);
                    for (std::int64_t i = 0; i < plane; ++i) {
                        const double v = static_cast<double>(p[i]);
                        s1 += v;
                        s2 += v * v;
                    }
                }
                const double mean = s1 / static_cast<double>(M);
                const double var = std::max(0.0, s2 / static_cast<double>(M) - mean * mean);
                const S istd = static_cast<S>(1.0 / std::sqrt(var + static_cast<double>(eps)));
                (*inv_std)[static_cast<std::size_t>(c)] = istd;
                const S mn = static_cast<S>(mean);
                const S gc = gv[c], bc = bv[c];
                for (int n = 0; n < N; ++n) {
                    const S* p = &xv.at(n, c, 0, 0);
                    S* ph = &xhat->at(n, c, 0, 0);
                    S* po = &out.at(n, c, 0, 0);
                    for (std::int64_t i = 0; i < plane; ++i) {
                        const S h = (p[i] - mn) * istd;
                        ph[i] = h;
                        po[i] = gc * h + bc;
                    }
                }
                if (update_running) {
                    running.mean[c] = momentum * running.mean[c] + (S(1) - momentum) * mn;
                    running.var[c] =
                        momentum * running.var[c] + (S(1) - momentum) * static_cast<S>(var);
                }
            }
            return push(std::move(out), {x, gamma, beta},
                        [x, gamma, beta, N, C, plane, M, xhat, inv_std](TapeT& t, NodeId self) {
                const auto& g = t.gref(self);
                const auto& gv = t.value(gamma);
                auto& gx = t.gmut(x);
                auto& gg = t.gmut(gamma);
                auto& gb = t.gmut(beta);
                for (int c = 0; c < C; ++c) {
                    double sum_dy = 0, sum_dy_xhat = 0;
                    for (int n = 0; n < N; ++n) {
                        const S* pg = &g.at(n, c, 0, 0);
                        const S* ph = &xhat->at(n, c, 0, 0);
                        for (std::int64_t i = 0; i < plane; ++i) {
                            sum_dy += static_cast<double>(pg[i]);
                            sum_dy_xhat += static_cast<double>(pg[i]) * ph[i];
                        }
                    }
                    gb[c] += static_cast<S>(sum_dy);
                    gg[c] += static_cast<S>(sum_dy_xhat);
                    const S istd = (*inv_std)[static_cast<std::size_t>(c)];
                    const S k = gv[c] * istd;
                    const S m1 = static_cast<S>(sum_dy / static_cast<double>(M));
                    const S m2 = static_cast<S>(sum_dy_xhat / static_cast<double>(M));
                    for (int n = 0; n < N; ++n) {
                        const S* pg = &g.at(n, c, 0, 0);
                        const S* ph = &xhat->at(n, c, 0, 0);
                        S* px = &gx.at(n, c, 0, 0);
                        for (std::int64_t i = 0; i < plane; ++i) {
                            px[i] += k * (pg[i] - m1 - ph[i] * m2);
                        }
                    }
                }
            });
        }

        // infer mode: running statistics are constants of the graph
        for (int c = 0; c < C; ++c) {
            const S istd =
                static_cast<S>(1.0 / std::sqrt(static_cast<double>(running.var[c]) +
                                               static_cast<double>(eps)));
            (*inv_std)[static_cast<std::size_t>(c)] = istd;
            const S mn = running.mean[c];
            const S gc = gv[c], bc = bv[c];
            for (int n = 0; n < N; ++n) {
                const S* p = &xv.at(n, c, 0, 0);
                S* ph = &xhat->at(n, c, 0, 0);
                S* po = &out.at(n, c, 0, 0);
                for (std::int64_t i = 0; i < plane; ++i) {
                    const S h = (p[i] - mn) * istd;
                    ph[i] = h;
                    po[i] = gc * h + bc;
                }
            }
        }
        return push(std::move(out), {x, gamma, beta},
                    [x, gamma, beta, N, C, plane, xhat, inv_std](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            const auto& gv = t.value(gamma);
            auto& gx = t.gmut(x);
            auto& gg = t.gmut(gamma);
            auto& gb = t.gmut(beta);
            for (int c = 0; c < C; ++c) {
                const S k = gv[c] * (*inv_std)[static_cast<std::size_t>(c)];
                double sum_dy = 0, sum_dy_xhat = 0;
                for (int n = 0; n < N; ++n) {
                    const S* pg = &g.at(n, c, 0, 0);
                    const S* ph = &xhat->at(n, c, 0, 0);
                    S* px = &gx.at(n, c, 0, 0);
                    for (std::int64_t i = 0; i < plane; ++i) {
                        sum_dy += static_cast<double>(pg[i]);
                        sum_dy_xhat += static_cast<double>(pg[i]) * ph[i];
                        px[i] += k * pg[i];
                    }
                }
                gb[c] += static_cast<S>(sum_dy);
                gg[c] += static_cast<S>(sum_dy_xhat);
            }
        });
    }

    // Numerically stabilized softmax along `axis`.
    NodeId softmax(NodeId x, int axis) {
        const auto& xv = value(x);
        if (axis < 0 || axis >= xv.rank()) throw ShapeError("softmax: bad axis");
        std::int64_t outer, inner;
        int K;
        std::tie(outer, K, inner) = axis_split(xv.shape, axis);
        TensorT<S> out(xv.shape);
        for (std::int64_t o = 0; o < outer; ++o) {
            for (std::int64_t i = 0; i < inner; ++i) {
                const std::int64_t base = o * K * inner + i;
                S mx = xv[base];
                for (int k = 1; k < K; ++k) mx = std::max(mx, xv[base + k * inner]);
                double z = 0;
                for (int k = 0; k < K; ++k) {
                    const double e = std::exp(static_cast<double>(xv[base + k * inner] - mx));
                    out[base + k * inner] = static_cast<S>(e);
                    z += e;
                }
                const S izr = static_cast<S>(1.0 / z);
                for (int k = 0; k < K; ++k) out[base + k * inner] *= izr;
            }
        }
        auto y = std::make_shared<TensorT<S>>(out);
        return push(std::move(out), {x}, [x, y, outer, K, inner](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            auto& gx = t.gmut(x);
            for (std::int64_t o = 0; o < outer; ++o) {
                for (std::int64_t i = 0; i < inner; ++i) {
                    const std::int64_t base = o * K * inner + i;
                    double dot = 0;
                    for (int k = 0; k < K; ++k) {
                        dot += static_cast<double>(g[base + k * inner]) * (*y)[base + k * inner];
                    }
                    for (int k = 0; k < K; ++k) {
                        const std::int64_t idx = base + k * inner;
                        gx[idx] += (*y)[idx] * (g[idx] - static_cast<S>(dot));
                    }
                }
            }
        });
    }

    // scores[b,t,s] = <q[b,t,:], k[b,s,:]> / sqrt(d)
    NodeId attn_scores(NodeId q, NodeId k) {
        const auto& qv = value(q);
        const auto& kv = value(k);
        if (qv.rank() != 3 || kv.rank() != 3) throw ShapeError("attn_scores: expected 3-d");
        const int B = qv.dim(0), T = qv.dim(1), d = qv.dim(2);
        const int Sn = kv.dim(1);
        if (kv.dim(0) != B || kv.dim(2) != d) throw ShapeError("attn_scores: shape mismatch");
        const S inv_sqrt_d = static_cast<S>(1.0 / std::sqrt(static_cast<double>(d)));
        TensorT<S> out({B, T, Sn});
        for (int b = 0; b < B; ++b) {
            for (int t = 0; t < T; ++t) {
                const S* qrow = &qv.at(b, t, 0);
                S* orow = &out.at(b, t, 0);
                for (int s = 0; s < Sn; ++s) {
                    const S* krow = &kv.at(b, s, 0);
                    S acc = 0;
                    for (int j = 0; j < d; ++j) acc += qrow[j] * krow[j];
                    orow[s] = acc * inv_sqrt_d;
                }
            }
        }
        return push(std::move(out), {q, k},
                    [q, k, B, T, d, Sn, inv_sqrt_d](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            const auto& qv = t.value(q);
            const auto& kv = t.value(k);
            auto& gq = t.gmut(q);
            auto& gk = t.gmut(k);
            for (int b = 0; b < B; ++b) {
                for (int tt = 0; tt < T; ++tt) {
                    const S* grow = &g.at(b, tt, 0);
                    const S* qrow = &qv.at(b, tt, 0);
                    S* gqrow = &gq.at(b, tt, 0);
                    for (int s = 0; s < Sn; ++s) {
                        const S gs = grow[s] * inv_sqrt_d;
                        const S* krow = &kv.at(b, s, 0);
                        S* gkrow = &gk.at(b, s, 0);
                        for (int j = 0; j < d; ++j) {
                            gqrow[j] += gs * krow[j];
                            gkrow[j] += gs * qrow[j];
                        }
                    }
                }
            }
        });
    }

    // ctx[b,t,:] = sum_s w[b,t,s] * v[b,s,:]
    NodeId attn_mix(NodeId w, NodeId v) {
        const auto& wv = value(w);
        const auto& vv = value(v);
        if (wv.rank() != 3 || vv.rank() != 3) throw ShapeError("attn_mix: expected 3-d");
        const int B = wv.dim(0), T = wv.dim(1), Sn = wv.dim(2), d = vv.dim(2);
        if (vv.dim(0) != B || vv.dim(1) != Sn) throw ShapeError("attn_mix: shape mismatch");
        TensorT<S> out({B, T, d});
        for (int b = 0; b < B; ++b) {
            for (int t = 0; t < T; ++t) {
                const S* wrow = &wv.at(b, t, 0);
                S* orow = &out.at(b, t, 0);
                for (int s = 0; s < Sn; ++s) {
                    const S ws = wrow[s];
                    const S* vrow = &vv.at(b, s, 0);
                    for (int j = 0; j < d; ++j) orow[j] += ws * vrow[j];
                }
            }
        }
        return push(std::move(out), {w, v}, [w, v, B, T, Sn, d](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            const auto& wv = t.value(w);
            const auto& vv = t.value(v);
            auto& gw = t.gmut(w);
            auto& gv = t.gmut(v);
            for (int b = 0; b < B; ++b) {
                for (int tt = 0; tt < T; ++tt) {
                    const S* grow = &g.at(b, tt, 0);
                    const S* wrow = &wv.at(b, tt, 0);
                    S* gwrow = &gw.at(b, tt, 0);
                    for (int s = 0; s < Sn; ++s) {
                        const S* vrow = &vv.at(b, s, 0);
                        S* gvrow = &gv.at(b, s, 0);
                        S dot = 0;
                        const S ws = wrow[s];
                        for (int j = 0; j < d; ++j) {
                            dot += grow[j] * vrow[j];
                            gvrow[j] += ws * grow[j];
                        }
                        gwrow[s] += dot;
                    }
                }
            }
        });
    }

    // Scaled dot-product attention. Accepts Q[T,d], K[S,d], V[S,d] or their
    // batched [B,*,d] forms; returns (context, weights).
    std::pair<NodeId, NodeId> attention(NodeId q, NodeId k, NodeId v) {
        const bool two_d = value(q).rank() == 2;
        if (two_d) {
            q = reshape(q, {1, value(q).dim(0), value(q).dim(1)});
            k = reshape(k, {1, value(k).dim(0), value(k).dim(1)});
            v = reshape(v, {1, value(v).dim(0), value(v).dim(1)});
        }
        NodeId scores = attn_scores(q, k);
        NodeId weights = softmax(scores, 2);
        NodeId ctx = attn_mix(weights, v);
        if (two_d) {
            ctx = reshape(ctx, {value(ctx).dim(1), value(ctx).dim(2)});
            weights = reshape(weights, {value(weights).dim(1), value(weights).dim(2)});
        }
        return {ctx, weights};
    }

    // Mean over batch and positions of -log softmax(logits) at the target
    // index. PAD targets are ordinary classes.
    NodeId cross_entropy(NodeId logits, std::vector<int> targets) {
        const auto& lv = value(logits);
        if (lv.rank() != 3) throw ShapeError("cross_entropy: expected logits[B,L,A]");
        const int B = lv.dim(0), L = lv.dim(1), A = lv.dim(2);
        if (static_cast<std::int64_t>(targets.size()) != static_cast<std::int64_t>(B) * L) {
            throw ContractError("cross_entropy: targets size must equal B*L");
        }
        for (int tgt : targets) {
            if (tgt < 0 || tgt >= A) throw ContractError("cross_entropy: target out of range");
        }
        auto probs = std::make_shared<TensorT<S>>(lv.shape);
        double loss = 0;
        const std::int64_t rows = static_cast<std::int64_t>(B) * L;
        for (std::int64_t r = 0; r < rows; ++r) {
            const S* row = lv.ptr() + r * A;
            S* prow = probs->ptr() + r * A;
            S mx = row[0];
            for (int a = 1; a < A; ++a) mx = std::max(mx, row[a]);
            double z = 0;
            for (int a = 0; a < A; ++a) z += std::exp(static_cast<double>(row[a] - mx));
            const double lse = static_cast<double>(mx) + std::log(z);
            for (int a = 0; a < A; ++a) {
                prow[a] = static_cast<S>(std::exp(static_cast<double>(row[a]) - lse));
            }
            loss += lse - static_cast<double>(row[targets[static_cast<std::size_t>(r)]]);
        }
        TensorT<S> out({1});
        out[0] = static_cast<S>(loss / static_cast<double>(rows));
        return push(std::move(out), {logits},
                    [logits, probs, targets = std::move(targets), rows, A](TapeT& t,
                                                                           NodeId self) {
            const S g = t.gref(self)[0];
            auto& gl = t.gmut(logits);
            const S inv = g / static_cast<S>(rows);
            for (std::int64_t r = 0; r < rows; ++r) {
                const S* prow = probs->ptr() + r * A;
                S* grow = gl.ptr() + r * A;
                const int tgt = targets[static_cast<std::size_t>(r)];
                for (int a = 0; a < A; ++a) grow[a] += inv * prow[a];
                grow[tgt] -= inv;
            }
        });
    }

    // Reads a [B,C,H,W] map column by column: out[b,w,c*H+h] = x[b,c,h,w].
    NodeId columns(NodeId x) {
        const auto& xv = value(x);
        if (xv.rank() != 4) throw ShapeError("columns: expected [N,C,H,W]");
        const int B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
        TensorT<S> out({B, W, C * H});
        for (int b = 0; b < B; ++b) {
            for (int c = 0; c < C; ++c) {
                for (int h = 0; h < H; ++h) {
                    const S* row = &xv.at(b, c, h, 0);
                    for (int w = 0; w < W; ++w) out.at(b, w, c * H + h) = row[w];
                }
            }
        }
        return push(std::move(out), {x}, [x, B, C, H, W](TapeT& t, NodeId self) {
            const auto& g = t.gref(self);
            auto& gx = t.gmut(x);
            for (int b = 0; b < B; ++b) {
                for (int c = 0; c < C; ++c) {
                    for (int h = 0; h < H; ++h) {
                        S* row = &gx.at(b, c, h, 0);
                        for (int w = 0; w < W; ++w) row[w] += g.at(b, w, c * H + h);
                    }
                }
            }
        });
    }

    // Reverse sweep from a scalar loss. d(loss)/d(loss) = 1; nodes that
    // received no gradient are skipped.
    void backward(NodeId loss) {
        if (value(loss).numel() != 1) throw ContractError("backward: loss must be scalar");
        ensure_grad(loss);
        nodes_[idx(loss)].grad[0] = S(1);
        for (NodeId id = loss; id >= 0; --id) {
            Node& n = nodes_[idx(id)];
            if (n.grad.data.empty() || !n.back) continue;
            n.back(*this, id);
        }
    }

private:
    struct Node {
        TensorT<S> value;
        TensorT<S> grad;
        std::vector<NodeId> inputs;
        std::function<void(TapeT&, NodeId)> back;
    };

    static std::size_t idx(NodeId id) { return static_cast<std::size_t>(id); }

    static std::tuple<std::int64_t, int, std::int64_t> axis_split(
        const std::vector<int>& shape, int axis) {
        std::int64_t outer = 1, inner = 1;
        for (int i = 0; i < axis; ++i) outer *= shape[static_cast<std::size_t>(i)];
        for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < shape.size(); ++i) {
            inner *= shape[i];
        }
        return {outer, shape[static_cast<std::size_t>(axis)], inner};
    }

    void ensure_grad(NodeId id) {
        Node& n = nodes_[idx(id)];
        if (n.grad.data.empty()) n.grad = TensorT<S>(n.value.shape);
    }

    const TensorT<S>& gref(NodeId id) { return nodes_[idx(id)].grad; }

    TensorT<S>& gmut(NodeId id) {
        ensure_grad(id);
        return nodes_[idx(id)].grad;
    }

    NodeId push(TensorT<S> value, std::vector<NodeId> inputs,
                std::function<void(TapeT&, NodeId)> back) {
        nodes_.push_back(Node{std::move(value), {}, std::move(inputs), std::move(back)});
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    std::vector<Node> nodes_;
};

using Tape = TapeT<float>;

}  // namespace mailocr

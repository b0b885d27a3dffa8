#include "cttp/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>

#include "cttp/autodiff/tape.hpp"
#include "cttp/error.hpp"

namespace cttp::ad {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <class T>
bool should_record(std::initializer_list<const Tensor<T>*> inputs) {
    if (Tape<T>::active() == nullptr) return false;
    for (const auto* t : inputs) {
        if (t->requires_grad()) return true;
    }
    return false;
}

template <class T>
std::span<T> grad_of(TensorStorage<T>& s) {
    if (s.grad.empty()) s.grad.assign(s.value.size(), T(0));
    return s.grad;
}

template <class T, class Fn>
void record(const char* op, std::vector<std::shared_ptr<TensorStorage<T>>> inputs, Tensor<T>& out, Fn&& fn) {
    out.set_requires_grad(true);
    Tape<T>::active()->record(op, std::move(inputs), out.storage(), std::forward<Fn>(fn));
}

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

void require_rank(const char* op, const Shape& s, std::size_t rank) {
    if (s.size() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + shape_str(s));
    }
}

enum class Binary { add, sub, mul };

template <class T>
Tensor<T> binary(const char* op, Binary kind, const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) mismatch(op, a.shape(), b.shape());
    Tensor<T> out(a.shape());
    const std::size_t n = a.numel();
    const T* pa = a.raw();
    const T* pb = b.raw();
    T* po = out.raw();
    switch (kind) {
    case Binary::add:
        for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
        break;
    case Binary::sub:
        for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
        break;
    case Binary::mul:
        for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
        break;
    }
    if (should_record<T>({&a, &b})) {
        auto sa = a.storage();
        auto sb = b.storage();
        auto so = out.storage();
        record<T>(op, {sa, sb}, out, [sa, sb, so, kind, n] {
            const T* g = so->grad.data();
            if (sa->requires_grad) {
                auto ga = grad_of(*sa);
                if (kind == Binary::mul) {
                    for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * sb->value[i];
                } else {
                    for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
                }
            }
            if (sb->requires_grad) {
                auto gb = grad_of(*sb);
                if (kind == Binary::mul) {
                    for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * sa->value[i];
                } else if (kind == Binary::sub) {
                    for (std::size_t i = 0; i < n; ++i) gb[i] -= g[i];
                } else {
                    for (std::size_t i = 0; i < n; ++i) gb[i] += g[i];
                }
            }
        });
    }
    return out;
}

// Offsets of every input element into the reduced output, in row-major
// input order. Reduced axes get output stride 0.
struct ReductionPlan {
    Shape out_shape;
    std::vector<std::size_t> out_stride; // per input axis
    std::size_t count = 1;               // elements folded into each output
};

ReductionPlan plan_reduction(const char* op, const Shape& in, std::vector<std::size_t> axes) {
    std::sort(axes.begin(), axes.end());
    axes.erase(std::unique(axes.begin(), axes.end()), axes.end());
    ReductionPlan plan;
    std::vector<bool> reduced(in.size(), false);
    for (auto ax : axes) {
        if (ax >= in.size()) {
            throw ShapeError(std::string(op) + ": axis " + std::to_string(ax) + " out of range for " + shape_str(in));
        }
        reduced[ax] = true;
        plan.count *= in[ax];
    }
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (!reduced[i]) plan.out_shape.push_back(in[i]);
    }
    if (plan.out_shape.empty()) plan.out_shape.push_back(1);

    plan.out_stride.assign(in.size(), 0);
    std::size_t stride = 1;
    for (std::size_t i = in.size(); i-- > 0;) {
        if (!reduced[i]) {
            plan.out_stride[i] = stride;
            stride *= in[i];
        }
    }
    return plan;
}

template <class Fn>
void for_each_reduced(const Shape& in, const std::vector<std::size_t>& out_stride, Fn&& fn) {
    const std::size_t rank = in.size();
    std::vector<std::size_t> idx(rank, 0);
    const std::size_t n = shape_numel(in);
    std::size_t off = 0;
    for (std::size_t i = 0; i < n; ++i) {
        fn(i, off);
        for (std::size_t r = rank; r-- > 0;) {
            ++idx[r];
            off += out_stride[r];
            if (idx[r] < in[r]) break;
            off -= out_stride[r] * in[r];
            idx[r] = 0;
        }
    }
}

struct AxisSplit {
    std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
    AxisSplit a;
    for (std::size_t i = 0; i < axis; ++i) a.outer *= s[i];
    a.len = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) a.inner *= s[i];
    return a;
}

} // namespace

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    require_rank("matmul", a.shape(), 2);
    require_rank("matmul", b.shape(), 2);
    if (a.dim(1) != b.dim(0)) mismatch("matmul", a.shape(), b.shape());
    const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor<T> out(Shape{m, n});
    MatMap<T>(out.raw(), m, n).noalias() = ConstMatMap<T>(a.raw(), m, k) * ConstMatMap<T>(b.raw(), k, n);
    if (should_record<T>({&a, &b})) {
        auto sa = a.storage();
        auto sb = b.storage();
        auto so = out.storage();
        record<T>("matmul", {sa, sb}, out, [sa, sb, so, m, k, n] {
            ConstMatMap<T> g(so->grad.data(), m, n);
            if (sa->requires_grad) {
                MatMap<T>(grad_of(*sa).data(), m, k).noalias() += g * ConstMatMap<T>(sb->value.data(), k, n).transpose();
            }
            if (sb->requires_grad) {
                MatMap<T>(grad_of(*sb).data(), k, n).noalias() += ConstMatMap<T>(sa->value.data(), m, k).transpose() * g;
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> transpose(const Tensor<T>& a) {
    require_rank("transpose", a.shape(), 2);
    const auto m = a.dim(0), n = a.dim(1);
    Tensor<T> out(Shape{n, m});
    MatMap<T>(out.raw(), n, m) = ConstMatMap<T>(a.raw(), m, n).transpose();
    if (should_record<T>({&a})) {
        auto sa = a.storage();
        auto so = out.storage();
        record<T>("transpose", {sa}, out, [sa, so, m, n] {
            MatMap<T>(grad_of(*sa).data(), m, n) += ConstMatMap<T>(so->grad.data(), n, m).transpose();
        });
    }
    return out;
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    return binary("add", Binary::add, a, b);
}
template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    return binary("sub", Binary::sub, a, b);
}
template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    return binary("mul", Binary::mul, a, b);
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, double factor) {
    Tensor<T> out(a.shape());
    const auto n = a.numel();
    const T f = static_cast<T>(factor);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * f;
    if (should_record<T>({&a})) {
        auto sa = a.storage();
        auto so = out.storage();
        record<T>("scale", {sa}, out, [sa, so, f, n] {
            auto ga = grad_of(*sa);
            for (std::size_t i = 0; i < n; ++i) ga[i] += so->grad[i] * f;
        });
    }
    return out;
}

template <class T>
Tensor<T> affine(const Tensor<T>& a, double factor, double offset) {
    Tensor<T> out(a.shape());
    const auto n = a.numel();
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<T>(factor * a[i] + offset);
    if (should_record<T>({&a})) {
        auto sa = a.storage();
        auto so = out.storage();
        record<T>("affine", {sa}, out, [sa, so, factor, n] {
            auto ga = grad_of(*sa);
            for (std::size_t i = 0; i < n; ++i) ga[i] += static_cast<T>(so->grad[i] * factor);
        });
    }
    return out;
}

template <class T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias) {
    require_rank("add_bias", x.shape(), 2);
    require_rank("add_bias", bias.shape(), 1);
    if (x.dim(1) != bias.dim(0)) mismatch("add_bias", x.shape(), bias.shape());
    const auto rows = x.dim(0), cols = x.dim(1);
    Tensor<T> out(x.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = x[r * cols + c] + bias[c];
    }
    if (should_record<T>({&x, &bias})) {
        auto sx = x.storage();
        auto sb = bias.storage();
        auto so = out.storage();
        record<T>("add_bias", {sx, sb}, out, [sx, sb, so, rows, cols] {
            const T* g = so->grad.data();
            if (sx->requires_grad) {
                auto gx = grad_of(*sx);
                for (std::size_t i = 0; i < rows * cols; ++i) gx[i] += g[i];
            }
            if (sb->requires_grad) {
                std::vector<double> acc(cols, 0.0);
                for (std::size_t r = 0; r < rows; ++r) {
                    for (std::size_t c = 0; c < cols; ++c) acc[c] += g[r * cols + c];
                }
                auto gb = grad_of(*sb);
                for (std::size_t c = 0; c < cols; ++c) gb[c] += static_cast<T>(acc[c]);
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> relu(const Tensor<T>& x) {
    Tensor<T> out(x.shape());
    const auto n = x.numel();
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
    if (should_record<T>({&x})) {
        auto sx = x.storage();
        auto so = out.storage();
        record<T>("relu", {sx}, out, [sx, so, n] {
            auto gx = grad_of(*sx);
            // derivative at exactly zero is taken as zero
            for (std::size_t i = 0; i < n; ++i) {
                if (sx->value[i] > T(0)) gx[i] += so->grad[i];
            }
        });
    }
    return out;
}

namespace {

struct ConvGeometry {
    std::size_t n, c, h, w, o, kh, kw, oh, ow, stride, pad;
    std::size_t patch() const { return c * kh * kw; }
    std::size_t pixels() const { return oh * ow; }
};

ConvGeometry conv_geometry(const Shape& xs, const Shape& ws, Conv2dOptions opt) {
    require_rank("conv2d", xs, 4);
    require_rank("conv2d", ws, 4);
    if (xs[1] != ws[1]) mismatch("conv2d", xs, ws);
    if (opt.stride == 0) throw ShapeError("conv2d: stride must be >= 1");
    ConvGeometry g{xs[0], xs[1], xs[2], xs[3], ws[0], ws[2], ws[3], 0, 0, opt.stride, opt.pad};
    if (g.h + 2 * g.pad < g.kh || g.w + 2 * g.pad < g.kw) mismatch("conv2d", xs, ws);
    g.oh = (g.h + 2 * g.pad - g.kh) / g.stride + 1;
    g.ow = (g.w + 2 * g.pad - g.kw) / g.stride + 1;
    return g;
}

// cols: [patch, n * pixels]
template <class T>
void im2col(const ConvGeometry& g, const T* x, T* cols) {
    const std::size_t width = g.n * g.pixels();
    for (std::size_t ci = 0; ci < g.c; ++ci) {
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
            for (std::size_t kj = 0; kj < g.kw; ++kj) {
                T* row = cols + ((ci * g.kh + ki) * g.kw + kj) * width;
                for (std::size_t ni = 0; ni < g.n; ++ni) {
                    const T* plane = x + (ni * g.c + ci) * g.h * g.w;
                    T* dst = row + ni * g.pixels();
                    for (std::size_t oy = 0; oy < g.oh; ++oy) {
                        const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - static_cast<std::ptrdiff_t>(g.pad);
                        for (std::size_t ox = 0; ox < g.ow; ++ox) {
                            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) - static_cast<std::ptrdiff_t>(g.pad);
                            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(g.h) &&
                                                ix < static_cast<std::ptrdiff_t>(g.w);
                            dst[oy * g.ow + ox] = inside ? plane[iy * g.w + ix] : T(0);
                        }
                    }
                }
            }
        }
    }
}

template <class T>
void col2im_add(const ConvGeometry& g, const T* cols, T* dx) {
    const std::size_t width = g.n * g.pixels();
    for (std::size_t ci = 0; ci < g.c; ++ci) {
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
            for (std::size_t kj = 0; kj < g.kw; ++kj) {
                const T* row = cols + ((ci * g.kh + ki) * g.kw + kj) * width;
                for (std::size_t ni = 0; ni < g.n; ++ni) {
                    T* plane = dx + (ni * g.c + ci) * g.h * g.w;
                    const T* src = row + ni * g.pixels();
                    for (std::size_t oy = 0; oy < g.oh; ++oy) {
                        const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - static_cast<std::ptrdiff_t>(g.pad);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
                        for (std::size_t ox = 0; ox < g.ow; ++ox) {
                            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) - static_cast<std::ptrdiff_t>(g.pad);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
                            plane[iy * g.w + ix] += src[oy * g.ow + ox];
                        }
                    }
                }
            }
        }
    }
}

template <class T>
Tensor<T> conv2d_impl(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>* bias, Conv2dOptions opt) {
    const auto g = conv_geometry(x.shape(), weight.shape(), opt);
    if (bias != nullptr) {
        require_rank("conv2d", bias->shape(), 1);
        if (bias->dim(0) != g.o) mismatch("conv2d", weight.shape(), bias->shape());
    }
    const std::size_t width = g.n * g.pixels();
    auto cols = std::make_shared<std::vector<T>>(g.patch() * width);
    im2col(g, x.raw(), cols->data());

    RowMat<T> prod(g.o, width);
    prod.noalias() = ConstMatMap<T>(weight.raw(), g.o, g.patch()) * ConstMatMap<T>(cols->data(), g.patch(), width);

    Tensor<T> out(Shape{g.n, g.o, g.oh, g.ow});
    T* po = out.raw();
    for (std::size_t ni = 0; ni < g.n; ++ni) {
        for (std::size_t oi = 0; oi < g.o; ++oi) {
            const T b = bias ? (*bias)[oi] : T(0);
            const T* src = prod.data() + oi * width + ni * g.pixels();
            T* dst = po + (ni * g.o + oi) * g.pixels();
            for (std::size_t p = 0; p < g.pixels(); ++p) dst[p] = src[p] + b;
        }
    }

    const bool track = bias ? should_record<T>({&x, &weight, bias}) : should_record<T>({&x, &weight});
    if (track) {
        auto sx = x.storage();
        auto sw = weight.storage();
        auto sb = bias ? bias->storage() : nullptr;
        auto so = out.storage();
        std::vector<std::shared_ptr<TensorStorage<T>>> inputs{sx, sw};
        if (sb) inputs.push_back(sb);
        record<T>("conv2d", std::move(inputs), out, [sx, sw, sb, so, cols, g, width] {
            RowMat<T> gout(g.o, width);
            const T* go = so->grad.data();
            for (std::size_t ni = 0; ni < g.n; ++ni) {
                for (std::size_t oi = 0; oi < g.o; ++oi) {
                    std::copy_n(go + (ni * g.o + oi) * g.pixels(), g.pixels(), gout.data() + oi * width + ni * g.pixels());
                }
            }
            if (sw->requires_grad) {
                MatMap<T>(grad_of(*sw).data(), g.o, g.patch()).noalias() +=
                    gout * ConstMatMap<T>(cols->data(), g.patch(), width).transpose();
            }
            if (sb && sb->requires_grad) {
                auto gb = grad_of(*sb);
                for (std::size_t oi = 0; oi < g.o; ++oi) {
                    double acc = 0.0;
                    const T* row = gout.data() + oi * width;
                    for (std::size_t p = 0; p < width; ++p) acc += row[p];
                    gb[oi] += static_cast<T>(acc);
                }
            }
            if (sx->requires_grad) {
                RowMat<T> gcols(g.patch(), width);
                gcols.noalias() = ConstMatMap<T>(sw->value.data(), g.o, g.patch()).transpose() * gout;
                col2im_add(g, gcols.data(), grad_of(*sx).data());
            }
        });
    }
    return out;
}

} // namespace

template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, Conv2dOptions opt) {
    return conv2d_impl(x, weight, &bias, opt);
}

template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, Conv2dOptions opt) {
    return conv2d_impl<T>(x, weight, nullptr, opt);
}

template <class T>
Tensor<T> mean(const Tensor<T>& x, std::vector<std::size_t> axes) {
    auto plan = plan_reduction("mean", x.shape(), std::move(axes));
    std::vector<double> acc(shape_numel(plan.out_shape), 0.0);
    const T* px = x.raw();
    for_each_reduced(x.shape(), plan.out_stride, [&](std::size_t i, std::size_t o) { acc[o] += px[i]; });
    Tensor<T> out(plan.out_shape);
    const double inv = 1.0 / static_cast<double>(plan.count);
    for (std::size_t o = 0; o < acc.size(); ++o) out[o] = static_cast<T>(acc[o] * inv);
    if (should_record<T>({&x})) {
        auto sx = x.storage();
        auto so = out.storage();
        record<T>("mean", {sx}, out, [sx, so, plan, inv] {
            auto gx = grad_of(*sx);
            const T* go = so->grad.data();
            for_each_reduced(sx->shape, plan.out_stride,
                             [&](std::size_t i, std::size_t o) { gx[i] += static_cast<T>(go[o] * inv); });
        });
    }
    return out;
}

template <class T>
Tensor<T> mean_all(const Tensor<T>& x) {
    std::vector<std::size_t> axes(x.rank());
    for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = i;
    return mean(x, std::move(axes));
}

template <class T>
Tensor<T> sum_all(const Tensor<T>& x) {
    double acc = 0.0;
    for (T v : x.data()) acc += v;
    Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc));
    if (should_record<T>({&x})) {
        auto sx = x.storage();
        auto so = out.storage();
        record<T>("sum", {sx}, out, [sx, so] {
            auto gx = grad_of(*sx);
            const T g = so->grad[0];
            for (auto& v : gx) v += g;
        });
    }
    return out;
}

template <class T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
    require_rank("global_avg_pool", x.shape(), 4);
    return mean(x, {2, 3});
}

template <class T>
Tensor<T> l2_normalize(const Tensor<T>& x, double eps) {
    const auto split = split_axis(x.shape(), x.rank() - 1);
    const std::size_t rows = split.outer, d = split.len;
    Tensor<T> out(x.shape());
    std::vector<double> norms(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double ss = 0.0;
        for (std::size_t j = 0; j < d; ++j) ss += static_cast<double>(x[r * d + j]) * x[r * d + j];
        norms[r] = std::max(std::sqrt(ss), eps);
        for (std::size_t j = 0; j < d; ++j) out[r * d + j] = static_cast<T>(x[r * d + j] / norms[r]);
    }
    if (should_record<T>({&x})) {
        auto sx = x.storage();
        auto so = out.storage();
        record<T>("l2_normalize", {sx}, out, [sx, so, norms, rows, d, eps] {
            auto gx = grad_of(*sx);
            const T* gy = so->grad.data();
            const T* y = so->value.data();
            for (std::size_t r = 0; r < rows; ++r) {
                if (norms[r] <= eps) {
                    for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += static_cast<T>(gy[r * d + j] / eps);
                    continue;
                }
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) dot += static_cast<double>(y[r * d + j]) * gy[r * d + j];
                for (std::size_t j = 0; j < d; ++j) {
                    gx[r * d + j] += static_cast<T>((gy[r * d + j] - y[r * d + j] * dot) / norms[r]);
                }
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> logsumexp(const Tensor<T>& x, std::size_t axis) {
    if (axis >= x.rank()) {
        throw ShapeError("logsumexp: axis " + std::to_string(axis) + " out of range for " + shape_str(x.shape()));
    }
    const auto s = split_axis(x.shape(), axis);
    Shape out_shape;
    for (std::size_t i = 0; i < x.rank(); ++i) {
        if (i != axis) out_shape.push_back(x.dim(i));
    }
    if (out_shape.empty()) out_shape.push_back(1);
    Tensor<T> out(out_shape);
    std::vector<double> lse(s.outer * s.inner);
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
            const T* base = x.raw() + o * s.len * s.inner + in;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < s.len; ++k) mx = std::max(mx, static_cast<double>(base[k * s.inner]));
            double acc = 0.0;
            for (std::size_t k = 0; k < s.len; ++k) acc += std::exp(base[k * s.inner] - mx);
            lse[o * s.inner + in] = mx + std::log(acc);
            out[o * s.inner + in] = static_cast<T>(lse[o * s.inner + in]);
        }
    }
    if (should_record<T>({&x})) {
        auto sx = x.storage();
        auto so = out.storage();
        record<T>("logsumexp", {sx}, out, [sx, so, s, lse] {
            auto gx = grad_of(*sx);
            for (std::size_t o = 0; o < s.outer; ++o) {
                for (std::size_t in = 0; in < s.inner; ++in) {
                    const std::size_t oi = o * s.inner + in;
                    const double g = so->grad[oi];
                    for (std::size_t k = 0; k < s.len; ++k) {
                        const std::size_t xi = o * s.len * s.inner + k * s.inner + in;
                        gx[xi] += static_cast<T>(g * std::exp(sx->value[xi] - lse[oi]));
                    }
                }
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
    require_rank("softmax_cross_entropy", logits.shape(), 2);
    const auto n = logits.dim(0), k = logits.dim(1);
    if (labels.size() != n) {
        throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for logits " +
                         shape_str(logits.shape()));
    }
    for (int label : labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= k) {
            throw ShapeError("softmax_cross_entropy: label " + std::to_string(label) + " out of range for " +
                             std::to_string(k) + " classes");
        }
    }
    auto probs = std::make_shared<std::vector<double>>(n * k);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const T* row = logits.raw() + r * k;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) mx = std::max(mx, static_cast<double>(row[j]));
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) acc += std::exp(row[j] - mx);
        const double lse = mx + std::log(acc);
        for (std::size_t j = 0; j < k; ++j) (*probs)[r * k + j] = std::exp(row[j] - lse);
        total += lse - row[labels[r]];
    }
    Tensor<T> out = Tensor<T>::scalar(static_cast<T>(total / static_cast<double>(n)));
    if (should_record<T>({&logits})) {
        auto sl = logits.storage();
        auto so = out.storage();
        std::vector<int> lab(labels.begin(), labels.end());
        record<T>("softmax_cross_entropy", {sl}, out, [sl, so, probs, lab, n, k] {
            auto gl = grad_of(*sl);
            const double g = static_cast<double>(so->grad[0]) / static_cast<double>(n);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t j = 0; j < k; ++j) {
                    const double target = static_cast<std::size_t>(lab[r]) == j ? 1.0 : 0.0;
                    gl[r * k + j] += static_cast<T>(g * ((*probs)[r * k + j] - target));
                }
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> mse(const Tensor<T>& pred, const Tensor<T>& target) {
    if (pred.shape() != target.shape()) mismatch("mse", pred.shape(), target.shape());
    const auto n = pred.numel();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(pred[i]) - target[i];
        acc += d * d;
    }
    Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc / static_cast<double>(n)));
    if (should_record<T>({&pred, &target})) {
        auto sp = pred.storage();
        auto st = target.storage();
        auto so = out.storage();
        record<T>("mse", {sp, st}, out, [sp, st, so, n] {
            const double g = 2.0 * static_cast<double>(so->grad[0]) / static_cast<double>(n);
            if (sp->requires_grad) {
                auto gp = grad_of(*sp);
                for (std::size_t i = 0; i < n; ++i) {
                    gp[i] += static_cast<T>(g * (static_cast<double>(sp->value[i]) - st->value[i]));
                }
            }
            if (st->requires_grad) {
                auto gt = grad_of(*st);
                for (std::size_t i = 0; i < n; ++i) {
                    gt[i] -= static_cast<T>(g * (static_cast<double>(sp->value[i]) - st->value[i]));
                }
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) mismatch("reshape", x.shape(), shape);
    std::vector<T> values(x.data().begin(), x.data().end());
    Tensor<T> out(std::move(shape), std::move(values));
    if (should_record<T>({&x})) {
        auto sx = x.storage();
        auto so = out.storage();
        record<T>("reshape", {sx}, out, [sx, so] {
            auto gx = grad_of(*sx);
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += so->grad[i];
        });
    }
    return out;
}

#define CTTP_INSTANTIATE_OPS(T)                                                                      \
    template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                   \
    template Tensor<T> transpose(const Tensor<T>&);                                                  \
    template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                      \
    template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                      \
    template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                      \
    template Tensor<T> scale(const Tensor<T>&, double);                                              \
    template Tensor<T> affine(const Tensor<T>&, double, double);                                      \
    template Tensor<T> add_bias(const Tensor<T>&, const Tensor<T>&);                                 \
    template Tensor<T> relu(const Tensor<T>&);                                                       \
    template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Conv2dOptions);  \
    template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, Conv2dOptions);                    \
    template Tensor<T> mean(const Tensor<T>&, std::vector<std::size_t>);                             \
    template Tensor<T> mean_all(const Tensor<T>&);                                                   \
    template Tensor<T> sum_all(const Tensor<T>&);                                                    \
    template Tensor<T> global_avg_pool(const Tensor<T>&);                                            \
    template Tensor<T> l2_normalize(const Tensor<T>&, double);                                       \
    template Tensor<T> logsumexp(const Tensor<T>&, std::size_t);                                     \
    template Tensor<T> softmax_cross_entropy(const Tensor<T>&, std::span<const int>);                \
    template Tensor<T> mse(const Tensor<T>&, const Tensor<T>&);                                      \
    template Tensor<T> reshape(const Tensor<T>&, Shape);

CTTP_INSTANTIATE_OPS(float)
CTTP_INSTANTIATE_OPS(double)

#undef CTTP_INSTANTIATE_OPS

} // namespace cttp::ad

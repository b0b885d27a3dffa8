#include <cmath>
#include <gtest/gtest.h>

#include "cttp/autodiff/adam.hpp"
#include "cttp/autodiff/grad_check.hpp"
#include "cttp/autodiff/init.hpp"
#include "cttp/autodiff/ops.hpp"
#include "cttp/autodiff/rng.hpp"
#include "cttp/autodiff/tape.hpp"
#include "cttp/error.hpp"

using namespace cttp;
using ad::Tensor;

namespace {
Tensor<double> mat(ad::Shape s, std::vector<double> v) { return Tensor<double>(std::move(s), std::move(v)); }

Tensor<double> randn(ad::Shape s, Rng& rng) {
    Tensor<double> t(std::move(s));
    for (auto& v : t.data()) v = rng.normal(0.0, 1.0);
    return t;
}
} // namespace

TEST(Tensor, CopiesAliasAndCloneDoesNot) {
    Tensor<float> a({2, 2}, 1.0f);
    auto b = a;
    auto c = a.clone();
    b[0] = 5.0f;
    EXPECT_EQ(a[0], 5.0f);
    EXPECT_EQ(c[0], 1.0f);
    EXPECT_EQ(a.id(), b.id());
    EXPECT_NE(a.id(), c.id());
}

TEST(Tensor, ShapeMismatchOnConstruction) {
    EXPECT_THROW(Tensor<float>({2, 3}, std::vector<float>(5)), ShapeError);
}

TEST(Ops, MatmulMatchesHandComputation) {
    auto a = mat({2, 3}, {1, 2, 3, 4, 5, 6});
    auto b = mat({3, 2}, {7, 8, 9, 10, 11, 12});
    auto c = ad::matmul(a, b);
    EXPECT_EQ(c.shape(), (ad::Shape{2, 2}));
    EXPECT_DOUBLE_EQ(c[0], 58);
    EXPECT_DOUBLE_EQ(c[1], 64);
    EXPECT_DOUBLE_EQ(c[2], 139);
    EXPECT_DOUBLE_EQ(c[3], 154);
    EXPECT_THROW(ad::matmul(a, a), ShapeError);
}

TEST(Ops, ConvMatchesDirectLoop) {
    Rng rng(4);
    auto x = randn({2, 2, 5, 5}, rng), w = randn({3, 2, 3, 3}, rng), b = randn({3}, rng);
    const ad::Conv2dOptions opt{2, 1};
    auto y = ad::conv2d(x, w, b, opt);
    ASSERT_EQ(y.shape(), (ad::Shape{2, 3, 3, 3}));
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t o = 0; o < 3; ++o)
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) {
                    double s = b[o];
                    for (std::size_t c = 0; c < 2; ++c)
                        for (std::size_t ki = 0; ki < 3; ++ki)
                            for (std::size_t kj = 0; kj < 3; ++kj) {
                                const long r = long(i * 2 + ki) - 1, q = long(j * 2 + kj) - 1;
                                if (r < 0 || q < 0 || r >= 5 || q >= 5) continue;
                                s += x[((n * 2 + c) * 5 + std::size_t(r)) * 5 + std::size_t(q)] *
                                     w[((o * 2 + c) * 3 + ki) * 3 + kj];
                            }
                    EXPECT_NEAR(y[((n * 3 + o) * 3 + i) * 3 + j], s, 1e-12);
                }
}

TEST(Ops, LogsumexpIsStableForLargeInputs) {
    auto x = mat({1, 3}, {1000.0, 1000.0, 1000.0});
    EXPECT_NEAR(ad::logsumexp(x, 1)[0], 1000.0 + std::log(3.0), 1e-9);
}

TEST(Ops, SoftmaxCrossEntropyOfUniformLogitsIsLogK) {
    Tensor<double> logits({4, 5}, 0.0);
    std::vector<int> labels{0, 1, 2, 3};
    EXPECT_NEAR(ad::softmax_cross_entropy(logits, std::span<const int>(labels)).item(), std::log(5.0), 1e-12);
    std::vector<int> bad{0, 1, 2, 7};
    EXPECT_THROW(ad::softmax_cross_entropy(logits, std::span<const int>(bad)), ShapeError);
}

TEST(Ops, L2NormalizeGivesUnitRows) {
    Rng rng(2);
    auto y = ad::l2_normalize(randn({4, 6}, rng));
    for (std::size_t i = 0; i < 4; ++i) {
        double ss = 0;
        for (std::size_t d = 0; d < 6; ++d) ss += y[i * 6 + d] * y[i * 6 + d];
        EXPECT_NEAR(ss, 1.0, 1e-12);
    }
}

TEST(Tape, BackwardOfSquareSum) {
    auto x = mat({3}, {1.0, -2.0, 0.5});
    x.set_requires_grad(true);
    ad::Tape<double> tape;
    auto loss = ad::sum_all(ad::mul(x, x));
    tape.backward(loss);
    ASSERT_TRUE(x.has_grad());
    EXPECT_DOUBLE_EQ(x.grad()[0], 2.0);
    EXPECT_DOUBLE_EQ(x.grad()[1], -4.0);
    EXPECT_DOUBLE_EQ(x.grad()[2], 1.0);
}

TEST(Tape, SharedSubexpressionAccumulates) {
    auto x = mat({1}, {3.0});
    x.set_requires_grad(true);
    ad::Tape<double> tape;
    auto y = ad::add(x, x); // dy/dx = 2
    tape.backward(ad::sum_all(ad::mul(y, x))); // 2x^2 -> 4x
    EXPECT_DOUBLE_EQ(x.grad()[0], 12.0);
}

TEST(Tape, NoGradGuardRecordsNothing) {
    auto x = mat({2}, {1.0, 2.0});
    x.set_requires_grad(true);
    ad::Tape<double> tape;
    {
        ad::NoGradGuard<double> guard;
        (void)ad::mul(x, x);
    }
    EXPECT_EQ(tape.size(), 0u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    // With bias correction the first update is lr * g / (|g| + eps').
    auto p = mat({2}, {1.0, -1.0});
    ad::ParamList<double> params{{"p", p}};
    p.set_requires_grad(true);
    auto state = ad::make_adam_state(params, {.lr = 0.1});
    {
        ad::Tape<double> tape;
        tape.backward(ad::sum_all(ad::mul(p, mat({2}, {3.0, -0.5}))));
    }
    ad::adam_step(params, state);
    EXPECT_NEAR(p[0], 1.0 - 0.1, 1e-6);
    EXPECT_NEAR(p[1], -1.0 + 0.1, 1e-6);
}

TEST(Adam, MatchesReferenceRecurrenceOverSteps) {
    const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    auto p = mat({1}, {2.0});
    p.set_requires_grad(true);
    ad::ParamList<double> params{{"p", p}};
    auto state = ad::make_adam_state(params, {lr, b1, b2, eps});
    double ref = 2.0, m = 0, v = 0;
    for (int t = 1; t <= 20; ++t) {
        {
            ad::Tape<double> tape;
            tape.backward(ad::sum_all(ad::mul(p, p)));
        }
        ad::adam_step(params, state);
        ad::zero_grads(params);
        const double g = 2 * ref;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        ref -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
        EXPECT_NEAR(p[0], ref, 1e-12) << "step " << t;
    }
}

TEST(Adam, NonFiniteGradientThrowsBeforeUpdating) {
    auto a = mat({1}, {1.0}), b = mat({1}, {1.0});
    ad::ParamList<double> params{{"a", a}, {"b", b}};
    auto state = ad::make_adam_state(params);
    a.mutable_grad()[0] = 1.0;
    b.mutable_grad()[0] = std::nan("");
    EXPECT_THROW(ad::adam_step(params, state), NumericError);
    EXPECT_EQ(a[0], 1.0);
}

TEST(GradCheck, DetectsAWrongGradient) {
    auto x = mat({2}, {0.3, -0.7});
    auto fn = [&] {
        auto y = ad::mul(x, x);
        // x^3 with x^2 detached: the tape sees x^2, the truth is 3x^2
        return ad::sum_all(ad::mul(y.detach(), ad::scale(x, 1.0)));
    };
    auto report = ad::grad_check(fn, {{"x", x}});
    EXPECT_FALSE(report.passed);
    EXPECT_GT(report.max_rel_error(), 0.1);
}

TEST(GradCheck, PassesForSmoothComposite) {
    Rng rng(9);
    auto a = randn({3, 4}, rng), b = randn({4, 2}, rng);
    auto fn = [&] { return ad::mean_all(ad::mul(ad::matmul(a, b), ad::matmul(a, b))); };
    auto report = ad::grad_check(fn, {{"a", a}, {"b", b}});
    EXPECT_TRUE(report.passed) << report.max_rel_error();
}

TEST(Rng, StreamsAreIndependentAndReproducible) {
    EXPECT_EQ(derive_seed(1, "init"), derive_seed(1, "init"));
    EXPECT_NE(derive_seed(1, "init"), derive_seed(1, "noise"));
    EXPECT_NE(derive_seed(1, "init", 0), derive_seed(1, "init", 1));
    EXPECT_NE(derive_seed(1, "init"), derive_seed(2, "init"));
    auto a = Rng::stream(5, "x"), b = Rng::stream(5, "x");
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Init, UniformFanInStaysInBounds) {
    Rng rng(1);
    auto t = ad::seeded_init<float>({64, 10}, ad::InitScheme::uniform_fan_in, 64, rng);
    for (float v : t.data()) {
        EXPECT_LE(std::abs(v), 1.0f / 8.0f);
    }
}

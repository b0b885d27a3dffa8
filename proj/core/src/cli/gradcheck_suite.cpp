#include "cttp/cli/gradcheck_suite.hpp"

#include <functional>

#include "cttp/autodiff/ops.hpp"
#include "cttp/autodiff/rng.hpp"
#include "cttp/model/encoder.hpp"
#include "cttp/model/heads.hpp"
#include "cttp/model/losses.hpp"

namespace cttp::cli {

namespace {

using ad::Tensor;
using T = Tensor<double>;

T randn(ad::Shape shape, Rng& rng, double sd = 1.0) {
    T t(std::move(shape));
    for (auto& v : t.data()) v = rng.normal(0.0, sd);
    return t;
}

// Contracts a non-scalar output with fixed random weights so every output
// element contributes to the checked scalar.
std::function<T()> contract(std::function<T()> fn, Rng& rng) {
    auto probe = fn();
    auto w = randn(probe.shape(), rng);
    return [fn, w] { return ad::sum_all(ad::mul(fn(), w)); };
}

ad::ParamList<double> params(std::initializer_list<std::pair<const char*, T>> list) {
    ad::ParamList<double> out;
    for (const auto& [n, t] : list) out.push_back({n, t});
    return out;
}

} // namespace

std::vector<GradCheckCase> run_gradcheck_suite(double tol, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, "gradcheck");
    ad::GradCheckOptions opt;
    opt.tol = tol;
    // A small step keeps relu kinks out of the difference window.
    opt.step = 1e-6;
    std::vector<GradCheckCase> cases;
    auto check = [&](const std::string& name, std::function<T()> fn, ad::ParamList<double> p, bool scalar = false) {
        auto f = scalar ? fn : contract(fn, rng);
        cases.push_back({name, ad::grad_check(f, std::move(p), opt)});
    };

    {
        auto a = randn({3, 4}, rng), b = randn({4, 5}, rng);
        check("matmul", [=] { return ad::matmul(a, b); }, params({{"a", a}, {"b", b}}));
        check("transpose", [=] { return ad::transpose(a); }, params({{"a", a}}));
    }
    {
        auto a = randn({2, 3}, rng), b = randn({2, 3}, rng);
        check("add", [=] { return ad::add(a, b); }, params({{"a", a}, {"b", b}}));
        check("sub", [=] { return ad::sub(a, b); }, params({{"a", a}, {"b", b}}));
        check("mul", [=] { return ad::mul(a, b); }, params({{"a", a}, {"b", b}}));
        check("scale", [=] { return ad::scale(a, -1.7); }, params({{"a", a}}));
        check("affine", [=] { return ad::affine(a, 0.3, 2.0); }, params({{"a", a}}));
        check("relu", [=] { return ad::relu(a); }, params({{"a", a}}));
        check("reshape", [=] { return ad::reshape(a, {3, 2}); }, params({{"a", a}}));
        check("mean_all", [=] { return ad::mean_all(a); }, params({{"a", a}}), true);
        check("sum_all", [=] { return ad::sum_all(a); }, params({{"a", a}}), true);
        check("l2_normalize", [=] { return ad::l2_normalize(a); }, params({{"a", a}}));
        check("logsumexp", [=] { return ad::logsumexp(a, 1); }, params({{"a", a}}));
        auto bias = randn({3}, rng);
        check("add_bias", [=] { return ad::add_bias(a, bias); }, params({{"x", a}, {"bias", bias}}));
    }
    {
        auto x = randn({2, 3, 4, 5}, rng);
        check("mean(axes 0,2)", [=] { return ad::mean(x, {0, 2}); }, params({{"x", x}}));
        check("global_avg_pool", [=] { return ad::global_avg_pool(x); }, params({{"x", x}}));
        auto w = randn({4, 3, 3, 3}, rng, 0.3), b = randn({4}, rng);
        check("conv2d stride 1", [=] { return ad::conv2d(x, w, b, {1, 0}); },
              params({{"x", x}, {"weight", w}, {"bias", b}}));
        check("conv2d stride 2 pad 1", [=] { return ad::conv2d(x, w, b, {2, 1}); },
              params({{"x", x}, {"weight", w}, {"bias", b}}));
        check("conv2d no bias", [=] { return ad::conv2d(x, w, {1, 1}); }, params({{"x", x}, {"weight", w}}));
    }
    {
        auto logits = randn({5, 4}, rng);
        std::vector<int> labels{0, 3, 1, 1, 2};
        check("softmax_cross_entropy", [=] { return ad::softmax_cross_entropy(logits, std::span<const int>(labels)); },
              params({{"logits", logits}}), true);
        auto target = randn({5, 4}, rng);
        check("mse", [=] { return ad::mse(logits, target); }, params({{"pred", logits}}), true);
    }
    {
        auto z1 = randn({6, 5}, rng), z2 = randn({6, 5}, rng);
        check("infonce symmetric", [=] { return model::infonce_loss(z1, z2, {0.07, true}); },
              params({{"z1", z1}, {"z2", z2}}), true);
        check("infonce one-way", [=] { return model::infonce_loss(z1, z2, {0.5, false}); },
              params({{"z1", z1}, {"z2", z2}}), true);
    }

    // Layers and heads.
    model::ArchConfig arch{8, 6, 4, 8};
    auto add_module = [&](const std::string& name, auto module, const T& input) {
        ad::ParamList<double> p;
        module.collect(name, p);
        check(name, [=] { return module(input); }, p);
    };
    {
        auto feats = randn({4, arch.backbone_dim}, rng);
        add_module("linear", model::Linear<double>::init(arch.backbone_dim, 3, rng), feats);
        add_module("projection_head", model::ProjectionHead<double>::init(arch, rng), feats);
        add_module("classifier_head", model::ClassifierHead<double>::init(arch.backbone_dim, 5, rng), feats);
        add_module("pose_head", model::PoseHead<double>::init(arch.backbone_dim, rng, 6), feats);
        add_module("recon_head", model::ReconHead<double>::init(arch.backbone_dim, 8 * 8, rng), feats);
    }
    {
        auto x = randn({2, 2, 6, 6}, rng);
        add_module("conv2d layer", model::Conv2d<double>::init(2, 3, 3, {2, 1}, rng), x);
    }

    // Both encoder towers end to end through the contrastive loss; this is
    // the only case that differentiates the full convolutional stacks, the
    // other losses start from backbone features to keep the suite quick.
    auto enc = model::DualEncoder<double>::init(arch, seed);
    enc.tie_towers();
    auto gel = randn({3, 3, 8, 8}, rng, 0.2), membrane = randn({3, 1, 8, 8}, rng, 0.2);
    check("cttp loss (tied towers)",
          [=] {
              return model::infonce_loss(enc.gel.projection(enc.gel.encoder(gel)),
                                         enc.membrane.projection(enc.membrane.encoder(membrane)), {0.07, true});
          },
          enc.unique_parameters(), true);
    {
        auto feats = randn({3, arch.backbone_dim}, rng);
        auto rh = model::ReconHead<double>::init(arch.backbone_dim, 8 * 8, rng);
        ad::ParamList<double> p{{"features", feats}};
        rh.collect("recon", p);
        check("recon loss", [=] { return model::recon_loss(rh(feats), membrane); }, p, true);
    }
    {
        std::vector<sim::GraspSample> grasps{{0, 0, 1.f, -2.f, 10.f, 1.f}, {1, 1, -3.f, 0.5f, -20.f, 1.f},
                                             {2, 2, 0.f, 4.f, 3.f, 1.f}};
        auto targets = model::pose_targets<double>(grasps);
        auto feats = randn({3, arch.backbone_dim}, rng);
        auto ph = model::PoseHead<double>::init(arch.backbone_dim, rng, 6);
        ad::ParamList<double> p{{"features", feats}};
        ph.collect("pose", p);
        check("pose loss", [=] { return model::pose_loss(ph(feats), targets); }, p, true);
    }
    return cases;
}

bool all_passed(const std::vector<GradCheckCase>& cases) {
    for (const auto& c : cases) {
        if (!c.report.passed) return false;
    }
    return !cases.empty();
}

nlohmann::json gradcheck_json(const std::vector<GradCheckCase>& cases) {
    nlohmann::json out;
    out["passed"] = all_passed(cases);
    auto& arr = out["cases"] = nlohmann::json::array();
    for (const auto& c : cases) {
        nlohmann::json p = nlohmann::json::array();
        for (const auto& e : c.report.params) {
            p.push_back({{"name", e.name},
                         {"max_rel_error", e.max_rel_error},
                         {"worst_index", e.worst_index},
                         {"analytic", e.analytic},
                         {"numeric", e.numeric}});
        }
        nlohmann::json row{{"name", c.name},
                           {"passed", c.report.passed},
                           {"tol", c.report.tol},
                           {"max_rel_error", c.report.max_rel_error()},
                           {"params", p}};
        if (!c.report.failure.empty()) row["failure"] = c.report.failure;
        arr.push_back(row);
    }
    return out;
}

} // namespace cttp::cli

#include <cmath>
#include <gtest/gtest.h>

#include "cttp/autodiff/rng.hpp"
#include "cttp/error.hpp"
#include "cttp/sensorsim/dataset.hpp"
#include "cttp/sensorsim/render.hpp"
#include "cttp/sensorsim/sdf.hpp"
#include "cttp/sensorsim/tools.hpp"

using namespace cttp;
using namespace cttp::sim;

TEST(Sdf, CircleIsExact) {
    auto c = Sdf::circle(2.0);
    EXPECT_DOUBLE_EQ(c.eval({0, 0}), -2.0);
    EXPECT_DOUBLE_EQ(c.eval({3, 4}), 3.0);
    EXPECT_DOUBLE_EQ(c.eval({2, 0}), 0.0);
}

TEST(Sdf, BoxDistancesInsideOutsideAndCorner) {
    auto b = Sdf::box(2.0, 1.0);
    EXPECT_DOUBLE_EQ(b.eval({0, 0}), -1.0);
    EXPECT_DOUBLE_EQ(b.eval({5, 0}), 3.0);
    EXPECT_DOUBLE_EQ(b.eval({5, 5}), 5.0); // (3, 4) from the corner
}

TEST(Sdf, TransformsMoveTheShape) {
    auto c = Sdf::circle(1.0).translated(3.0, -1.0);
    EXPECT_DOUBLE_EQ(c.eval({3, -1}), -1.0);
    auto b = Sdf::box(3.0, 0.5).rotated(90.0);
    EXPECT_NEAR(b.eval({0, 2.5}), -0.5, 1e-12);
    EXPECT_NEAR(b.eval({2.5, 0}), 2.0, 1e-12);
}

TEST(Sdf, BooleanCompositionSigns) {
    auto a = Sdf::circle(2.0), b = Sdf::circle(1.0);
    EXPECT_LT(subtract(a, b).eval({1.5, 0}), 0.0);
    EXPECT_GT(subtract(a, b).eval({0, 0}), 0.0);
    EXPECT_LT(unite(a, b.translated(5, 0)).eval({5, 0}), 0.0);
    EXPECT_GT(intersect(a, b.translated(5, 0)).eval({0, 0}), 0.0);
}

TEST(Sdf, StarAndPolygonsContainTheirCentre) {
    for (const auto& s : {Sdf::triangle(5.0), Sdf::hexagon(3.0), Sdf::star5(6.0, 0.4), Sdf::stadium(3, 2, 1),
                          Sdf::capsule(2, 1), Sdf::plus_cross(4, 1), Sdf::ellipse(3, 1.5)}) {
        EXPECT_LT(s.eval({0, 0}), 0.0);
        EXPECT_GT(s.eval({40, 40}), 0.0);
    }
}

// A shape is orientation-ambiguous within the grasp range if some rotation
// in (0, 60] degrees maps it onto itself. Sample the outline mismatch.
TEST(Tools, NoToolIsRotationallySymmetricWithinTheGraspRange) {
    for (const auto& tool : tool_library()) {
        for (double rot = 5.0; rot <= 60.0; rot += 5.0) {
            const auto r = tool.sdf.rotated(rot);
            double diff = 0.0;
            for (double x = -10; x <= 10; x += 0.5)
                for (double y = -10; y <= 10; y += 0.5) diff = std::max(diff, std::abs(r.eval({x, y}) - tool.sdf.eval({x, y})));
            EXPECT_GT(diff, 0.1) << tool.name << " rotated by " << rot;
        }
    }
}

TEST(Tools, LibraryIdsAndSplits) {
    ASSERT_EQ(tool_library().size(), 12u);
    for (std::uint32_t i = 0; i < 12; ++i) EXPECT_EQ(tool_by_id(i).id, i);
    EXPECT_THROW(tool_by_id(12), DataError);
    EXPECT_EQ(seen_tool_ids().size(), 9u);
    EXPECT_EQ(unseen_tool_ids().size(), 3u);
}

TEST(Render, GaussianKernelIsNormalized) {
    for (double sigma : {0.5, 0.8, 2.5, 4.0}) {
        const auto w = gaussian_kernel(sigma);
        EXPECT_EQ(w.size(), std::size_t(std::ceil(3 * sigma)) + 1);
        double total = w[0];
        for (std::size_t k = 1; k < w.size(); ++k) total += 2 * w[k];
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Render, BlurPreservesConstantsAndMassInTheInterior) {
    HeightField h(16, 16);
    for (auto& v : h.h) v = 0.7;
    for (double v : gaussian_blur(h, 2.0).h) EXPECT_NEAR(v, 0.7, 1e-12);

    HeightField d(31, 31);
    d.at(15, 15) = 1.0;
    const auto b = gaussian_blur(d, 1.5);
    double mass = 0.0;
    for (double v : b.h) mass += v;
    EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(Render, HeightfieldFollowsDepthAndPose) {
    GraspSample g{0, 0, 0.f, 0.f, 0.f, 1.5f};
    const auto& disc = tool_by_id(0);
    const auto h = render_heightfield(g, disc);
    EXPECT_NEAR(h.at(16, 16), 1.5, 1e-6); // deep inside
    EXPECT_EQ(h.at(0, 0), 0.0);
    double peak = 0.0;
    for (double v : h.h) peak = std::max(peak, v);
    EXPECT_NEAR(peak, 1.5, 1e-6);

    g.depth = 0.f;
    for (double v : render_heightfield(g, disc).h) EXPECT_EQ(v, 0.0);

    // Shifting y by whole pixels shifts the image by columns.
    GraspSample a{1, 0, 0.f, 0.f, 10.f, 1.f}, b = a;
    b.y = 3.f;
    const auto ha = render_heightfield(a, tool_by_id(1)), hb = render_heightfield(b, tool_by_id(1));
    for (std::size_t r = 0; r < 32; ++r)
        for (std::size_t c = 3; c < 32; ++c) EXPECT_NEAR(hb.at(r, c), ha.at(r, c - 3), 1e-9);
}

TEST(Render, FlatContactGivesBaseGelAndZeroMembrane) {
    HeightField flat(8, 8);
    GelParams gp;
    gp.noise_std = 0.0;
    MembraneParams mp;
    mp.noise_std = 0.0;
    for (float v : render_gel(flat, gp, 1).data) EXPECT_NEAR(v, gp.base, 1e-7);
    for (float v : render_membrane(flat, mp, 1).data) EXPECT_EQ(v, 0.0f);
}

TEST(Render, GelShadingRespondsToSlopeDirection) {
    // Surface at -g has normal (dg/dx, dg/dy, 1): a ramp rising along +x
    // faces the red light (azimuth 0) and turns away from green (120).
    HeightField ramp(8, 8);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c) ramp.at(r, c) = 0.2 * double(c);
    GelParams gp;
    gp.noise_std = 0.0;
    gp.blur_sigma = 0.5;
    const auto f = render_gel(ramp, gp, 0);
    EXPECT_GT(f.at(0, 4, 4), gp.base);
    EXPECT_LT(f.at(1, 4, 4), gp.base);
}

TEST(Dataset, SmallConfigCountsAndDisjointIds) {
    DatasetConfig cfg;
    cfg.pretrain_per_tool = 3;
    cfg.probe_train_per_tool = 2;
    cfg.probe_test_per_tool = 1;
    cfg.unseen_train_per_tool = 2;
    cfg.unseen_test_per_tool = 1;
    const auto ds = generate_dataset(cfg);
    EXPECT_EQ(ds.split("pretrain").size(), 27u);
    EXPECT_EQ(ds.split("probe-train").size(), 18u);
    EXPECT_EQ(ds.split("probe-test").size(), 9u);
    EXPECT_EQ(ds.split("unseen-tools-train").size(), 6u);
    EXPECT_EQ(ds.split("unseen-tools-test").size(), 3u);
    EXPECT_NO_THROW(check_disjoint(ds));
    for (const auto& r : ds.split("unseen-tools-test")) EXPECT_GE(r.grasp.tool_id, 9u);
    for (const auto& r : ds.split("pretrain")) {
        EXPECT_LT(r.grasp.tool_id, 9u);
        EXPECT_EQ(r.gel.sensor, SensorKind::gel);
        EXPECT_EQ(r.membrane.sensor, SensorKind::membrane);
        EXPECT_EQ(r.gel.data.size(), 3u * 32 * 32);
        EXPECT_EQ(r.membrane.data.size(), 32u * 32);
    }
    EXPECT_THROW(ds.split("nope"), DataError);
}

TEST(Dataset, DefaultArithmetic) {
    DatasetConfig cfg;
    const std::size_t total = 9 * (cfg.pretrain_per_tool + cfg.probe_train_per_tool + cfg.probe_test_per_tool) +
                              3 * (cfg.unseen_train_per_tool + cfg.unseen_test_per_tool);
    EXPECT_EQ(total, 3600u);
}

TEST(Dataset, GenerationIsDeterministicAndSeedSensitive) {
    DatasetConfig cfg;
    cfg.pretrain_per_tool = cfg.probe_train_per_tool = cfg.probe_test_per_tool = 1;
    cfg.unseen_train_per_tool = cfg.unseen_test_per_tool = 1;
    const auto a = generate_dataset(cfg), b = generate_dataset(cfg);
    EXPECT_EQ(a.splits, b.splits);
    cfg.seed = 8;
    EXPECT_NE(generate_dataset(cfg).splits, a.splits);
}

TEST(Dataset, PairedFramesShareTheirGrasp) {
    // Both renderings see the same contact: membrane mass and gel deviation
    // from base both vanish at depth zero and grow with depth.
    DatasetConfig cfg;
    cfg.gel.noise_std = cfg.membrane.noise_std = 0.0;
    auto mass = [&](float depth) {
        GraspSample g{2, 0, 1.f, -1.f, 5.f, depth};
        const auto r = render_record(g, cfg);
        double m = 0.0, gdev = 0.0;
        for (float v : r.membrane.data) m += v;
        for (float v : r.gel.data) gdev += std::abs(v - cfg.gel.base);
        return std::pair{m, gdev};
    };
    EXPECT_EQ(mass(0.f).first, 0.0);
    EXPECT_NEAR(mass(0.f).second, 0.0, 1e-4);
    EXPECT_GT(mass(2.f).first, mass(1.f).first);
    EXPECT_GT(mass(2.f).second, mass(1.f).second);
}

TEST(Dataset, RejectsDuplicateGraspIds) {
    Dataset ds;
    PairedRecord r;
    r.grasp.grasp_id = 5;
    ds.splits["a"] = {r};
    ds.splits["b"] = {r};
    EXPECT_THROW(check_disjoint(ds), DataError);
}

TEST(Grasps, SamplesStayInRange) {
    GraspRanges ranges;
    const auto g = sample_grasps({0, 1}, 200, ranges, 3);
    ASSERT_EQ(g.size(), 400u);
    for (const auto& s : g) {
        EXPECT_GE(s.y, ranges.y.min);
        EXPECT_LE(s.y, ranges.y.max);
        EXPECT_GE(s.theta, ranges.theta.min);
        EXPECT_LE(s.theta, ranges.theta.max);
        EXPECT_GE(s.depth, ranges.depth.min);
    }
    EXPECT_THROW(sample_grasps({}, 1, ranges, 1), DataError);
}

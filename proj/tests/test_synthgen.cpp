#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "roadval/projection.hpp"
#include "roadval/synthgen.hpp"

using namespace roadval;

namespace {

SceneRecipe bright_road_recipe() {
    SceneRecipe r;
    r.rng_seed = 77;
    r.road_albedo = 0.9;  // far above every roof/facade/terrain shade
    r.noise_sigma = 0.0;
    return r;
}

bool looks_like_road(const ImageRGB& img, const Vec2& px, double albedo) {
    int x = static_cast<int>(std::lround(px.x));
    int y = static_cast<int>(std::lround(px.y));
    if (!img.in_bounds(x, y)) return false;
    const std::uint8_t* p = img.px(x, y);
    double lo = (albedo - 0.05) * 255.0;
    return p[0] > lo && p[1] > lo && p[2] > lo;
}

}  // namespace

TEST_CASE("rendering is bit-identical under the same recipe") {
    SceneRecipe r;
    r.rng_seed = 31;
    r.building_count = 3;
    r.terrain = TerrainKind::hill;
    r.image_width = 480;
    r.image_height = 360;
    Rendered a = render(r);
    Rendered b = render(r);
    CHECK(a.image.data == b.image.data);
    CHECK(scene_to_json(a.scene) == scene_to_json(b.scene));
}

TEST_CASE("different seeds give different imagery") {
    SceneRecipe r;
    r.image_width = 320;
    r.image_height = 240;
    r.rng_seed = 1;
    Rendered a = render(r);
    r.rng_seed = 2;
    Rendered b = render(r);
    CHECK(a.image.data != b.image.data);
}

TEST_CASE("recipe serialization round-trips") {
    SceneRecipe r;
    r.rng_seed = 99;
    r.terrain = TerrainKind::ridge;
    r.road_family = RoadFamily::s_curve;
    r.road_count = 4;
    r.occluder_count = 2;
    r.segment_length_m = 120.0;
    SceneRecipe back = recipe_from_json(recipe_to_json(r));
    CHECK(back.rng_seed == r.rng_seed);
    CHECK(back.terrain == r.terrain);
    CHECK(back.road_family == r.road_family);
    CHECK(back.road_count == r.road_count);
    CHECK(back.occluder_count == r.occluder_count);
    CHECK(back.segment_length_m == r.segment_length_m);
}

TEST_CASE("invalid recipes are rejected") {
    SceneRecipe r;
    r.oblique_angle_deg = 75.0;
    CHECK_THROWS(render(r));
    r = SceneRecipe{};
    r.road_width_m = -1.0;
    CHECK_THROWS(render(r));
    r = SceneRecipe{};
    r.image_width = 8;
    CHECK_THROWS(render(r));
}

TEST_CASE("visible road samples land on road-albedo pixels") {
    SceneRecipe r = bright_road_recipe();
    Rendered out = render(r);
    int on = 0, total = 0;
    for (const auto& s : sample_segments(out.scene)) {
        if (!s.visible) continue;
        ++total;
        if (looks_like_road(out.image, s.px, r.road_albedo)) ++on;
    }
    REQUIRE(total > 30);
    CHECK(on >= static_cast<int>(0.95 * total));
}

TEST_CASE("renderer depth test agrees with the occlusion query") {
    SceneRecipe r = bright_road_recipe();
    r.rng_seed = 5;
    r.occluder_count = 4;
    Rendered out = render(r);
    int occluded = 0, agree = 0, total = 0;
    for (const auto& s : sample_segments(out.scene)) {
        int x = static_cast<int>(std::lround(s.px.x));
        int y = static_cast<int>(std::lround(s.px.y));
        if (!out.image.in_bounds(x, y)) continue;
        ++total;
        if (!s.visible) ++occluded;
        if (looks_like_road(out.image, s.px, r.road_albedo) == s.visible) ++agree;
    }
    REQUIRE(total > 50);
    CHECK(occluded > 0);  // the occluders must actually block something
    CHECK(agree == total);
}

TEST_CASE("inject leaves the input scene untouched") {
    Rendered out = render(bright_road_recipe());
    std::string before = scene_to_json(out.scene);
    ErrorInjection err;
    err.kind = ErrorInjection::Kind::vector_offset_px;
    err.magnitude = 25.0;
    inject(out.scene, err);
    err.kind = ErrorInjection::Kind::dem_bias_m;
    err.magnitude = 10.0;
    inject(out.scene, err);
    err.kind = ErrorInjection::Kind::camera_yaw_deg;
    err.magnitude = 3.0;
    inject(out.scene, err);
    CHECK(scene_to_json(out.scene) == before);
}

TEST_CASE("zero-magnitude offset is the identity") {
    Rendered out = render(bright_road_recipe());
    ErrorInjection err;
    err.kind = ErrorInjection::Kind::vector_offset_px;
    err.magnitude = 0.0;
    Scene same = inject(out.scene, err);
    REQUIRE(same.roads.segments.size() == out.scene.roads.segments.size());
    for (size_t i = 0; i < same.roads.segments.size(); ++i)
        for (size_t k = 0; k < same.roads.segments[i].polyline.size(); ++k) {
            const GeoPoint& a = same.roads.segments[i].polyline[k];
            const GeoPoint& b = out.scene.roads.segments[i].polyline[k];
            CHECK(std::abs(a.lat - b.lat) < 1e-12);
            CHECK(std::abs(a.lon - b.lon) < 1e-12);
            CHECK(std::abs(a.alt - b.alt) < 1e-9);
        }
}

TEST_CASE("unknown injection targets are rejected") {
    Rendered out = render(bright_road_recipe());
    ErrorInjection err;
    err.kind = ErrorInjection::Kind::vector_offset_px;
    err.magnitude = 10.0;
    err.targets = {"no_such_road"};
    CHECK_THROWS_AS(inject(out.scene, err), std::invalid_argument);
    err.kind = ErrorInjection::Kind::delete_building;
    err.targets = {"42"};
    CHECK_THROWS_AS(inject(out.scene, err), std::invalid_argument);
    err.targets = {"not_an_index"};
    CHECK_THROWS_AS(inject(out.scene, err), std::invalid_argument);
}

TEST_CASE("deleting the occluders makes hidden samples visible") {
    SceneRecipe r = bright_road_recipe();
    r.rng_seed = 5;
    r.occluder_count = 4;
    Rendered out = render(r);
    std::vector<GeoPoint> hidden;
    for (const auto& s : sample_segments(out.scene))
        if (!s.visible) hidden.push_back(s.world);
    REQUIRE(!hidden.empty());

    ErrorInjection err;
    err.kind = ErrorInjection::Kind::delete_building;
    for (size_t i = 0; i < out.scene.buildings.size(); ++i)
        err.targets.push_back(std::to_string(i));
    Scene cleared = inject(out.scene, err);
    CHECK(cleared.buildings.empty());
    for (const GeoPoint& g : hidden) CHECK_FALSE(is_occluded(cleared, g));
}

TEST_CASE("a 10 m DEM bias shifts the projected roads by more than a pixel") {
    Rendered out = render(bright_road_recipe());
    ErrorInjection err;
    err.kind = ErrorInjection::Kind::dem_bias_m;
    err.magnitude = 10.0;
    Scene biased = inject(out.scene, err);
    CameraFrame cam = CameraFrame::from(out.scene.camera, out.scene.enu());
    EnuFrame enu = out.scene.enu();
    for (size_t i = 0; i < out.scene.roads.segments.size(); ++i) {
        const GeoPoint& a = out.scene.roads.segments[i].polyline.front();
        const GeoPoint& b = biased.roads.segments[i].polyline.front();
        auto pa = cam.project(enu.to_enu(a));
        auto pb = cam.project(enu.to_enu(b));
        REQUIRE(pa.has_value());
        REQUIRE(pb.has_value());
        CHECK(std::hypot(pa->x - pb->x, pa->y - pb->y) > 1.0);
    }
}

TEST_CASE("camera yaw injection changes only the camera") {
    Rendered out = render(bright_road_recipe());
    ErrorInjection err;
    err.kind = ErrorInjection::Kind::camera_yaw_deg;
    err.magnitude = 2.5;
    Scene turned = inject(out.scene, err);
    CHECK(turned.camera.yaw_deg == out.scene.camera.yaw_deg + 2.5);
    for (size_t i = 0; i < turned.roads.segments.size(); ++i)
        for (size_t k = 0; k < turned.roads.segments[i].polyline.size(); ++k)
            CHECK(turned.roads.segments[i].polyline[k].lat ==
                  out.scene.roads.segments[i].polyline[k].lat);
}

TEST_CASE("label budgets are met exactly with offsets first") {
    SceneRecipe r = bright_road_recipe();
    r.road_count = 3;
    r.building_count = 3;
    Rendered out = render(r);
    ErrorInjection err;
    err.kind = ErrorInjection::Kind::vector_offset_px;
    err.magnitude = 30.0;
    Scene corrupted = inject(out.scene, err);

    LabelParams lp;
    lp.n_per_class = 120;
    auto samples = label_samples(out.scene, corrupted, out.image, lp);
    REQUIRE(samples.size() == 2 * lp.n_per_class);
    size_t pos = 0, neg = 0, offset_negs = 0;
    for (const auto& s : samples) {
        if (s.label == SampleLabel::consistent) ++pos;
        if (s.label == SampleLabel::inconsistent) {
            ++neg;
            if (s.segment_id != "facade" && s.segment_id != "background") ++offset_negs;
        }
    }
    CHECK(pos == lp.n_per_class);
    CHECK(neg == lp.n_per_class);
    CHECK(offset_negs > 0);

    // every negative lies off the true road band in world space
    RoadGeometry roads = RoadGeometry::from(out.scene);
    EnuFrame enu = out.scene.enu();
    for (const auto& s : samples) {
        if (s.label != SampleLabel::inconsistent) continue;
        Vec3 w = enu.to_enu(s.world);
        CHECK(roads.distance({w.x, w.y}) >= 0.5 * lp.road_width_m - 1e-9);
    }
}

TEST_CASE("an uncorrupted scene contributes no offset negatives") {
    SceneRecipe r = bright_road_recipe();
    r.building_count = 4;
    Rendered out = render(r);
    LabelParams lp;
    lp.n_per_class = 60;
    auto samples = label_samples(out.scene, out.scene, out.image, lp);
    for (const auto& s : samples) {
        if (s.label != SampleLabel::inconsistent) continue;
        CHECK((s.segment_id == "facade" || s.segment_id == "background"));
    }
}

TEST_CASE("label sampling is deterministic under its seed") {
    SceneRecipe r = bright_road_recipe();
    r.building_count = 2;
    Rendered out = render(r);
    LabelParams lp;
    lp.n_per_class = 50;
    lp.seed = 123;
    auto a = label_samples(out.scene, out.scene, out.image, lp);
    auto b = label_samples(out.scene, out.scene, out.image, lp);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].px.x == b[i].px.x);
        CHECK(a[i].px.y == b[i].px.y);
        CHECK(a[i].segment_id == b[i].segment_id);
    }
}

TEST_CASE("an impossible budget fails loudly") {
    SceneRecipe r = bright_road_recipe();
    Rendered out = render(r);
    LabelParams lp;
    lp.n_per_class = 100000;
    CHECK_THROWS_AS(label_samples(out.scene, out.scene, out.image, lp), std::runtime_error);
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roadval/image.hpp"
#include "roadval/projection.hpp"
#include "roadval/scene.hpp"

namespace roadval {

enum class TerrainKind { flat, hill, ridge };
enum class RoadFamily { straight, arc, s_curve };

struct SceneRecipe {
    std::uint64_t rng_seed = 1;
    TerrainKind terrain = TerrainKind::flat;
    double terrain_amp_m = 40.0;
    int road_count = 1;
    RoadFamily road_family = RoadFamily::straight;
    double road_width_m = 8.0;
    double road_albedo = 0.55;          // gray level of the road band
    double albedo_contrast = 0.4;       // road-vs-terrain brightness separation
    double segment_length_m = 0.0;      // 0: one segment per road
    int building_count = 0;
    int occluder_count = 0;             // buildings placed to occlude roads
    double building_min_size_m = 12.0;
    double building_max_size_m = 30.0;
    double building_min_height_m = 8.0;
    double building_max_height_m = 25.0;
    double oblique_angle_deg = 40.0;    // optical axis tilt from vertical, [30, 45]
    double camera_alt_m = 350.0;
    int image_width = 1280;
    int image_height = 960;
    double clutter = 0.15;              // background texture amplitude
    double noise_sigma = 0.01;          // gaussian pixel noise, [0,1] units
    double extent_m = 600.0;

    void validate() const;
};

SceneRecipe recipe_from_json(const std::string& text);
std::string recipe_to_json(const SceneRecipe& recipe);
SceneRecipe load_recipe(const std::string& path);

struct Rendered {
    Scene scene;
    ImageRGB image;
};

// Depth-tested ray-cast render of terrain, road bands, and building prisms,
// plus the exactly matching ground-truth Scene.
Rendered render(const SceneRecipe& recipe);

struct ErrorInjection {
    enum class Kind { vector_offset_px, delete_building, dem_bias_m, camera_yaw_deg };
    Kind kind = Kind::vector_offset_px;
    double magnitude = 0.0;
    std::vector<std::string> targets;  // road ids / building indices; empty: all
};

// Returns a corrupted copy; the input scene is left untouched.
Scene inject(const Scene& scene, const ErrorInjection& err);

// 2-D road centerline chords in ENU meters, for band tests and sampling.
struct RoadGeometry {
    struct Chord {
        Vec2 a, b;
    };
    std::vector<Chord> chords;

    static RoadGeometry from(const Scene& scene);
    double distance(const Vec2& p) const;
};

// Image-space distance from a pixel to the projected road centerlines of a scene.
double image_distance_to_roads(const Scene& scene, const Vec2& px);

struct LabelParams {
    size_t n_per_class = 1000;
    double road_width_m = 8.0;
    double spacing_px = 12.0;
    std::uint64_t seed = 7;
};

// Positives: visible samples of the uncorrupted roads. Negatives: corrupted-scene
// samples landing off-road, building facades, and background clutter.
std::vector<ProjectedSample> label_samples(const Scene& truth, const Scene& corrupted,
                                           const ImageRGB& image, const LabelParams& params);

}  // namespace roadval

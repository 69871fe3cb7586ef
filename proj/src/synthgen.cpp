#include "roadval/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "json.hpp"

namespace roadval {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double rand01(std::uint64_t& state) {
    return (splitmix64(state) >> 11) * (1.0 / 9007199254740992.0);
}

// Position-keyed hash noise in [0,1], independent of traversal order.
double hash_noise(std::uint64_t seed, std::int64_t xi, std::int64_t yi, std::uint64_t salt) {
    std::uint64_t s = seed ^ salt ^ (static_cast<std::uint64_t>(xi) * 0x9E3779B97F4A7C15ULL) ^
                      (static_cast<std::uint64_t>(yi) * 0xC2B2AE3D27D4EB4FULL);
    return rand01(s);
}

constexpr double kAnchorLat = 47.6;
constexpr double kAnchorLon = -122.3;
constexpr double kDemCellM = 5.0;

std::string terrain_to_string(TerrainKind t) {
    switch (t) {
        case TerrainKind::flat: return "flat";
        case TerrainKind::hill: return "hill";
        case TerrainKind::ridge: return "ridge";
    }
    return "flat";
}

TerrainKind terrain_from_string(const std::string& s) {
    if (s == "flat") return TerrainKind::flat;
    if (s == "hill") return TerrainKind::hill;
    if (s == "ridge") return TerrainKind::ridge;
    throw std::invalid_argument("unknown terrain kind: " + s);
}

std::string family_to_string(RoadFamily f) {
    switch (f) {
        case RoadFamily::straight: return "straight";
        case RoadFamily::arc: return "arc";
        case RoadFamily::s_curve: return "s_curve";
    }
    return "straight";
}

RoadFamily family_from_string(const std::string& s) {
    if (s == "straight") return RoadFamily::straight;
    if (s == "arc") return RoadFamily::arc;
    if (s == "s_curve") return RoadFamily::s_curve;
    throw std::invalid_argument("unknown road family: " + s);
}

}  // namespace

void SceneRecipe::validate() const {
    if (oblique_angle_deg < 30.0 || oblique_angle_deg > 45.0)
        throw std::invalid_argument("oblique_angle_deg must lie in [30, 45]");
    if (road_count < 0 || building_count < 0 || occluder_count < 0)
        throw std::invalid_argument("counts must be >= 0");
    if (extent_m <= 50.0) throw std::invalid_argument("extent_m too small");
    if (road_width_m <= 0.0) throw std::invalid_argument("road_width_m must be > 0");
    if (image_width < 64 || image_height < 64)
        throw std::invalid_argument("image size too small");
}

std::string recipe_to_json(const SceneRecipe& r) {
    json j;
    j["version"] = 1;
    j["rng_seed"] = r.rng_seed;
    j["terrain"] = terrain_to_string(r.terrain);
    j["terrain_amp_m"] = r.terrain_amp_m;
    j["road_count"] = r.road_count;
    j["road_family"] = family_to_string(r.road_family);
    j["road_width_m"] = r.road_width_m;
    j["road_albedo"] = r.road_albedo;
    j["albedo_contrast"] = r.albedo_contrast;
    j["segment_length_m"] = r.segment_length_m;
    j["building_count"] = r.building_count;
    j["occluder_count"] = r.occluder_count;
    j["building_min_size_m"] = r.building_min_size_m;
    j["building_max_size_m"] = r.building_max_size_m;
    j["building_min_height_m"] = r.building_min_height_m;
    j["building_max_height_m"] = r.building_max_height_m;
    j["oblique_angle_deg"] = r.oblique_angle_deg;
    j["camera_alt_m"] = r.camera_alt_m;
    j["image_width"] = r.image_width;
    j["image_height"] = r.image_height;
    j["clutter"] = r.clutter;
    j["noise_sigma"] = r.noise_sigma;
    j["extent_m"] = r.extent_m;
    return j.dump(1);
}

SceneRecipe recipe_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("recipe is not valid JSON: ") + e.what());
    }
    SceneRecipe r;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("rng_seed", r.rng_seed);
    if (j.contains("terrain")) r.terrain = terrain_from_string(j.at("terrain").get<std::string>());
    get("terrain_amp_m", r.terrain_amp_m);
    get("road_count", r.road_count);
    if (j.contains("road_family"))
        r.road_family = family_from_string(j.at("road_family").get<std::string>());
    get("road_width_m", r.road_width_m);
    get("road_albedo", r.road_albedo);
    get("albedo_contrast", r.albedo_contrast);
    get("segment_length_m", r.segment_length_m);
    get("building_count", r.building_count);
    get("occluder_count", r.occluder_count);
    get("building_min_size_m", r.building_min_size_m);
    get("building_max_size_m", r.building_max_size_m);
    get("building_min_height_m", r.building_min_height_m);
    get("building_max_height_m", r.building_max_height_m);
    get("oblique_angle_deg", r.oblique_angle_deg);
    get("camera_alt_m", r.camera_alt_m);
    get("image_width", r.image_width);
    get("image_height", r.image_height);
    get("clutter", r.clutter);
    get("noise_sigma", r.noise_sigma);
    get("extent_m", r.extent_m);
    r.validate();
    return r;
}

SceneRecipe load_recipe(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open recipe file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return recipe_from_json(buf.str());
}

RoadGeometry RoadGeometry::from(const Scene& scene) {
    EnuFrame enu = scene.enu();
    RoadGeometry g;
    for (const RoadSegment& seg : scene.roads.segments) {
        for (size_t i = 0; i + 1 < seg.polyline.size(); ++i) {
            Vec3 a = enu.to_enu(seg.polyline[i]);
            Vec3 b = enu.to_enu(seg.polyline[i + 1]);
            g.chords.push_back({{a.x, a.y}, {b.x, b.y}});
        }
    }
    return g;
}

double RoadGeometry::distance(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Chord& c : chords) best = std::fmin(best, point_segment_distance(p, c.a, c.b));
    return best;
}

double image_distance_to_roads(const Scene& scene, const Vec2& px) {
    EnuFrame enu = scene.enu();
    CameraFrame cam = CameraFrame::from(scene.camera, enu);
    double best = std::numeric_limits<double>::infinity();
    for (const RoadSegment& seg : scene.roads.segments) {
        for (size_t i = 0; i + 1 < seg.polyline.size(); ++i) {
            Vec3 a = enu.to_enu(seg.polyline[i]);
            Vec3 b = enu.to_enu(seg.polyline[i + 1]);
            double za = cam.depth_of(a), zb = cam.depth_of(b);
            if (za <= 0.1 && zb <= 0.1) continue;
            if (za < 0.1) {
                a = a + (b - a) * ((0.1 - za) / (zb - za));
            } else if (zb < 0.1) {
                b = b + (a - b) * ((0.1 - zb) / (za - zb));
            }
            auto pa = cam.project(a);
            auto pb = cam.project(b);
            if (!pa || !pb) continue;
            best = std::fmin(best, point_segment_distance(px, *pa, *pb));
        }
    }
    return best;
}

namespace {

double terrain_height(const SceneRecipe& r, double x, double y) {
    double e = r.extent_m;
    switch (r.terrain) {
        case TerrainKind::flat: return 0.0;
        case TerrainKind::hill: {
            double dx = x - 0.5 * e, dy = y - 0.55 * e;
            double w = e / 4.0;
            return r.terrain_amp_m * std::exp(-(dx * dx + dy * dy) / (2.0 * w * w));
        }
        case TerrainKind::ridge: {
            double dy = y - 0.55 * e;
            double w = e / 6.0;
            return r.terrain_amp_m * std::exp(-dy * dy / (2.0 * w * w));
        }
    }
    return 0.0;
}

Scene build_scene(const SceneRecipe& r) {
    Scene scene;
    scene.version = 1;
    EnuFrame enu = EnuFrame::at(kAnchorLat, kAnchorLon);

    // DEM grid over [0, extent]^2 at ~5 m cells.
    int cells = std::max(2, static_cast<int>(std::lround(r.extent_m / kDemCellM)));
    scene.dem.origin = {kAnchorLat, kAnchorLon, 0.0};
    scene.dem.rows = cells + 1;
    scene.dem.cols = cells + 1;
    double cell_m = r.extent_m / cells;
    scene.dem.cell_size_lat = cell_m / enu.m_per_deg_lat;
    scene.dem.cell_size_lon = cell_m / enu.m_per_deg_lon;
    scene.dem.heights.resize(static_cast<size_t>(scene.dem.rows) * scene.dem.cols);
    for (int row = 0; row < scene.dem.rows; ++row) {
        for (int col = 0; col < scene.dem.cols; ++col) {
            scene.dem.heights[static_cast<size_t>(row) * scene.dem.cols + col] =
                terrain_height(r, col * cell_m, row * cell_m);
        }
    }

    // Roads: vertices every ~20 m, altitudes snapped to the DEM.
    double e = r.extent_m;
    for (int i = 0; i < r.road_count; ++i) {
        double base_y =
            r.road_count > 1 ? e * (0.30 + 0.40 * i / (r.road_count - 1)) : 0.5 * e;
        double x0 = 0.08 * e, x1 = 0.92 * e;
        int steps = std::max(2, static_cast<int>((x1 - x0) / 20.0));
        std::vector<GeoPoint> pts;
        for (int k = 0; k <= steps; ++k) {
            double t = static_cast<double>(k) / steps;
            double x = x0 + t * (x1 - x0);
            double y = base_y;
            if (r.road_family == RoadFamily::arc) y += 0.08 * e * std::sin(kPi * t);
            if (r.road_family == RoadFamily::s_curve) y += 0.06 * e * std::sin(2.0 * kPi * t);
            GeoPoint g = enu.to_geo({x, y, 0.0});
            g.alt = scene.dem.height_at(g.lat, g.lon);
            pts.push_back(g);
        }
        // Optionally chop into fixed-length segments for per-segment verdicts.
        if (r.segment_length_m <= 0.0) {
            scene.roads.segments.push_back({"r" + std::to_string(i), pts, "input"});
        } else {
            double acc = 0.0;
            int piece = 0;
            std::vector<GeoPoint> cur{pts[0]};
            for (size_t k = 1; k < pts.size(); ++k) {
                Vec3 a = enu.to_enu(pts[k - 1]);
                Vec3 b = enu.to_enu(pts[k]);
                acc += (b - a).norm();
                cur.push_back(pts[k]);
                if (acc >= r.segment_length_m && k + 1 < pts.size()) {
                    scene.roads.segments.push_back(
                        {"r" + std::to_string(i) + "_s" + std::to_string(piece++), cur, "input"});
                    cur = {pts[k]};
                    acc = 0.0;
                }
            }
            if (cur.size() >= 2)
                scene.roads.segments.push_back(
                    {"r" + std::to_string(i) + "_s" + std::to_string(piece), cur, "input"});
        }
    }

    RoadGeometry roads = RoadGeometry::from(scene);
    std::uint64_t rng = r.rng_seed ^ 0x5851F42D4C957F2DULL;

    auto add_building = [&](Vec2 center, double sx, double sy, double height) {
        BuildingPrism b;
        Vec2 corners[4] = {{center.x - sx / 2, center.y - sy / 2},
                           {center.x + sx / 2, center.y - sy / 2},
                           {center.x + sx / 2, center.y + sy / 2},
                           {center.x - sx / 2, center.y + sy / 2}};
        for (const Vec2& c : corners) {
            GeoPoint g = enu.to_geo({c.x, c.y, 0.0});
            b.footprint.push_back({g.lat, g.lon});
        }
        GeoPoint gc = enu.to_geo({center.x, center.y, 0.0});
        b.base_alt = scene.dem.height_at(gc.lat, gc.lon);
        b.height = height;
        scene.buildings.push_back(std::move(b));
    };

    for (int i = 0; i < r.building_count; ++i) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            Vec2 c{(0.05 + 0.90 * rand01(rng)) * e, (0.05 + 0.90 * rand01(rng)) * e};
            double sx = r.building_min_size_m +
                        rand01(rng) * (r.building_max_size_m - r.building_min_size_m);
            double sy = r.building_min_size_m +
                        rand01(rng) * (r.building_max_size_m - r.building_min_size_m);
            double h = r.building_min_height_m +
                       rand01(rng) * (r.building_max_height_m - r.building_min_height_m);
            double clearance = 0.5 * std::hypot(sx, sy) + 0.5 * r.road_width_m + 8.0;
            if (roads.distance(c) < clearance) continue;
            if (c.x - sx / 2 < 1.0 || c.x + sx / 2 > e - 1.0 || c.y - sy / 2 < 1.0 ||
                c.y + sy / 2 > e - 1.0)
                continue;
            add_building(c, sx, sy, h);
            break;
        }
    }

    // Occluders sit between the (southern) camera and a road station.
    if (r.occluder_count > 0 && !roads.chords.empty()) {
        for (int i = 0; i < r.occluder_count; ++i) {
            const auto& chord =
                roads.chords[splitmix64(rng) % roads.chords.size()];
            double t = 0.15 + 0.7 * rand01(rng);
            Vec2 p = chord.a + (chord.b - chord.a) * t;
            double sx = 14.0 + 8.0 * rand01(rng);
            double sy = 14.0 + 8.0 * rand01(rng);
            double gap = 0.5 * r.road_width_m + 0.5 * sy + 4.0 + 8.0 * rand01(rng);
            Vec2 c{p.x, p.y - gap};
            if (c.x - sx / 2 < 1.0 || c.x + sx / 2 > e - 1.0 || c.y - sy / 2 < 1.0) continue;
            add_building(c, sx, sy, 18.0 + 14.0 * rand01(rng));
        }
    }

    // Camera south of the scene center, optical axis through the center.
    double tilt = deg2rad(r.oblique_angle_deg);
    double h_center = scene.dem.height_at(enu.to_geo({0.5 * e, 0.5 * e, 0}).lat,
                                          enu.to_geo({0.5 * e, 0.5 * e, 0}).lon);
    double ground_dist = r.camera_alt_m * std::tan(tilt);
    Vec3 cam_enu{0.5 * e, 0.5 * e - ground_dist, h_center + r.camera_alt_m};
    scene.camera.position = enu.to_geo(cam_enu);
    scene.camera.yaw_deg = 0.0;
    scene.camera.pitch_deg = 90.0 - r.oblique_angle_deg;
    scene.camera.roll_deg = 0.0;
    double dist_center = std::hypot(ground_dist, r.camera_alt_m);
    scene.camera.focal_px = 0.85 * r.image_width * dist_center / e;
    scene.camera.cx = 0.5 * (r.image_width - 1);
    scene.camera.cy = 0.5 * (r.image_height - 1);
    scene.camera.width = r.image_width;
    scene.camera.height = r.image_height;

    scene.validate();
    return scene;
}

struct Shade {
    double r, g, b;
};

}  // namespace

Rendered render(const SceneRecipe& recipe) {
    recipe.validate();
    Rendered out;
    out.scene = build_scene(recipe);
    const Scene& scene = out.scene;
    EnuFrame enu = scene.enu();
    CameraFrame cam = CameraFrame::from(scene.camera, enu);
    RoadGeometry roads = RoadGeometry::from(scene);

    std::vector<PrismEnu> prisms;
    for (const BuildingPrism& b : scene.buildings) prisms.push_back(PrismEnu::from(b, enu));

    double hmin = scene.dem.min_height();
    double hmax = scene.dem.max_height();
    double hspan = std::fmax(hmax - hmin, 1.0);

    ImageRGB img(recipe.image_width, recipe.image_height);
    std::uint64_t seed = recipe.rng_seed;

    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            Vec3 dir = cam.pixel_ray({static_cast<double>(x), static_cast<double>(y)});

            double t_prism = std::numeric_limits<double>::infinity();
            const PrismEnu* hit_prism = nullptr;
            for (const PrismEnu& pr : prisms) {
                auto t = pr.ray_hit(cam.origin, dir, t_prism);
                if (t && *t < t_prism) {
                    t_prism = *t;
                    hit_prism = &pr;
                }
            }

            auto ground = ray_dem_intersect(scene.dem, enu, cam.origin, dir, 1e5, hmin, hmax);
            double t_ground = ground ? (*ground - cam.origin).norm()
                                     : std::numeric_limits<double>::infinity();

            Shade s;
            if (hit_prism && t_prism < t_ground) {
                Vec3 p = cam.origin + dir * t_prism;
                if (p.z > hit_prism->z_top - 1e-4) {
                    s = {0.34, 0.32, 0.32};  // roof
                } else {
                    // Facade with window stripes; strong regular texture.
                    double u = p.x + p.y;
                    double zz = p.z - hit_prism->z_base;
                    bool window = std::fmod(u, 6.0) < 3.0 && std::fmod(zz, 4.0) < 2.0;
                    s = window ? Shade{0.15, 0.17, 0.22} : Shade{0.62, 0.60, 0.56};
                }
            } else if (ground) {
                const Vec3& p = *ground;
                double d_road = roads.distance({p.x, p.y});
                if (d_road <= 0.5 * recipe.road_width_m) {
                    double g = recipe.road_albedo;
                    // faint longitudinal texture so the band is not perfectly flat
                    double n = hash_noise(seed, static_cast<std::int64_t>(std::floor(p.x)),
                                          static_cast<std::int64_t>(std::floor(p.y)), 0x11) -
                               0.5;
                    g += 0.03 * n;
                    s = {g, g, g};
                } else {
                    double shade = 0.75 + 0.25 * (p.z - hmin) / hspan;
                    double n0 = hash_noise(seed, static_cast<std::int64_t>(std::floor(p.x / 2.0)),
                                           static_cast<std::int64_t>(std::floor(p.y / 2.0)), 0x21);
                    double n1 = hash_noise(seed, static_cast<std::int64_t>(std::floor(p.x / 2.0)),
                                           static_cast<std::int64_t>(std::floor(p.y / 2.0)), 0x22);
                    double base_r = (recipe.road_albedo - recipe.albedo_contrast * 0.55);
                    Shade terrain{base_r * 0.9, base_r * 1.15, base_r * 0.7};
                    s = {shade * (terrain.r + recipe.clutter * (n0 - 0.5)),
                         shade * (terrain.g + recipe.clutter * (n1 - 0.5)),
                         shade * (terrain.b + recipe.clutter * 0.5 * (n0 - 0.5))};
                }
            } else {
                double grad = static_cast<double>(y) / img.height;
                s = {0.60 + 0.1 * grad, 0.72, 0.90 - 0.1 * grad};
            }

            auto quant = [](double v) {
                int q = static_cast<int>(std::lround(v * 255.0));
                return static_cast<std::uint8_t>(std::clamp(q, 0, 255));
            };
            img.set(x, y, quant(s.r), quant(s.g), quant(s.b));
        }
    }

    // Gaussian pixel noise, deterministic row-major stream.
    if (recipe.noise_sigma > 0.0) {
        std::uint64_t nstate = recipe.rng_seed ^ 0xD1B54A32D192ED03ULL;
        for (size_t i = 0; i < img.data.size(); ++i) {
            double u1 = std::fmax(rand01(nstate), 1e-12);
            double u2 = rand01(nstate);
            double n = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
            int v = static_cast<int>(img.data[i]) +
                    static_cast<int>(std::lround(n * recipe.noise_sigma * 255.0));
            img.data[i] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
        }
    }

    out.image = std::move(img);
    return out;
}

Scene inject(const Scene& scene, const ErrorInjection& err) {
    Scene out = scene;
    EnuFrame enu = scene.enu();

    auto refill_alts = [&](Scene& s) {
        for (RoadSegment& seg : s.roads.segments)
            for (GeoPoint& p : seg.polyline) p.alt = s.dem.height_at(p.lat, p.lon);
    };

    switch (err.kind) {
        case ErrorInjection::Kind::vector_offset_px: {
            CameraFrame cam = CameraFrame::from(scene.camera, enu);
            auto targeted = [&](const std::string& id) {
                return err.targets.empty() ||
                       std::find(err.targets.begin(), err.targets.end(), id) != err.targets.end();
            };
            for (const std::string& t : err.targets) {
                bool found = false;
                for (const RoadSegment& seg : scene.roads.segments)
                    if (seg.id == t) found = true;
                if (!found) throw std::invalid_argument("inject: unknown road id `" + t + "`");
            }
            for (RoadSegment& seg : out.roads.segments) {
                if (!targeted(seg.id)) continue;
                // Ground-meters equivalent of the pixel offset at the segment midpoint.
                Vec3 mid = enu.to_enu(seg.polyline[seg.polyline.size() / 2]);
                double depth = std::fmax(cam.depth_of(mid), 1.0);
                double m_per_px = depth / cam.focal;
                Vec3 a = enu.to_enu(seg.polyline.front());
                Vec3 b = enu.to_enu(seg.polyline.back());
                Vec2 dir = Vec2{b.x - a.x, b.y - a.y}.normalized();
                Vec2 lateral = dir.perp() * (err.magnitude * m_per_px);
                for (GeoPoint& p : seg.polyline) {
                    Vec3 q = enu.to_enu(p);
                    p = enu.to_geo({q.x + lateral.x, q.y + lateral.y, q.z});
                }
            }
            refill_alts(out);
            break;
        }
        case ErrorInjection::Kind::delete_building: {
            std::vector<size_t> idx;
            for (const std::string& t : err.targets) {
                size_t i = 0;
                try {
                    i = static_cast<size_t>(std::stoul(t));
                } catch (...) {
                    throw std::invalid_argument("inject: bad building index `" + t + "`");
                }
                if (i >= scene.buildings.size())
                    throw std::invalid_argument("inject: unknown building index `" + t + "`");
                idx.push_back(i);
            }
            std::sort(idx.rbegin(), idx.rend());
            for (size_t i : idx) out.buildings.erase(out.buildings.begin() + i);
            break;
        }
        case ErrorInjection::Kind::dem_bias_m: {
            for (double& h : out.dem.heights) h += err.magnitude;
            refill_alts(out);
            break;
        }
        case ErrorInjection::Kind::camera_yaw_deg: {
            out.camera.yaw_deg += err.magnitude;
            break;
        }
    }
    return out;
}

namespace {

// Patch window plus smoothing apron for the default sigma_s.
constexpr double kPatchMarginPx = 22.0;

bool in_patch_bounds(const Camera& cam, const Vec2& px) {
    return px.x >= kPatchMarginPx && px.x <= cam.width - 1 - kPatchMarginPx &&
           px.y >= kPatchMarginPx && px.y <= cam.height - 1 - kPatchMarginPx;
}

}  // namespace

std::vector<ProjectedSample> label_samples(const Scene& truth, const Scene& corrupted,
                                           const ImageRGB& image, const LabelParams& params) {
    (void)image;
    EnuFrame enu = truth.enu();
    CameraFrame cam = CameraFrame::from(truth.camera, enu);

    // Positives: visible samples of the uncorrupted roads.
    std::vector<ProjectedSample> positives;
    for (ProjectedSample& s : sample_segments(truth, params.spacing_px)) {
        if (!s.visible || !in_patch_bounds(truth.camera, s.px)) continue;
        s.label = SampleLabel::consistent;
        positives.push_back(std::move(s));
    }

    // Negative source 1: corrupted-scene projections landing off-road.
    std::vector<ProjectedSample> neg_offset;
    for (ProjectedSample& s : sample_segments(corrupted, params.spacing_px)) {
        if (!s.visible || !in_patch_bounds(truth.camera, s.px)) continue;
        Vec3 w = enu.to_enu(s.world);
        double depth = std::fmax(cam.depth_of(w), 1.0);
        double half_width_px = 0.5 * params.road_width_m * cam.focal / depth;
        if (image_distance_to_roads(truth, s.px) <= half_width_px) continue;
        s.label = SampleLabel::inconsistent;
        neg_offset.push_back(std::move(s));
    }

    std::uint64_t rng = params.seed ^ 0x6A09E667F3BCC909ULL;
    auto random_frame = [&](ProjectedSample& s) {
        double phi = 2.0 * kPi * rand01(rng);
        s.primary_dir = {std::cos(phi), std::sin(phi)};
        s.normal_dir = s.primary_dir.perp();
    };

    // Negative source 2: building facades.
    std::vector<ProjectedSample> neg_facade;
    {
        size_t want = 2 * params.n_per_class;
        size_t attempts = 0;
        while (neg_facade.size() < want && attempts < 20 * want && !truth.buildings.empty()) {
            ++attempts;
            const BuildingPrism& b =
                truth.buildings[splitmix64(rng) % truth.buildings.size()];
            PrismEnu pr = PrismEnu::from(b, enu);
            size_t n = pr.footprint.size();
            size_t e0 = splitmix64(rng) % n;
            Vec2 a = pr.footprint[e0], c = pr.footprint[(e0 + 1) % n];
            double t = 0.1 + 0.8 * rand01(rng);
            Vec2 at = a + (c - a) * t;
            Vec2 edge = (c - a).normalized();
            Vec2 outward = edge.perp();  // footprint is CCW; perp points outward or inward
            // pick whichever side is outside the footprint
            if (point_in_polygon(at + outward * 0.5, pr.footprint)) outward = outward * -1.0;
            double z = pr.z_base + (0.15 + 0.7 * rand01(rng)) * (pr.z_top - pr.z_base);
            Vec3 world{at.x + outward.x * 0.3, at.y + outward.y * 0.3, z};
            auto px = cam.project(world);
            if (!px || !in_patch_bounds(truth.camera, *px)) continue;
            GeoPoint g = enu.to_geo(world);
            if (is_occluded(truth, g)) continue;
            ProjectedSample s;
            s.segment_id = "facade";
            s.world = g;
            s.px = *px;
            random_frame(s);
            s.visible = true;
            s.label = SampleLabel::inconsistent;
            neg_facade.push_back(std::move(s));
        }
    }

    // Negative source 3: background clutter well away from any road.
    std::vector<ProjectedSample> neg_background;
    {
        RoadGeometry roads = RoadGeometry::from(truth);
        double e_lat = (truth.dem.rows - 1) * truth.dem.cell_size_lat;
        double e_lon = (truth.dem.cols - 1) * truth.dem.cell_size_lon;
        double ext_x = e_lon * enu.m_per_deg_lon;
        double ext_y = e_lat * enu.m_per_deg_lat;
        size_t want = 2 * params.n_per_class;
        size_t attempts = 0;
        while (neg_background.size() < want && attempts < 20 * want) {
            ++attempts;
            Vec2 p{(0.05 + 0.9 * rand01(rng)) * ext_x, (0.05 + 0.9 * rand01(rng)) * ext_y};
            if (roads.distance(p) < 0.5 * params.road_width_m + 15.0) continue;
            GeoPoint g = enu.to_geo({p.x, p.y, 0.0});
            g.alt = truth.dem.height_at(g.lat, g.lon);
            auto px = cam.project(enu.to_enu(g));
            if (!px || !in_patch_bounds(truth.camera, *px)) continue;
            if (is_occluded(truth, g)) continue;
            ProjectedSample s;
            s.segment_id = "background";
            s.world = g;
            s.px = *px;
            random_frame(s);
            s.visible = true;
            s.label = SampleLabel::inconsistent;
            neg_background.push_back(std::move(s));
        }
    }

    if (positives.size() < params.n_per_class)
        throw std::runtime_error("label_samples: not enough visible positive samples");

    std::vector<ProjectedSample> out(positives.begin(),
                                     positives.begin() + params.n_per_class);

    // Fill the negative budget: offsets first, then facades, then background.
    std::vector<ProjectedSample> negatives;
    for (auto* src : {&neg_offset, &neg_facade, &neg_background}) {
        for (ProjectedSample& s : *src) {
            if (negatives.size() >= params.n_per_class) break;
            negatives.push_back(std::move(s));
        }
    }
    if (negatives.size() < params.n_per_class)
        throw std::runtime_error("label_samples: not enough negative samples");
    out.insert(out.end(), negatives.begin(), negatives.end());
    return out;
}

}  // namespace roadval

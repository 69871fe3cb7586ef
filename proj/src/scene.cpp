#include "roadval/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace roadval {

using nlohmann::json;

bool DemGrid::contains(double lat, double lon) const {
    double r = (lat - origin.lat) / cell_size_lat;
    double c = (lon - origin.lon) / cell_size_lon;
    return r >= 0.0 && r <= rows - 1 && c >= 0.0 && c <= cols - 1;
}

double DemGrid::height_at(double lat, double lon) const {
    double r = (lat - origin.lat) / cell_size_lat;
    double c = (lon - origin.lon) / cell_size_lon;
    if (r < 0.0 || r > rows - 1 || c < 0.0 || c > cols - 1) {
        std::ostringstream os;
        os << "dem query out of bounds: lat=" << lat << " lon=" << lon;
        throw ValidationError(os.str());
    }
    int r0 = static_cast<int>(std::floor(r));
    int c0 = static_cast<int>(std::floor(c));
    if (r0 >= rows - 1) r0 = rows - 2;
    if (c0 >= cols - 1) c0 = cols - 2;
    double fr = r - r0;
    double fc = c - c0;
    double h00 = at(r0, c0);
    double h01 = at(r0, c0 + 1);
    double h10 = at(r0 + 1, c0);
    double h11 = at(r0 + 1, c0 + 1);
    return h00 * (1 - fr) * (1 - fc) + h01 * (1 - fr) * fc + h10 * fr * (1 - fc) +
           h11 * fr * fc;
}

double DemGrid::min_height() const {
    return *std::min_element(heights.begin(), heights.end());
}

double DemGrid::max_height() const {
    return *std::max_element(heights.begin(), heights.end());
}

namespace {

bool segments_intersect(const LatLon& a, const LatLon& b, const LatLon& c, const LatLon& d) {
    auto cross = [](const LatLon& o, const LatLon& p, const LatLon& q) {
        return (p.lon - o.lon) * (q.lat - o.lat) - (p.lat - o.lat) * (q.lon - o.lon);
    };
    double d1 = cross(c, d, a);
    double d2 = cross(c, d, b);
    double d3 = cross(a, b, c);
    double d4 = cross(a, b, d);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

bool footprint_self_intersects(const std::vector<LatLon>& poly) {
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges (they share a vertex)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                return true;
        }
    }
    return false;
}

void check_finite(double v, const std::string& field) {
    if (!std::isfinite(v)) throw ValidationError("non-finite value in field `" + field + "`");
}

}  // namespace

void Scene::validate() const {
    if (dem.rows < 2 || dem.cols < 2)
        throw ValidationError("dem: `rows` and `cols` must both be >= 2");
    if (!(dem.cell_size_lat > 0.0) || !(dem.cell_size_lon > 0.0))
        throw ValidationError("dem: `cell_size` must be > 0");
    if (dem.heights.size() != static_cast<size_t>(dem.rows) * dem.cols)
        throw ValidationError("dem: `heights` size does not match rows*cols");
    for (double h : dem.heights) {
        if (!std::isfinite(h)) throw ValidationError("dem: non-finite value in `heights`");
    }
    if (dem.origin.lat < -90.0 || dem.origin.lat > 90.0)
        throw ValidationError("dem: `origin.lat` outside [-90, 90]");
    if (dem.origin.lon < -180.0 || dem.origin.lon > 180.0)
        throw ValidationError("dem: `origin.lon` outside [-180, 180]");

    for (const RoadSegment& seg : roads.segments) {
        if (seg.polyline.size() < 2)
            throw ValidationError("roads: segment `" + seg.id + "` has fewer than 2 points");
        for (size_t i = 0; i < seg.polyline.size(); ++i) {
            const GeoPoint& p = seg.polyline[i];
            if (p.lat < -90.0 || p.lat > 90.0)
                throw ValidationError("roads: `lat` outside [-90, 90] in segment `" + seg.id + "`");
            if (p.lon < -180.0 || p.lon > 180.0)
                throw ValidationError("roads: `lon` outside [-180, 180] in segment `" + seg.id +
                                      "`");
            check_finite(p.alt, "roads.polyline.alt");
            if (i > 0 && seg.polyline[i - 1].lat == p.lat && seg.polyline[i - 1].lon == p.lon)
                throw ValidationError("roads: repeated consecutive point in segment `" + seg.id +
                                      "`");
        }
    }

    for (size_t b = 0; b < buildings.size(); ++b) {
        const BuildingPrism& prism = buildings[b];
        if (prism.footprint.size() < 3)
            throw ValidationError("buildings: `footprint` needs >= 3 vertices");
        if (!(prism.height > 0.0)) throw ValidationError("buildings: `height` must be > 0");
        check_finite(prism.base_alt, "buildings.base_alt");
        if (footprint_self_intersects(prism.footprint))
            throw ValidationError("buildings: self-intersecting `footprint`");
    }

    if (!(camera.focal_px > 0.0)) throw ValidationError("camera: `focal_px` must be > 0");
    if (camera.width <= 0 || camera.height <= 0)
        throw ValidationError("camera: `image_size` must be positive");
    double oblique = camera.oblique_angle_deg();
    if (!(oblique > 0.0 && oblique < 90.0))
        throw ValidationError("camera: oblique angle must lie in (0, 90) degrees");
    check_finite(camera.position.alt, "camera.position.alt");
}

namespace {

json geo_to_json(const GeoPoint& p) {
    return json{{"lat", p.lat}, {"lon", p.lon}, {"alt", p.alt}};
}

GeoPoint geo_from_json(const json& j) {
    GeoPoint p;
    p.lat = j.at("lat").get<double>();
    p.lon = j.at("lon").get<double>();
    if (j.contains("alt")) p.alt = j.at("alt").get<double>();
    return p;
}

}  // namespace

std::string scene_to_json(const Scene& scene) {
    json j;
    j["version"] = scene.version;
    json dem;
    dem["origin"] = json{{"lat", scene.dem.origin.lat}, {"lon", scene.dem.origin.lon}};
    dem["cell_size"] = json{{"lat", scene.dem.cell_size_lat}, {"lon", scene.dem.cell_size_lon}};
    dem["rows"] = scene.dem.rows;
    dem["cols"] = scene.dem.cols;
    dem["heights"] = scene.dem.heights;
    j["dem"] = dem;

    j["roads"] = json::array();
    for (const RoadSegment& seg : scene.roads.segments) {
        json s;
        s["id"] = seg.id;
        s["source"] = seg.source;
        s["polyline"] = json::array();
        for (const GeoPoint& p : seg.polyline) s["polyline"].push_back(geo_to_json(p));
        j["roads"].push_back(s);
    }

    j["buildings"] = json::array();
    for (const BuildingPrism& b : scene.buildings) {
        json bj;
        bj["footprint"] = json::array();
        for (const LatLon& v : b.footprint)
            bj["footprint"].push_back(json{{"lat", v.lat}, {"lon", v.lon}});
        bj["base_alt"] = b.base_alt;
        bj["height"] = b.height;
        j["buildings"].push_back(bj);
    }

    const Camera& c = scene.camera;
    j["camera"] = json{{"position", geo_to_json(c.position)}, {"yaw_deg", c.yaw_deg},
                       {"pitch_deg", c.pitch_deg},            {"roll_deg", c.roll_deg},
                       {"focal_px", c.focal_px},              {"cx", c.cx},
                       {"cy", c.cy},                          {"width", c.width},
                       {"height", c.height}};
    return j.dump(1);
}

Scene scene_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scene file is not valid JSON: ") + e.what());
    }

    Scene scene;
    try {
        if (!j.contains("version")) throw ParseError("scene file missing mandatory `version`");
        scene.version = j.at("version").get<int>();

        const json& dem = j.at("dem");
        scene.dem.origin.lat = dem.at("origin").at("lat").get<double>();
        scene.dem.origin.lon = dem.at("origin").at("lon").get<double>();
        scene.dem.cell_size_lat = dem.at("cell_size").at("lat").get<double>();
        scene.dem.cell_size_lon = dem.at("cell_size").at("lon").get<double>();
        scene.dem.rows = dem.at("rows").get<int>();
        scene.dem.cols = dem.at("cols").get<int>();
        scene.dem.heights = dem.at("heights").get<std::vector<double>>();

        for (const json& s : j.at("roads")) {
            RoadSegment seg;
            seg.id = s.at("id").get<std::string>();
            if (s.contains("source")) seg.source = s.at("source").get<std::string>();
            for (const json& p : s.at("polyline")) {
                GeoPoint gp = geo_from_json(p);
                if (!p.contains("alt")) {
                    // Road altitudes absent from input snap to the DEM surface.
                    gp.alt = scene.dem.height_at(gp.lat, gp.lon);
                }
                seg.polyline.push_back(gp);
            }
            scene.roads.segments.push_back(std::move(seg));
        }

        if (j.contains("buildings")) {
            for (const json& bj : j.at("buildings")) {
                BuildingPrism b;
                for (const json& v : bj.at("footprint"))
                    b.footprint.push_back({v.at("lat").get<double>(), v.at("lon").get<double>()});
                b.base_alt = bj.at("base_alt").get<double>();
                b.height = bj.at("height").get<double>();
                scene.buildings.push_back(std::move(b));
            }
        }

        const json& c = j.at("camera");
        scene.camera.position = geo_from_json(c.at("position"));
        scene.camera.yaw_deg = c.at("yaw_deg").get<double>();
        scene.camera.pitch_deg = c.at("pitch_deg").get<double>();
        scene.camera.roll_deg = c.at("roll_deg").get<double>();
        scene.camera.focal_px = c.at("focal_px").get<double>();
        scene.camera.cx = c.at("cx").get<double>();
        scene.camera.cy = c.at("cy").get<double>();
        scene.camera.width = c.at("width").get<int>();
        scene.camera.height = c.at("height").get<int>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed scene file: ") + e.what());
    }

    scene.validate();
    return scene;
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scene file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scene_from_json(buf.str());
}

void save_scene(const Scene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scene file: " + path);
    out << scene_to_json(scene) << "\n";
}

}  // namespace roadval

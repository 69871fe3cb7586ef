#include "roadval/conflation.hpp"

#include <cmath>
#include <stdexcept>

#include "roadval/projection.hpp"

namespace roadval {

std::array<std::optional<Vec2>, 2> search_first_positive(const ImageRGB& image,
                                                         const SvmModel& model,
                                                         const DescriptorExtractor& extractor,
                                                         const SearchLine& line,
                                                         const ProjectedSample& frame) {
    std::array<std::optional<Vec2>, 2> out{std::nullopt, std::nullopt};
    const double signs[2] = {1.0, -1.0};
    for (int side = 0; side < 2; ++side) {
        for (double dist = line.step_px; dist <= line.half_length_px + 1e-9;
             dist += line.step_px) {
            Vec2 p = line.origin_px + line.direction * (signs[side] * dist);
            ProjectedSample probe = frame;
            probe.px = p;
            auto desc = extractor.extract(image, probe);
            if (!desc || desc->degenerate) continue;
            if (predict(model, desc->v).label == 1) {
                out[side] = p;
                break;
            }
        }
    }
    return out;
}

std::vector<Vec2> smooth_chain(const std::vector<Vec2>& chain, int window) {
    if (chain.size() < 3 || window < 3) return chain;
    int half = window / 2;
    int n = static_cast<int>(chain.size());
    std::vector<Vec2> out(chain.size());
    for (int i = 0; i < n; ++i) {
        int lo = std::max(0, i - half);
        int hi = std::min(n - 1, i + half);
        // Total least-squares line through the window (centroid + principal axis).
        Vec2 c{0, 0};
        for (int k = lo; k <= hi; ++k) c = c + chain[k];
        c = c * (1.0 / (hi - lo + 1));
        double sxx = 0, sxy = 0, syy = 0;
        for (int k = lo; k <= hi; ++k) {
            Vec2 d = chain[k] - c;
            sxx += d.x * d.x;
            sxy += d.x * d.y;
            syy += d.y * d.y;
        }
        double tr = 0.5 * (sxx + syy);
        double disc = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
        double l1 = tr + disc;
        Vec2 axis;
        if (std::abs(sxy) > 1e-15) {
            axis = Vec2{l1 - syy, sxy}.normalized();
        } else {
            axis = sxx >= syy ? Vec2{1, 0} : Vec2{0, 1};
        }
        Vec2 d = chain[i] - c;
        out[i] = c + axis * d.dot(axis);
    }
    return out;
}

ConflationResult conflate_segment(const Scene& scene, const ImageRGB& image, const SvmModel& model,
                                  const std::vector<ProjectedSample>& samples,
                                  const ConflationParams& params) {
    if (samples.size() < 3)
        throw std::invalid_argument("conflate_segment needs at least 3 samples");

    DescriptorExtractor extractor;
    extractor.sigma_s = model.sigma_s;
    extractor.color_scale = model.color_scale;

    ConflationResult result;
    result.segment_id = samples.front().segment_id;

    std::vector<Vec2> side_pos, side_neg;
    for (const ProjectedSample& s : samples) {
        SearchLine line;
        line.origin_px = s.px;
        line.direction = s.normal_dir;
        line.half_length_px = params.half_length_px;
        line.step_px = params.step_px;
        auto hits = search_first_positive(image, model, extractor, line, s);
        if (hits[0]) side_pos.push_back(*hits[0]);
        if (hits[1]) side_neg.push_back(*hits[1]);
    }
    result.detections_pos = side_pos;
    result.detections_neg = side_neg;

    double min_count = params.min_side_fraction * static_cast<double>(samples.size());
    for (const std::vector<Vec2>* side : {&side_pos, &side_neg}) {
        if (static_cast<double>(side->size()) < min_count) continue;  // clutter
        if (static_cast<int>(side->size()) < params.min_chain) continue;
        std::vector<Vec2> poly = smooth_chain(*side, params.smooth_window);
        std::vector<GeoPoint> geo;
        geo.reserve(poly.size());
        bool ok = true;
        for (const Vec2& p : poly) {
            auto g = backproject_to_dem(scene, p);
            if (!g) {
                ok = false;
                break;
            }
            geo.push_back(*g);
        }
        if (!ok) continue;
        result.corrected_px.push_back(std::move(poly));
        result.corrected_geo.push_back(std::move(geo));
    }
    return result;
}

}  // namespace roadval

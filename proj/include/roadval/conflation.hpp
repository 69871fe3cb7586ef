#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "roadval/descriptor.hpp"
#include "roadval/image.hpp"
#include "roadval/scene.hpp"
#include "roadval/svm.hpp"

namespace roadval {

struct SearchLine {
    Vec2 origin_px;
    Vec2 direction;  // unit; the sample's normal_dir
    double half_length_px = 100.0;
    double step_px = 4.0;
};

struct ConflationParams {
    double half_length_px = 100.0;
    double step_px = 4.0;
    int smooth_window = 5;          // moving least-squares window
    double min_side_fraction = 0.5; // sides with sparser detections are clutter
    int min_chain = 3;
    double spacing_px = 12.0;
};

struct ConflationResult {
    std::string segment_id;
    // First-positive detections per side (+direction / -direction of the search lines).
    std::vector<Vec2> detections_pos;
    std::vector<Vec2> detections_neg;
    std::vector<std::vector<Vec2>> corrected_px;
    std::vector<std::vector<GeoPoint>> corrected_geo;
    // Corrected altitudes come from the DEM; wrong for bridges without bridge models.
    bool altitude_dem_bound = true;
};

// Walk outward from the line origin in +direction and -direction independently;
// returns the first positively-classified point per side (nullopt when none).
// The descriptor frame (primary/normal) is inherited from `frame`.
std::array<std::optional<Vec2>, 2> search_first_positive(const ImageRGB& image,
                                                         const SvmModel& model,
                                                         const DescriptorExtractor& extractor,
                                                         const SearchLine& line,
                                                         const ProjectedSample& frame);

// Perpendicular-line search over all samples of one inconsistent segment.
ConflationResult conflate_segment(const Scene& scene, const ImageRGB& image, const SvmModel& model,
                                  const std::vector<ProjectedSample>& samples,
                                  const ConflationParams& params = {});

// Moving least-squares line fit over a window; collinear input is a fixed point.
std::vector<Vec2> smooth_chain(const std::vector<Vec2>& chain, int window);

}  // namespace roadval

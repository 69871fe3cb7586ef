#pragma once

#include <array>
#include <optional>
#include <vector>

#include "roadval/image.hpp"
#include "roadval/projection.hpp"

namespace roadval {

struct ExtractionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kPatchSize = 24;
inline constexpr int kPatchCenter = 12;  // window spans offsets [-12, 11] around the sample
inline constexpr int kDescriptorLen = 29;

// Component layout of the composite descriptor.
inline constexpr int kColorOffset = 0;   // 9: (median, std, skew) per CIELUV channel
inline constexpr int kGradOffset = 9;    // 4: rectified primary/normal gradients
inline constexpr int kSteerOffset = 13;  // 10: 2 quadrature magnitudes + 8 rectified
inline constexpr int kHessOffset = 23;   // 2: Hessian eigenvalues, descending
inline constexpr int kDogOffset = 25;    // 4: rectified difference-of-Gaussians pair

// Gaussian-smoothed 24x24 RGB window with the sample's direction frame.
struct Patch {
    std::array<double, kPatchSize * kPatchSize * 3> rgb{};  // values in [0,1]
    Vec2 center_px;
    Vec2 primary_dir;
    Vec2 normal_dir;

    double r(int row, int col) const { return rgb[(row * kPatchSize + col) * 3 + 0]; }
    double g(int row, int col) const { return rgb[(row * kPatchSize + col) * 3 + 1]; }
    double b(int row, int col) const { return rgb[(row * kPatchSize + col) * 3 + 2]; }
};

// Bias-gain normalized luminance of a patch; flat patches normalize to all zeros.
struct NormalizedLuminance {
    std::array<double, kPatchSize * kPatchSize> lum{};
    bool flat = false;

    double at(int row, int col) const { return lum[row * kPatchSize + col]; }
};

// nullopt when the window plus smoothing apron does not fit inside the image.
std::optional<Patch> extract_patch(const ImageRGB& image, const ProjectedSample& sample,
                                   double sigma_s = 2.8);

NormalizedLuminance normalized_luminance(const Patch& patch);

std::array<double, 9> color_moments(const Patch& patch);
std::array<double, 4> normalized_gradient(const Patch& patch);
std::array<double, 10> steerable_response(const Patch& patch);
std::array<double, 2> hessian_eigenvalues(const Patch& patch);
std::array<double, 4> dog_response(const Patch& patch, double sigma_s = 2.8);

struct Descriptor {
    std::array<double, kDescriptorLen> v{};
    bool degenerate = false;
};

// Concatenate the five families, scale color dims, and L2-normalize.
Descriptor compose(const std::array<double, 9>& color, const std::array<double, 4>& grad,
                   const std::array<double, 10>& steer, const std::array<double, 2>& hessian,
                   const std::array<double, 4>& dog,
                   const std::array<double, 9>& color_scale = {1, 1, 1, 1, 1, 1, 1, 1, 1});

// Scale + normalize a raw concatenated row (used when training computes the color scaling).
Descriptor compose_raw(const std::array<double, kDescriptorLen>& raw,
                       const std::array<double, 9>& color_scale);

struct DescriptorExtractor {
    double sigma_s = 2.8;
    std::array<double, 9> color_scale{1, 1, 1, 1, 1, 1, 1, 1, 1};

    // Unscaled, unnormalized concatenation of the five families.
    std::array<double, kDescriptorLen> raw(const Patch& patch) const;
    Descriptor from_patch(const Patch& patch) const;
    std::optional<Descriptor> extract(const ImageRGB& image, const ProjectedSample& sample) const;
};

// Per-dimension standard deviation of the 9 color moments over a training set of raw rows.
std::array<double, 9> color_scaling_from(
    const std::vector<std::array<double, kDescriptorLen>>& raw_rows);

}  // namespace roadval

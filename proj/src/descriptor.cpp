#include "roadval/descriptor.hpp"

#include <algorithm>
#include <cmath>

namespace roadval {

namespace {

std::vector<double> gaussian_kernel_1d(double sigma, int radius) {
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

}  // namespace

std::optional<Patch> extract_patch(const ImageRGB& image, const ProjectedSample& sample,
                                   double sigma_s) {
    int kr = static_cast<int>(std::ceil(3.0 * sigma_s));
    int cu = static_cast<int>(std::lround(sample.px.x));
    int cv = static_cast<int>(std::lround(sample.px.y));

    int x0 = cu - kPatchCenter, x1 = cu + kPatchSize - kPatchCenter - 1;
    int y0 = cv - kPatchCenter, y1 = cv + kPatchSize - kPatchCenter - 1;
    if (x0 - kr < 0 || x1 + kr >= image.width || y0 - kr < 0 || y1 + kr >= image.height)
        return std::nullopt;

    std::vector<double> kernel = gaussian_kernel_1d(sigma_s, kr);

    // Horizontal pass over patch columns, extended rows.
    int ext_rows = kPatchSize + 2 * kr;
    std::vector<double> tmp(static_cast<size_t>(ext_rows) * kPatchSize * 3);
    for (int row = 0; row < ext_rows; ++row) {
        int iy = y0 - kr + row;
        for (int col = 0; col < kPatchSize; ++col) {
            int ix = x0 + col;
            double acc[3] = {0, 0, 0};
            for (int k = -kr; k <= kr; ++k) {
                const std::uint8_t* p = image.px(ix + k, iy);
                double w = kernel[k + kr];
                acc[0] += w * p[0];
                acc[1] += w * p[1];
                acc[2] += w * p[2];
            }
            double* t = &tmp[(static_cast<size_t>(row) * kPatchSize + col) * 3];
            t[0] = acc[0];
            t[1] = acc[1];
            t[2] = acc[2];
        }
    }

    Patch patch;
    patch.center_px = sample.px;
    patch.primary_dir = sample.primary_dir;
    patch.normal_dir = sample.normal_dir;
    for (int row = 0; row < kPatchSize; ++row) {
        for (int col = 0; col < kPatchSize; ++col) {
            double acc[3] = {0, 0, 0};
            for (int k = -kr; k <= kr; ++k) {
                const double* t = &tmp[(static_cast<size_t>(row + kr + k) * kPatchSize + col) * 3];
                double w = kernel[k + kr];
                acc[0] += w * t[0];
                acc[1] += w * t[1];
                acc[2] += w * t[2];
            }
            for (int ch = 0; ch < 3; ++ch)
                patch.rgb[(row * kPatchSize + col) * 3 + ch] = acc[ch] / 255.0;
        }
    }
    return patch;
}

NormalizedLuminance normalized_luminance(const Patch& patch) {
    NormalizedLuminance out;
    constexpr int n = kPatchSize * kPatchSize;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        double lum =
            0.299 * patch.rgb[i * 3] + 0.587 * patch.rgb[i * 3 + 1] + 0.114 * patch.rgb[i * 3 + 2];
        out.lum[i] = lum;
        mean += lum;
    }
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (out.lum[i] - mean) * (out.lum[i] - mean);
    double sd = std::sqrt(var / n);
    if (sd < 1e-12) {
        out.lum.fill(0.0);
        out.flat = true;
        return out;
    }
    for (int i = 0; i < n; ++i) out.lum[i] = (out.lum[i] - mean) / sd;
    return out;
}

namespace {

// sRGB (D65) -> CIELUV.
void rgb_to_luv(double r, double g, double b, double& L, double& U, double& V) {
    auto linearize = [](double c) {
        return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    };
    double rl = linearize(r), gl = linearize(g), bl = linearize(b);
    double X = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    double Y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    double Z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;

    constexpr double Xn = 0.95047, Yn = 1.0, Zn = 1.08883;
    const double un = 4.0 * Xn / (Xn + 15.0 * Yn + 3.0 * Zn);
    const double vn = 9.0 * Yn / (Xn + 15.0 * Yn + 3.0 * Zn);

    double yr = Y / Yn;
    L = yr > 0.008856 ? 116.0 * std::cbrt(yr) - 16.0 : 903.3 * yr;
    double denom = X + 15.0 * Y + 3.0 * Z;
    double up = denom > 0.0 ? 4.0 * X / denom : un;
    double vp = denom > 0.0 ? 9.0 * Y / denom : vn;
    U = 13.0 * L * (up - un);
    V = 13.0 * L * (vp - vn);
}

// Median with midpoint convention, population std, standardized skewness.
void channel_moments(std::vector<double>& vals, double& median, double& sd, double& skew) {
    size_t n = vals.size();
    std::sort(vals.begin(), vals.end());
    median = n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0;
    for (double v : vals) {
        double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    sd = std::sqrt(m2);
    skew = sd < 1e-12 ? 0.0 : m3 / (sd * sd * sd);
}

}  // namespace

std::array<double, 9> color_moments(const Patch& patch) {
    constexpr int n = kPatchSize * kPatchSize;
    std::vector<double> lv(n), uv(n), vv(n);
    for (int i = 0; i < n; ++i) {
        rgb_to_luv(patch.rgb[i * 3], patch.rgb[i * 3 + 1], patch.rgb[i * 3 + 2], lv[i], uv[i],
                   vv[i]);
    }
    std::array<double, 9> out{};
    channel_moments(lv, out[0], out[1], out[2]);
    channel_moments(uv, out[3], out[4], out[5]);
    channel_moments(vv, out[6], out[7], out[8]);
    return out;
}

namespace {

std::array<double, 2> rectify(double r) { return {std::abs(r) - r, std::abs(r) + r}; }

}  // namespace

std::array<double, 4> normalized_gradient(const Patch& patch) {
    NormalizedLuminance nl = normalized_luminance(patch);
    if (nl.flat) return {0, 0, 0, 0};
    double gx = 0.0, gy = 0.0;
    int count = 0;
    for (int row = 1; row < kPatchSize - 1; ++row) {
        for (int col = 1; col < kPatchSize - 1; ++col) {
            gx += 0.5 * (nl.at(row, col + 1) - nl.at(row, col - 1));
            gy += 0.5 * (nl.at(row + 1, col) - nl.at(row - 1, col));
            ++count;
        }
    }
    gx /= count;
    gy /= count;
    double gp = gx * patch.primary_dir.x + gy * patch.primary_dir.y;
    double gn = gx * patch.normal_dir.x + gy * patch.normal_dir.y;
    auto rp = rectify(gp);
    auto rn = rectify(gn);
    return {rp[0], rp[1], rn[0], rn[1]};
}

namespace {

// Freeman-Adelson G2/H2 steerable basis, sampled over the patch and made zero-sum.
// Kernel coordinates are patch offsets divided by this spatial scale.
constexpr double kSteerScalePx = 4.0;

struct SteerBasis {
    // responses of the 7 basis kernels against a luminance field
    double g2a, g2b, g2c;
    double h2a, h2b, h2c, h2d;
};

SteerBasis steer_basis_responses(const NormalizedLuminance& nl) {
    struct Kernels {
        std::array<double, kPatchSize * kPatchSize> g2a, g2b, g2c, h2a, h2b, h2c, h2d;
    };
    static const Kernels kernels = [] {
        Kernels k;
        auto zero_sum = [](std::array<double, kPatchSize * kPatchSize>& a) {
            double mean = 0.0;
            for (double v : a) mean += v;
            mean /= a.size();
            for (double& v : a) v -= mean;
        };
        for (int row = 0; row < kPatchSize; ++row) {
            for (int col = 0; col < kPatchSize; ++col) {
                double x = (col - kPatchCenter) / kSteerScalePx;
                double y = (row - kPatchCenter) / kSteerScalePx;
                double e = std::exp(-(x * x + y * y));
                int i = row * kPatchSize + col;
                k.g2a[i] = 0.9213 * (2.0 * x * x - 1.0) * e;
                k.g2b[i] = 1.843 * x * y * e;
                k.g2c[i] = 0.9213 * (2.0 * y * y - 1.0) * e;
                k.h2a[i] = 0.9780 * (-2.254 * x + x * x * x) * e;
                k.h2b[i] = 0.9780 * (-0.7515 + x * x) * y * e;
                k.h2c[i] = 0.9780 * (-0.7515 + y * y) * x * e;
                k.h2d[i] = 0.9780 * (-2.254 * y + y * y * y) * e;
            }
        }
        zero_sum(k.g2a);
        zero_sum(k.g2b);
        zero_sum(k.g2c);
        zero_sum(k.h2a);
        zero_sum(k.h2b);
        zero_sum(k.h2c);
        zero_sum(k.h2d);
        return k;
    }();

    SteerBasis r{};
    for (int i = 0; i < kPatchSize * kPatchSize; ++i) {
        double l = nl.lum[i];
        r.g2a += kernels.g2a[i] * l;
        r.g2b += kernels.g2b[i] * l;
        r.g2c += kernels.g2c[i] * l;
        r.h2a += kernels.h2a[i] * l;
        r.h2b += kernels.h2b[i] * l;
        r.h2c += kernels.h2c[i] * l;
        r.h2d += kernels.h2d[i] * l;
    }
    return r;
}

double steer_g2(const SteerBasis& b, double c, double s) {
    return c * c * b.g2a - 2.0 * c * s * b.g2b + s * s * b.g2c;
}

double steer_h2(const SteerBasis& b, double c, double s) {
    return c * c * c * b.h2a - 3.0 * c * c * s * b.h2b + 3.0 * c * s * s * b.h2c -
           s * s * s * b.h2d;
}

}  // namespace

std::array<double, 10> steerable_response(const Patch& patch) {
    NormalizedLuminance nl = normalized_luminance(patch);
    if (nl.flat) return {0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    SteerBasis basis = steer_basis_responses(nl);

    double cp = patch.primary_dir.x, sp = patch.primary_dir.y;
    double cn = patch.normal_dir.x, sn = patch.normal_dir.y;
    double g2p = steer_g2(basis, cp, sp);
    double h2p = steer_h2(basis, cp, sp);
    double g2n = steer_g2(basis, cn, sn);
    double h2n = steer_h2(basis, cn, sn);

    auto r1 = rectify(g2p);
    auto r2 = rectify(h2p);
    auto r3 = rectify(g2n);
    auto r4 = rectify(h2n);
    return {std::sqrt(g2p * g2p + h2p * h2p),
            std::sqrt(g2n * g2n + h2n * h2n),
            r1[0],
            r1[1],
            r2[0],
            r2[1],
            r3[0],
            r3[1],
            r4[0],
            r4[1]};
}

std::array<double, 2> hessian_eigenvalues(const Patch& patch) {
    NormalizedLuminance nl = normalized_luminance(patch);
    if (nl.flat) return {0, 0};
    constexpr int c = kPatchCenter;
    double ixx = nl.at(c, c + 1) + nl.at(c, c - 1) - 2.0 * nl.at(c, c);
    double iyy = nl.at(c + 1, c) + nl.at(c - 1, c) - 2.0 * nl.at(c, c);
    double ixy =
        0.25 * (nl.at(c + 1, c + 1) + nl.at(c - 1, c - 1) - nl.at(c + 1, c - 1) - nl.at(c - 1, c + 1));
    double tr = 0.5 * (ixx + iyy);
    double disc = std::sqrt(0.25 * (ixx - iyy) * (ixx - iyy) + ixy * ixy);
    return {tr + disc, tr - disc};
}

namespace {

// 2-D Gaussian over the patch, truncated at 3*sigma (capped by the patch), unit sum.
std::array<double, kPatchSize * kPatchSize> gaussian_kernel_2d(double sigma) {
    std::array<double, kPatchSize * kPatchSize> k{};
    int radius = std::min(static_cast<int>(std::ceil(3.0 * sigma)), kPatchSize - kPatchCenter - 1);
    double sum = 0.0;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            k[(kPatchCenter + dy) * kPatchSize + (kPatchCenter + dx)] = w;
            sum += w;
        }
    }
    for (double& v : k) v /= sum;
    return k;
}

}  // namespace

std::array<double, 4> dog_response(const Patch& patch, double sigma_s) {
    NormalizedLuminance nl = normalized_luminance(patch);
    if (nl.flat) return {0, 0, 0, 0};
    double s0 = sigma_s;
    double s1 = 1.6 * s0;
    double s2 = 1.6 * s1;
    auto k0 = gaussian_kernel_2d(s0);
    auto k1 = gaussian_kernel_2d(s1);
    auto k2 = gaussian_kernel_2d(s2);
    double d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < kPatchSize * kPatchSize; ++i) {
        d1 += (k1[i] - k0[i]) * nl.lum[i];
        d2 += (k2[i] - k1[i]) * nl.lum[i];
    }
    auto r1 = rectify(d1);
    auto r2 = rectify(d2);
    return {r1[0], r1[1], r2[0], r2[1]};
}

Descriptor compose(const std::array<double, 9>& color, const std::array<double, 4>& grad,
                   const std::array<double, 10>& steer, const std::array<double, 2>& hessian,
                   const std::array<double, 4>& dog, const std::array<double, 9>& color_scale) {
    Descriptor d;
    for (int i = 0; i < 9; ++i) d.v[kColorOffset + i] = color[i] / color_scale[i];
    for (int i = 0; i < 4; ++i) d.v[kGradOffset + i] = grad[i];
    for (int i = 0; i < 10; ++i) d.v[kSteerOffset + i] = steer[i];
    for (int i = 0; i < 2; ++i) d.v[kHessOffset + i] = hessian[i];
    for (int i = 0; i < 4; ++i) d.v[kDogOffset + i] = dog[i];

    double norm2 = 0.0;
    for (double v : d.v) {
        if (!std::isfinite(v)) throw ExtractionError("non-finite descriptor component");
        norm2 += v * v;
    }
    if (norm2 <= 0.0) {
        d.degenerate = true;
        return d;
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (double& v : d.v) v *= inv;
    return d;
}

Descriptor compose_raw(const std::array<double, kDescriptorLen>& raw,
                       const std::array<double, 9>& color_scale) {
    Descriptor d;
    d.v = raw;
    for (int i = 0; i < 9; ++i) d.v[kColorOffset + i] /= color_scale[i];
    double norm2 = 0.0;
    for (double v : d.v) {
        if (!std::isfinite(v)) throw ExtractionError("non-finite descriptor component");
        norm2 += v * v;
    }
    if (norm2 <= 0.0) {
        d.degenerate = true;
        return d;
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (double& v : d.v) v *= inv;
    return d;
}

std::array<double, kDescriptorLen> DescriptorExtractor::raw(const Patch& patch) const {
    auto color = color_moments(patch);
    auto grad = normalized_gradient(patch);
    auto steer = steerable_response(patch);
    auto hess = hessian_eigenvalues(patch);
    auto dog = dog_response(patch, sigma_s);
    std::array<double, kDescriptorLen> out{};
    for (int i = 0; i < 9; ++i) out[kColorOffset + i] = color[i];
    for (int i = 0; i < 4; ++i) out[kGradOffset + i] = grad[i];
    for (int i = 0; i < 10; ++i) out[kSteerOffset + i] = steer[i];
    for (int i = 0; i < 2; ++i) out[kHessOffset + i] = hess[i];
    for (int i = 0; i < 4; ++i) out[kDogOffset + i] = dog[i];
    return out;
}

Descriptor DescriptorExtractor::from_patch(const Patch& patch) const {
    return compose(color_moments(patch), normalized_gradient(patch), steerable_response(patch),
                   hessian_eigenvalues(patch), dog_response(patch, sigma_s), color_scale);
}

std::optional<Descriptor> DescriptorExtractor::extract(const ImageRGB& image,
                                                       const ProjectedSample& sample) const {
    auto patch = extract_patch(image, sample, sigma_s);
    if (!patch) return std::nullopt;
    return from_patch(*patch);
}

std::array<double, 9> color_scaling_from(
    const std::vector<std::array<double, kDescriptorLen>>& raw_rows) {
    std::array<double, 9> scale{1, 1, 1, 1, 1, 1, 1, 1, 1};
    if (raw_rows.empty()) return scale;
    for (int d = 0; d < 9; ++d) {
        double mean = 0.0;
        for (const auto& r : raw_rows) mean += r[kColorOffset + d];
        mean /= raw_rows.size();
        double var = 0.0;
        for (const auto& r : raw_rows) {
            double x = r[kColorOffset + d] - mean;
            var += x * x;
        }
        double sd = std::sqrt(var / raw_rows.size());
        scale[d] = sd > 1e-12 ? sd : 1.0;
    }
    return scale;
}

}  // namespace roadval

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "roadval/descriptor.hpp"
#include "roadval/evaluation.hpp"
#include "roadval/image.hpp"
#include "roadval/projection.hpp"
#include "roadval/svm.hpp"

namespace roadval {

// Static block split over `workers` threads; workers <= 1 runs inline.
void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn);

// One extracted training/evaluation row, pre color-scaling.
struct DatasetRow {
    std::string segment_id;
    Vec2 px;
    int label = 0;  // -1 / +1 / 0 (unlabeled)
    std::array<double, kDescriptorLen> raw{};
};

// Raw descriptor rows for every extractable, non-degenerate sample.
std::vector<DatasetRow> extract_rows(const ImageRGB& image,
                                     const std::vector<ProjectedSample>& samples,
                                     double sigma_s = 2.8, int workers = 1);

// Color scaling from the rows, then scaled + L2-normalized training set.
struct PreparedTraining {
    TrainingSet data;
    std::array<double, 9> color_scale;
};
PreparedTraining prepare_training(const std::vector<DatasetRow>& rows);

// Finalized descriptors using a model's stored scaling (evaluation path).
std::vector<std::vector<double>> finalize_rows(const std::vector<DatasetRow>& rows,
                                               const std::array<double, 9>& color_scale);

// Per-sample classifier scores; nullopt for samples whose window does not fit
// or whose descriptor is degenerate.
std::vector<std::optional<Prediction>> classify_samples(
    const ImageRGB& image, const SvmModel& model, const std::vector<ProjectedSample>& samples,
    int workers = 1);

struct SegmentVerdict {
    std::string segment_id;
    size_t n_samples = 0;    // visible, classifiable samples
    size_t n_positive = 0;
    double frac_positive = 0.0;
    bool consistent = false;
};

// Majority vote over the visible samples of each segment.
std::vector<SegmentVerdict> segment_verdicts(const std::vector<ProjectedSample>& samples,
                                             const std::vector<std::optional<Prediction>>& preds,
                                             double threshold = 0.5);

// Tab-delimited dataset round-trip.
void save_rows(const std::vector<DatasetRow>& rows, const std::string& path);
std::vector<DatasetRow> load_rows(const std::string& path);

}  // namespace roadval

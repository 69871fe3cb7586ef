#include "roadval/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace roadval {

void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
    if (workers <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    size_t w = std::min<size_t>(static_cast<size_t>(workers), n);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (size_t t = 0; t < w; ++t) {
        size_t lo = n * t / w;
        size_t hi = n * (t + 1) / w;
        threads.emplace_back([&fn, lo, hi] {
            for (size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (std::thread& t : threads) t.join();
}

std::vector<DatasetRow> extract_rows(const ImageRGB& image,
                                     const std::vector<ProjectedSample>& samples, double sigma_s,
                                     int workers) {
    DescriptorExtractor extractor;
    extractor.sigma_s = sigma_s;
    std::vector<std::optional<DatasetRow>> rows(samples.size());
    parallel_for(samples.size(), workers, [&](size_t i) {
        const ProjectedSample& s = samples[i];
        auto patch = extract_patch(image, s, sigma_s);
        if (!patch) return;
        DatasetRow row;
        row.segment_id = s.segment_id;
        row.px = s.px;
        row.label = s.label == SampleLabel::consistent   ? 1
                    : s.label == SampleLabel::inconsistent ? -1
                                                           : 0;
        row.raw = extractor.raw(*patch);
        rows[i] = std::move(row);
    });
    std::vector<DatasetRow> out;
    out.reserve(samples.size());
    for (auto& r : rows)
        if (r) out.push_back(std::move(*r));
    return out;
}

PreparedTraining prepare_training(const std::vector<DatasetRow>& rows) {
    std::vector<std::array<double, kDescriptorLen>> raw;
    raw.reserve(rows.size());
    for (const DatasetRow& r : rows)
        if (r.label != 0) raw.push_back(r.raw);
    if (raw.empty()) throw std::invalid_argument("prepare_training: no labeled rows");

    PreparedTraining out;
    out.color_scale = color_scaling_from(raw);
    for (const DatasetRow& r : rows) {
        if (r.label == 0) continue;
        Descriptor d = compose_raw(r.raw, out.color_scale);
        if (d.degenerate) continue;
        out.data.descriptors.emplace_back(d.v.begin(), d.v.end());
        out.data.labels.push_back(r.label);
    }
    return out;
}

std::vector<std::vector<double>> finalize_rows(const std::vector<DatasetRow>& rows,
                                               const std::array<double, 9>& color_scale) {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const DatasetRow& r : rows) {
        Descriptor d = compose_raw(r.raw, color_scale);
        out.emplace_back(d.v.begin(), d.v.end());
    }
    return out;
}

std::vector<std::optional<Prediction>> classify_samples(
    const ImageRGB& image, const SvmModel& model, const std::vector<ProjectedSample>& samples,
    int workers) {
    DescriptorExtractor extractor;
    extractor.sigma_s = model.sigma_s;
    extractor.color_scale = model.color_scale;
    std::vector<std::optional<Prediction>> preds(samples.size());
    parallel_for(samples.size(), workers, [&](size_t i) {
        auto desc = extractor.extract(image, samples[i]);
        if (!desc || desc->degenerate) return;
        preds[i] = predict(model, desc->v);
    });
    return preds;
}

std::vector<SegmentVerdict> segment_verdicts(const std::vector<ProjectedSample>& samples,
                                             const std::vector<std::optional<Prediction>>& preds,
                                             double threshold) {
    if (samples.size() != preds.size())
        throw std::invalid_argument("segment_verdicts: samples/preds size mismatch");
    std::map<std::string, SegmentVerdict> acc;
    std::vector<std::string> order;
    for (size_t i = 0; i < samples.size(); ++i) {
        const ProjectedSample& s = samples[i];
        if (!acc.count(s.segment_id)) order.push_back(s.segment_id);
        SegmentVerdict& v = acc[s.segment_id];
        v.segment_id = s.segment_id;
        if (!s.visible || !preds[i]) continue;
        ++v.n_samples;
        if (preds[i]->label == 1) ++v.n_positive;
    }
    std::vector<SegmentVerdict> out;
    out.reserve(order.size());
    for (const std::string& id : order) {
        SegmentVerdict v = acc[id];
        v.frac_positive =
            v.n_samples > 0 ? static_cast<double>(v.n_positive) / v.n_samples : 0.0;
        v.consistent = v.n_samples > 0 && v.frac_positive >= threshold;
        out.push_back(v);
    }
    return out;
}

void save_rows(const std::vector<DatasetRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out << "# roadval descriptor dump v1\n";
    out << "# segment_id\tu\tv\tlabel\traw[29]\n";
    char buf[64];
    for (const DatasetRow& r : rows) {
        out << r.segment_id;
        std::snprintf(buf, sizeof(buf), "\t%.17g\t%.17g\t%d", r.px.x, r.px.y, r.label);
        out << buf;
        for (double v : r.raw) {
            std::snprintf(buf, sizeof(buf), "\t%.17g", v);
            out << buf;
        }
        out << "\n";
    }
}

std::vector<DatasetRow> load_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# roadval descriptor dump v1", 0) != 0)
        throw ParseError("dataset file missing version header: " + path);
    std::vector<DatasetRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        DatasetRow r;
        if (!(ss >> r.segment_id >> r.px.x >> r.px.y >> r.label))
            throw ParseError("malformed dataset row: " + line);
        for (double& v : r.raw)
            if (!(ss >> v)) throw ParseError("short dataset row: " + line);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace roadval

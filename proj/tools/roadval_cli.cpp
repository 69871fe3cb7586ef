#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "roadval/conflation.hpp"
#include "roadval/evaluation.hpp"
#include "roadval/pipeline.hpp"
#include "roadval/projection.hpp"
#include "roadval/scene.hpp"
#include "roadval/svm.hpp"
#include "roadval/synthgen.hpp"

namespace fs = std::filesystem;
using namespace roadval;

namespace {

std::string out_dir() {
    const char* env = std::getenv("ROADVAL_OUT_DIR");
    return env && *env ? std::string(env) : std::string(".");
}

std::string out_path(const std::string& name) {
    return (fs::path(out_dir()) / name).string();
}

ErrorInjection::Kind injection_kind(const std::string& s) {
    if (s == "vector_offset_px") return ErrorInjection::Kind::vector_offset_px;
    if (s == "delete_building") return ErrorInjection::Kind::delete_building;
    if (s == "dem_bias_m") return ErrorInjection::Kind::dem_bias_m;
    if (s == "camera_yaw_deg") return ErrorInjection::Kind::camera_yaw_deg;
    throw CLI::ValidationError("--inject-kind", "unknown injection kind: " + s);
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void draw_marker(ImageRGB& img, const Vec2& px, bool positive) {
    if (positive)
        draw_square(img, px, 4, 40, 90, 235);  // blue: consistent
    else
        draw_square(img, px, 4, 235, 50, 40);  // red: inconsistent
}

int run_synth(const std::string& recipe_path, const SceneRecipe& flags_recipe, bool use_flags,
              const std::string& scene_out, const std::string& image_out,
              const std::string& inject_kind_s, double inject_mag,
              const std::string& inject_targets, const std::string& corrupted_out) {
    SceneRecipe recipe = use_flags ? flags_recipe : load_recipe(recipe_path);
    recipe.validate();
    Rendered rendered = render(recipe);
    save_scene(rendered.scene, scene_out);
    save_ppm(rendered.image, image_out);
    std::printf("scene: %s\nimage: %s\n", scene_out.c_str(), image_out.c_str());
    if (!inject_kind_s.empty()) {
        ErrorInjection err;
        err.kind = injection_kind(inject_kind_s);
        err.magnitude = inject_mag;
        err.targets = split_csv(inject_targets);
        Scene corrupted = inject(rendered.scene, err);
        save_scene(corrupted, corrupted_out);
        std::printf("corrupted: %s\n", corrupted_out.c_str());
    }
    return 0;
}

int run_extract(const std::string& scene_path, const std::string& image_path,
                const std::string& truth_path, const std::string& corrupted_path,
                double spacing, double sigma_s, size_t n_per_class, double road_width,
                std::uint64_t label_seed, int workers, const std::string& out) {
    ImageRGB image = load_ppm(image_path);
    std::vector<ProjectedSample> samples;
    if (!truth_path.empty()) {
        if (corrupted_path.empty())
            throw CLI::ValidationError("--corrupted", "labeled extraction needs --corrupted");
        Scene truth = load_scene(truth_path);
        Scene corrupted = load_scene(corrupted_path);
        LabelParams params;
        params.n_per_class = n_per_class;
        params.road_width_m = road_width;
        params.spacing_px = spacing;
        params.seed = label_seed;
        samples = label_samples(truth, corrupted, image, params);
    } else {
        Scene scene = load_scene(scene_path);
        samples = sample_segments(scene, spacing);
    }
    std::vector<DatasetRow> rows = extract_rows(image, samples, sigma_s, workers);
    save_rows(rows, out);
    std::printf("rows: %zu -> %s\n", rows.size(), out.c_str());
    return 0;
}

int run_train(const std::string& data_path, const std::string& kernel_s, double sigma, int degree,
              double scale, double offset, double box_c, double tol, double sigma_s,
              const std::string& out) {
    std::vector<DatasetRow> rows = load_rows(data_path);
    PreparedTraining prep = prepare_training(rows);
    KernelSpec spec;
    spec.kind = kernel_kind_from_string(kernel_s);
    spec.sigma = sigma;
    spec.degree = degree;
    spec.scale = scale;
    spec.offset = offset;
    TrainOptions opts;
    opts.box_c = box_c;
    opts.tol = tol;
    SvmModel model = train(prep.data, spec, opts);
    model.color_scale = prep.color_scale;
    model.sigma_s = sigma_s;
    save_model(model, out);
    std::printf("model: %zu support vectors -> %s\n", model.support_vectors.size(), out.c_str());
    return 0;
}

int run_validate(const std::string& scene_path, const std::string& image_path,
                 const std::string& model_path, double spacing, double threshold, int workers,
                 const std::string& image_out, const std::string& report_out) {
    Scene scene = load_scene(scene_path);
    ImageRGB image = load_ppm(image_path);
    SvmModel model = load_model(model_path);
    std::vector<ProjectedSample> samples = sample_segments(scene, spacing);
    auto preds = classify_samples(image, model, samples, workers);

    ImageRGB annotated = image;
    for (size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].visible || !preds[i]) continue;
        draw_marker(annotated, samples[i].px, preds[i]->label == 1);
    }
    save_ppm(annotated, image_out);

    std::vector<SegmentVerdict> verdicts = segment_verdicts(samples, preds, threshold);
    std::ofstream rep(report_out);
    if (!rep) throw std::runtime_error("cannot write report: " + report_out);
    rep << "# roadval validation report v1\n";
    rep << "# segment_id\tn_samples\tn_positive\tfrac_positive\tverdict\n";
    for (const SegmentVerdict& v : verdicts) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s\t%zu\t%zu\t%.6f\t%s\n", v.segment_id.c_str(),
                      v.n_samples, v.n_positive, v.frac_positive,
                      v.consistent ? "consistent" : "inconsistent");
        rep << buf;
        std::fputs(buf, stdout);
    }
    std::printf("annotated: %s\nreport: %s\n", image_out.c_str(), report_out.c_str());
    return 0;
}

int run_conflate(const std::string& scene_path, const std::string& image_path,
                 const std::string& model_path, const std::string& segment_id, double spacing,
                 double half_length, double step, int window, int min_chain,
                 const std::string& image_out, const std::string& scene_out) {
    Scene scene = load_scene(scene_path);
    ImageRGB image = load_ppm(image_path);
    SvmModel model = load_model(model_path);

    ConflationParams params;
    params.half_length_px = half_length;
    params.step_px = step;
    params.smooth_window = window;
    params.min_chain = min_chain;
    params.spacing_px = spacing;

    std::vector<ProjectedSample> all = sample_segments(scene, spacing);
    std::vector<std::string> ids;
    for (const RoadSegment& seg : scene.roads.segments)
        if (segment_id.empty() || seg.id == segment_id) ids.push_back(seg.id);
    if (ids.empty()) throw std::runtime_error("no matching segment: " + segment_id);

    ImageRGB annotated = image;
    Scene corrected = scene;
    for (const std::string& id : ids) {
        std::vector<ProjectedSample> samples;
        for (const ProjectedSample& s : all)
            if (s.segment_id == id && s.visible) samples.push_back(s);
        if (samples.size() < 3) continue;
        ConflationResult res = conflate_segment(scene, image, model, samples, params);

        for (const ProjectedSample& s : samples) {
            // search lines in yellow, input samples in red
            Vec2 a = s.px + s.normal_dir * params.half_length_px;
            Vec2 b = s.px - s.normal_dir * params.half_length_px;
            draw_line(annotated, a, b, 200, 190, 60);
        }
        for (const ProjectedSample& s : samples) draw_marker(annotated, s.px, false);
        for (const auto* dets : {&res.detections_pos, &res.detections_neg})
            for (const Vec2& p : *dets) draw_circle(annotated, p, 3, 40, 200, 60);
        int chain_idx = 0;
        for (const auto& poly : res.corrected_px) {
            for (size_t k = 0; k + 1 < poly.size(); ++k)
                draw_line(annotated, poly[k], poly[k + 1], 40, 90, 235);
            RoadSegment seg;
            seg.id = id + "_conflated_" + std::to_string(chain_idx++);
            seg.source = "conflation";
            seg.polyline = res.corrected_geo[static_cast<size_t>(chain_idx - 1)];
            corrected.roads.segments.push_back(std::move(seg));
        }
        std::printf("%s: %zu corrected chain(s)\n", id.c_str(), res.corrected_px.size());
    }
    save_ppm(annotated, image_out);
    save_scene(corrected, scene_out);
    std::printf("annotated: %s\ncorrected scene: %s\n", image_out.c_str(), scene_out.c_str());
    return 0;
}

int run_roc(const std::string& data_path, const std::string& model_path,
            const std::string& curve_out, const std::string& plot_out) {
    std::vector<DatasetRow> rows = load_rows(data_path);
    SvmModel model = load_model(model_path);
    std::vector<std::pair<double, int>> scores;
    ConfusionCounts counts;
    for (const DatasetRow& r : rows) {
        if (r.label == 0) continue;
        Descriptor d = compose_raw(r.raw, model.color_scale);
        Prediction p = predict(model, d.v);
        scores.push_back({p.score, r.label});
        if (r.label == 1)
            (p.label == 1 ? counts.tp : counts.fn)++;
        else
            (p.label == 1 ? counts.fp : counts.tn)++;
    }
    RocCurve curve = roc(scores);
    save_roc(curve, curve_out);

    ImageRGB plot(512, 512);
    for (int y = 0; y < 512; ++y)
        for (int x = 0; x < 512; ++x) plot.set(x, y, 255, 255, 255);
    for (int k = 0; k < 512; ++k) {
        plot.set(k, 511, 0, 0, 0);
        plot.set(0, k, 0, 0, 0);
        plot.set(k, 511 - k, 200, 200, 200);  // chance diagonal
    }
    for (size_t k = 1; k < curve.points.size(); ++k) {
        auto at = [](const RocPoint& p) { return Vec2{p.fpr * 511.0, 511.0 - p.tpr * 511.0}; };
        draw_line(plot, at(curve.points[k - 1]), at(curve.points[k]), 40, 90, 235);
    }
    save_ppm(plot, plot_out);

    Metrics m = metrics(counts);
    auto show = [](const std::optional<double>& v) { return v ? *v : -1.0; };
    std::printf("auc\t%.6f\n", curve.auc);
    std::printf("sensitivity\t%.6f\nspecificity\t%.6f\naccuracy\t%.6f\n", show(m.sensitivity),
                show(m.specificity), show(m.accuracy));
    std::printf("curve: %s\nplot: %s\n", curve_out.c_str(), plot_out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"road vector validation against oblique images"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "render a synthetic scene from a recipe");
    std::string recipe_path, synth_scene = out_path("scene.json"),
                             synth_image = out_path("image.ppm");
    std::string inject_kind_s, inject_targets, corrupted_out = out_path("corrupted.json");
    double inject_mag = 0.0;
    SceneRecipe flags_recipe;
    std::string terrain_s = "flat", family_s = "straight";
    synth->add_option("--recipe", recipe_path, "recipe JSON file");
    synth->add_option("--seed", flags_recipe.rng_seed, "recipe seed (flag-built recipe)");
    synth->add_option("--terrain", terrain_s, "flat|hill|ridge");
    synth->add_option("--family", family_s, "straight|arc|s_curve");
    synth->add_option("--roads", flags_recipe.road_count, "road count");
    synth->add_option("--buildings", flags_recipe.building_count, "building count");
    synth->add_option("--occluders", flags_recipe.occluder_count, "road-occluding buildings");
    synth->add_option("--oblique", flags_recipe.oblique_angle_deg, "oblique angle, degrees");
    synth->add_option("--noise", flags_recipe.noise_sigma, "pixel noise sigma");
    synth->add_option("--clutter", flags_recipe.clutter, "background clutter amplitude");
    synth->add_option("--segment-length", flags_recipe.segment_length_m, "road chop length, m");
    synth->add_option("--width", flags_recipe.image_width, "image width");
    synth->add_option("--height", flags_recipe.image_height, "image height");
    synth->add_option("--out-scene", synth_scene, "scene output path");
    synth->add_option("--out-image", synth_image, "image output path");
    synth->add_option("--inject-kind", inject_kind_s,
                      "vector_offset_px|delete_building|dem_bias_m|camera_yaw_deg");
    synth->add_option("--inject-magnitude", inject_mag, "injection magnitude");
    synth->add_option("--inject-targets", inject_targets, "comma-separated targets");
    synth->add_option("--out-corrupted", corrupted_out, "corrupted scene output path");

    // extract
    auto* extract = app.add_subcommand("extract", "sample roads and dump descriptor rows");
    std::string ex_scene, ex_image, ex_truth, ex_corrupted, ex_out = out_path("rows.tsv");
    double spacing = 12.0, sigma_s = 2.8, road_width = 8.0;
    size_t n_per_class = 1000;
    std::uint64_t label_seed = 7;
    int workers = 1;
    extract->add_option("--scene", ex_scene, "scene JSON (unlabeled extraction)");
    extract->add_option("--image", ex_image, "PPM image")->required();
    extract->add_option("--truth", ex_truth, "truth scene (labeled extraction)");
    extract->add_option("--corrupted", ex_corrupted, "corrupted scene (labeled extraction)");
    extract->add_option("--spacing", spacing, "sample spacing, px");
    extract->add_option("--sigma-s", sigma_s, "patch smoothing sigma");
    extract->add_option("--n-per-class", n_per_class, "labeled samples per class");
    extract->add_option("--road-width", road_width, "road width for labeling, m");
    extract->add_option("--label-seed", label_seed, "labeling rng seed");
    extract->add_option("--workers", workers, "worker threads");
    extract->add_option("--out", ex_out, "dataset output path");

    // train
    auto* tr = app.add_subcommand("train", "train a kernel SVM on a labeled dataset");
    std::string tr_data, tr_kernel = "rbf_gaussian", tr_out = out_path("model.json");
    double tr_sigma = 0.8, tr_scale = 1.0, tr_offset = 0.0, box_c = 1.0, tol = 1e-3,
           tr_sigma_s = 2.8;
    int degree = 2;
    tr->add_option("--data", tr_data, "labeled dataset")->required();
    tr->add_option("--kernel", tr_kernel,
                   "linear|sigmoid|polynomial|rbf_gaussian|rbf_exponential|rbf_gaussian_l2");
    tr->add_option("--sigma", tr_sigma, "rbf kernel sigma");
    tr->add_option("--degree", degree, "polynomial degree");
    tr->add_option("--scale", tr_scale, "sigmoid scale");
    tr->add_option("--offset", tr_offset, "sigmoid offset");
    tr->add_option("--box-c", box_c, "box constraint C");
    tr->add_option("--tol", tol, "KKT tolerance");
    tr->add_option("--sigma-s", tr_sigma_s, "patch smoothing sigma stored in the model");
    tr->add_option("--out", tr_out, "model output path");

    // validate
    auto* val = app.add_subcommand("validate", "classify road samples and report verdicts");
    std::string va_scene, va_image, va_model, va_image_out = out_path("validated.ppm"),
                                              va_report = out_path("report.tsv");
    double va_spacing = 12.0, threshold = 0.5;
    int va_workers = 1;
    val->add_option("--scene", va_scene, "scene JSON")->required();
    val->add_option("--image", va_image, "PPM image")->required();
    val->add_option("--model", va_model, "SVM model JSON")->required();
    val->add_option("--spacing", va_spacing, "sample spacing, px");
    val->add_option("--threshold", threshold, "consistent-fraction threshold");
    val->add_option("--workers", va_workers, "worker threads");
    val->add_option("--out-image", va_image_out, "annotated image path");
    val->add_option("--out-report", va_report, "per-segment report path");

    // conflate
    auto* conf = app.add_subcommand("conflate", "search for the true road near a segment");
    std::string cf_scene, cf_image, cf_model, cf_segment,
        cf_image_out = out_path("conflated.ppm"), cf_scene_out = out_path("conflated.json");
    double cf_spacing = 12.0, half_length = 100.0, step = 4.0;
    int window = 5, min_chain = 3;
    conf->add_option("--scene", cf_scene, "scene JSON")->required();
    conf->add_option("--image", cf_image, "PPM image")->required();
    conf->add_option("--model", cf_model, "SVM model JSON")->required();
    conf->add_option("--segment", cf_segment, "segment id (default: all)");
    conf->add_option("--spacing", cf_spacing, "sample spacing, px");
    conf->add_option("--half-length", half_length, "search half-length, px");
    conf->add_option("--step", step, "search step, px");
    conf->add_option("--window", window, "smoothing window");
    conf->add_option("--min-chain", min_chain, "minimum detections per chain");
    conf->add_option("--out-image", cf_image_out, "annotated image path");
    conf->add_option("--out-scene", cf_scene_out, "corrected scene path");

    // roc
    auto* rc = app.add_subcommand("roc", "score a labeled dataset and emit a ROC curve");
    std::string rc_data, rc_model, rc_curve = out_path("roc.tsv"),
                                   rc_plot = out_path("roc.ppm");
    rc->add_option("--data", rc_data, "labeled dataset")->required();
    rc->add_option("--model", rc_model, "SVM model JSON")->required();
    rc->add_option("--out-curve", rc_curve, "curve output path");
    rc->add_option("--out-plot", rc_plot, "curve image path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) {
            bool use_flags = recipe_path.empty();
            flags_recipe.terrain = [&] {
                if (terrain_s == "flat") return TerrainKind::flat;
                if (terrain_s == "hill") return TerrainKind::hill;
                if (terrain_s == "ridge") return TerrainKind::ridge;
                throw std::invalid_argument("unknown terrain kind: " + terrain_s);
            }();
            flags_recipe.road_family = [&] {
                if (family_s == "straight") return RoadFamily::straight;
                if (family_s == "arc") return RoadFamily::arc;
                if (family_s == "s_curve") return RoadFamily::s_curve;
                throw std::invalid_argument("unknown road family: " + family_s);
            }();
            return run_synth(recipe_path, flags_recipe, use_flags, synth_scene, synth_image,
                             inject_kind_s, inject_mag, inject_targets, corrupted_out);
        }
        if (extract->parsed())
            return run_extract(ex_scene, ex_image, ex_truth, ex_corrupted, spacing, sigma_s,
                               n_per_class, road_width, label_seed, workers, ex_out);
        if (tr->parsed())
            return run_train(tr_data, tr_kernel, tr_sigma, degree, tr_scale, tr_offset, box_c,
                             tol, tr_sigma_s, tr_out);
        if (val->parsed())
            return run_validate(va_scene, va_image, va_model, va_spacing, threshold, va_workers,
                                va_image_out, va_report);
        if (conf->parsed())
            return run_conflate(cf_scene, cf_image, cf_model, cf_segment, cf_spacing, half_length,
                                step, window, min_chain, cf_image_out, cf_scene_out);
        if (rc->parsed()) return run_roc(rc_data, rc_model, rc_curve, rc_plot);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

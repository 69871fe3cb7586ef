#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <span>

#include "roadval/conflation.hpp"
#include "roadval/descriptor.hpp"
#include "roadval/evaluation.hpp"
#include "roadval/image.hpp"
#include "roadval/pipeline.hpp"
#include "roadval/projection.hpp"
#include "roadval/scene.hpp"
#include "roadval/svm.hpp"
#include "roadval/synthgen.hpp"

namespace py = pybind11;
using namespace roadval;

namespace {

py::array_t<std::uint8_t> image_to_numpy(const ImageRGB& img) {
    py::array_t<std::uint8_t> out({img.height, img.width, 3});
    std::memcpy(out.mutable_data(), img.data.data(), img.data.size());
    return out;
}

ImageRGB image_from_numpy(const py::array_t<std::uint8_t, py::array::c_style>& arr) {
    if (arr.ndim() != 3 || arr.shape(2) != 3)
        throw std::invalid_argument("expected an (h, w, 3) uint8 array");
    ImageRGB img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::memcpy(img.data.data(), arr.data(), img.data.size());
    return img;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "road-vector validation against rendered oblique imagery";

    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<ValidationError>(m, "ValidationError");
    py::register_exception<ExtractionError>(m, "ExtractionError");
    py::register_exception<ConvergenceError>(m, "ConvergenceError");

    // ---- geometry & scene -------------------------------------------------
    py::class_<Vec2>(m, "Vec2")
        .def(py::init<>())
        .def(py::init([](double x, double y) { return Vec2{x, y}; }), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &Vec2::x)
        .def_readwrite("y", &Vec2::y)
        .def("__repr__", [](const Vec2& v) {
            return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")";
        });

    py::class_<GeoPoint>(m, "GeoPoint")
        .def(py::init<>())
        .def(py::init([](double lat, double lon, double alt) { return GeoPoint{lat, lon, alt}; }),
             py::arg("lat"), py::arg("lon"), py::arg("alt") = 0.0)
        .def_readwrite("lat", &GeoPoint::lat)
        .def_readwrite("lon", &GeoPoint::lon)
        .def_readwrite("alt", &GeoPoint::alt);

    py::class_<Camera>(m, "Camera")
        .def(py::init<>())
        .def_readwrite("position", &Camera::position)
        .def_readwrite("yaw_deg", &Camera::yaw_deg)
        .def_readwrite("pitch_deg", &Camera::pitch_deg)
        .def_readwrite("roll_deg", &Camera::roll_deg)
        .def_readwrite("focal_px", &Camera::focal_px)
        .def_readwrite("width", &Camera::width)
        .def_readwrite("height", &Camera::height)
        .def("oblique_angle_deg", &Camera::oblique_angle_deg);

    py::class_<RoadSegment>(m, "RoadSegment")
        .def(py::init<>())
        .def_readwrite("id", &RoadSegment::id)
        .def_readwrite("polyline", &RoadSegment::polyline)
        .def_readwrite("source", &RoadSegment::source);

    py::class_<Scene>(m, "Scene")
        .def(py::init<>())
        .def_readwrite("version", &Scene::version)
        .def_readwrite("camera", &Scene::camera)
        .def_property_readonly("segments", [](const Scene& s) { return s.roads.segments; })
        .def_property_readonly("building_count", [](const Scene& s) { return s.buildings.size(); })
        .def("validate", &Scene::validate)
        .def("to_json", &scene_to_json);

    m.def("load_scene", &load_scene, py::arg("path"));
    m.def("save_scene", &save_scene, py::arg("scene"), py::arg("path"));
    m.def("scene_from_json", &scene_from_json, py::arg("text"));
    m.def("scene_to_json", &scene_to_json, py::arg("scene"));

    // ---- image ------------------------------------------------------------
    py::class_<ImageRGB>(m, "ImageRGB")
        .def(py::init<>())
        .def(py::init<int, int>(), py::arg("width"), py::arg("height"))
        .def_readonly("width", &ImageRGB::width)
        .def_readonly("height", &ImageRGB::height)
        .def("to_numpy", &image_to_numpy)
        .def_static("from_numpy", &image_from_numpy, py::arg("array"));

    m.def("load_ppm", &load_ppm, py::arg("path"));
    m.def("save_ppm", &save_ppm, py::arg("image"), py::arg("path"));

    // ---- projection -------------------------------------------------------
    py::enum_<SampleLabel>(m, "SampleLabel")
        .value("consistent", SampleLabel::consistent)
        .value("inconsistent", SampleLabel::inconsistent)
        .value("unlabeled", SampleLabel::unlabeled);

    py::class_<ProjectedSample>(m, "ProjectedSample")
        .def(py::init<>())
        .def_readwrite("segment_id", &ProjectedSample::segment_id)
        .def_readwrite("world", &ProjectedSample::world)
        .def_readwrite("px", &ProjectedSample::px)
        .def_readwrite("primary_dir", &ProjectedSample::primary_dir)
        .def_readwrite("normal_dir", &ProjectedSample::normal_dir)
        .def_readwrite("visible", &ProjectedSample::visible)
        .def_readwrite("label", &ProjectedSample::label);

    m.def("sample_segments", &sample_segments, py::arg("scene"), py::arg("spacing_px") = 12.0);
    m.def("is_occluded", &is_occluded, py::arg("scene"), py::arg("point"));
    m.def("backproject_to_dem", &backproject_to_dem, py::arg("scene"), py::arg("px"));

    // ---- synthgen ---------------------------------------------------------
    py::enum_<TerrainKind>(m, "TerrainKind")
        .value("flat", TerrainKind::flat)
        .value("hill", TerrainKind::hill)
        .value("ridge", TerrainKind::ridge);

    py::enum_<RoadFamily>(m, "RoadFamily")
        .value("straight", RoadFamily::straight)
        .value("arc", RoadFamily::arc)
        .value("s_curve", RoadFamily::s_curve);

    py::class_<SceneRecipe>(m, "SceneRecipe")
        .def(py::init<>())
        .def_readwrite("rng_seed", &SceneRecipe::rng_seed)
        .def_readwrite("terrain", &SceneRecipe::terrain)
        .def_readwrite("terrain_amp_m", &SceneRecipe::terrain_amp_m)
        .def_readwrite("road_count", &SceneRecipe::road_count)
        .def_readwrite("road_family", &SceneRecipe::road_family)
        .def_readwrite("road_width_m", &SceneRecipe::road_width_m)
        .def_readwrite("road_albedo", &SceneRecipe::road_albedo)
        .def_readwrite("albedo_contrast", &SceneRecipe::albedo_contrast)
        .def_readwrite("segment_length_m", &SceneRecipe::segment_length_m)
        .def_readwrite("building_count", &SceneRecipe::building_count)
        .def_readwrite("occluder_count", &SceneRecipe::occluder_count)
        .def_readwrite("oblique_angle_deg", &SceneRecipe::oblique_angle_deg)
        .def_readwrite("camera_alt_m", &SceneRecipe::camera_alt_m)
        .def_readwrite("image_width", &SceneRecipe::image_width)
        .def_readwrite("image_height", &SceneRecipe::image_height)
        .def_readwrite("clutter", &SceneRecipe::clutter)
        .def_readwrite("noise_sigma", &SceneRecipe::noise_sigma)
        .def_readwrite("extent_m", &SceneRecipe::extent_m)
        .def("validate", &SceneRecipe::validate)
        .def("to_json", &recipe_to_json);

    m.def("recipe_from_json", &recipe_from_json, py::arg("text"));
    m.def("load_recipe", &load_recipe, py::arg("path"));

    py::class_<Rendered>(m, "Rendered")
        .def_readwrite("scene", &Rendered::scene)
        .def_readwrite("image", &Rendered::image);

    m.def("render", &render, py::arg("recipe"));

    py::enum_<ErrorInjection::Kind>(m, "InjectionKind")
        .value("vector_offset_px", ErrorInjection::Kind::vector_offset_px)
        .value("delete_building", ErrorInjection::Kind::delete_building)
        .value("dem_bias_m", ErrorInjection::Kind::dem_bias_m)
        .value("camera_yaw_deg", ErrorInjection::Kind::camera_yaw_deg);

    py::class_<ErrorInjection>(m, "ErrorInjection")
        .def(py::init<>())
        .def_readwrite("kind", &ErrorInjection::kind)
        .def_readwrite("magnitude", &ErrorInjection::magnitude)
        .def_readwrite("targets", &ErrorInjection::targets);

    m.def("inject", &inject, py::arg("scene"), py::arg("error"));
    m.def("image_distance_to_roads", &image_distance_to_roads, py::arg("scene"), py::arg("px"));

    py::class_<LabelParams>(m, "LabelParams")
        .def(py::init<>())
        .def_readwrite("n_per_class", &LabelParams::n_per_class)
        .def_readwrite("road_width_m", &LabelParams::road_width_m)
        .def_readwrite("spacing_px", &LabelParams::spacing_px)
        .def_readwrite("seed", &LabelParams::seed);

    m.def("label_samples", &label_samples, py::arg("truth"), py::arg("corrupted"),
          py::arg("image"), py::arg("params") = LabelParams{});

    // ---- descriptors & dataset rows ----------------------------------------
    m.attr("DESCRIPTOR_LEN") = kDescriptorLen;
    m.attr("PATCH_SIZE") = kPatchSize;

    py::class_<DescriptorExtractor>(m, "DescriptorExtractor")
        .def(py::init<>())
        .def_readwrite("sigma_s", &DescriptorExtractor::sigma_s)
        .def_readwrite("color_scale", &DescriptorExtractor::color_scale)
        .def("extract",
             [](const DescriptorExtractor& ex, const ImageRGB& img, const ProjectedSample& s)
                 -> std::optional<std::vector<double>> {
                 auto d = ex.extract(img, s);
                 if (!d || d->degenerate) return std::nullopt;
                 return std::vector<double>(d->v.begin(), d->v.end());
             },
             py::arg("image"), py::arg("sample"));

    py::class_<DatasetRow>(m, "DatasetRow")
        .def(py::init<>())
        .def_readwrite("segment_id", &DatasetRow::segment_id)
        .def_readwrite("px", &DatasetRow::px)
        .def_readwrite("label", &DatasetRow::label)
        .def_readwrite("raw", &DatasetRow::raw);

    m.def("extract_rows", &extract_rows, py::arg("image"), py::arg("samples"),
          py::arg("sigma_s") = 2.8, py::arg("workers") = 1);
    m.def("save_rows", &save_rows, py::arg("rows"), py::arg("path"));
    m.def("load_rows", &load_rows, py::arg("path"));

    // ---- svm ----------------------------------------------------------------
    py::enum_<KernelKind>(m, "KernelKind")
        .value("linear", KernelKind::linear)
        .value("sigmoid", KernelKind::sigmoid)
        .value("polynomial", KernelKind::polynomial)
        .value("rbf_gaussian", KernelKind::rbf_gaussian)
        .value("rbf_exponential", KernelKind::rbf_exponential)
        .value("rbf_gaussian_l2", KernelKind::rbf_gaussian_l2);

    py::class_<KernelSpec>(m, "KernelSpec")
        .def(py::init<>())
        .def_readwrite("kind", &KernelSpec::kind)
        .def_readwrite("sigma", &KernelSpec::sigma)
        .def_readwrite("degree", &KernelSpec::degree)
        .def_readwrite("scale", &KernelSpec::scale)
        .def_readwrite("offset", &KernelSpec::offset);

    m.def("kernel_eval",
          [](const KernelSpec& spec, const std::vector<double>& d, const std::vector<double>& e) {
              return kernel_eval(spec, d, e);
          },
          py::arg("spec"), py::arg("d"), py::arg("e"));

    py::class_<TrainingSet>(m, "TrainingSet")
        .def(py::init<>())
        .def_readwrite("descriptors", &TrainingSet::descriptors)
        .def_readwrite("labels", &TrainingSet::labels)
        .def("__len__", &TrainingSet::size);

    py::class_<TrainOptions>(m, "TrainOptions")
        .def(py::init<>())
        .def_readwrite("box_c", &TrainOptions::box_c)
        .def_readwrite("tol", &TrainOptions::tol)
        .def_readwrite("max_iters", &TrainOptions::max_iters);

    py::class_<SvmModel>(m, "SvmModel")
        .def(py::init<>())
        .def_readwrite("bias", &SvmModel::bias)
        .def_readwrite("kernel", &SvmModel::kernel)
        .def_readwrite("box_c", &SvmModel::box_c)
        .def_readwrite("color_scale", &SvmModel::color_scale)
        .def_readwrite("sigma_s", &SvmModel::sigma_s)
        .def_property_readonly("n_support_vectors",
                               [](const SvmModel& mo) { return mo.support_vectors.size(); });

    py::class_<Prediction>(m, "Prediction")
        .def_readonly("score", &Prediction::score)
        .def_readonly("label", &Prediction::label);

    m.def("train", &train, py::arg("data"), py::arg("kernel"),
          py::arg("options") = TrainOptions{},
          py::call_guard<py::gil_scoped_release>());
    m.def("predict",
          [](const SvmModel& model, const std::vector<double>& d) { return predict(model, d); },
          py::arg("model"), py::arg("descriptor"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    // ---- training pipeline --------------------------------------------------
    py::class_<PreparedTraining>(m, "PreparedTraining")
        .def_readwrite("data", &PreparedTraining::data)
        .def_readwrite("color_scale", &PreparedTraining::color_scale);

    m.def("prepare_training", &prepare_training, py::arg("rows"));
    m.def("finalize_rows", &finalize_rows, py::arg("rows"), py::arg("color_scale"));
    m.def("classify_samples", &classify_samples, py::arg("image"), py::arg("model"),
          py::arg("samples"), py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());

    py::class_<SegmentVerdict>(m, "SegmentVerdict")
        .def_readonly("segment_id", &SegmentVerdict::segment_id)
        .def_readonly("n_samples", &SegmentVerdict::n_samples)
        .def_readonly("n_positive", &SegmentVerdict::n_positive)
        .def_readonly("frac_positive", &SegmentVerdict::frac_positive)
        .def_readonly("consistent", &SegmentVerdict::consistent);

    m.def("segment_verdicts", &segment_verdicts, py::arg("samples"), py::arg("predictions"),
          py::arg("threshold") = 0.5);

    // ---- evaluation -----------------------------------------------------------
    py::class_<ConfusionCounts>(m, "ConfusionCounts")
        .def(py::init<>())
        .def(py::init([](long tp, long tn, long fp, long fn) {
                 return ConfusionCounts{tp, tn, fp, fn};
             }),
             py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"))
        .def_readwrite("tp", &ConfusionCounts::tp)
        .def_readwrite("tn", &ConfusionCounts::tn)
        .def_readwrite("fp", &ConfusionCounts::fp)
        .def_readwrite("fn", &ConfusionCounts::fn);

    py::class_<Metrics>(m, "Metrics")
        .def_readonly("sensitivity", &Metrics::sensitivity)
        .def_readonly("specificity", &Metrics::specificity)
        .def_readonly("accuracy", &Metrics::accuracy);

    m.def("metrics", &metrics, py::arg("counts"));

    py::class_<RocPoint>(m, "RocPoint")
        .def_readonly("threshold", &RocPoint::threshold)
        .def_readonly("fpr", &RocPoint::fpr)
        .def_readonly("tpr", &RocPoint::tpr);

    py::class_<RocCurve>(m, "RocCurve")
        .def_readonly("points", &RocCurve::points)
        .def_readonly("auc", &RocCurve::auc);

    m.def("roc", &roc, py::arg("scores"));
    m.def("save_roc", &save_roc, py::arg("curve"), py::arg("path"));

    py::class_<Split>(m, "Split")
        .def_readonly("train_pos", &Split::train_pos)
        .def_readonly("train_neg", &Split::train_neg)
        .def_readonly("test_pos", &Split::test_pos)
        .def_readonly("test_neg", &Split::test_neg);

    m.def("split_protocol", &split_protocol, py::arg("n_pos"), py::arg("n_neg"),
          py::arg("n_test") = 2500, py::arg("n_splits") = 80, py::arg("seed") = 0);

    // ---- conflation -----------------------------------------------------------
    py::class_<ConflationParams>(m, "ConflationParams")
        .def(py::init<>())
        .def_readwrite("half_length_px", &ConflationParams::half_length_px)
        .def_readwrite("step_px", &ConflationParams::step_px)
        .def_readwrite("smooth_window", &ConflationParams::smooth_window)
        .def_readwrite("min_side_fraction", &ConflationParams::min_side_fraction)
        .def_readwrite("min_chain", &ConflationParams::min_chain)
        .def_readwrite("spacing_px", &ConflationParams::spacing_px);

    py::class_<ConflationResult>(m, "ConflationResult")
        .def_readonly("segment_id", &ConflationResult::segment_id)
        .def_readonly("detections_pos", &ConflationResult::detections_pos)
        .def_readonly("detections_neg", &ConflationResult::detections_neg)
        .def_readonly("corrected_px", &ConflationResult::corrected_px)
        .def_readonly("corrected_geo", &ConflationResult::corrected_geo)
        .def_readonly("altitude_dem_bound", &ConflationResult::altitude_dem_bound);

    m.def("conflate_segment", &conflate_segment, py::arg("scene"), py::arg("image"),
          py::arg("model"), py::arg("samples"), py::arg("params") = ConflationParams{},
          py::call_guard<py::gil_scoped_release>());
    m.def("smooth_chain", &smooth_chain, py::arg("chain"), py::arg("window"));
}

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fuselage/corruption.hpp"
#include "fuselage/error.hpp"
#include "fuselage/eval.hpp"
#include "fuselage/experiment.hpp"
#include "fuselage/fusion_nms.hpp"
#include "fuselage/geometry.hpp"
#include "fuselage/io.hpp"
#include "fuselage/projection.hpp"
#include "fuselage/simulator.hpp"
#include "fuselage/uncertainty.hpp"

namespace py = pybind11;
using namespace fuselage;

namespace {

DetectionSet to_set(const std::vector<GaussianBox>& v) { return DetectionSet(v); }
std::vector<GaussianBox> to_list(const DetectionSet& s) { return s.boxes(); }

}  // namespace

PYBIND11_MODULE(_fuselage, m) {
  m.doc() = "Uncertainty-aware multi-source NMS and its evaluation harness";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  auto format = py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<TruncationError>(m, "TruncationError", format.ptr());
  py::register_exception<CalibrationError>(m, "CalibrationError", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::enum_<Modality>(m, "Modality").value("RGB", Modality::kRgb).value("DEPTH", Modality::kDepth);
  py::enum_<DecayKind>(m, "DecayKind")
      .value("LINEAR", DecayKind::kLinear)
      .value("GAUSSIAN", DecayKind::kGaussian);
  py::enum_<OverlapCase>(m, "OverlapCase")
      .value("CASE1", OverlapCase::kCase1)
      .value("CASE2", OverlapCase::kCase2)
      .value("CASE3", OverlapCase::kCase3);
  py::enum_<CorruptionKind>(m, "CorruptionKind")
      .value("GAUSSIAN_NOISE", CorruptionKind::kGaussianNoise)
      .value("MOTION_BLUR", CorruptionKind::kMotionBlur)
      .value("FROST", CorruptionKind::kFrost);

  py::class_<CornerBox>(m, "CornerBox")
      .def(py::init<>())
      .def(py::init([](double x0, double y0, double x1, double y1) { return CornerBox{x0, y0, x1, y1}; }),
           py::arg("x_min"), py::arg("y_min"), py::arg("x_max"), py::arg("y_max"))
      .def_readwrite("x_min", &CornerBox::x_min)
      .def_readwrite("y_min", &CornerBox::y_min)
      .def_readwrite("x_max", &CornerBox::x_max)
      .def_readwrite("y_max", &CornerBox::y_max)
      .def("area", &CornerBox::area)
      .def(py::self == py::self)
      .def("__repr__", [](const CornerBox& b) {
        return "CornerBox(" + std::to_string(b.x_min) + ", " + std::to_string(b.y_min) + ", " +
               std::to_string(b.x_max) + ", " + std::to_string(b.y_max) + ")";
      });

  py::class_<GaussianBox>(m, "GaussianBox")
      .def(py::init<>())
      .def(py::init([](Vec4 mu, Vec4 var, double score, int class_id, Modality modality) {
             GaussianBox b;
             b.mu = mu;
             b.var = var;
             b.score = score;
             b.class_id = class_id;
             b.modality = modality;
             return b;
           }),
           py::arg("mu"), py::arg("var") = Vec4{1, 1, 1, 1}, py::arg("score") = 1.0,
           py::arg("class_id") = 0, py::arg("modality") = Modality::kRgb)
      .def_readwrite("mu", &GaussianBox::mu)
      .def_readwrite("var", &GaussianBox::var)
      .def_readwrite("score", &GaussianBox::score)
      .def_readwrite("class_id", &GaussianBox::class_id)
      .def_readwrite("modality", &GaussianBox::modality)
      .def(py::self == py::self)
      .def("__repr__", [](const GaussianBox& b) {
        return "GaussianBox(mu=(" + std::to_string(b.mu[0]) + ", " + std::to_string(b.mu[1]) + ", " +
               std::to_string(b.mu[2]) + ", " + std::to_string(b.mu[3]) + "), score=" +
               std::to_string(b.score) + ", class_id=" + std::to_string(b.class_id) + ")";
      });

  py::class_<FusionConfig>(m, "FusionConfig")
      .def(py::init<>())
      .def_readwrite("t1", &FusionConfig::t1)
      .def_readwrite("t2", &FusionConfig::t2)
      .def_readwrite("decay", &FusionConfig::decay)
      .def_readwrite("sigma_s", &FusionConfig::sigma_s)
      .def_readwrite("single_modal_nms_iou", &FusionConfig::single_modal_nms_iou)
      .def_readwrite("score_floor", &FusionConfig::score_floor)
      .def_readwrite("per_class", &FusionConfig::per_class)
      .def_static("experiment", &FusionConfig::experiment)
      .def_static("reference", &FusionConfig::reference)
      .def("validate", [](const FusionConfig& c) { validate(c); });

  m.def("iou", py::overload_cast<const GaussianBox&, const GaussianBox&>(&iou));
  m.def("iou_corners", py::overload_cast<const CornerBox&, const CornerBox&>(&iou));
  m.def("to_corners", &to_corners);
  m.def("from_corners", py::overload_cast<const CornerBox&>(&from_corners));
  m.def("decay", &decay, py::arg("score"), py::arg("overlap"), py::arg("cfg") = FusionConfig{});
  m.def("classify_overlap", &classify_overlap, py::arg("iou"), py::arg("cfg") = FusionConfig{});

  m.def(
      "standard_nms",
      [](const std::vector<GaussianBox>& d, double t, bool per_class) {
        return to_list(standard_nms(to_set(d), t, per_class));
      },
      py::arg("dets"), py::arg("iou_thresh"), py::arg("per_class") = false);
  m.def(
      "softer_update",
      [](const GaussianBox& a, const std::vector<GaussianBox>& pool, double gate) {
        return softer_update(a, pool, gate);
      },
      py::arg("anchor"), py::arg("pool"), py::arg("gate"));
  m.def(
      "softer_nms",
      [](const std::vector<GaussianBox>& d, const FusionConfig& c) { return to_list(softer_nms(to_set(d), c)); },
      py::arg("dets"), py::arg("cfg") = FusionConfig{});
  m.def(
      "multi_source_nms",
      [](const std::vector<GaussianBox>& r, const std::vector<GaussianBox>& d, const FusionConfig& c) {
        return to_list(multi_source_nms(to_set(r), to_set(d), c));
      },
      py::arg("rgb"), py::arg("depth"), py::arg("cfg") = FusionConfig{});
  m.def(
      "oracle_multi_source_nms",
      [](const std::vector<GaussianBox>& r, const std::vector<GaussianBox>& d, const FusionConfig& c) {
        return to_list(oracle_multi_source_nms(to_set(r), to_set(d), c));
      },
      py::arg("rgb"), py::arg("depth"), py::arg("cfg") = FusionConfig{});

  py::class_<LossSample>(m, "LossSample")
      .def(py::init<>())
      .def_readwrite("target", &LossSample::target)
      .def_readwrite("pred_mu", &LossSample::pred_mu)
      .def_readwrite("pred_var", &LossSample::pred_var)
      .def_readwrite("gt_w_norm", &LossSample::gt_w_norm)
      .def_readwrite("gt_h_norm", &LossSample::gt_h_norm)
      .def_readwrite("anchor_match", &LossSample::anchor_match);
  py::class_<LossGradient>(m, "LossGradient")
      .def_readonly("d_mu", &LossGradient::d_mu)
      .def_readonly("d_var", &LossGradient::d_var);
  m.def("attenuated_loss", &attenuated_loss);
  m.def("attenuated_loss_grad", &attenuated_loss_grad);

  py::class_<RegressionPair>(m, "RegressionPair")
      .def(py::init([](Vec4 mu, Vec4 var, Vec4 target) { return RegressionPair{mu, var, target}; }),
           py::arg("pred_mu"), py::arg("pred_var"), py::arg("target"))
      .def_readwrite("pred_mu", &RegressionPair::pred_mu)
      .def_readwrite("pred_var", &RegressionPair::pred_var)
      .def_readwrite("target", &RegressionPair::target);
  py::class_<CalibrationBin>(m, "CalibrationBin")
      .def_readonly("expected", &CalibrationBin::expected)
      .def_readonly("observed", &CalibrationBin::observed)
      .def_readonly("count", &CalibrationBin::count);
  py::class_<CalibrationCurve>(m, "CalibrationCurve")
      .def_readonly("bins", &CalibrationCurve::bins)
      .def_readonly("ece", &CalibrationCurve::ece)
      .def_readonly("total", &CalibrationCurve::total);
  m.def(
      "ece_curve",
      [](const std::vector<RegressionPair>& pairs, std::vector<double> levels) {
        if (levels.empty()) levels = default_calibration_levels();
        return ece_curve(pairs, levels);
      },
      py::arg("pairs"), py::arg("levels") = std::vector<double>{});

  py::class_<CorruptionSpec>(m, "CorruptionSpec")
      .def(py::init([](CorruptionKind k, int level, std::uint64_t seed) {
             CorruptionSpec s{k, level, seed, 0.0};
             validate(s);
             return s;
           }),
           py::arg("kind") = CorruptionKind::kGaussianNoise, py::arg("level") = 0, py::arg("seed") = 0)
      .def_readwrite("kind", &CorruptionSpec::kind)
      .def_readwrite("level", &CorruptionSpec::level)
      .def_readwrite("seed", &CorruptionSpec::seed)
      .def_readwrite("blur_angle_deg", &CorruptionSpec::blur_angle_deg);

  py::class_<Raster>(m, "Raster")
      .def(py::init<int, int, int, float>(), py::arg("width"), py::arg("height"),
           py::arg("channels") = 1, py::arg("fill") = 0.0f)
      .def_readonly("width", &Raster::width)
      .def_readonly("height", &Raster::height)
      .def_readonly("channels", &Raster::channels)
      .def_readwrite("data", &Raster::data)
      .def(py::self == py::self);
  m.def("corrupt", &corrupt, py::arg("image"), py::arg("spec"));

  py::class_<GroundTruthObject>(m, "GroundTruthObject")
      .def(py::init([](int c, CornerBox b) { return GroundTruthObject{c, b}; }), py::arg("class_id"),
           py::arg("box"))
      .def_readwrite("class_id", &GroundTruthObject::class_id)
      .def_readwrite("box", &GroundTruthObject::box);
  py::class_<GroundTruthFrame>(m, "GroundTruthFrame")
      .def(py::init([](std::string id, std::vector<GroundTruthObject> objs) {
             return GroundTruthFrame{std::move(id), std::move(objs)};
           }),
           py::arg("frame_id"), py::arg("objects"))
      .def_readwrite("frame_id", &GroundTruthFrame::frame_id)
      .def_readwrite("objects", &GroundTruthFrame::objects);
  py::class_<ClassResult>(m, "ClassResult")
      .def_readonly("ap", &ClassResult::ap)
      .def_readonly("tp", &ClassResult::tp)
      .def_readonly("fp", &ClassResult::fp)
      .def_readonly("fn", &ClassResult::fn)
      .def_readonly("num_gt", &ClassResult::num_gt);
  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("classes", &EvalReport::classes)
      .def_readonly("mAP", &EvalReport::mAP);
  m.def(
      "evaluate",
      [](const std::vector<std::vector<GaussianBox>>& dets, const std::vector<GroundTruthFrame>& gts,
         double gate) {
        std::vector<DetectionSet> sets;
        for (const auto& d : dets) sets.emplace_back(d);
        return evaluate_corpus(sets, gts, gate);
      },
      py::arg("detections"), py::arg("ground_truth"), py::arg("iou_gate") = 0.5);

  py::class_<SimDetectorSpec>(m, "SimDetectorSpec")
      .def(py::init<>())
      .def_static("rgb_default", &SimDetectorSpec::rgb_default)
      .def_static("depth_default", &SimDetectorSpec::depth_default)
      .def_readwrite("modality", &SimDetectorSpec::modality)
      .def_readwrite("sigma_base", &SimDetectorSpec::sigma_base)
      .def_readwrite("miss_rate", &SimDetectorSpec::miss_rate)
      .def_readwrite("fp_rate", &SimDetectorSpec::fp_rate)
      .def_readwrite("fidelity", &SimDetectorSpec::fidelity)
      .def_readwrite("var_constant", &SimDetectorSpec::var_constant)
      .def_readwrite("candidates", &SimDetectorSpec::candidates)
      .def_readwrite("seed", &SimDetectorSpec::seed);
  m.def("generate_corpus", &generate_corpus, py::arg("frames"), py::arg("seed"),
        py::arg("image_width") = 1242, py::arg("image_height") = 375);
  m.def(
      "simulate_detections",
      [](const GroundTruthFrame& gt, const SimDetectorSpec& s, const CorruptionSpec& c) {
        return to_list(simulate_detections(gt, s, c));
      },
      py::arg("gt"), py::arg("spec"), py::arg("corruption") = CorruptionSpec{});
  m.def(
      "degradation_grid_csv",
      [](const std::vector<GroundTruthFrame>& corpus, const SimDetectorSpec& rgb,
         const SimDetectorSpec& depth, const FusionConfig& cfg, unsigned threads) {
        GridOptions opts;
        opts.fusion = cfg;
        opts.threads = threads;
        py::gil_scoped_release release;
        return format_grid_csv(run_degradation_grid(corpus, rgb, depth, opts));
      },
      py::arg("corpus"), py::arg("rgb") = SimDetectorSpec::rgb_default(),
      py::arg("depth") = SimDetectorSpec::depth_default(), py::arg("cfg") = FusionConfig{},
      py::arg("threads") = 0);

  m.def("read_detections", [](const std::string& path) {
    std::vector<std::pair<std::string, GaussianBox>> out;
    for (auto& r : io::read_detections(path)) out.emplace_back(r.frame_id, r.box);
    return out;
  });
  m.def("write_detections", [](const std::string& path,
                               const std::vector<std::pair<std::string, GaussianBox>>& recs) {
    std::vector<io::DetectionRecord> r;
    for (const auto& [id, b] : recs) r.push_back({id, b});
    io::write_detections(std::filesystem::path(path), r);
  });
}

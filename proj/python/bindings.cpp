#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sipkit/activations.hpp"
#include "sipkit/error.hpp"
#include "sipkit/image.hpp"
#include "sipkit/pipeline.hpp"
#include "sipkit/sip_cnnfilter.hpp"
#include "sipkit/stats.hpp"

namespace py = pybind11;
using namespace sipkit;

namespace {

using Array3 = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array3 to_array(const RgbImage& img) {
  Array3 out({img.height, img.width, std::size_t{3}});
  auto v = out.mutable_unchecked<3>();
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) v(y, x, c) = img.at(x, y)[c];
  return out;
}

RgbImage from_array(const Array3& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw Error(ErrorCode::DimensionMismatch, "expected an H x W x 3 array");
  auto v = a.unchecked<3>();
  RgbImage img(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)));
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) img.at(x, y)[c] = v(y, x, c);
  return img;
}

py::dict sip_dict(const SipVector& v) {
  py::dict d;
  for (std::size_t i = 0; i < kSipCount; ++i) d[py::str(std::string(sip_name(static_cast<Sip>(i))))] = v.values[i];
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.attr("__version__") = SIPKIT_VERSION;

  std::vector<std::string> names;
  for (std::size_t i = 0; i < kSipCount; ++i) names.emplace_back(sip_name(static_cast<Sip>(i)));
  m.attr("SIP_NAMES") = names;

  m.def("load_image", [](const std::filesystem::path& p) { return to_array(load_image(p)); }, py::arg("path"));
  m.def("save_png", [](const Array3& a, const std::filesystem::path& p) { save_png(from_array(a), p); },
        py::arg("image"), py::arg("path"));

  py::class_<FilterBank>(m, "FilterBank")
      .def_readonly("num_filters", &FilterBank::num_filters)
      .def_readonly("channels", &FilterBank::channels)
      .def_readonly("kernel_h", &FilterBank::kernel_h)
      .def_readonly("kernel_w", &FilterBank::kernel_w)
      .def_readonly("stride", &FilterBank::stride)
      .def_property_readonly("weights", [](const FilterBank& b) {
        py::array_t<float> w({b.num_filters, b.channels, b.kernel_h, b.kernel_w});
        std::copy(b.weights.begin(), b.weights.end(), w.mutable_data());
        return w;
      })
      .def_readonly("biases", &FilterBank::biases);
  m.def("load_filter_bank", &load_filter_bank, py::arg("path"));
  m.def("random_filter_bank", &random_filter_bank, py::arg("num_filters"), py::arg("kernel"), py::arg("stride"),
        py::arg("seed"));

  m.def(
      "compute_sips",
      [](const Array3& a, const FilterBank& bank, std::uint64_t seed) {
        const auto v = compute_sips(from_array(a), bank, seed);
        py::dict d = sip_dict(v);
        return py::make_tuple(d, flag_names(v.flags));
      },
      py::arg("image"), py::arg("bank"), py::arg("seed") = 0,
      "Returns (dict of SIP values, list of degeneracy flags).");
  m.def("image_seed", &image_seed, py::arg("run_seed"), py::arg("image_id"));

  py::class_<SpearmanResult>(m, "SpearmanResult")
      .def_readonly("rho", &SpearmanResult::rho)
      .def_readonly("p", &SpearmanResult::p)
      .def("__repr__", [](const SpearmanResult& r) {
        return "SpearmanResult(rho=" + std::to_string(r.rho) + ", p=" + std::to_string(r.p) + ")";
      });
  m.def(
      "spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman(x, y); },
      py::arg("x"), py::arg("y"));

  py::class_<RegressionModel>(m, "RegressionModel")
      .def_readonly("selected", &RegressionModel::selected)
      .def_readonly("selected_names", &RegressionModel::selected_names)
      .def_readonly("step_scores", &RegressionModel::step_scores)
      .def_readonly("baseline_cv", &RegressionModel::baseline_cv)
      .def_readonly("r2_adjusted_cv", &RegressionModel::r2_adjusted_cv)
      .def_readonly("n", &RegressionModel::n);
  m.def(
      "forward_select",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t reps, std::uint64_t seed,
         const std::vector<std::string>& names) { return forward_select(x, y, CvScheme{reps, 2, seed}, names); },
      py::arg("x"), py::arg("y"), py::arg("reps") = 100, py::arg("seed") = 0,
      py::arg("names") = std::vector<std::string>{});

  py::class_<PcaModel>(m, "PcaModel")
      .def_readonly("mean", &PcaModel::mean)
      .def_readonly("components", &PcaModel::components)
      .def_readonly("explained_variance", &PcaModel::explained_variance)
      .def_property_readonly("k", &PcaModel::k);
  m.def("fit_pca", &fit_pca, py::arg("data"), py::arg("k") = 20);
  m.def("project", &project, py::arg("model"), py::arg("data"));
  m.def("pca_components_for", &pca_components_for, py::arg("n"), py::arg("d"), py::arg("wanted") = 20);

  py::class_<ActivationMatrix>(m, "ActivationMatrix")
      .def_readonly("layer_id", &ActivationMatrix::layer_id)
      .def_readonly("image_ids", &ActivationMatrix::image_ids)
      .def_readonly("data", &ActivationMatrix::data);
  m.def("read_activations", &read_activations, py::arg("path"));
}

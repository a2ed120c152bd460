// Python surface: numpy arrays in, numpy arrays and plain containers out.
// Volumes are indexed [x, y, z] (Fortran order), matching the on-disk layout.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "barkit/atlas.hpp"
#include "barkit/augment.hpp"
#include "barkit/error.hpp"
#include "barkit/nifti.hpp"
#include "barkit/pipeline.hpp"
#include "barkit/supcon.hpp"

namespace py = pybind11;
using namespace barkit;

namespace {

using FloatArray = py::array_t<float, py::array::f_style | py::array::forcecast>;
using IntArray = py::array_t<RegionId, py::array::f_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Dims dims_of(const py::array& a) {
  if (a.ndim() != 3) throw Error(ErrorKind::InvalidVolume, "expected a 3-D array");
  return {a.shape(0), a.shape(1), a.shape(2)};
}

py::array_t<float, py::array::f_style> to_numpy(const Volume3D& v) {
  const Dims& d = v.dims();
  py::array_t<float, py::array::f_style> out({d.nx, d.ny, d.nz});
  std::copy(v.data().begin(), v.data().end(), out.mutable_data());
  return out;
}

py::array_t<bool, py::array::f_style> to_numpy(const RegionMask& m) {
  const Dims& d = m.dims();
  py::array_t<bool, py::array::f_style> out({d.nx, d.ny, d.nz});
  std::copy(m.bits().begin(), m.bits().end(), out.mutable_data());
  return out;
}

Volume3D on_grid(const FloatArray& a, const ParcellationAtlas& atlas) {
  const float* p = a.data();
  return Volume3D(dims_of(a), {1.0, 1.0, 1.0}, atlas.affine(), DType::F32,
                  std::vector<float>(p, p + a.size()));
}

DType parse_dtype(const std::string& name) {
  if (name == "u8") return DType::U8;
  if (name == "i16") return DType::I16;
  if (name == "f32") return DType::F32;
  throw Error(ErrorKind::UnsupportedDtype, "dtype must be u8, i16 or f32");
}

std::vector<SoftLabel> labels_of(const DoubleArray& y) {
  if (y.ndim() != 2) throw Error(ErrorKind::InvalidLabel, "labels must be a 2-D array");
  std::vector<SoftLabel> out;
  for (py::ssize_t i = 0; i < y.shape(0); ++i) {
    const double* row = y.data(i, 0);
    out.push_back(SoftLabel::from_weights(std::span(row, static_cast<std::size_t>(y.shape(1)))));
  }
  return out;
}

EmbeddingBatch batch_of(const DoubleArray& raw, const DoubleArray& labels, double tau) {
  if (raw.ndim() != 2) throw Error(ErrorKind::InvalidBatch, "embeddings must be a 2-D array");
  Matrix m(raw.shape(0), raw.shape(1));
  std::copy(raw.data(), raw.data() + raw.size(), m.data());
  return EmbeddingBatch(std::move(m), labels_of(labels), tau);
}

RegionPolicy policy_of(std::optional<std::size_t> k, std::optional<double> p) {
  if (k && p) throw Error(ErrorKind::InvalidArgument, "pass k or p, not both");
  if (p) return Bernoulli{*p};
  return FixedCount{k.value_or(2)};
}

py::dict sample_dict(const AugmentedSample& s) {
  py::dict d;
  d["volume"] = to_numpy(s.volume);
  d["ratio"] = s.ratio;
  d["label"] = s.label.probs();
  d["metadata"] = py::module_::import("json").attr("loads")(sample_metadata(s).dump());
  return d;
}

}  // namespace

PYBIND11_MODULE(_barkit, m) {
  m.doc() = "Brain-aware replacement and soft supervised contrastive loss";

  // Held for the life of the interpreter; the module keeps its own reference.
  static py::handle error_type = py::exception<Error>(m, "BarkitError", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<ParcellationAtlas>(m, "Atlas")
      .def(py::init([](const IntArray& labels, const RegionLut& lut) {
             const RegionId* p = labels.data();
             return ParcellationAtlas(dims_of(labels), identity_affine(),
                                      std::vector<RegionId>(p, p + labels.size()), lut);
           }),
           py::arg("labels"), py::arg("lut"))
      .def_static("load", &load_atlas, py::arg("labels_path"), py::arg("lut_path"))
      .def_property_readonly("shape",
                             [](const ParcellationAtlas& a) {
                               return py::make_tuple(a.dims().nx, a.dims().ny, a.dims().nz);
                             })
      .def_property_readonly("lut", &ParcellationAtlas::lut)
      .def_property_readonly("region_ids", &ParcellationAtlas::region_ids)
      .def("region_voxel_counts", &ParcellationAtlas::region_voxel_counts)
      .def("brain_voxel_count", [](const ParcellationAtlas& a) { return brain_voxel_count(a); })
      .def("region_mask", [](const ParcellationAtlas& a, const RegionSet& ids) {
        return to_numpy(region_mask(a, ids));
      });

  m.def("load_nifti", [](const std::filesystem::path& path) {
    const Volume3D v = nifti::load(path);
    return py::make_tuple(to_numpy(v), v.spacing(), v.affine(), dtype_name(v.dtype()));
  }, py::arg("path"), "Returns (array, spacing, affine, dtype).");

  m.def("save_nifti",
        [](const std::filesystem::path& path, const FloatArray& data, const Spacing& spacing,
           std::optional<Affine> affine, const std::string& dtype) {
          const float* p = data.data();
          const Volume3D v(dims_of(data), spacing, affine.value_or(scaling_affine(spacing)),
                           parse_dtype(dtype), std::vector<float>(p, p + data.size()));
          nifti::save(v, path);
        },
        py::arg("path"), py::arg("data"), py::arg("spacing") = Spacing{1.0, 1.0, 1.0},
        py::arg("affine") = py::none(), py::arg("dtype") = "f32");

  m.def("mix_labels",
        [](const std::vector<double>& anchor, const std::vector<double>& donor, double ratio) {
          return mix_labels(SoftLabel::from_weights(anchor), SoftLabel::from_weights(donor), ratio)
              .probs();
        },
        py::arg("anchor"), py::arg("donor"), py::arg("ratio"));

  m.def("bar_replace",
        [](const FloatArray& anchor, const FloatArray& donor, const ParcellationAtlas& atlas,
           const RegionSet& regions) {
          const Replacement r = bar_replace(on_grid(anchor, atlas), on_grid(donor, atlas), atlas,
                                            regions);
          return py::make_tuple(to_numpy(r.volume), r.ratio, to_numpy(r.replaced));
        },
        py::arg("anchor"), py::arg("donor"), py::arg("atlas"), py::arg("regions"),
        "Returns (volume, ratio, replaced_mask).");

  m.def("bar_augment",
        [](const FloatArray& anchor, const std::vector<double>& anchor_label,
           const FloatArray& donor, const std::vector<double>& donor_label,
           const ParcellationAtlas& atlas, std::optional<std::size_t> k, std::optional<double> p,
           std::uint64_t seed) {
          return sample_dict(bar_sample(on_grid(anchor, atlas), SoftLabel::from_weights(anchor_label),
                                        on_grid(donor, atlas), SoftLabel::from_weights(donor_label),
                                        atlas, policy_of(k, p), seed));
        },
        py::arg("anchor"), py::arg("anchor_label"), py::arg("donor"), py::arg("donor_label"),
        py::arg("atlas"), py::kw_only(), py::arg("k") = py::none(), py::arg("p") = py::none(),
        py::arg("seed") = 0);

  m.def("cutmix_augment",
        [](const FloatArray& anchor, const std::vector<double>& anchor_label,
           const FloatArray& donor, const std::vector<double>& donor_label,
           const ParcellationAtlas& atlas, double alpha, std::uint64_t seed) {
          return sample_dict(cutmix_sample(on_grid(anchor, atlas),
                                           SoftLabel::from_weights(anchor_label),
                                           on_grid(donor, atlas),
                                           SoftLabel::from_weights(donor_label), atlas, alpha,
                                           seed));
        },
        py::arg("anchor"), py::arg("anchor_label"), py::arg("donor"), py::arg("donor_label"),
        py::arg("atlas"), py::kw_only(), py::arg("alpha") = 1.0, py::arg("seed") = 0);

  m.def("boundary_ratio",
        [](const py::array_t<bool, py::array::f_style | py::array::forcecast>& mask) {
          const bool* p = mask.data();
          std::vector<std::uint8_t> bits(p, p + mask.size());
          return boundary_ratio(RegionMask(dims_of(mask), std::move(bits)));
        },
        py::arg("mask"));

  m.def("soft_supcon",
        [](const DoubleArray& embeddings, const DoubleArray& labels, double tau) {
          const LossAndGrad lg = soft_supcon(batch_of(embeddings, labels, tau));
          py::array_t<double> grad({lg.grad_raw.rows(), lg.grad_raw.cols()});
          std::copy(lg.grad_raw.data(), lg.grad_raw.data() + lg.grad_raw.size(),
                    grad.mutable_data());
          return py::make_tuple(lg.report.value, grad);
        },
        py::arg("embeddings"), py::arg("labels"), py::arg("tau"),
        "Returns (loss, gradient with respect to the raw embeddings).");

  m.def("finite_diff_check",
        [](const DoubleArray& embeddings, const DoubleArray& labels, double tau, double epsilon) {
          return finite_diff_check(batch_of(embeddings, labels, tau), epsilon);
        },
        py::arg("embeddings"), py::arg("labels"), py::arg("tau"), py::arg("epsilon") = 1e-4);

  m.def("default_demo_config", [] { return to_json(DemoConfig{}).dump(); });

  m.def("run_demo",
        [](const std::string& config_json) {
          nlohmann::json j;
          try {
            j = nlohmann::json::parse(config_json);
          } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::InvalidConfig, e.what());
          }
          const DemoConfig cfg = parse_demo_config(j);
          ComparisonReport report;
          {
            py::gil_scoped_release release;
            report = run_comparison(cfg);
          }
          return py::make_tuple(to_json(report).dump(), format_table(report));
        },
        py::arg("config_json"), "Returns (report JSON text, table text).");
}

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "linsde/bench.hpp"
#include "linsde/errors.hpp"
#include "linsde/expm.hpp"
#include "linsde/kron.hpp"
#include "linsde/model.hpp"
#include "linsde/moments.hpp"
#include "linsde/oracle.hpp"

namespace py = pybind11;
using namespace linsde;

namespace {

MomentOptions moment_options(std::optional<AugmentedForm> form,
                             std::optional<ExpmMethod> method) {
  MomentOptions opts;
  opts.form = form;
  opts.expm.method = method;
  return opts;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact moments of linear SDEs from a single matrix exponential";

  auto base_error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ComputationError>(m, "ComputationError", base_error.ptr());

  m.def("kron", &kron, py::arg("a"), py::arg("b"));
  m.def("kron_sum", &kron_sum, py::arg("a"), py::arg("b"));
  m.def("kron_sum_vec", &kron_sum_vec, py::arg("a"), py::arg("b"));
  m.def("vec", &vec, py::arg("x"));
  m.def("unvec", &unvec, py::arg("v"), py::arg("rows"), py::arg("cols"));
  m.def("hilbert", &hilbert, py::arg("d"));

  py::enum_<ExpmMethod>(m, "ExpmMethod")
      .value("DensePade", ExpmMethod::DensePade)
      .value("ActionOnVector", ExpmMethod::ActionOnVector);

  m.def(
      "expm",
      [](const Matrix& a, double t, int pade_order, bool balance) {
        ExpmOptions opts;
        opts.pade_order = pade_order;
        opts.balance = balance;
        return expm(a, t, opts);
      },
      py::arg("a"), py::arg("t") = 1.0, py::arg("pade_order") = 13, py::arg("balance") = false);
  m.def(
      "expm_action",
      [](const Matrix& a, const Vector& v, double t, double tolerance, int krylov_dim) {
        ExpmOptions opts;
        opts.tolerance = tolerance;
        opts.krylov_dim = krylov_dim;
        return expm_action(a, v, t, opts);
      },
      py::arg("a"), py::arg("v"), py::arg("t") = 1.0, py::arg("tolerance") = 1e-12,
      py::arg("krylov_dim") = 30);

  py::enum_<SdeClass>(m, "SdeClass")
      .value("NonAutonomous", SdeClass::NonAutonomous)
      .value("AutonomousMultiplicative", SdeClass::AutonomousMultiplicative)
      .value("AutonomousAdditive", SdeClass::AutonomousAdditive);

  py::class_<LinearSde>(m, "LinearSde")
      .def(py::init([](const Matrix& A, double t0) { return make_sde(A, t0); }), py::arg("A"),
           py::arg("t0") = 0.0)
      .def_readwrite("A", &LinearSde::A)
      .def_readwrite("a0", &LinearSde::a0)
      .def_readwrite("a1", &LinearSde::a1)
      .def_readwrite("B", &LinearSde::B)
      .def_readwrite("b0", &LinearSde::b0)
      .def_readwrite("b1", &LinearSde::b1)
      .def_readwrite("t0", &LinearSde::t0)
      .def_property_readonly("d", &LinearSde::dim)
      .def_property_readonly("m", &LinearSde::channels)
      .def(
          "add_channel",
          [](LinearSde& self, const Matrix& B, const Vector& b0, const Vector& b1) {
            add_channel(self, B, b0, b1);
          },
          py::arg("B"), py::arg("b0"), py::arg("b1") = Vector())
      .def("validate", &LinearSde::validate);

  py::class_<MomentState>(m, "MomentState")
      .def(py::init([](const Vector& m0, const Matrix& P0) { return MomentState{m0, P0}; }),
           py::arg("m0"), py::arg("P0"))
      .def_readwrite("m0", &MomentState::m0)
      .def_readwrite("P0", &MomentState::P0);

  m.def("classify", &classify, py::arg("sde"), py::arg("zero_tol") = 0.0);
  m.def(
      "parse_model",
      [](const std::string& text) {
        Model model = parse_model(text);
        return py::make_tuple(model.sde, model.state);
      },
      py::arg("text"));
  m.def(
      "load_model",
      [](const std::string& path) {
        Model model = load_model(path);
        return py::make_tuple(model.sde, model.state);
      },
      py::arg("path"));
  m.def("serialize_model", &serialize_model, py::arg("sde"), py::arg("state"));

  py::enum_<AugmentedForm>(m, "AugmentedForm")
      .value("General", AugmentedForm::General)
      .value("Autonomous", AugmentedForm::Autonomous)
      .value("Additive", AugmentedForm::Additive);

  py::class_<AugmentedSystem>(m, "AugmentedSystem")
      .def_readonly("form", &AugmentedSystem::form)
      .def_readonly("d", &AugmentedSystem::d)
      .def_readonly("M", &AugmentedSystem::M)
      .def_readonly("u", &AugmentedSystem::u)
      .def_readonly("mean_offset", &AugmentedSystem::mean_offset)
      .def_readonly("secmom_offset", &AugmentedSystem::secmom_offset)
      .def_property_readonly("size", &AugmentedSystem::size);

  m.def(
      "assemble",
      [](const LinearSde& sde, const MomentState& state, std::optional<AugmentedForm> form) {
        return form ? assemble(sde, state, *form) : assemble(sde, state);
      },
      py::arg("sde"), py::arg("state"), py::arg("form") = py::none());

  py::class_<MomentResult>(m, "MomentResult")
      .def_readonly("t", &MomentResult::t)
      .def_readonly("mean", &MomentResult::mean)
      .def_readonly("secmom", &MomentResult::secmom)
      .def_readonly("variance", &MomentResult::variance)
      .def_readonly("symmetry_defect", &MomentResult::symmetry_defect)
      .def_readonly("min_variance_eig", &MomentResult::min_variance_eig);

  m.def(
      "moments_at",
      [](const LinearSde& sde, const MomentState& state, double t,
         std::optional<AugmentedForm> form, std::optional<ExpmMethod> method) {
        return moments_at(sde, state, t, moment_options(form, method));
      },
      py::arg("sde"), py::arg("state"), py::arg("t"), py::arg("form") = py::none(),
      py::arg("method") = py::none());
  m.def(
      "propagate_grid",
      [](const LinearSde& sde, const MomentState& state, double start, double step,
         Index n_steps, std::optional<AugmentedForm> form) {
        return propagate_grid(sde, state, start, step, n_steps, moment_options(form, {}));
      },
      py::arg("sde"), py::arg("state"), py::arg("start"), py::arg("step"), py::arg("n_steps"),
      py::arg("form") = py::none());
  m.def(
      "moments_baseline",
      [](const LinearSde& sde, const MomentState& state, double t) {
        return moments_baseline(sde, state, t);
      },
      py::arg("sde"), py::arg("state"), py::arg("t"));

  m.def("rk4_moments", &rk4_moments, py::arg("sde"), py::arg("state"), py::arg("t"),
        py::arg("n_steps"));

  py::class_<McConfig>(m, "McConfig")
      .def(py::init([](Index n_paths, Index n_steps, std::uint64_t seed, bool antithetic) {
             McConfig cfg;
             cfg.n_paths = n_paths;
             cfg.n_steps = n_steps;
             cfg.seed = seed;
             cfg.antithetic = antithetic;
             return cfg;
           }),
           py::arg("n_paths") = 100000, py::arg("n_steps") = 1000, py::arg("seed") = 0x5eed,
           py::arg("antithetic") = false)
      .def_readwrite("n_paths", &McConfig::n_paths)
      .def_readwrite("n_steps", &McConfig::n_steps)
      .def_readwrite("seed", &McConfig::seed)
      .def_readwrite("antithetic", &McConfig::antithetic);

  py::class_<McEstimate>(m, "McEstimate")
      .def_readonly("mean", &McEstimate::mean)
      .def_readonly("secmom", &McEstimate::secmom)
      .def_readonly("stderr_mean", &McEstimate::stderr_mean)
      .def_readonly("stderr_secmom", &McEstimate::stderr_secmom)
      .def_readonly("n_paths", &McEstimate::n_paths);

  m.def("euler_maruyama_mc", &euler_maruyama_mc, py::arg("sde"), py::arg("state"), py::arg("t"),
        py::arg("cfg"), py::call_guard<py::gil_scoped_release>());

  m.def(
      "hilbert_test_equation",
      [](SdeClass cls, Index d) {
        Model model = hilbert_test_equation(cls, d);
        return py::make_tuple(model.sde, model.state);
      },
      py::arg("cls"), py::arg("d"));
}

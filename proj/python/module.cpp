#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cgolab/config.hpp"

namespace py = pybind11;
using namespace cgolab;

namespace {

std::string run_json(const std::string& text, bool write) {
    RunConfig cfg = parse_config(text, "<config>");
    const auto problems = validate(cfg);
    if (!problems.empty()) {
        std::string msg;
        for (const auto& p : problems) msg += (msg.empty() ? "" : "\n") + p;
        throw FormatError(msg);
    }
    cfg.rehash();
    ScanReport rep;
    {
        py::gil_scoped_release release;
        rep = run_experiment(cfg, write);
    }
    if (write) write_reports(rep, cfg, false);
    return rep.to_json().dump();
}

template <class T>
py::array_t<T> as_array(const Field<T>& f) {
    py::array_t<T> out({static_cast<py::ssize_t>(f.grid().levels()), static_cast<py::ssize_t>(f.arity()),
                        static_cast<py::ssize_t>(f.grid().spatial_size())});
    std::copy(f.data().begin(), f.data().end(), out.mutable_data());
    return out;
}

py::object read_field(const std::string& path) {
    const json h = read_cdf1_header(path);
    if (h.value("dtype", "") == "c128") return as_array(read_cdf1_complex(path));
    return as_array(read_cdf1_real(path));
}

CarlemanWeight make_weight(const Vec3& x0, const Vec3& omega, double h, double eps, int n) {
    CarlemanWeight w;
    w.n = n;
    w.x0 = x0;
    w.omega = omega;
    w.h = h;
    w.eps = eps;
    return w;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "cgolab core bindings";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    m.def("experiment_names", &experiment_names);
    m.def("run_json", &run_json, py::arg("config"), py::arg("write_artifacts") = false,
          "Runs a JSON configuration and returns the report as JSON text.");
    m.def("read_cdf1_header", [](const std::string& p) { return read_cdf1_header(p).dump(); });
    m.def("read_cdf1_raw", &read_field, "CDF1 payload as an array [levels, arity, nodes].");

    m.def(
        "phi",
        [](const Vec3& x, const Vec3& x0, double eps, int n) {
            const auto v = phi_eps_eval(make_weight(x0, {0, 0, 1}, 1.0, eps, n), x);
            return py::make_tuple(v.value, v.grad, v.lap);
        },
        py::arg("x"), py::arg("x0") = Vec3{-2.0, 0.5, 0.5}, py::arg("eps") = 0.0, py::arg("n") = 3);
    m.def(
        "psi",
        [](const Vec3& x, const Vec3& x0, const Vec3& omega, int n) {
            const auto v = psi_eval(make_weight(x0, omega, 1.0, 0.0, n), x);
            return py::make_tuple(v.value, v.grad, v.lap);
        },
        py::arg("x"), py::arg("x0") = Vec3{-2.0, 0.5, 0.5}, py::arg("omega") = Vec3{0.0, 0.0, 1.0}, py::arg("n") = 3);
    m.def(
        "eta",
        [](double t, double h, double T, double power) {
            CarlemanWeight w;
            w.h = h;
            w.T = T;
            w.eta_power = power;
            const auto e = eta_eval(w, t);
            return py::make_tuple(e.value, e.dt);
        },
        py::arg("t"), py::arg("h"), py::arg("T") = 1.0, py::arg("power") = 0.4);
}

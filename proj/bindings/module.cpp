#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spinso4/ks.hpp"
#include "spinso4/model.hpp"
#include "spinso4/radial.hpp"
#include "spinso4/report.hpp"
#include "spinso4/suites.hpp"

namespace py = pybind11;
using namespace spinso4;

PYBIND11_MODULE(_core, m) {
    m.doc() = "spin-symmetric Coulomb problem verification workbench";

    py::enum_<Branch>(m, "Branch")
        .value("plus", Branch::plus)
        .value("minus", Branch::minus);

    py::class_<CoulombParams>(m, "CoulombParams")
        .def(py::init<double, double>(), py::arg("M"), py::arg("k"))
        .def_readonly("M", &CoulombParams::M)
        .def_readonly("k", &CoulombParams::k);

    py::class_<OscParams>(m, "OscParams")
        .def(py::init<double, double>(), py::arg("m"), py::arg("omega"))
        .def_readonly("m", &OscParams::m)
        .def_readonly("omega", &OscParams::omega);

    m.def("energy_closed_form", &model::energy_closed_form, py::arg("params"),
          py::arg("n"), py::arg("branch") = Branch::plus);
    m.def("nonrel_limit_energy", &model::nonrel_limit_energy, py::arg("params"),
          py::arg("n"));
    m.def("oscillator_energy", &model::oscillator_energy, py::arg("params"),
          py::arg("N"));
    m.def("constrained_degeneracy", &model::constrained_degeneracy, py::arg("N"));
    m.def("coulomb_degeneracy", &model::coulomb_degeneracy, py::arg("n"));

    py::class_<ks::MappedParams>(m, "MappedParams")
        .def_readonly("M", &ks::MappedParams::M)
        .def_readonly("E", &ks::MappedParams::E)
        .def_readonly("k", &ks::MappedParams::k)
        .def_readonly("m", &ks::MappedParams::m)
        .def_readonly("omega", &ks::MappedParams::omega)
        .def_readonly("epsilon", &ks::MappedParams::epsilon)
        .def_readonly("N", &ks::MappedParams::N)
        .def_readonly("n", &ks::MappedParams::n);

    m.def("ks_point", &ks::ks_point, py::arg("u"));
    m.def("map_oscillator_to_hydrogen", &ks::map_oscillator_to_hydrogen,
          py::arg("params"), py::arg("N"));
    m.def("spectrum_identity_residual", &ks::spectrum_identity_residual,
          py::arg("mapped"));

    m.def(
        "coulomb_bound_energy",
        [](const CoulombParams& p, int n, int l, double spacing) {
            if (l < 0 || l >= n) throw std::invalid_argument("need 0 <= l < n");
            radial::RadialProblem prob;
            prob.dimension = 3;
            prob.lambda = l;
            prob.potential = radial::PotentialKind::coulomb;
            prob.coupling = p.k;
            prob.mass = p.M;
            prob.spacing = spacing;
            const auto res = radial::solve_self_consistent(prob, n - 1 - l);
            if (!res.found)
                throw std::runtime_error("no bound state: " + res.trace.message);
            return res.energy;
        },
        py::arg("params"), py::arg("n"), py::arg("l"), py::arg("spacing") = 0.02,
        "bound-state energy from the radial solver");

    m.def(
        "run_suites",
        [](const std::map<std::string, std::string>& kv) {
            report::RunConfig cfg;
            cfg.kv = kv;
            return suites::run(cfg).to_json();
        },
        py::arg("config"),
        "execute verification suites; returns the JSON report as a string");
}

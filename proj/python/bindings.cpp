#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ebind/errors.hpp"
#include "ebind/field.hpp"
#include "ebind/potential.hpp"
#include "ebind/schrodinger.hpp"
#include "ebind/selfenergy.hpp"
#include "ebind/threshold.hpp"

namespace py = pybind11;
using namespace ebind;

PYBIND11_MODULE(_ebind, m) {
    m.doc() = "Threshold binding for a spin-1/2 particle coupled to a quantized field";
    m.attr("__version__") = "0.1.0";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_ArithmeticError);

    py::class_<RadialPotential>(m, "RadialPotential")
        .def_static("indicator_well", &RadialPotential::indicator_well, py::arg("depth"), py::arg("radius"))
        .def_static("smooth_well", &RadialPotential::smooth_well, py::arg("depth"), py::arg("radius"))
        .def_static("exponential_well", &RadialPotential::exponential_well, py::arg("depth"), py::arg("range"),
                    py::arg("r_max"))
        .def_static("tabulated", &RadialPotential::tabulated, py::arg("radii"), py::arg("values"))
        .def_static("from_file", [](const std::string& p) { return RadialPotential::from_file(p); })
        .def("__call__", [](const RadialPotential& w, double r) { return w(r); })
        .def_property_readonly("support", &RadialPotential::support)
        .def_property_readonly("name", &RadialPotential::name);

    py::class_<CutoffProfile>(m, "CutoffProfile")
        .def_static("sharp", &CutoffProfile::sharp, py::arg("support"), py::arg("amplitude") = 1.0)
        .def_static("smooth_bump", &CutoffProfile::smooth_bump, py::arg("support"), py::arg("width"),
                    py::arg("amplitude") = 1.0)
        .def("__call__", [](const CutoffProfile& z, double k) { return z(k); });

    py::class_<GammaPolicy>(m, "GammaPolicy")
        .def(py::init([](double scale, double power, double floor, double ceiling) {
                 return GammaPolicy{scale, power, floor, ceiling};
             }),
             py::arg("scale") = 1.0, py::arg("power") = 2.0, py::arg("floor") = 1e-10, py::arg("ceiling") = 0.5)
        .def("__call__", &GammaPolicy::operator())
        .def("describe", &GammaPolicy::describe);

    m.def("critical_coupling", [](const RadialPotential& w) { return critical_coupling(w); }, py::arg("potential"));

    m.def(
        "sigma0",
        [](double alpha, const CutoffProfile& zeta, int g) {
            const auto s = sigma0_truncated(alpha, zeta, g);
            py::dict d;
            d["energy"] = s.energy;
            d["inf_L"] = s.inf_L;
            d["iterations"] = s.iterations;
            d["residual"] = s.residual;
            return d;
        },
        py::arg("alpha"), py::arg("cutoff"), py::arg("g") = 1);

    m.def("eta_squared", [](const CutoffProfile& zeta, double c_w) { return eta_squared(zeta, c_w); },
          py::arg("cutoff"), py::arg("c_w"));

    py::class_<ModelContext>(m, "ModelContext")
        .def_readonly("lambda0", &ModelContext::lambda0)
        .def_readonly("eta2", &ModelContext::eta2)
        .def_readonly("eta2_literal", &ModelContext::eta2_literal)
        .def_readonly("c_no", &ModelContext::c_no)
        .def_property_readonly("c_w", [](const ModelContext& c) { return c.cw.c_w; });

    m.def("make_context", [](const RadialPotential& w, const CutoffProfile& z) { return make_context(w, z); },
          py::arg("potential"), py::arg("cutoff"));

    m.def(
        "margin",
        [](const ModelContext& ctx, double alpha, double gamma_reg, double lambda) {
            const auto c = binding_certificate(assemble_trial(ctx, alpha, gamma_reg), lambda);
            py::dict d;
            d["margin"] = c.margin;
            d["binds"] = c.binds;
            d["discrepancy"] = c.discrepancy;
            return d;
        },
        py::arg("context"), py::arg("alpha"), py::arg("gamma_reg"), py::arg("lambda_"));

    m.def(
        "sweep",
        [](const ModelContext& ctx, const std::vector<double>& alphas, const GammaPolicy& policy, unsigned threads) {
            ThresholdReport rep;
            {
                py::gil_scoped_release release;
                rep = alpha_sweep(ctx, alphas, policy, {}, threads);
            }
            py::list points;
            for (const auto& p : rep.points) {
                py::dict d;
                d["alpha"] = p.alpha;
                d["gamma_reg"] = p.gamma_reg;
                d["lambda_c"] = p.lambda_c;
                d["predicted_bound"] = p.predicted_bound;
                d["ok"] = p.ok;
                points.append(d);
            }
            py::dict out;
            out["points"] = points;
            out["lambda0"] = rep.lambda0;
            out["lambda0_extrapolated"] = rep.lambda0_extrapolated;
            out["eta2"] = rep.eta2;
            out["eta2_estimate"] = rep.eta2_estimate;
            out["all_below_lambda0"] = rep.all_below_lambda0;
            out["complete"] = rep.complete;
            return out;
        },
        py::arg("context"), py::arg("alphas"), py::arg("policy") = GammaPolicy{}, py::arg("threads") = 1u);
}

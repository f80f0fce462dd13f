#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lawq/cli/cli.hpp"
#include "lawq/curvature.hpp"
#include "lawq/error.hpp"
#include "lawq/methods.hpp"
#include "lawq/oracles.hpp"
#include "lawq/quantizers.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using CodeArray = py::array_t<lawq::Code, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const DoubleArray& a) {
    if (a.ndim() != 1) throw py::value_error("expected a 1-d array");
    return {a.data(), static_cast<std::size_t>(a.size())};
}

std::vector<lawq::Code> codes_from(const std::optional<CodeArray>& a) {
    if (!a) return {};
    if (a->ndim() != 1) throw py::value_error("expected a 1-d code array");
    return {a->data(), a->data() + a->size()};
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
    return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

lawq::AlternationOptions alternation(int max_iterations, double tolerance) {
    lawq::AlternationOptions o;
    o.max_iterations = max_iterations;
    o.tolerance = tolerance;
    return o;
}

}  // namespace

PYBIND11_MODULE(_lawq, m) {
    m.doc() = "Loss-aware weight quantization kernels";

    py::register_exception<lawq::Error>(m, "LawqError", PyExc_ValueError);

    py::enum_<lawq::QuantKind>(m, "QuantKind")
        .value("TERNARY", lawq::QuantKind::Ternary)
        .value("LINEAR", lawq::QuantKind::Linear)
        .value("LOG", lawq::QuantKind::Log);
    py::enum_<lawq::Scheme>(m, "Scheme").value("LINEAR", lawq::Scheme::Linear).value("LOG", lawq::Scheme::Log);

    py::class_<lawq::QuantSet>(m, "QuantSet")
        .def_static("ternary", &lawq::QuantSet::ternary)
        .def_static("build", &lawq::QuantSet::build, "bits"_a, "scheme"_a)
        .def_property_readonly("kind", &lawq::QuantSet::kind)
        .def_property_readonly("bits", &lawq::QuantSet::bits)
        .def_property_readonly("k", &lawq::QuantSet::k)
        .def("values", [](const lawq::QuantSet& q) { return to_array(q.values()); })
        .def("value", [](const lawq::QuantSet& q, int code) {
            if (!q.admits(code)) throw py::value_error("code outside Q");
            return q.value(static_cast<lawq::Code>(code));
        })
        .def("project", [](const lawq::QuantSet& q, double x) { return static_cast<int>(q.project(x)); })
        .def("__len__", &lawq::QuantSet::size)
        .def("__eq__", &lawq::QuantSet::operator==);

    py::class_<lawq::QuantizedLayer>(m, "QuantizedLayer")
        .def_readonly("alpha", &lawq::QuantizedLayer::alpha)
        .def_readonly("beta", &lawq::QuantizedLayer::beta)
        .def_readonly("qset", &lawq::QuantizedLayer::qset)
        .def_property_readonly("codes", [](const lawq::QuantizedLayer& l) { return to_array(l.codes); })
        .def_property_readonly("two_scale", &lawq::QuantizedLayer::two_scale)
        .def("reconstruct", [](const lawq::QuantizedLayer& l) { return to_array(l.reconstruct()); });

    py::class_<lawq::SolveInfo>(m, "SolveInfo")
        .def_readonly("iterations", &lawq::SolveInfo::iterations)
        .def_readonly("converged", &lawq::SolveInfo::converged)
        .def_readonly("degenerate", &lawq::SolveInfo::degenerate)
        .def_readonly("alpha_degenerate", &lawq::SolveInfo::alpha_degenerate)
        .def_readonly("beta_degenerate", &lawq::SolveInfo::beta_degenerate)
        .def_readonly("objective_trace", &lawq::SolveInfo::objective_trace);

    m.def("objective", [](const DoubleArray& w, const DoubleArray& d, const lawq::QuantizedLayer& l) {
        return lawq::quantization_objective(view(w), view(d), l);
    }, "w"_a, "d"_a, "layer"_a);

    m.def("binarize_sign", [](const DoubleArray& w) { return lawq::binarize_sign(view(w)); }, "w"_a);
    m.def("binarize_bwn", [](const DoubleArray& w) { return lawq::binarize_bwn(view(w)); }, "w"_a);
    m.def("binarize_lab", [](const DoubleArray& w, const DoubleArray& d) {
        return lawq::binarize_lab(view(w), view(d));
    }, "w"_a, "d"_a);
    m.def("ternarize_twn", [](const DoubleArray& w) { return lawq::ternarize_twn(view(w)); }, "w"_a);
    m.def("ternarize_exact", [](const DoubleArray& w, const DoubleArray& d) {
        return lawq::ternarize_exact(view(w), view(d)).layer;
    }, "w"_a, "d"_a);
    m.def("ternarize_approx", [](const DoubleArray& w, const DoubleArray& d, std::optional<CodeArray> init,
                                 int max_iterations, double tolerance) {
        const lawq::QuantResult r =
            lawq::ternarize_approx(view(w), view(d), codes_from(init), alternation(max_iterations, tolerance));
        return py::make_tuple(r.layer, r.info);
    }, "w"_a, "d"_a, "codes_init"_a = py::none(), "max_iterations"_a = 100, "tolerance"_a = 1e-6);
    m.def("ternarize_two_scale_exact", [](const DoubleArray& w, const DoubleArray& d) {
        const lawq::QuantResult r = lawq::ternarize_two_scale_exact(view(w), view(d));
        return py::make_tuple(r.layer, r.info);
    }, "w"_a, "d"_a);
    m.def("ternarize_two_scale_approx", [](const DoubleArray& w, const DoubleArray& d, std::optional<CodeArray> init,
                                           int max_iterations, double tolerance) {
        const lawq::QuantResult r = lawq::ternarize_two_scale_approx(view(w), view(d), codes_from(init),
                                                                     alternation(max_iterations, tolerance));
        return py::make_tuple(r.layer, r.info);
    }, "w"_a, "d"_a, "codes_init"_a = py::none(), "max_iterations"_a = 100, "tolerance"_a = 1e-6);
    m.def("quantize_mbit", [](const DoubleArray& w, const DoubleArray& d, const lawq::QuantSet& qset,
                              std::optional<CodeArray> init, int max_iterations, double tolerance) {
        const lawq::QuantResult r = lawq::quantize_mbit(view(w), view(d), qset, codes_from(init),
                                                        alternation(max_iterations, tolerance));
        return py::make_tuple(r.layer, r.info);
    }, "w"_a, "d"_a, "qset"_a, "codes_init"_a = py::none(), "max_iterations"_a = 100, "tolerance"_a = 1e-6);
    m.def("quantize_dorefa", [](const DoubleArray& w, int bits) {
        return to_array(lawq::quantize_dorefa(view(w), bits));
    }, "w"_a, "bits"_a);

    // Any method id or table label; returns (w_hat, layer or None, info).
    m.def("quantize", [](const std::string& method, const DoubleArray& w, std::optional<DoubleArray> d) {
        const lawq::MethodSpec spec = lawq::parse_method(method);
        const std::span<const double> dv = d ? view(*d) : std::span<const double>{};
        const lawq::LayerQuantization q = lawq::quantize_with(spec, view(w), dv, {});
        py::object layer = q.layer ? py::cast(*q.layer) : py::none();
        return py::make_tuple(to_array(q.w_hat), layer, q.info);
    }, "method"_a, "w"_a, "d"_a = py::none());
    m.def("method_label", [](const std::string& method) { return lawq::parse_method(method).label(); }, "method"_a);

    m.def("curvature_from_moments", [](const DoubleArray& v_hat, double eta, double epsilon) {
        return to_array(lawq::curvature_from_moments(view(v_hat), eta, epsilon));
    }, "v_hat"_a, "eta"_a, "epsilon"_a = 1e-8);
    m.def("precond_step", [](const DoubleArray& w, const DoubleArray& m_hat, const DoubleArray& d) {
        return to_array(lawq::precond_step(view(w), view(m_hat), view(d)));
    }, "w"_a, "m_hat"_a, "d"_a);

    py::module_ oracle = m.def_submodule("oracle", "Brute-force reference solvers");
    oracle.def("ternary", [](const DoubleArray& w, const DoubleArray& d) {
        const lawq::oracle::TernaryOptimum o = lawq::oracle::oracle_ternary(view(w), view(d));
        return py::dict("objective"_a = o.objective, "alpha"_a = o.alpha, "codes"_a = o.codes);
    }, "w"_a, "d"_a);
    oracle.def("twn_threshold", [](const DoubleArray& w) {
        const lawq::oracle::TwnOptimum o = lawq::oracle::oracle_twn_threshold(view(w));
        return py::dict("delta"_a = o.delta, "alpha"_a = o.alpha, "codes"_a = o.codes);
    }, "w"_a);
    oracle.def("two_scale", [](const DoubleArray& w, const DoubleArray& d) {
        const lawq::oracle::TwoScaleOptimum o = lawq::oracle::oracle_two_scale(view(w), view(d));
        return py::dict("objective"_a = o.objective, "alpha"_a = o.alpha, "beta"_a = o.beta, "p"_a = o.p,
                        "q"_a = o.q);
    }, "w"_a, "d"_a);
    oracle.def("alpha_grid", [](const DoubleArray& w, const DoubleArray& d, const lawq::QuantSet& q,
                                std::size_t resolution) {
        const lawq::oracle::GridOptimum o = lawq::oracle::oracle_alpha_grid(view(w), view(d), q, resolution);
        return py::dict("objective"_a = o.objective, "alpha"_a = o.alpha, "levels"_a = o.levels);
    }, "w"_a, "d"_a, "qset"_a, "resolution"_a = 100000);
    oracle.def("run_suite", [](const std::string& suite, std::size_t trials, std::uint64_t seed,
                               std::size_t grid_resolution) {
        lawq::oracle::SuiteOptions o;
        o.trials = trials;
        o.seed = seed;
        o.grid_resolution = grid_resolution;
        lawq::oracle::OracleReport r;
        {
            py::gil_scoped_release release;
            r = lawq::oracle::run_suite(lawq::oracle::parse_suite(suite), o);
        }
        py::list failures;
        for (const lawq::oracle::Failure& f : r.failures) failures.append(py::make_tuple(f.trial, f.description));
        return py::dict("suite"_a = r.suite, "trials"_a = r.trials, "passed"_a = r.passed(),
                        "max_abs_gap"_a = r.max_abs_gap, "max_rel_gap"_a = r.max_rel_gap, "stats"_a = py::dict(py::cast(r.stats)),
                        "failures"_a = failures, "wall_time"_a = r.wall_time);
    }, "suite"_a, "trials"_a = 1000, "seed"_a = 0, "grid_resolution"_a = 100000);

    // Runs a command-line subcommand in process; returns (exit_code, stdout, stderr).
    m.def("run_cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "lawq");
        std::ostringstream out, err;
        int code;
        {
            py::gil_scoped_release release;
            code = lawq::cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, "args"_a);
}

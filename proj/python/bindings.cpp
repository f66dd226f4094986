#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ancreg/cli.hpp"
#include "ancreg/errors.hpp"
#include "ancreg/experiments.hpp"
#include "ancreg/graph_search.hpp"
#include "ancreg/multiple_testing.hpp"
#include "ancreg/sem_io.hpp"
#include "ancreg/sem_model.hpp"

namespace py = pybind11;
using namespace ancreg;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

BoolMatrix to_array(const Adjacency& a) {
    const auto d = static_cast<Eigen::Index>(a.size());
    BoolMatrix out(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = 0; k < d; ++k) out(j, k) = a(static_cast<std::size_t>(j), static_cast<std::size_t>(k));
    return out;
}

Adjacency from_array(const BoolMatrix& m) {
    if (m.rows() != m.cols()) throw InvalidInput("adjacency must be square");
    Adjacency a(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index j = 0; j < m.rows(); ++j)
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            if (m(j, k)) a.set(static_cast<std::size_t>(j), static_cast<std::size_t>(k));
    return a;
}

py::dict scan_dict(const AncestorScan& scan) {
    py::dict d;
    d["target"] = scan.target;
    d["f"] = nonlinearity_name(scan.f);
    d["beta"] = scan.beta;
    d["z"] = scan.z;
    d["p_raw"] = scan.p_raw;
    d["sigma_sq"] = scan.sigma_sq;
    return d;
}

}  // namespace

PYBIND11_MODULE(_ancreg, m) {
    m.doc() = "Ancestor regression for linear structural equation models";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<CycleError>(m, "CycleError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<RankDeficient>(m, "RankDeficient", base.ptr());
    py::register_exception<DegenerateFit>(m, "DegenerateFit", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<EmptyAncestors>(m, "EmptyAncestors", base.ptr());
    py::register_exception<MomentError>(m, "MomentError", base.ptr());
    py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
    auto parse = py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<NonFiniteError>(m, "NonFiniteError", parse.ptr());

    py::class_<SemSpec>(m, "SemSpec")
        .def(py::init<std::size_t>(), py::arg("p"))
        .def_property_readonly("p", &SemSpec::p)
        .def_property_readonly("theta", [](const SemSpec& s) { return RowMatrix(s.theta); })
        .def_property_readonly("names", [](const SemSpec& s) {
            std::vector<std::string> names;
            for (std::size_t j = 0; j < s.p(); ++j) names.push_back(s.name(j));
            return names;
        })
        .def_property_readonly("noise", [](const SemSpec& s) {
            std::vector<std::pair<std::string, double>> out;
            for (const auto& n : s.noise) out.emplace_back(noise_family_name(n), n.sigma);
            return out;
        })
        .def("add_edge", &SemSpec::add_edge, py::arg("source"), py::arg("target"), py::arg("weight"),
             py::return_value_policy::reference_internal)
        .def("set_noise", [](SemSpec& s, std::size_t node, const std::string& entry) {
            if (node >= s.p()) throw InvalidInput("node out of range");
            s.noise[node] = parse_noise(entry, 0);
        }, py::arg("node"), py::arg("entry"))
        .def("ancestors", [](const SemSpec& s) { return ground_truth(s).ancestors; })
        .def("parents", [](const SemSpec& s) { return ground_truth(s).parents; })
        .def("to_text", &format_sem_spec)
        .def("__eq__", [](const SemSpec& a, const SemSpec& b) { return a == b; });

    m.def("parse_sem_spec", [](const std::string& text, bool require_dag) { return parse_sem_spec(text, require_dag); },
          py::arg("text"), py::arg("require_dag") = true);
    m.def("load_sem_spec", [](const std::string& path, bool require_dag) { return load_sem_spec(path, require_dag); },
          py::arg("path"), py::arg("require_dag") = true);
    m.def("builtin_spec", &builtin_spec, py::arg("name"));
    m.def("random_sem", &random_sem, py::arg("p"), py::arg("edge_prob"), py::arg("seed"));

    m.def("simulate", [](const SemSpec& s, std::size_t n, std::uint64_t seed) {
        return RowMatrix(simulate(s, n, seed).values());
    }, py::arg("spec"), py::arg("n"), py::arg("seed"));
    m.def("simulate_equilibrium", [](const SemSpec& s, std::size_t n, std::uint64_t seed) {
        return RowMatrix(simulate_equilibrium(s, n, seed).values());
    }, py::arg("spec"), py::arg("n"), py::arg("seed"));

    m.def("ancestor_scan", [](const Eigen::MatrixXd& data, std::size_t target, const std::string& f, bool center) {
        return scan_dict(ancestor_scan(DataMatrix(data), target, ScanOptions{parse_nonlinearity(f), center}));
    }, py::arg("data"), py::arg("target"), py::arg("f") = "cube", py::arg("center") = true);

    m.def("holm", [](const std::vector<double>& p, bool cap) { return holm(p, cap); }, py::arg("p_values"),
          py::arg("cap") = true);

    m.def("build_recursive", [](const BoolMatrix& a) { return to_array(build_recursive(from_array(a))); },
          py::arg("adjacency"));

    m.def("find_structure", [](const Eigen::MatrixXd& p, double alpha) {
        const StructureFit fit = find_structure(PMatrix(p), alpha);
        py::dict d;
        d["adjacency"] = to_array(fit.adjacency);
        d["alpha_hat"] = fit.alpha_hat;
        d["tightened"] = fit.tightened;
        return d;
    }, py::arg("pmatrix"), py::arg("alpha"));

    py::class_<GraphResult>(m, "GraphResult")
        .def_readonly("ancestors", &GraphResult::ancestors)
        .def_property_readonly("adjacency", [](const GraphResult& r) { return to_array(r.adjacency); })
        .def_readonly("alpha", &GraphResult::alpha)
        .def_readonly("alpha_hat", &GraphResult::alpha_hat)
        .def_readonly("tightened", &GraphResult::tightened)
        .def_readonly("capped", &GraphResult::capped)
        .def_readonly("n", &GraphResult::n)
        .def_property_readonly("pmatrix", [](const GraphResult& r) { return RowMatrix(r.pmatrix.values()); })
        .def_property_readonly("edges", [](const GraphResult& r) {
            std::vector<std::tuple<std::size_t, std::size_t, double>> out;
            for (const auto& e : r.edges) out.emplace_back(e.ancestor, e.target, e.corrected_p);
            return out;
        });

    m.def("detect_graph", [](const Eigen::MatrixXd& data, double alpha, const std::string& f, bool cap, bool center) {
        return detect_graph(DataMatrix(data), GraphOptions{alpha, parse_nonlinearity(f), cap, center});
    }, py::arg("data"), py::arg("alpha") = 0.05, py::arg("f") = "cube", py::arg("cap") = true,
       py::arg("center") = true);
    m.def("model_check_pvalue", &model_check_pvalue, py::arg("result"));

    m.def("parent_tests", [](const Eigen::MatrixXd& data, std::size_t target, const NodeSet& ancestors, bool center) {
        const ParentReport r = parent_tests(DataMatrix(data), target, ancestors, center);
        py::dict d;
        d["target"] = r.target;
        d["ancestors"] = r.ancestors_used;
        d["coef"] = r.coef;
        d["t"] = r.t_stat;
        d["p_value"] = r.p_value;
        return d;
    }, py::arg("data"), py::arg("target"), py::arg("ancestors"), py::arg("center") = true);

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
            py::gil_scoped_release release;
            code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}

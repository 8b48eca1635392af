#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "orbitlab/bounds.hpp"
#include "orbitlab/experiments.hpp"
#include "orbitlab/invariants.hpp"
#include "orbitlab/recovery.hpp"

namespace py = pybind11;
using namespace orbitlab;

namespace {

RepresentationSpec spec_from_blocks(const std::vector<std::pair<int, int>>& blocks) {
    RepresentationSpec spec;
    for (const auto& [n, r] : blocks) spec.blocks.push_back({n, r});
    spec.validate();
    return spec;
}

std::vector<std::pair<int, int>> blocks_of(const RepresentationSpec& spec) {
    std::vector<std::pair<int, int>> out;
    for (const auto& b : spec.blocks) out.emplace_back(b.irrep_dim, b.multiplicity);
    return out;
}

py::dict verdict_dict(const Verdict& v) {
    py::dict d;
    d["scope"] = to_string(v.scope);
    d["ambiguity"] = to_string(v.ambiguity);
    d["margin"] = v.margin;
    d["connected_orbits"] = v.connected_orbits;
    d["dim_v"] = v.dim_v;
    d["orbit_dim"] = v.orbit_dim;
    d["K"] = v.effective;
    d["M"] = v.prior_dim;
    d["class"] = to_string(v.cls);
    d["generic_threshold"] = v.generic_threshold;
    d["all_threshold"] = v.all_threshold;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "orbitlab: recoverability bounds and orbit-recovery experiments";

    m.def(
        "effective_dim",
        [](const std::vector<std::pair<int, int>>& blocks) {
            const auto ed = effective_dim(spec_from_blocks(blocks));
            return py::make_tuple(ed.dim_v, ed.orbit_dim, ed.effective);
        },
        py::arg("blocks"),
        "Returns (dim_V, orbit_dim, K) for a list of (irrep_dim, multiplicity) blocks.");

    m.def(
        "cryoem_spec",
        [](int L, int R) { return blocks_of(cryoem_spec(L, R)); },
        py::arg("bandlimit"), py::arg("radial_samples"));

    m.def(
        "dihedral_decomposition",
        [](int N) { return blocks_of(dihedral_decomposition(N)); }, py::arg("N"));

    m.def(
        "verdict_real",
        [](const std::vector<std::pair<int, int>>& blocks, int M, const std::string& cls,
           std::optional<bool> connected) {
            const auto spec = spec_from_blocks(blocks);
            const auto c = verdict_class_from_string(cls);
            return verdict_dict(connected ? verdict_real(spec, M, c, *connected)
                                          : verdict_real(spec, M, c));
        },
        py::arg("blocks"), py::arg("M"), py::arg("cls"), py::arg("connected") = std::nullopt);

    m.def(
        "verdict_complex",
        [](const std::vector<std::pair<int, int>>& blocks, int M, const std::string& cls) {
            return verdict_dict(verdict_complex(spec_from_blocks(blocks), M,
                                                verdict_class_from_string(cls)));
        },
        py::arg("blocks"), py::arg("M"), py::arg("cls"));

    m.def(
        "verdict_phase_retrieval",
        [](int N, int M, const std::string& cls) {
            return verdict_dict(verdict_phase_retrieval(N, M, verdict_class_from_string(cls)));
        },
        py::arg("N"), py::arg("M"), py::arg("cls"));

    m.def(
        "verdict_cryoem",
        [](int L, int R, int M, const std::string& cls) {
            const auto cv = verdict_cryoem(L, R, M, verdict_class_from_string(cls));
            py::dict d = verdict_dict(cv.verdict);
            d["closed_form"] = cv.closed_form;
            d["closed_form_K"] = cv.closed_form_k;
            return d;
        },
        py::arg("bandlimit"), py::arg("radial_samples"), py::arg("M"), py::arg("cls"));

    m.def(
        "verdict_gram",
        [](int N, int R, int M, const std::string& cls) {
            return verdict_dict(verdict_gram(N, R, M, verdict_class_from_string(cls)));
        },
        py::arg("N"), py::arg("R"), py::arg("M"), py::arg("cls"));

    m.def(
        "verdict_rowsort",
        [](int d, int n, int M) {
            const auto v = verdict_rowsort(d, n, M);
            py::dict out;
            out["separating_all"] = v.separating_all;
            out["separating_generic"] = v.separating_generic;
            out["ambient"] = v.ambient;
            out["M"] = v.prior_dim;
            return out;
        },
        py::arg("d"), py::arg("n"), py::arg("M"));

    m.def("power_spectrum", &power_spectrum, py::arg("x"),
          "Squared DFT moduli (unnormalized transform).");
    m.def("rowsort", &rowsort, py::arg("X"), "Sorts each matrix row ascending.");

    m.def(
        "gram_blocks",
        [](const std::vector<std::pair<int, int>>& blocks, const std::vector<Matrix>& X) {
            Signal x{spec_from_blocks(blocks), X};
            const auto g = gram_blocks(x);
            return g.blocks;
        },
        py::arg("blocks"), py::arg("X"));

    m.def(
        "haar_orthogonal",
        [](int m, std::uint64_t seed) {
            Rng rng(seed);
            return haar_orthogonal(m, rng);
        },
        py::arg("m"), py::arg("seed") = 0);

    m.def(
        "run_experiment",
        [](const std::string& config_json, int jobs) {
            const Json config = Json::parse(config_json);
            return run_experiment(config, jobs).dump();
        },
        py::arg("config_json"), py::arg("jobs") = 1,
        "Runs an experiment from a JSON config string and returns the JSON report.");
}

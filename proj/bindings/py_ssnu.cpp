// Python bindings: a pragmatic subset of the C++ core for scripting and
// notebook exploration -- grids/fields with numpy round trips, the spectral
// toolbox, the linearized operator and eigen machinery, the random clock,
// the Picard solvers, the pair factory, and the verification checks.
#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ssnu/factory.hpp"
#include "ssnu/io.hpp"
#include "ssnu/verify.hpp"

namespace py = pybind11;
using namespace ssnu;

namespace {

py::array_t<Real> physical_array(const Field& f, int c) {
    auto vals = f.physical(c);
    const Grid& g = f.grid();
    std::vector<py::ssize_t> shape(static_cast<std::size_t>(g.dim()), g.n());
    py::array_t<Real> out(shape);
    std::copy(vals.begin(), vals.end(), out.mutable_data());
    return out;
}

void set_physical_array(Field& f, int c, py::array_t<Real, py::array::c_style | py::array::forcecast> arr) {
    const std::size_t m = f.grid().node_count();
    if (static_cast<std::size_t>(arr.size()) != m)
        throw std::invalid_argument("array size does not match the grid");
    std::vector<Real> vals(arr.data(), arr.data() + m);
    f.set_physical(c, vals);
}

}  // namespace

PYBIND11_MODULE(_ssnu, m) {
    m.doc() = "similarity-variables non-uniqueness laboratory (C++ core)";

    py::register_exception<Error>(m, "SsnuError");

    py::class_<Grid>(m, "Grid")
        .def(py::init<int, int, Real>(), py::arg("dim"), py::arg("n"), py::arg("box"))
        .def_property_readonly("dim", &Grid::dim)
        .def_property_readonly("n", &Grid::n)
        .def_property_readonly("box", &Grid::box)
        .def_property_readonly("node_count", &Grid::node_count)
        .def_property_readonly("shell_count", &Grid::shell_count)
        .def("__repr__", [](const Grid& g) {
            return "Grid(dim=" + std::to_string(g.dim()) + ", n=" + std::to_string(g.n()) +
                   ", box=" + io::format_real(g.box()) + ")";
        });

    py::enum_<VarTag>(m, "VarTag")
        .value("physical", VarTag::physical)
        .value("similarity", VarTag::similarity);

    py::class_<Field>(m, "Field")
        .def(py::init<const Grid&, int, VarTag>(), py::arg("grid"), py::arg("ncomp"),
             py::arg("tag") = VarTag::similarity)
        .def_property_readonly("grid", &Field::grid)
        .def_property_readonly("ncomp", &Field::ncomp)
        .def_property_readonly("tag", &Field::tag)
        .def("physical", &physical_array, py::arg("component"))
        .def("set_physical", &set_physical_array, py::arg("component"), py::arg("values"))
        .def("l2_norm", &Field::l2_norm)
        .def("inner", &Field::inner)
        .def("mass_margin", &Field::mass_margin)
        .def("__add__", [](const Field& a, const Field& b) { return a + b; })
        .def("__sub__", [](const Field& a, const Field& b) { return a - b; })
        .def("__rmul__", [](const Field& a, Real s) { return s * a; })
        .def("__mul__", [](const Field& a, Real s) { return s * a; });

    // spectral toolbox
    m.def("random_divfree_field", &random_divfree_field, py::arg("grid"), py::arg("seed"),
          py::arg("kfrac") = 0.25);
    m.def("leray_project", &leray_project);
    m.def("laplacian", &laplacian);
    m.def("advect", &advect);
    m.def("divergence_l2", &divergence_l2);
    m.def("sobolev_norm", &sobolev_norm);
    m.def("lp_norm", &lp_norm);
    m.def("besov_norm", [](const Field& f, Real alpha, Real p, Real q) {
        return besov_norm(f, {alpha, p, q});
    });
    m.def("lp_block", &lp_block);

    // profiles and the linearized operator
    m.def("ring_vortex", &ring_vortex, py::arg("grid"), py::arg("amplitude"), py::arg("sigma"),
          py::arg("p") = 1, py::arg("sigma_axis") = 0.0);
    m.def("bump_vortex", &bump_vortex);
    m.def("background_force", &background_force);

    py::class_<LinearizedOperator>(m, "LinearizedOperator")
        .def(py::init<const Grid&, Field>(), py::arg("grid"), py::arg("background"))
        .def(py::init<const Grid&>(), py::arg("grid"))
        .def("apply", &LinearizedOperator::apply)
        .def("semigroup", &LinearizedOperator::semigroup, py::arg("u0"), py::arg("tau"),
             py::arg("steps") = 0)
        .def_property_readonly("background_max_speed",
                               &LinearizedOperator::background_max_speed);

    py::class_<Eigenpair>(m, "Eigenpair")
        .def_readonly("lambda_", &Eigenpair::lambda)
        .def_readonly("growth_rate", &Eigenpair::growth_rate)
        .def_readonly("residual", &Eigenpair::residual)
        .def_readonly("eta_mass_margin", &Eigenpair::eta_mass_margin)
        .def_readonly("eta_re", &Eigenpair::eta_re)
        .def_readonly("eta_im", &Eigenpair::eta_im);
    m.def("leading_eigenpair", &leading_eigenpair, py::arg("op"), py::arg("tau_probe") = 0.5,
          py::arg("krylov_dim") = 30, py::arg("tol") = 1e-6, py::arg("max_restarts") = 6,
          py::arg("seed") = 1, py::arg("steps_refine") = 4);
    m.def("refine_eigenpair", &refine_eigenpair, py::arg("op"), py::arg("eigenpair"),
          py::arg("krylov_dim") = 25);
    m.def("ulin", &ulin);

    // similarity maps
    py::enum_<FieldKind>(m, "FieldKind")
        .value("velocity", FieldKind::velocity)
        .value("force", FieldKind::force);
    m.def("to_physical", &to_physical);
    m.def("to_similarity", &to_similarity, py::arg("u"), py::arg("t"), py::arg("kind"),
          py::arg("sim_grid"), py::arg("margin_min") = 0.99);

    // stochastic clock
    py::class_<BrownianPath>(m, "BrownianPath")
        .def_static("sample", &BrownianPath::sample)
        .def_static("zero", &BrownianPath::zero)
        .def_readonly("seed", &BrownianPath::seed)
        .def_readonly("dt", &BrownianPath::dt)
        .def_readonly("t_end", &BrownianPath::t_end)
        .def_readonly("w", &BrownianPath::w)
        .def("value", &BrownianPath::value);
    m.def("h_factor", &h_factor);
    py::class_<TimeChange>(m, "TimeChange")
        .def(py::init<BrownianPath>())
        .def("theta", &TimeChange::theta)
        .def("theta_inverse", &TimeChange::theta_inverse)
        .def_property_readonly("theta_end", &TimeChange::theta_end);
    py::class_<StoppingTimes>(m, "StoppingTimes")
        .def_readonly("tau_r", &StoppingTimes::tau_r)
        .def_readonly("cap", &StoppingTimes::cap)
        .def_readonly("t0", &StoppingTimes::t0);
    m.def("stopping_times", &stopping_times);

    // solvers and the pair factory
    py::enum_<Pipeline>(m, "Pipeline")
        .value("stochastic", Pipeline::stochastic)
        .value("deterministic", Pipeline::deterministic);
    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("N", &SolverConfig::N)
        .def_readwrite("eps", &SolverConfig::eps)
        .def_readwrite("delta", &SolverConfig::delta)
        .def_readwrite("tau0", &SolverConfig::tau0)
        .def_readwrite("tau_min", &SolverConfig::tau_min)
        .def_readwrite("dtau", &SolverConfig::dtau)
        .def_readwrite("tol", &SolverConfig::tol)
        .def_readwrite("eig_amplitude", &SolverConfig::eig_amplitude);
    py::class_<PicardCertificate>(m, "PicardCertificate")
        .def_readonly("iterations", &PicardCertificate::iterations)
        .def_readonly("contraction", &PicardCertificate::contraction)
        .def_readonly("bound_margin", &PicardCertificate::bound_margin)
        .def_readonly("fixed_point_residual", &PicardCertificate::fixed_point_residual)
        .def_readonly("accepted", &PicardCertificate::accepted);

    py::class_<SolutionPair>(m, "SolutionPair")
        .def_readonly("fit_times", &SolutionPair::fit_times)
        .def_readonly("norm1", &SolutionPair::norm1)
        .def_readonly("norm2", &SolutionPair::norm2)
        .def_readonly("separation", &SolutionPair::separation)
        .def_readonly("separation_slope", &SolutionPair::separation_slope)
        .def_readonly("times", &SolutionPair::times)
        .def_readonly("u1", &SolutionPair::u1)
        .def_readonly("u2", &SolutionPair::u2)
        .def_readonly("force", &SolutionPair::force)
        .def_readonly("times_v", &SolutionPair::times_v)
        .def_readonly("visc", &SolutionPair::visc)
        .def_readonly("cert", &SolutionPair::cert)
        .def_readonly("provenance", &SolutionPair::provenance);

    py::class_<StochasticScenario>(m, "StochasticScenario")
        .def(py::init<>())
        .def_readwrite("profile_field", &StochasticScenario::profile)
        .def_readwrite("eig", &StochasticScenario::eig)
        .def_readwrite("solver", &StochasticScenario::solver)
        .def_readwrite("seed", &StochasticScenario::seed)
        .def_readwrite("zero_noise", &StochasticScenario::zero_noise)
        .def_readwrite("store_stride", &StochasticScenario::store_stride)
        .def_readwrite("dense_window", &StochasticScenario::dense_window)
        .def_readwrite("dense_dtau", &StochasticScenario::dense_dtau);
    py::class_<BackgroundProfile>(m, "BackgroundProfile")
        .def(py::init([](Field U, const std::string& prov) {
                 return BackgroundProfile{std::move(U), prov};
             }),
             py::arg("U"), py::arg("provenance") = "python")
        .def_readonly("U", &BackgroundProfile::U)
        .def("validate", &BackgroundProfile::validate, py::arg("margin_min") = 0.99);
    m.def("assemble_stochastic_pair", &assemble_stochastic_pair);

    py::class_<DeterministicScenario>(m, "DeterministicScenario")
        .def(py::init<>())
        .def_readwrite("profile_field", &DeterministicScenario::profile)
        .def_readwrite("eig", &DeterministicScenario::eig)
        .def_readwrite("solver", &DeterministicScenario::solver)
        .def_readwrite("store_stride", &DeterministicScenario::store_stride)
        .def_readwrite("dense_window", &DeterministicScenario::dense_window)
        .def_readwrite("dense_dtau", &DeterministicScenario::dense_dtau);
    m.def("assemble_deterministic_pair", &assemble_deterministic_pair);

    // verification
    py::class_<CheckRow>(m, "CheckRow")
        .def_readonly("name", &CheckRow::name)
        .def_readonly("t", &CheckRow::t)
        .def_readonly("margin", &CheckRow::margin)
        .def_readonly("tolerance", &CheckRow::tolerance)
        .def_readonly("pass_", &CheckRow::pass);
    py::class_<VerificationReport>(m, "VerificationReport")
        .def_readonly("rows", &VerificationReport::rows)
        .def_readonly("pass_", &VerificationReport::pass)
        .def_readonly("worst", &VerificationReport::worst);
    py::class_<PairVerifyOptions>(m, "PairVerifyOptions")
        .def(py::init<>())
        .def_readwrite("weak_tol", &PairVerifyOptions::weak_tol)
        .def_readwrite("energy_slack", &PairVerifyOptions::energy_slack)
        .def_readwrite("refine", &PairVerifyOptions::refine)
        .def_readwrite("a", &PairVerifyOptions::a)
        .def_readwrite("dense_only", &PairVerifyOptions::dense_only);
    m.def("verify_pair", &verify_pair, py::arg("pair"),
          py::arg("options") = PairVerifyOptions{});

    // snapshot IO
    m.def("write_field", [](const std::string& path, const Field& f,
                            const std::string& note) { io::write_field(path, f, note); },
          py::arg("path"), py::arg("field"), py::arg("note") = "");
    m.def("read_field", [](const std::string& path) { return io::read_field(path); });
    m.def("read_pair", &io::read_pair);
    m.def("write_pair", &io::write_pair);
}

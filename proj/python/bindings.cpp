// Python bindings for the core operations: fields and transforms, the implicit
// solver, noise sampling, the Gaussian oracle, and rate fitting.  Interfaces use
// plain lists/tuples so the module has no third-party Python dependencies.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <span>
#include <stdexcept>

#include "spde/config.hpp"
#include "spde/integrator.hpp"
#include "spde/oracle.hpp"

namespace py = pybind11;
using namespace spde;

namespace {

std::vector<std::vector<double>> states_as_rows(const std::vector<SpectralField>& states) {
    std::vector<std::vector<double>> rows;
    rows.reserve(states.size());
    for (const SpectralField& s : states) rows.emplace_back(s.coeffs());
    return rows;
}

RateTable fit_rows(const std::vector<std::tuple<double, double, double, long long>>& raw) {
    std::vector<RateRow> rows;
    rows.reserve(raw.size());
    for (const auto& [h, err, se, n] : raw) rows.push_back({h, err, se, n, RowFlag::ok});
    return fit_rate(rows);
}

} // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "spectral Galerkin / implicit Euler solver for a stochastic "
                "reaction-diffusion equation";

    py::class_<Domain>(mod, "Domain")
        .def(py::init<double>(), py::arg("length") = 1.0)
        .def_readonly("length", &Domain::length)
        .def("__repr__",
             [](const Domain& d) { return "Domain(length=" + std::to_string(d.length) + ")"; });

    py::class_<SpectralField>(mod, "SpectralField")
        .def(py::init<Domain, std::vector<double>>(), py::arg("domain"), py::arg("coeffs"))
        .def_property_readonly("domain", &SpectralField::domain)
        .def_property_readonly("n_modes", &SpectralField::n_modes)
        .def_property_readonly("coeffs",
                               [](const SpectralField& u) { return u.coeffs(); })
        .def("coeff", &SpectralField::coeff, py::arg("k"))
        .def("l2_norm", &SpectralField::l2_norm)
        .def("l2_norm_sq", &SpectralField::l2_norm_sq)
        .def_static("zero", &SpectralField::zero, py::arg("domain"), py::arg("n_modes"));

    py::class_<GridField>(mod, "GridField")
        .def(py::init<Domain, std::vector<double>>(), py::arg("domain"), py::arg("values"))
        .def_property_readonly("domain", &GridField::domain)
        .def_property_readonly("n_points", &GridField::n_points)
        .def_property_readonly("values", [](const GridField& g) { return g.values(); })
        .def("value", &GridField::value, py::arg("i"))
        .def("point", &GridField::point, py::arg("i"))
        .def("max_abs", &GridField::max_abs);

    mod.def("eigenvalue", &eigenvalue, py::arg("k"), py::arg("length"));
    mod.def("to_grid", &to_grid, py::arg("u"), py::arg("n_grid"));
    mod.def("to_spectral", &to_spectral, py::arg("g"), py::arg("n_modes"));
    mod.def("resolvent_apply", &resolvent_apply, py::arg("u"), py::arg("dt"));
    mod.def("semigroup_apply", &semigroup_apply, py::arg("u"), py::arg("t"));
    mod.def("fractional_apply", &fractional_apply, py::arg("u"), py::arg("r"));
    mod.def("sup_norm", &sup_norm, py::arg("u"), py::arg("n_grid"));

    py::class_<CubicNonlinearity>(mod, "CubicNonlinearity")
        .def(py::init<double, double, double, double>(), py::arg("a3") = 1.0,
             py::arg("a2") = 0.0, py::arg("a1") = 0.0, py::arg("a0") = 0.0)
        .def_readonly("a3", &CubicNonlinearity::a3)
        .def_readonly("a2", &CubicNonlinearity::a2)
        .def_readonly("a1", &CubicNonlinearity::a1)
        .def_readonly("a0", &CubicNonlinearity::a0);

    py::class_<DriftConstants>(mod, "DriftConstants")
        .def_readonly("lambda_f", &DriftConstants::lambda_f)
        .def_readonly("growth_estimate", &DriftConstants::growth_estimate);

    mod.def("f_pointwise", &f_pointwise, py::arg("xi"), py::arg("m"));
    mod.def("f_prime", &f_prime, py::arg("xi"), py::arg("m"));
    mod.def("lambda_f", &lambda_f, py::arg("m"));
    mod.def("drift_constants", &drift_constants, py::arg("m"));
    mod.def("nemytskii", &nemytskii, py::arg("u"), py::arg("m"));

    py::class_<NoiseSpec>(mod, "NoiseSpec")
        .def_static("power_law", &NoiseSpec::power_law, py::arg("kappa"), py::arg("n_modes"))
        .def_static("explicit_list", &NoiseSpec::explicit_list, py::arg("q"))
        .def_property_readonly("n_modes", [](const NoiseSpec& s) { return s.n_modes; });

    py::class_<BetaEstimate>(mod, "BetaEstimate")
        .def_readonly("beta", &BetaEstimate::beta)
        .def_readonly("exact", &BetaEstimate::exact);

    mod.def("q_coefficient", &q_coefficient, py::arg("spec"), py::arg("j"));
    mod.def("beta_max", &beta_max, py::arg("spec"), py::arg("length"));

    py::class_<IncrementBlock>(mod, "IncrementBlock")
        .def_property_readonly("steps", &IncrementBlock::steps)
        .def_property_readonly("modes", &IncrementBlock::modes)
        .def_property_readonly("dt", &IncrementBlock::dt)
        .def("at", &IncrementBlock::at, py::arg("k"), py::arg("j"));

    mod.def("sample_increments", &sample_increments, py::arg("spec"), py::arg("seed"),
            py::arg("trajectory"), py::arg("steps"), py::arg("dt"));
    mod.def("coarsen", &coarsen, py::arg("fine"), py::arg("factor"));

    mod.def("step_constraint", &step_constraint, py::arg("m"), py::arg("length"));

    py::enum_<SolverKind>(mod, "SolverKind")
        .value("newton", SolverKind::newton)
        .value("fixed_point", SolverKind::fixed_point);

    py::class_<SchemeConfig>(mod, "SchemeConfig")
        .def_static("create", &SchemeConfig::create, py::arg("n_modes"), py::arg("dt"),
                    py::arg("steps"), py::arg("m"), py::arg("domain"),
                    py::arg("solver") = SolverKind::newton, py::arg("tol") = 1e-10,
                    py::arg("max_iter") = 50, py::arg("damping") = 0.5)
        .def_readonly("n_modes", &SchemeConfig::n_modes)
        .def_readonly("dt", &SchemeConfig::dt)
        .def_readonly("steps", &SchemeConfig::steps);

    py::class_<StepReport>(mod, "StepReport")
        .def_readonly("iterations", &StepReport::iterations)
        .def_readonly("residual", &StepReport::residual)
        .def_readonly("damped", &StepReport::damped);

    py::class_<SolveStats>(mod, "SolveStats")
        .def_readonly("max_iterations", &SolveStats::max_iterations)
        .def_readonly("total_iterations", &SolveStats::total_iterations)
        .def_readonly("solves", &SolveStats::solves)
        .def_readonly("max_residual", &SolveStats::max_residual)
        .def_readonly("any_damped", &SolveStats::any_damped);

    mod.def(
        "implicit_solve",
        [](const Domain& d, const SchemeConfig& cfg, const CubicNonlinearity& m,
           const SpectralField& b) { return implicit_solve(d, cfg, m, b); },
        py::arg("domain"), py::arg("cfg"), py::arg("m"), py::arg("b"));

    mod.def(
        "step",
        [](const Domain& d, const SchemeConfig& cfg, const CubicNonlinearity& m,
           const SpectralField& x, const std::vector<double>& dw) {
            return step(d, cfg, m, x, std::span<const double>(dw));
        },
        py::arg("domain"), py::arg("cfg"), py::arg("m"), py::arg("x"), py::arg("dw"));

    mod.def(
        "simulate_path",
        [](const Domain& d, const SchemeConfig& cfg, const CubicNonlinearity& m,
           const SpectralField& x0, const IncrementBlock& block, int stride) {
            const Trajectory tr = simulate_path(
                d, cfg, m, x0, block,
                stride > 0 ? RecordPolicy::strided(stride) : RecordPolicy::every_step());
            return py::make_tuple(tr.times, states_as_rows(tr.states), tr.stats);
        },
        py::arg("domain"), py::arg("cfg"), py::arg("m"), py::arg("x0"), py::arg("block"),
        py::arg("stride") = 0);

    mod.def(
        "z_convolution",
        [](const Domain& d, const SchemeConfig& cfg, const IncrementBlock& block) {
            return states_as_rows(z_convolution(d, cfg, block));
        },
        py::arg("domain"), py::arg("cfg"), py::arg("block"));

    py::enum_<Functional>(mod, "Functional")
        .value("cos_norm_sq", Functional::cos_norm_sq)
        .value("exp_neg_norm_sq", Functional::exp_neg_norm_sq)
        .value("sin_norm", Functional::sin_norm)
        .value("norm_4", Functional::norm_4)
        .value("sin_norm_sq", Functional::sin_norm_sq)
        .value("sqrt2_cos_norm_sq_shift", Functional::sqrt2_cos_norm_sq_shift)
        .value("norm_sq", Functional::norm_sq);

    mod.def("evaluate_functional", &evaluate_functional, py::arg("phi"), py::arg("u"));
    mod.def("sine_initial", &sine_initial, py::arg("domain"), py::arg("n_modes"),
            py::arg("amplitude"));

    py::class_<RateTable>(mod, "RateTable")
        .def_property_readonly("slope",
                               [](const RateTable& t) {
                                   return t.slope ? py::cast(*t.slope) : py::none().cast<py::object>();
                               })
        .def_property_readonly("slope_se",
                               [](const RateTable& t) {
                                   return t.slope_se ? py::cast(*t.slope_se)
                                                     : py::none().cast<py::object>();
                               })
        .def_property_readonly("rows", [](const RateTable& t) {
            std::vector<std::tuple<double, double, double, long long>> out;
            for (const RateRow& r : t.rows) out.emplace_back(r.h, r.err, r.se, r.n);
            return out;
        });

    mod.def("fit_rate", &fit_rows, py::arg("rows"),
            "least-squares log-log slope from (h, err, se, n) tuples");

    auto orc = mod.def_submodule("oracle", "closed-form Gaussian reference solutions");

    py::class_<oracle::LinearModel>(orc, "LinearModel")
        .def(py::init<double>(), py::arg("a1"))
        .def_readonly("a1", &oracle::LinearModel::a1);

    py::class_<oracle::GaussianModeState>(orc, "GaussianModeState")
        .def(py::init([](std::vector<double> mean, std::vector<double> var) {
                 oracle::GaussianModeState s;
                 s.mean = std::move(mean);
                 s.var = std::move(var);
                 return s;
             }),
             py::arg("mean"), py::arg("var"))
        .def_readonly("mean", &oracle::GaussianModeState::mean)
        .def_readonly("var", &oracle::GaussianModeState::var);

    py::enum_<oracle::GaussianFunctional>(orc, "GaussianFunctional")
        .value("norm_sq", oracle::GaussianFunctional::norm_sq)
        .value("exp_neg_norm_sq", oracle::GaussianFunctional::exp_neg_norm_sq)
        .value("norm_4", oracle::GaussianFunctional::norm_4);

    orc.def("continuous_moments", &oracle::continuous_moments, py::arg("init"), py::arg("t"),
            py::arg("m"), py::arg("noise"), py::arg("domain"));
    orc.def("discrete_moments", &oracle::discrete_moments, py::arg("init"), py::arg("steps"),
            py::arg("dt"), py::arg("m"), py::arg("noise"), py::arg("domain"));
    orc.def("discrete_stationary", &oracle::discrete_stationary, py::arg("m"), py::arg("noise"),
            py::arg("domain"), py::arg("dt"), py::arg("n_modes"));
    orc.def("gaussian_functional", &oracle::gaussian_functional, py::arg("state"),
            py::arg("phi"));
    orc.def("brute_force_galerkin_cubic", &oracle::brute_force_galerkin_cubic, py::arg("u"),
            py::arg("m"));
}

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stab/bench.hpp"
#include "stab/bounds.hpp"
#include "stab/errors.hpp"

namespace py = pybind11;
using namespace stab;

namespace {

ClfModel wrap_clf(const std::function<double(const Eigen::VectorXd&)>& fn, int dim) {
    // The callback holds the GIL; controllers call it single-threaded.
    return ClfModel("python", dim, [fn](const StateVec& x) { return fn(x); });
}

py::dict stats_to_dict(const BatchStats& b) {
    py::dict d;
    d["method"] = std::string(to_string(b.method));
    d["delta"] = b.delta;
    d["e_bar"] = b.e_bar;
    d["q_bar"] = b.q_bar;
    d["metric"] = std::string(to_string(b.metric));
    d["mean"] = b.mean;
    d["std"] = b.stddev;
    d["mean_terminal"] = b.mean_terminal;
    d["run_metric"] = b.run_metric;
    d["times"] = b.times;
    d["mean_norm"] = b.mean_norm;
    d["std_norm"] = b.std_norm;
    d["wall_time"] = b.wall_time;
    d["failures"] = b.failures;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sample-and-hold stabilization with nonsmooth control Lyapunov functions";

    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    static py::exception<NumericError> numeric_error(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            config_error(e.what());
        } catch (const NumericError& e) {
            numeric_error(e.what());
        }
    });

    m.def(
        "endi_clf",
        [](const Eigen::VectorXd& x) {
            if (x.size() != 5) throw ConfigError("endi_clf expects a 5-vector");
            const auto v = endi_clf(x, LambdaClf{});
            return py::make_tuple(v.value, v.lambda_star);
        },
        py::arg("x"), "CLF value and minimizing lambda at an ENDI state.");
    m.def(
        "f_tilde", [](std::array<double, 3> phi, double lambda) { return f_tilde(phi, lambda); }, py::arg("phi"),
        py::arg("lam"));
    m.def(
        "kappa_lambda", [](std::array<double, 3> phi, double lambda) { return kappa_lambda(phi, lambda); },
        py::arg("phi"), py::arg("lam"));
    m.def(
        "endi_dynamics", [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd {
            return endi_dynamics(x, u);
        },
        py::arg("x"), py::arg("u"));

    m.def(
        "infc_prox",
        [](const std::function<double(const Eigen::VectorXd&)>& L, const Eigen::VectorXd& x, double alpha,
           std::uint64_t seed) {
            InfcParams p;
            p.alpha = alpha;
            const auto r = infc_prox(wrap_clf(L, static_cast<int>(x.size())), x, p, seed);
            return py::make_tuple(Eigen::VectorXd(r.y_alpha), Eigen::VectorXd(r.zeta_alpha), r.L_alpha);
        },
        py::arg("L"), py::arg("x"), py::arg("alpha") = 0.1, py::arg("seed") = 0,
        "Returns (y_alpha, zeta_alpha, L_alpha) for a Python callable L.");

    m.def(
        "generate_initials",
        [](int n, double S, int dim, std::uint64_t seed) {
            std::vector<Eigen::VectorXd> out;
            for (auto& v : generate_initials(n, S, dim, seed)) out.emplace_back(std::move(v));
            return out;
        },
        py::arg("n"), py::arg("S"), py::arg("dim"), py::arg("seed"));

    m.def(
        "simulate",
        [](const std::string& method, double delta, double e_bar, double q_bar, std::uint64_t seed,
           std::uint64_t run_index, double t_end) {
            ExperimentSpec spec;
            spec.t_end = t_end;
            spec.seed = seed;
            py::gil_scoped_release release;
            const auto ctx = prepare_context(spec);
            StabilizerConfig sc;
            sc.method = parse_method(method);
            sc.delta = delta;
            const auto controller = make_controller(sc, ctx.sys, ctx.clf);
            const auto x0 = generate_initials(static_cast<int>(run_index) + 1, spec.S, ctx.sys.n, seed).back();
            SimConfig cfg;
            cfg.delta = delta;
            cfg.t_end = t_end;
            cfg.noise.e_bar = e_bar;
            cfg.noise.q_bar = q_bar;
            cfg.seed = seed;
            cfg.run_index = run_index;
            const auto res = run_closed_loop(ctx.sys, ctx.clf, controller, x0, cfg, ctx.radii);
            py::gil_scoped_acquire acquire;
            Eigen::MatrixXd states(static_cast<Eigen::Index>(res.record.size()), ctx.sys.n);
            for (std::size_t k = 0; k < res.record.size(); ++k)
                states.row(static_cast<Eigen::Index>(k)) = res.record.states[k].transpose();
            py::dict d;
            d["times"] = res.record.times;
            d["states"] = states;
            d["clf"] = res.record.clf_values;
            d["final_norm"] = res.report.final_norm;
            d["max_norm"] = res.report.max_norm;
            d["stayed"] = res.report.stayed;
            d["failure"] = res.failure ? py::cast(*res.failure) : py::none();
            return d;
        },
        py::arg("method"), py::arg("delta") = 0.25, py::arg("e_bar") = 0.0, py::arg("q_bar") = 0.0,
        py::arg("seed") = 1, py::arg("run_index") = 0, py::arg("t_end") = 20.0,
        "One ENDI closed-loop run from the run_index-th seeded initial state.");

    m.def(
        "run_sweep",
        [](const std::string& config_json) {
            const auto spec = parse_experiment_spec(config_json);
            std::vector<BatchStats> stats;
            {
                py::gil_scoped_release release;
                stats = run_sweep(spec);
            }
            py::list out;
            for (const auto& b : stats) out.append(stats_to_dict(b));
            return out;
        },
        py::arg("config_json"), "Runs a sweep from a JSON config string; returns one dict per cell.");

    m.def(
        "table1_envelope",
        [](const std::string& method, double delta, double w_bar, double lip_L, double lip_f, double q_bar,
           double alpha, double c1, double c2) {
            BoundInputs in;
            in.delta = delta;
            in.alpha = alpha;
            in.c1 = c1;
            in.c2 = c2;
            in.constants.w_bar = w_bar;
            in.constants.lip_L = lip_L;
            in.constants.lip_f = lip_f;
            const auto env = table1_envelope(parse_method(method), in, q_bar);
            return py::make_tuple(env.e_max, env.q_max);
        },
        py::arg("method"), py::arg("delta"), py::arg("w_bar"), py::arg("lip_L"), py::arg("lip_f"),
        py::arg("q_bar") = 0.0, py::arg("alpha") = 0.1, py::arg("c1") = 1.0, py::arg("c2") = 1.0,
        "(e_max, q_max) for one method.");
}

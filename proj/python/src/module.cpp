#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fogbandit/cli.hpp>
#include <fogbandit/cost_model.hpp>

#include <sstream>

namespace py = pybind11;
using namespace fogbandit;

namespace {

py::dict summarize(const ExperimentResult& r)
{
    py::dict d;
    d["policy"] = r.policy;
    d["final_regret_mean"] = r.final_regret_mean();
    d["final_regret_std"] = r.final_regret_std();
    d["bound_coverage"] = r.bound_coverage();
    d["clamp_rate"] = r.clamp_rate;
    d["regret_mean"] = r.regret.mean;
    d["regret_std"] = r.regret.std;
    d["bound"] = r.bound;
    d["latency_per_bit"] = r.latency_per_bit.mean;
    d["energy_per_bit"] = r.energy_per_bit.mean;
    return d;
}

Scenario scenario_for(const py::dict& overrides)
{
    ExperimentSpec spec;
    for (auto [k, v] : overrides) {
        const auto key = k.cast<std::string>();
        if (key == "xi")
            spec.xi = v.cast<double>();
        else if (key == "task_size")
            spec.task_size = py::str(v).cast<std::string>();
        else if (key == "arm_count")
            spec.arm_count = v.cast<std::size_t>();
        else if (key == "scenario") {
            spec.source = ExperimentSpec::Source::config;
            spec.path = v.cast<std::string>();
        } else
            throw ConfigError("unknown scenario override: " + key);
    }
    return build_scenario(spec);
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Adversarial bandit offloading for vehicular fog computing.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);

    m.attr("__version__") = FOGBANDIT_VERSION;

    m.def("demand_weight", [](double q, double q_min, double q_max) {
        const auto d = demand_weight(q, q_min, q_max);
        return py::make_tuple(d.value, d.clamped);
    }, py::arg("task_size"), py::arg("q_min"), py::arg("q_max"));
    m.def("selection_distribution", [](const std::vector<double>& scores, const std::vector<double>& beta,
                                       double delta) { return selection_distribution(scores, beta, delta); },
          py::arg("scores"), py::arg("beta"), py::arg("delta"));
    m.def("ix_estimate", &ix_estimate, py::arg("loss"), py::arg("p"), py::arg("gamma"), py::arg("chosen") = true);
    m.def("eta", &eta_schedule, py::arg("t"), py::arg("k"));
    m.def("gamma", &gamma_schedule, py::arg("t"), py::arg("k"));

    m.def("pathloss_db", &pathloss_db, py::arg("distance_km"));
    m.def("link_rate", [](double pathloss, double fading, double tx_dbm, double bandwidth_hz, double noise_dbm_hz) {
        return link_rate(ChannelParams{tx_dbm, bandwidth_hz, noise_dbm_hz, 0.0}, channel_gain(pathloss, fading));
    }, py::arg("pathloss_db"), py::arg("fading") = 1.0, py::arg("tx_dbm") = 24.0, py::arg("bandwidth_hz") = 10e6,
          py::arg("noise_dbm_hz") = -174.0);
    m.def("unit_cost", [](double xi, double size_bits, double intensity, double rate, double freq, double tx_dbm,
                          double rho) {
        const Task t{size_bits, intensity};
        const double d = latency(t, rate, freq);
        const double e = energy(t, rate, freq, dbm_to_watts(tx_dbm), rho);
        const auto c = unit_cost(xi, d, e, size_bits, 1.0);
        return py::dict(py::arg("latency_s") = c.latency_s, py::arg("energy_j") = c.energy_j,
                        py::arg("unit_cost_raw") = c.unit_cost_raw);
    }, py::arg("xi"), py::arg("size_bits"), py::arg("intensity"), py::arg("rate"), py::arg("freq_hz"),
          py::arg("tx_dbm") = 24.0, py::arg("rho") = kDefaultRho);

    m.def("parse_policy", [](const std::string& tok) { return parse_policy(tok).name(); }, py::arg("token"));
    m.def("run_experiment", [](const std::string& policy, const std::vector<std::uint64_t>& seeds, unsigned jobs,
                               const py::dict& scenario) {
        const Scenario s = scenario_for(scenario);
        const PolicySpec p = parse_policy(policy);
        ExperimentResult r;
        {
            py::gil_scoped_release release;
            r = run_experiment(s, p, seeds, RunOptions{jobs, false});
        }
        return summarize(r);
    }, py::arg("policy"), py::arg("seeds"), py::arg("jobs") = 1, py::arg("scenario") = py::dict());
    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
            py::gil_scoped_release release;
            code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"));
}

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dcp/config.hpp"
#include "dcp/errors.hpp"
#include "dcp/feeds.hpp"
#include "dcp/field_io.hpp"
#include "dcp/output.hpp"
#include "dcp/pipeline.hpp"
#include "dcp/response.hpp"

namespace py = pybind11;
using namespace dcp;

namespace {

struct Field {
  RunConfig cfg;
  BuiltField built;
  Analysis analysis;
};

std::string curve_text(const DcpCurve& c) { return curve_json(c).dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributed cavity phase errors of atomic fountain clocks";

  static py::exception<Error> dcp_error(m, "DcpError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      dcp_error((std::string(error_name(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("normalize_amplitude", &normalize_amplitude, py::arg("r_a"), py::arg("k"),
        "Amplitude factor eta giving a pi/2 pulse at b = 1 for an aperture of radius r_a.");
  m.def(
      "longitudinal_template",
      [](double b, int p) {
        const auto t = longitudinal_template(b, p);
        return py::make_tuple(t.dphi_long, t.dp);
      },
      py::arg("b"), py::arg("p"), "(dphi_long, dP) for a cos(p pi z/d) phase variation");

  py::class_<Feed>(m, "Feed")
      .def(py::init<>())
      .def(py::init([](double phi, double z, double xi, double psi, double Q) {
             return Feed{phi, z, xi, psi, Q};
           }),
           py::arg("phi") = 0.0, py::arg("z") = 0.0, py::arg("xi") = 1.0, py::arg("psi") = 0.0,
           py::arg("Q") = std::numeric_limits<double>::infinity())
      .def_readwrite("phi", &Feed::phi)
      .def_readwrite("z", &Feed::z)
      .def_readwrite("xi", &Feed::xi)
      .def_readwrite("psi", &Feed::psi)
      .def_readwrite("Q", &Feed::Q);

  py::class_<FeedNetwork>(m, "FeedNetwork")
      .def(py::init<>())
      .def_readwrite("feeds", &FeedNetwork::feeds)
      .def_readwrite("Q0", &FeedNetwork::Q0)
      .def_readwrite("delta_omega", &FeedNetwork::delta_omega)
      .def_readwrite("width_z", &FeedNetwork::width_z)
      .def_readwrite("width_phi", &FeedNetwork::width_phi)
      .def("q_loaded", &FeedNetwork::q_loaded)
      .def("gamma", &FeedNetwork::gamma, py::arg("omega"));

  m.def("feed_weights", &feed_weights, py::arg("net"));
  m.def("network_factor", &network_factor, py::arg("net"), py::arg("m"));
  m.def("phase_imbalance_scale", &phase_imbalance_scale, py::arg("q0_over_q"), py::arg("phi_rel"),
        py::arg("m"));
  m.def("preset_network", &preset_network, py::arg("name"), py::arg("planes") = std::vector<double>{0.0});
  m.def("case_single_overcoupled", &case_single_overcoupled, py::arg("q0"), py::arg("q1"));
  m.def("case_single_feed_two_losses", &case_single_feed_two_losses, py::arg("q0"), py::arg("q1"),
        py::arg("q2"));
  m.def("case_unequal_feeds_equal_losses", &case_unequal_feeds_equal_losses, py::arg("q0"),
        py::arg("eps"), py::arg("q_l"));
  m.def("case_equal_feeds_unequal_losses", &case_equal_feeds_unequal_losses, py::arg("q0"),
        py::arg("eps"), py::arg("q_l"));
  m.def("case_matched_unequal", &case_matched_unequal, py::arg("q0"), py::arg("eps"), py::arg("q_l"));
  m.def("case_phase_imbalance", &case_phase_imbalance, py::arg("q0"), py::arg("phi_rel"), py::arg("q_l"));

  py::class_<RunConfig>(m, "Config")
      .def_property_readonly("hash", [](const RunConfig& c) { return config_hash(c); })
      .def_property_readonly("seed", [](const RunConfig& c) { return c.seed; })
      .def_property_readonly("document", [](const RunConfig& c) { return c.source.dump(); })
      .def_property_readonly("body_radius", [](const RunConfig& c) { return c.geometry.body_radius; })
      .def_property_readonly("body_height", [](const RunConfig& c) { return c.geometry.body_height; })
      .def_property_readonly("ms", [](const RunConfig& c) { return c.fourier_indices; })
      .def_property_readonly("amplitude_grid", [](const RunConfig& c) { return c.amplitude_grid; })
      .def_property_readonly("network", [](const RunConfig& c) { return c.feeds; })
      .def("violations", [](const RunConfig& c) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& v : validate_config(c)) out.emplace_back(v.field, v.rule);
        return out;
      });

  m.def(
      "load_config",
      [](const std::string& path, const std::vector<std::string>& overrides) {
        return load_config(path, overrides);
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{});
  m.def(
      "parse_config", [](const std::string& text) { return parse_config(nlohmann::json::parse(text)); },
      py::arg("text"));

  py::class_<Field>(m, "Field")
      .def_property_readonly("eigen_k", [](const Field& f) { return f.built.eigen_k; })
      .def_property_readonly("q0", [](const Field& f) { return f.built.q0; })
      .def_property_readonly("body_height", [](const Field& f) { return f.built.geometry.body_height; })
      .def_property_readonly("eta", [](const Field& f) { return f.analysis.ctx.eta; })
      .def_property_readonly("phi0", [](const Field& f) { return f.analysis.ctx.phi0; })
      .def_property_readonly("ms", [](const Field& f) { return f.built.ms; })
      .def(
          "curve",
          [](const Field& f, const std::string& preset, const std::string& method, std::vector<double> b,
             std::vector<int> ms, long long n, int threads) {
            if (b.empty()) b = f.cfg.amplitude_grid;
            if (ms.empty()) ms = f.built.ms;
            const std::size_t count = n > 0 ? std::size_t(n) : f.cfg.trajectories;
            DcpCurve c;
            {
              py::gil_scoped_release nogil;
              c = run_curve(f.cfg, f.analysis, preset, parse_method(method), b, ms, count, threads);
            }
            return curve_text(c);
          },
          py::arg("preset") = "config", py::arg("method") = "mc", py::arg("b") = std::vector<double>{},
          py::arg("ms") = std::vector<int>{}, py::arg("n") = -1, py::arg("threads") = 0)
      .def(
          "export_map",
          [](const Field& f, const std::string& path, const std::vector<double>& rho,
             const std::vector<double>& z) {
            export_field_map(sample_field_map(*f.analysis.field, f.built.ms, rho, z), path);
          },
          py::arg("path"), py::arg("rho"), py::arg("z"));

  m.def(
      "build_field",
      [](const RunConfig& cfg, std::vector<int> ms, int threads, std::function<void(std::string)> log) {
        if (ms.empty()) ms = cfg.fourier_indices;
        Logger logger;
        if (log)
          logger = [log](const std::string& s) {
            py::gil_scoped_acquire gil;
            log(s);
          };
        py::gil_scoped_release nogil;
        Field f{cfg, build_field(cfg, ms, threads, logger), {}};
        f.analysis = prepare_analysis(cfg, f.built, effective_network(cfg, f.built));
        return f;
      },
      py::arg("config"), py::arg("ms") = std::vector<int>{}, py::arg("threads") = 0,
      py::arg("log") = nullptr);

  m.def(
      "template_csv",
      [](const std::vector<int>& ps, const std::vector<double>& b) {
        std::ostringstream os;
        write_template_csv(os, template_rows(ps, b));
        return os.str();
      },
      py::arg("ps"), py::arg("b"));
}

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "touchbench/bench.hpp"
#include "touchbench/cli.hpp"
#include "touchbench/detectors.hpp"
#include "touchbench/error.hpp"
#include "touchbench/events.hpp"
#include "touchbench/features.hpp"
#include "touchbench/humanize.hpp"
#include "touchbench/synth.hpp"
#include "touchbench/theory.hpp"

namespace py = pybind11;
using namespace touchbench;

namespace {

ActionTrace trace_from_points(const std::vector<std::array<double, 3>>& pts) {
  ActionTrace a;
  for (const auto& p : pts) a.events.push_back({p[0], p[1], p[2]});
  if (a.events.empty()) throw Error(ErrorCode::EmptyTrace, "no events");
  a.kind = classify_action(a.events);
  return a;
}

std::vector<std::array<double, 3>> points_of(const ActionTrace& a) {
  std::vector<std::array<double, 3>> out;
  for (const FingerEvent& e : a.events) out.push_back({e.x, e.y, e.t_ms});
  return out;
}

SampleSet sample(const std::vector<double>& v) { return SampleSet::one_d(v); }

}  // namespace

PYBIND11_MODULE(_touchbench, m) {
  m.doc() = "Native core of the touch humanization benchmark";

  static py::exception<Error> error(m, "TouchbenchError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object inst = exc(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(exc.ptr(), inst.ptr());
    }
  });

  py::class_<LabeledCorpus>(m, "Corpus")
      .def("__len__", [](const LabeledCorpus& c) { return c.sessions.size(); })
      .def_property_readonly("session_ids",
                             [](const LabeledCorpus& c) {
                               std::vector<std::string> ids;
                               for (const Session& s : c.sessions) ids.push_back(s.session_id);
                               return ids;
                             })
      .def_property_readonly("actors",
                             [](const LabeledCorpus& c) {
                               std::vector<std::string> out;
                               for (const Session& s : c.sessions) out.emplace_back(to_string(s.actor));
                               return out;
                             })
      .def("swipes",
           [](const LabeledCorpus& c, std::size_t session) {
             std::vector<std::vector<std::array<double, 3>>> out;
             for (const ActionTrace& a : c.sessions.at(session).actions) {
               if (a.kind == ActionKind::Swipe) out.push_back(points_of(a));
             }
             return out;
           },
           py::arg("session"))
      .def("to_jsonl", [](const LabeledCorpus& c) {
        std::ostringstream out;
        write_jsonl(c, out);
        return out.str();
      });

  m.def("load_corpus", [](const std::string& path) { return ingest_jsonl(path); }, py::arg("path"));
  m.def("save_corpus", [](const LabeledCorpus& c, const std::string& path) { emit_jsonl(c, path); },
        py::arg("corpus"), py::arg("path"));
  m.def("parse_corpus",
        [](const std::string& text) {
          std::istringstream in(text);
          return read_jsonl(in);
        },
        py::arg("text"));
  m.def("synth_corpus",
        [](int humans, int agents, int actions, std::uint64_t seed) {
          SynthConfig cfg;
          cfg.humans = humans;
          cfg.agents = agents;
          cfg.actions_per_session = actions;
          cfg.seed = seed;
          validate(cfg);
          return gen_corpus(cfg);
        },
        py::arg("humans") = 200, py::arg("agents") = 200, py::arg("actions") = 10, py::arg("seed") = 7);

  m.def("feature_names", [] {
    std::vector<std::string> out;
    for (std::string_view n : feature_names()) out.emplace_back(n);
    return out;
  });
  m.def("extract_features",
        [](const std::vector<std::array<double, 3>>& points, int screen_w, int screen_h, bool normalize) {
          ExtractOptions opts;
          opts.normalize = normalize;
          const FeatureVector fv = extract_features(trace_from_points(points), screen_w, screen_h, opts);
          py::dict out;
          for (std::size_t i = 0; i < kFeatureCount; ++i) out[py::str(std::string(feature_names()[i]))] = fv.values[i];
          return out;
        },
        py::arg("points"), py::arg("screen_w") = 1080, py::arg("screen_h") = 1920,
        py::arg("normalize") = false);
  m.def("feature_matrix",
        [](const LabeledCorpus& c) {
          const FeatureMatrix fm = build_feature_matrix(c);
          py::array_t<double> x({fm.rows.size(), kFeatureCount});
          py::array_t<int> y(fm.rows.size());
          auto xv = x.mutable_unchecked<2>();
          auto yv = y.mutable_unchecked<1>();
          for (std::size_t r = 0; r < fm.rows.size(); ++r) {
            for (std::size_t f = 0; f < kFeatureCount; ++f) xv(r, f) = fm.rows[r].features.values[f];
            yv(r) = is_human(fm.rows[r].actor) ? 1 : 0;
          }
          return py::make_tuple(x, y);
        },
        py::arg("corpus"), "Swipe features and labels (1 = human).");
  m.def("information_gain",
        [](const std::vector<double>& values, const std::vector<int>& labels, int bins) {
          return information_gain(values, labels, bins);
        },
        py::arg("values"), py::arg("labels"), py::arg("bins") = kDefaultIgBins);

  m.def("fit_threshold",
        [](const std::vector<double>& human, const std::vector<double>& agent) {
          const ThresholdDetector d = fit_threshold(human, agent);
          py::dict out;
          out["threshold"] = d.threshold;
          out["human_below"] = d.polarity == Polarity::HumanBelow;
          out["train_accuracy"] = d.train_accuracy;
          return out;
        },
        py::arg("human"), py::arg("agent"));

  m.def("bspline_swipe",
        [](std::array<double, 2> start, std::array<double, 2> end, std::uint64_t seed,
           std::optional<double> duration_ms) {
          Rng rng(seed);
          return points_of(bspline_swipe({start[0], start[1]}, {end[0], end[1]}, BSplineConfig{}, rng,
                                         duration_ms));
        },
        py::arg("start"), py::arg("end"), py::arg("seed") = 7, py::arg("duration_ms") = py::none());

  m.def("estimate_jsd",
        [](const std::vector<double>& p, const std::vector<double>& q, int bins) {
          return estimate_jsd(sample(p), sample(q), bins).jsd_nats;
        },
        py::arg("p"), py::arg("q"), py::arg("bins") = kDefaultJsdBins);
  m.def("optimal_detector_value",
        [](const std::vector<double>& p, const std::vector<double>& q, int bins) {
          return optimal_detector_value(sample(p), sample(q), bins).value;
        },
        py::arg("p"), py::arg("q"), py::arg("bins") = kDefaultJsdBins);
  m.def("wasserstein_1d",
        [](const std::vector<double>& a, const std::vector<double>& b) { return wasserstein_1d_exact(a, b); },
        py::arg("a"), py::arg("b"));
  m.def("gaussian_jsd", [](double mu1, double sd1, double mu2, double sd2) {
    return gaussian_jsd_quadrature(mu1, sd1, mu2, sd2);
  });

  m.def("run_benchmark_json",
        [](const LabeledCorpus& c, const std::vector<std::string>& modes, std::uint64_t seed, bool retrain,
           bool per_cluster, int threads) {
          std::shared_ptr<const ReferenceDB> db;
          for (const std::string& name : modes) {
            if (name.find("history") != std::string::npos && !db) {
              db = std::make_shared<ReferenceDB>(build_reference_db(c, true));
            }
          }
          std::vector<BenchMode> bm;
          for (const std::string& name : modes) bm.push_back(make_mode(name, db, seed));
          BenchOptions o;
          o.seed = seed;
          o.retrain = retrain;
          o.per_cluster = per_cluster;
          o.threads = threads;
          o.curve_sizes.clear();
          std::string out;
          {
            py::gil_scoped_release release;
            out = report_to_json(run_benchmark(c, bm, o)).dump();
          }
          return out;
        },
        py::arg("corpus"), py::arg("modes"), py::arg("seed") = 7, py::arg("retrain") = true,
        py::arg("per_cluster") = true, py::arg("threads") = 1);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int code = run_cli(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in process; returns (exit_code, stdout, stderr).");
}

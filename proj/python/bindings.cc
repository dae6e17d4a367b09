// Copyright 2026 The secmoe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "secmoe/common.h"
#include "secmoe/inference.h"
#include "secmoe/model.h"
#include "secmoe/protocols/nonlinear.h"
#include "secmoe/ring.h"
#include "secmoe/selftest.h"

namespace py = pybind11;
using namespace secmoe;

namespace {

FixedTensor tokens_from(const WeightStore& w, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  const auto& c = w.config;
  if (a.ndim() != 2 || static_cast<size_t>(a.shape(0)) != c.seq_len ||
      static_cast<size_t>(a.shape(1)) != c.d_model)
    SECMOE_THROW(ErrorCode::kDimensionMismatch, "tokens must have shape ({}, {})", c.seq_len,
                 c.d_model);
  std::vector<double> v(a.data(), a.data() + a.size());
  return FixedTensor::from_reals({c.seq_len, c.d_model}, v, w.fixed);
}

py::array_t<double> to_array(const FixedTensor& t) {
  const auto v = t.to_reals();
  py::array_t<double> out({t.rows(), t.cols()});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

InferenceOptions options(const std::string& protocol, uint64_t seed, bool gate_scaling,
                         const std::string& net) {
  InferenceOptions o;
  o.forward.protocol = parse_protocol(protocol);
  o.forward.moe.gate_scaling = gate_scaling;
  o.seed = seed;
  o.net = NetProfile::parse(net);
  return o;
}

}  // namespace

PYBIND11_MODULE(_secmoe, m) {
  m.doc() = "Two-party secure inference for sparse mixture-of-experts models";

  // Messages carry the error code name, e.g. "invalid-config: ...".
  py::register_exception<Error>(m, "SecmoeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(py::module_::import("secmoe._secmoe").attr("SecmoeError"),
                    fmt::format("{}: {}", error_code_name(e.code()), e.what()).c_str());
    }
  });

  py::class_<FixedConfig>(m, "FixedConfig")
      .def(py::init([](int ell, int scale) {
             FixedConfig c{ell, scale};
             c.validate();
             return c;
           }),
           py::arg("ell") = 64, py::arg("scale") = 18)
      .def_readonly("ell", &FixedConfig::ell)
      .def_readonly("scale", &FixedConfig::scale)
      .def("encode", [](const FixedConfig& c, double v) { return encode(v, c); })
      .def("decode", [](const FixedConfig& c, uint64_t e) { return decode(e, c); });

  py::class_<ModelConfig>(m, "ModelConfig")
      .def_static("named", &ModelConfig::named)
      .def_readonly("name", &ModelConfig::name)
      .def_readonly("d_model", &ModelConfig::d_model)
      .def_readonly("d_ff", &ModelConfig::d_ff)
      .def_readonly("num_heads", &ModelConfig::num_heads)
      .def_readonly("num_layers", &ModelConfig::num_layers)
      .def_readonly("n_experts", &ModelConfig::n_experts)
      .def_readonly("seq_len", &ModelConfig::seq_len)
      .def("__repr__", [](const ModelConfig& c) {
        return fmt::format("ModelConfig({}, d_model={}, d_ff={}, heads={}, layers={}, experts={})",
                           c.name, c.d_model, c.d_ff, c.num_heads, c.num_layers, c.n_experts);
      });

  py::class_<WeightStore>(m, "Weights")
      .def_readonly("config", &WeightStore::config)
      .def_readonly("seed", &WeightStore::seed)
      .def("tensor_names", [](const WeightStore& w) {
        std::vector<std::string> names;
        for (const auto& [name, t] : w.tensors()) names.push_back(name);
        return names;
      })
      .def("__eq__", &WeightStore::operator==);

  m.def("gen_weights",
        [](const std::string& config, uint64_t seed) {
          return gen_weights(ModelConfig::named(config), seed);
        },
        py::arg("config"), py::arg("seed") = 1);
  m.def("save_weights", [](const WeightStore& w, const std::string& dir) { save_weights(w, dir); });
  m.def("load_weights", [](const std::string& dir) { return load_weights(dir); });

  m.def("plain_forward",
        [](const WeightStore& w, py::array_t<double, py::array::c_style | py::array::forcecast> x,
           bool gate_scaling) {
          MoeOptions o;
          o.gate_scaling = gate_scaling;
          return to_array(plain_forward(w, tokens_from(w, x), o));
        },
        py::arg("weights"), py::arg("tokens"), py::arg("gate_scaling") = false);

  m.def("_infer",
        [](const WeightStore& w, py::array_t<double, py::array::c_style | py::array::forcecast> x,
           const std::string& protocol, uint64_t seed, bool gate_scaling, const std::string& net) {
          const auto tokens = tokens_from(w, x);
          const auto opts = options(protocol, seed, gate_scaling, net);
          InferenceResult r;
          {
            py::gil_scoped_release release;
            r = infer_inproc(w, tokens, opts);
          }
          return py::make_tuple(to_array(r.output), report_json(r.report, -1));
        },
        py::arg("weights"), py::arg("tokens"), py::arg("protocol") = "secmoe",
        py::arg("seed") = 1, py::arg("gate_scaling") = false, py::arg("net") = "lan");

  m.def("_bench",
        [](const std::vector<size_t>& experts, const std::string& family,
           const std::vector<std::string>& protocols, uint64_t seed) {
          BenchOptions o;
          o.experts = experts;
          o.family = family;
          o.protocols.clear();
          for (const auto& p : protocols) o.protocols.push_back(parse_protocol(p));
          o.inference.seed = seed;
          std::vector<BenchRow> rows;
          {
            py::gil_scoped_release release;
            rows = run_bench(o);
          }
          return bench_json(o, rows, -1);
        },
        py::arg("experts"), py::arg("family") = "toy-moe",
        py::arg("protocols") = std::vector<std::string>{"secmoe", "dense"}, py::arg("seed") = 1);

  m.def("selftest", [](const std::string& level) {
    SelftestLevel l;
    if (level == "quick") l = SelftestLevel::kQuick;
    else if (level == "full") l = SelftestLevel::kFull;
    else SECMOE_THROW(ErrorCode::kInvalidConfig, "unknown level '{}'", level);
    std::vector<SuiteResult> results;
    {
      py::gil_scoped_release release;
      results = run_selftest(l);
    }
    py::list out;
    for (const auto& r : results) {
      py::dict d;
      d["name"] = r.name;
      d["checked"] = r.checked;
      d["failed"] = r.failed;
      d["first_failure"] = r.first_failure;
      d["seconds"] = r.seconds;
      d["ok"] = r.ok();
      out.append(d);
    }
    return out;
  }, py::arg("level") = "quick");

  m.def("gelu_approx", [](double x) { return gelu_plain(x); });
  m.def("gelu_exact", &gelu_exact);

  m.attr("REPORT_SCHEMA") = std::string(kReportSchema);
  m.attr("BENCH_SCHEMA") = std::string(kBenchSchema);
}

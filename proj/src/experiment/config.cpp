#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "msl/experiment.hpp"

namespace msl::experiment {
namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(Errc::ConfigError, field + ": " + what);
}

const std::map<std::string, std::map<std::string, double>>& unit_table() {
  static const std::map<std::string, std::map<std::string, double>> table = {
      {"length", {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}}},
      {"pressure", {{"Pa", 1.0}, {"kPa", 1e3}, {"MPa", 1e6}, {"GPa", 1e9}, {"N/mm^2", 1e6}}},
      {"density", {{"kg/m^3", 1.0}, {"g/cm^3", 1e3}, {"kg/mm^3", 1e9}, {"t/mm^3", 1e12}}},
      {"stiffness", {{"N/m", 1.0}, {"N/mm", 1e3}, {"kN/mm", 1e6}}},
      {"mass", {{"kg", 1.0}, {"g", 1e-3}, {"t", 1e3}}},
  };
  return table;
}

double unit_factor(const std::string& unit, const std::string& dimension, const std::string& field) {
  const auto& units = unit_table().at(dimension);
  const auto it = units.find(unit);
  if (it == units.end()) fail(field, "unknown " + dimension + " unit '" + unit + "'");
  return it->second;
}

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& field) {
  if (!obj.is_object()) fail(field, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) fail(field + "." + key, "unknown field");
  }
}

double number(const Json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(field, "must be finite");
  return x;
}

Index integer(const Json& v, const std::string& field) {
  if (!v.is_number_integer()) fail(field, "expected an integer");
  return v.get<Index>();
}

bool boolean(const Json& v, const std::string& field) {
  if (!v.is_boolean()) fail(field, "expected true or false");
  return v.get<bool>();
}

std::array<double, 3> quantity3(const Json& v, const std::string& dimension, const std::string& field) {
  std::array<double, 3> out{};
  if (v.is_object()) {
    check_keys(v, {"value", "unit"}, field);
    if (!v.contains("value") || !v["value"].is_array() || v["value"].size() != 3) {
      fail(field + ".value", "expected three numbers");
    }
    const double f = v.contains("unit") ? unit_factor(v["unit"].get<std::string>(), dimension, field + ".unit") : 1.0;
    for (std::size_t i = 0; i < 3; ++i) out[i] = f * number(v["value"][i], field + ".value[" + std::to_string(i) + "]");
    return out;
  }
  if (!v.is_array() || v.size() != 3) fail(field, "expected three values");
  for (std::size_t i = 0; i < 3; ++i) out[i] = parse_quantity(v[i], dimension, field + "[" + std::to_string(i) + "]");
  return out;
}

ScalingEntry parse_scaling(const Json& v, const std::string& field) {
  check_keys(v, {"kind", "beta", "alpha", "mu", "mu_relative", "c", "c_relative", "rank", "epsilon", "selector",
                 "mode", "variant"},
             field);
  if (!v.contains("kind") || !v["kind"].is_string()) fail(field + ".kind", "missing scaling kind");
  ScalingEntry e;
  try {
    e.spec.kind = scaling::parse_kind(v["kind"].get<std::string>());
  } catch (const Error& err) {
    fail(field + ".kind", err.what());
  }
  auto& s = e.spec;
  if (v.contains("beta")) s.beta = number(v["beta"], field + ".beta");
  if (v.contains("alpha")) s.alpha = number(v["alpha"], field + ".alpha");
  if (v.contains("mu")) s.mu = number(v["mu"], field + ".mu");
  if (v.contains("c")) s.c = number(v["c"], field + ".c");
  if (v.contains("rank")) s.rank = integer(v["rank"], field + ".rank");
  if (v.contains("epsilon")) s.epsilon = number(v["epsilon"], field + ".epsilon");
  if (v.contains("mu_relative")) {
    if (v.contains("mu")) fail(field + ".mu_relative", "give either mu or mu_relative");
    e.mu_relative = number(v["mu_relative"], field + ".mu_relative");
    if (!(*e.mu_relative > 0.0)) fail(field + ".mu_relative", "must be > 0");
    s.mu = 1.0;  // placeholder until lambda_max is known
  }
  if (v.contains("c_relative")) {
    if (v.contains("c")) fail(field + ".c_relative", "give either c or c_relative");
    e.c_relative = number(v["c_relative"], field + ".c_relative");
    if (!(*e.c_relative >= 0.0)) fail(field + ".c_relative", "must be >= 0");
  }
  if (v.contains("selector")) {
    if (!v["selector"].is_array()) fail(field + ".selector", "expected a list of local DOF indices");
    std::vector<Index> sel;
    for (std::size_t i = 0; i < v["selector"].size(); ++i) {
      sel.push_back(integer(v["selector"][i], field + ".selector[" + std::to_string(i) + "]"));
    }
    s.selector = std::move(sel);
  }
  if (v.contains("mode")) {
    const std::string m = v["mode"].is_string() ? v["mode"].get<std::string>() : "";
    if (m == "shave") s.deflation_mode = scaling::DeflationMode::Shave;
    else if (m == "cutoff") s.deflation_mode = scaling::DeflationMode::Cutoff;
    else fail(field + ".mode", "expected 'shave' or 'cutoff'");
  }
  if (v.contains("variant")) {
    const std::string m = v["variant"].is_string() ? v["variant"].get<std::string>() : "";
    if (m == "original") s.olovsson_variant = scaling::OlovssonVariant::Original;
    else if (m == "projector") s.olovsson_variant = scaling::OlovssonVariant::Projector;
    else fail(field + ".variant", "expected 'original' or 'projector'");
  }
  try {
    s.validate();
  } catch (const Error& err) {
    fail(field, err.what());
  }
  return e;
}

const char* source_name(GeometrySource s) {
  switch (s) {
    case GeometrySource::Mesh: return "mesh";
    case GeometrySource::MeshFile: return "mesh_file";
    case GeometrySource::Element: return "element";
    case GeometrySource::Sdof: return "sdof";
  }
  return "unknown";
}

Json spec_json(const ScalingEntry& e) {
  const auto& s = e.spec;
  Json j;
  j["kind"] = std::string(scaling::to_string(s.kind));
  j["label"] = s.label();
  j["beta"] = s.beta;
  j["alpha"] = s.alpha;
  if (e.mu_relative) j["mu_relative"] = *e.mu_relative;
  else j["mu"] = s.mu;
  if (e.c_relative) j["c_relative"] = *e.c_relative;
  else j["c"] = s.c;
  j["rank"] = s.rank;
  j["epsilon"] = s.epsilon;
  if (s.selector) j["selector"] = *s.selector;
  j["mode"] = s.deflation_mode == scaling::DeflationMode::Shave ? "shave" : "cutoff";
  j["variant"] = s.olovsson_variant == scaling::OlovssonVariant::Original ? "original" : "projector";
  return j;
}

}  // namespace

double parse_quantity(const Json& value, const std::string& dimension, const std::string& field) {
  if (!unit_table().count(dimension)) throw Error(Errc::InvalidParameter, "unknown dimension " + dimension);
  if (value.is_number()) return number(value, field);
  if (value.is_object()) {
    check_keys(value, {"value", "unit"}, field);
    if (!value.contains("value")) fail(field + ".value", "missing");
    const double x = number(value["value"], field + ".value");
    if (!value.contains("unit")) return x;
    if (!value["unit"].is_string()) fail(field + ".unit", "expected a unit string");
    return x * unit_factor(value["unit"].get<std::string>(), dimension, field + ".unit");
  }
  if (value.is_string()) {
    std::istringstream in(value.get<std::string>());
    double x = 0.0;
    std::string unit;
    if (!(in >> x)) fail(field, "expected '<number> <unit>'");
    if (!std::isfinite(x)) fail(field, "must be finite");
    if (!(in >> unit)) return x;
    return x * unit_factor(unit, dimension, field);
  }
  fail(field, "expected a number, '<number> <unit>' or {value, unit}");
}

ScalingEntry with_parameter(const ScalingEntry& base, const std::string& parameter, double value) {
  ScalingEntry e = base;
  auto& s = e.spec;
  if (parameter == "beta") {
    s.beta = value;
  } else if (parameter == "alpha") {
    s.alpha = value;
  } else if (parameter == "epsilon") {
    s.epsilon = value;
  } else if (parameter == "rank") {
    if (value != std::floor(value) || value < 0.0) fail(parameter, "rank must be a nonnegative integer");
    s.rank = static_cast<Index>(value);
  } else if (parameter == "mu") {
    s.mu = value;
    e.mu_relative.reset();
  } else if (parameter == "mu_relative") {
    if (!(value > 0.0)) fail(parameter, "must be > 0");
    e.mu_relative = value;
    s.mu = 1.0;
  } else if (parameter == "c") {
    s.c = value;
    e.c_relative.reset();
  } else {
    fail(parameter, "cannot be swept");
  }
  try {
    s.validate();
  } catch (const Error& err) {
    fail(parameter, err.what());
  }
  return e;
}

ExperimentConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, {"seed", "threads", "output", "material", "lumping", "geometry", "scalings", "sweeps", "studies",
                   "integrator", "refine"},
             "config");
  ExperimentConfig c;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0)) {
      fail("seed", "expected a nonnegative integer");
    }
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("threads")) {
    const Index t = integer(doc["threads"], "threads");
    if (t < 1) fail("threads", "must be >= 1");
    c.threads = static_cast<unsigned>(t);
  }
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) fail("output", "expected a path");
    c.output_dir = base_dir / doc["output"].get<std::string>();
  }
  if (doc.contains("refine")) c.refine = boolean(doc["refine"], "refine");

  if (doc.contains("material")) {
    const Json& m = doc["material"];
    check_keys(m, {"young_modulus", "poisson_ratio", "density"}, "material");
    if (m.contains("young_modulus")) c.material.young_modulus = parse_quantity(m["young_modulus"], "pressure", "material.young_modulus");
    if (m.contains("poisson_ratio")) c.material.poisson_ratio = number(m["poisson_ratio"], "material.poisson_ratio");
    if (m.contains("density")) c.material.density = parse_quantity(m["density"], "density", "material.density");
    try {
      c.material.validate();
    } catch (const Error& err) {
      fail("material", err.what());
    }
  }
  if (doc.contains("lumping")) {
    const std::string l = doc["lumping"].is_string() ? doc["lumping"].get<std::string>() : "";
    if (l == "row_sum") c.lumping = fem::Lumping::RowSum;
    else if (l == "hrz") c.lumping = fem::Lumping::Hrz;
    else fail("lumping", "expected 'row_sum' or 'hrz'");
  }

  if (!doc.contains("geometry")) fail("geometry", "missing; give exactly one of mesh, mesh_file, element, sdof");
  const Json& g = doc["geometry"];
  check_keys(g, {"mesh", "mesh_file", "element", "sdof"}, "geometry");
  if (g.size() != 1) fail("geometry", "give exactly one of mesh, mesh_file, element, sdof");
  if (g.contains("mesh")) {
    c.source = GeometrySource::Mesh;
    const Json& m = g["mesh"];
    check_keys(m, {"nodes", "extents"}, "geometry.mesh");
    if (!m.contains("nodes") || !m["nodes"].is_array() || m["nodes"].size() != 3) {
      fail("geometry.mesh.nodes", "expected three node counts");
    }
    for (std::size_t i = 0; i < 3; ++i) {
      c.node_counts[i] = integer(m["nodes"][i], "geometry.mesh.nodes[" + std::to_string(i) + "]");
      if (c.node_counts[i] < 2) fail("geometry.mesh.nodes", "each count must be >= 2");
    }
    if (!m.contains("extents")) fail("geometry.mesh.extents", "missing");
    c.extents = quantity3(m["extents"], "length", "geometry.mesh.extents");
    for (double e : c.extents) {
      if (!(e > 0.0)) fail("geometry.mesh.extents", "extents must be > 0");
    }
  } else if (g.contains("mesh_file")) {
    c.source = GeometrySource::MeshFile;
    if (!g["mesh_file"].is_string()) fail("geometry.mesh_file", "expected a path");
    c.mesh_file = base_dir / g["mesh_file"].get<std::string>();
  } else if (g.contains("element")) {
    c.source = GeometrySource::Element;
    const Json& e = g["element"];
    check_keys(e, {"size"}, "geometry.element");
    if (!e.contains("size")) fail("geometry.element.size", "missing");
    c.extents = quantity3(e["size"], "length", "geometry.element.size");
    for (double x : c.extents) {
      if (!(x > 0.0)) fail("geometry.element.size", "sizes must be > 0");
    }
    c.node_counts = {2, 2, 2};
  } else {
    c.source = GeometrySource::Sdof;
    const Json& s = g["sdof"];
    check_keys(s, {"stiffness", "mass"}, "geometry.sdof");
    if (s.contains("stiffness")) c.sdof_stiffness = parse_quantity(s["stiffness"], "stiffness", "geometry.sdof.stiffness");
    if (s.contains("mass")) c.sdof_mass = parse_quantity(s["mass"], "mass", "geometry.sdof.mass");
    if (!(c.sdof_stiffness >= 0.0)) fail("geometry.sdof.stiffness", "must be >= 0");
    if (!(c.sdof_mass > 0.0)) fail("geometry.sdof.mass", "must be > 0");
  }

  if (doc.contains("scalings")) {
    if (!doc["scalings"].is_array()) fail("scalings", "expected a list");
    for (std::size_t i = 0; i < doc["scalings"].size(); ++i) {
      c.scalings.push_back(parse_scaling(doc["scalings"][i], "scalings[" + std::to_string(i) + "]"));
    }
  }
  if (c.scalings.empty()) c.scalings.push_back(ScalingEntry{scaling::ScalingSpec::none(), {}, {}});

  if (doc.contains("sweeps")) {
    if (!doc["sweeps"].is_array()) fail("sweeps", "expected a list");
    for (std::size_t i = 0; i < doc["sweeps"].size(); ++i) {
      const std::string field = "sweeps[" + std::to_string(i) + "]";
      const Json& s = doc["sweeps"][i];
      check_keys(s, {"name", "scaling", "parameter", "values", "condition"}, field);
      SweepConfig sw;
      sw.name = s.contains("name") && s["name"].is_string() ? s["name"].get<std::string>() : "sweep" + std::to_string(i);
      if (!s.contains("scaling")) fail(field + ".scaling", "missing");
      sw.base = parse_scaling(s["scaling"], field + ".scaling");
      if (!s.contains("parameter") || !s["parameter"].is_string()) fail(field + ".parameter", "missing");
      sw.parameter = s["parameter"].get<std::string>();
      static const std::set<std::string> params = {"beta", "alpha", "rank", "mu", "mu_relative", "c", "epsilon"};
      if (!params.count(sw.parameter)) fail(field + ".parameter", "cannot sweep '" + sw.parameter + "'");
      if (!s.contains("values") || !s["values"].is_array()) fail(field + ".values", "expected a list");
      if (s["values"].empty()) fail(field + ".values", "sweep grid is empty");
      for (std::size_t k = 0; k < s["values"].size(); ++k) {
        sw.values.push_back(number(s["values"][k], field + ".values[" + std::to_string(k) + "]"));
      }
      for (std::size_t k = 0; k < sw.values.size(); ++k) {
        try {
          (void)with_parameter(sw.base, sw.parameter, sw.values[k]);
        } catch (const Error& err) {
          fail(field + ".values[" + std::to_string(k) + "]", err.what());
        }
      }
      if (s.contains("condition")) sw.condition = boolean(s["condition"], field + ".condition");
      c.sweeps.push_back(std::move(sw));
    }
  }

  if (doc.contains("studies")) {
    const Json& s = doc["studies"];
    check_keys(s, {"element", "spectrum", "bounds", "sweep", "stability"}, "studies");
    if (s.contains("element")) c.studies.element = boolean(s["element"], "studies.element");
    if (s.contains("spectrum")) c.studies.spectrum = boolean(s["spectrum"], "studies.spectrum");
    if (s.contains("bounds")) c.studies.bounds = boolean(s["bounds"], "studies.bounds");
    if (s.contains("sweep")) c.studies.sweep = boolean(s["sweep"], "studies.sweep");
    if (s.contains("stability")) c.studies.stability = boolean(s["stability"], "studies.stability");
  }
  if (doc.contains("integrator")) {
    const Json& s = doc["integrator"];
    check_keys(s, {"steps", "stable_factor", "unstable_factor", "trace"}, "integrator");
    if (s.contains("steps")) c.integrator.steps = integer(s["steps"], "integrator.steps");
    if (c.integrator.steps < 1) fail("integrator.steps", "must be >= 1");
    if (s.contains("stable_factor")) c.integrator.stable_factor = number(s["stable_factor"], "integrator.stable_factor");
    if (s.contains("unstable_factor")) c.integrator.unstable_factor = number(s["unstable_factor"], "integrator.unstable_factor");
    if (!(c.integrator.stable_factor > 0.0)) fail("integrator.stable_factor", "must be > 0");
    if (!(c.integrator.unstable_factor > 0.0)) fail("integrator.unstable_factor", "must be > 0");
    if (s.contains("trace")) c.integrator.trace = boolean(s["trace"], "integrator.trace");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("--config", "cannot open '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    fail("--config", std::string("parse error: ") + e.what());
  }
  return parse_config(doc, path.parent_path());
}

Json ExperimentConfig::echo() const {
  Json j;
  j["seed"] = seed;
  j["threads"] = threads;
  j["output"] = output_dir.string();
  j["refine"] = refine;
  j["material"] = {{"young_modulus_pa", material.young_modulus},
                   {"poisson_ratio", material.poisson_ratio},
                   {"density_kg_m3", material.density}};
  j["lumping"] = lumping == fem::Lumping::RowSum ? "row_sum" : "hrz";
  Json g;
  g["source"] = source_name(source);
  switch (source) {
    case GeometrySource::Mesh:
      g["nodes"] = node_counts;
      g["extents_m"] = extents;
      break;
    case GeometrySource::MeshFile:
      g["mesh_file"] = mesh_file.string();
      break;
    case GeometrySource::Element:
      g["size_m"] = extents;
      break;
    case GeometrySource::Sdof:
      g["stiffness_n_m"] = sdof_stiffness;
      g["mass_kg"] = sdof_mass;
      break;
  }
  j["geometry"] = g;
  j["scalings"] = Json::array();
  for (const auto& s : scalings) j["scalings"].push_back(spec_json(s));
  j["sweeps"] = Json::array();
  for (const auto& s : sweeps) {
    j["sweeps"].push_back({{"name", s.name},
                           {"parameter", s.parameter},
                           {"values", s.values},
                           {"scaling", spec_json(s.base)},
                           {"condition", s.condition}});
  }
  j["studies"] = {{"element", studies.element},
                  {"spectrum", studies.spectrum},
                  {"bounds", studies.bounds},
                  {"sweep", studies.sweep},
                  {"stability", studies.stability}};
  j["integrator"] = {{"steps", integrator.steps},
                     {"stable_factor", integrator.stable_factor},
                     {"unstable_factor", integrator.unstable_factor},
                     {"trace", integrator.trace}};
  return j;
}

}  // namespace msl::experiment

#include "fracms/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace fracms {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error("config: '" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw Error("config: unknown key '" + key + "' in '" + where + "'");
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw Error("config: field '" + where + "." + key + "' has the wrong type");
  }
}

void require_positive(double v, const std::string& field) {
  if (!(v > 0.0)) throw Error("config: field '" + field + "' must be positive");
}

void parse_grid(const json& j, GridConfig& g) {
  check_keys(j, "grid", {"domain", "coarse", "refine", "oversampling"});
  std::array<double, 4> d{0.0, 1.0, 0.0, 1.0};
  read(j, "domain", "grid", d);
  g.domain = {d[0], d[1], d[2], d[3]};
  std::array<int, 2> c{g.coarse_nx, g.coarse_ny};
  read(j, "coarse", "grid", c);
  g.coarse_nx = c[0];
  g.coarse_ny = c[1];
  read(j, "refine", "grid", g.refine);
  read(j, "oversampling", "grid", g.oversampling);
  if (!(g.domain.x1 > g.domain.x0 && g.domain.y1 > g.domain.y0))
    throw Error("config: field 'grid.domain' must be [x0, x1, y0, y1] with x0 < x1 and y0 < y1");
  if (g.coarse_nx < 2 || g.coarse_ny < 2) throw Error("config: field 'grid.coarse' needs at least 2 cells per direction");
  if (g.refine < 2) throw Error("config: field 'grid.refine' must be at least 2");
  if (g.oversampling < 0) throw Error("config: field 'grid.oversampling' must be non-negative");
}

Fracture parse_fracture(const json& j, int index, const RunConfig& c) {
  const std::string where = "fractures[" + std::to_string(index) + "]";
  check_keys(j, where, {"id", "points", "aperture", "kappa_f", "model"});
  Fracture f;
  f.id = index;
  read(j, "id", where, f.id);
  const std::string tag = "fracture " + std::to_string(f.id);
  std::vector<std::array<double, 2>> pts;
  read(j, "points", where, pts);
  for (const auto& p : pts) f.polyline.emplace_back(p[0], p[1]);
  f.aperture = default_aperture(c.grid.domain);
  f.kappa_f = default_fracture_kappa(c.matrix.kappa);
  read(j, "aperture", where, f.aperture);
  read(j, "kappa_f", where, f.kappa_f);
  std::string model = "dfm";
  read(j, "model", where, model);
  try {
    f.model = parse_fracture_model(model);
  } catch (const Error&) {
    throw Error("config: " + tag + ": unknown model '" + model + "'");
  }
  try {
    validate(f, c.grid.domain);
  } catch (const Error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  return f;
}

void parse_offline(const json& j, OfflineConfig& o) {
  check_keys(j, "offline", {"snapshots", "oversampled", "m_off", "boundary_m_off", "p_bf", "seed"});
  std::string kind = "full";
  read(j, "snapshots", "offline", kind);
  if (kind == "full")
    o.snapshots = SnapshotKind::Full;
  else if (kind == "randomized")
    o.snapshots = SnapshotKind::Randomized;
  else
    throw Error("config: field 'offline.snapshots' must be 'full' or 'randomized'");
  read(j, "oversampled", "offline", o.oversampled);
  if (auto it = j.find("m_off"); it != j.end() && it->is_number_integer())
    o.m_off = {it->get<int>()};
  else
    read(j, "m_off", "offline", o.m_off);
  if (auto it = j.find("boundary_m_off"); it != j.end() && !it->is_null()) {
    int b = 0;
    read(j, "boundary_m_off", "offline", b);
    o.boundary_m_off = b;
  }
  read(j, "p_bf", "offline", o.p_bf);
  read(j, "seed", "offline", o.seed);
  if (o.m_off.empty()) throw Error("config: field 'offline.m_off' must not be empty");
  for (int m : o.m_off)
    if (m < 1) throw Error("config: field 'offline.m_off' entries must be at least 1");
  if (o.boundary_m_off && *o.boundary_m_off < 1) throw Error("config: field 'offline.boundary_m_off' must be at least 1");
  if (o.p_bf < 0) throw Error("config: field 'offline.p_bf' must be non-negative");
}

void parse_adapt(const json& j, RunConfig& c) {
  check_keys(j, "adapt", {"theta", "max_iters", "increment", "indicator", "region", "tolerance", "target_energy_error",
                          "initial_m_off"});
  auto& a = c.adapt;
  read(j, "theta", "adapt", a.theta);
  read(j, "max_iters", "adapt", a.max_iters);
  read(j, "increment", "adapt", a.basis_increment);
  std::string ind = "residual";
  read(j, "indicator", "adapt", ind);
  if (ind == "residual")
    a.indicator = IndicatorKind::Residual;
  else if (ind == "manual")
    a.indicator = IndicatorKind::ManualRegion;
  else
    throw Error("config: field 'adapt.indicator' must be 'residual' or 'manual'");
  if (j.contains("region")) {
    std::array<int, 4> r{};
    read(j, "region", "adapt", r);
    a.region = {r[0], r[1], r[2], r[3]};
    if (r[0] < 1 || r[2] < 1 || r[1] < r[0] || r[3] < r[2])
      throw Error("config: field 'adapt.region' must be 1-based [i0, i1, j0, j1] with i0 <= i1, j0 <= j1");
  }
  read(j, "tolerance", "adapt", a.tolerance);
  if (auto it = j.find("target_energy_error"); it != j.end() && !it->is_null()) {
    double t = 0.0;
    read(j, "target_energy_error", "adapt", t);
    a.target_energy_error = t;
  }
  read(j, "initial_m_off", "adapt", c.adapt_initial_m_off);
  try {
    a.validate();
  } catch (const Error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (c.adapt_initial_m_off < 1) throw Error("config: field 'adapt.initial_m_off' must be at least 1");
}

}  // namespace

double default_aperture(const Rect& domain) { return 1e-3 * std::max(domain.width(), domain.height()); }

double default_fracture_kappa(double matrix_kappa) { return 1e4 * matrix_kappa; }

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  check_keys(root, "<root>",
             {"grid", "matrix", "fractures", "generator", "strict_dfm", "efm", "boundary", "source", "offline", "adapt",
              "output"});

  RunConfig c;
  if (root.contains("grid")) parse_grid(root["grid"], c.grid);
  else throw Error("config: missing required section 'grid'");

  if (root.contains("matrix")) {
    const auto& j = root["matrix"];
    check_keys(j, "matrix", {"kappa", "kappa_file", "mask_file", "mask_kappa"});
    read(j, "kappa", "matrix", c.matrix.kappa);
    read(j, "kappa_file", "matrix", c.matrix.kappa_file);
    read(j, "mask_file", "matrix", c.matrix.mask_file);
    read(j, "mask_kappa", "matrix", c.matrix.mask_kappa);
    require_positive(c.matrix.kappa, "matrix.kappa");
    require_positive(c.matrix.mask_kappa, "matrix.mask_kappa");
  }

  read(root, "strict_dfm", "<root>", c.strict_dfm);

  if (root.contains("efm")) {
    const auto& j = root["efm"];
    check_keys(j, "efm", {"coupling_scale", "segment_length"});
    read(j, "coupling_scale", "efm", c.coupling_scale);
    read(j, "segment_length", "efm", c.efm_segment);
    require_positive(c.coupling_scale, "efm.coupling_scale");
    if (c.efm_segment < 0.0) throw Error("config: field 'efm.segment_length' must be non-negative");
  }

  if (root.contains("fractures")) {
    const auto& arr = root["fractures"];
    if (!arr.is_array()) throw Error("config: 'fractures' must be an array");
    std::set<int> ids;
    for (std::size_t k = 0; k < arr.size(); ++k) {
      Fracture f = parse_fracture(arr[k], static_cast<int>(k), c);
      if (!ids.insert(f.id).second) throw Error("config: fracture " + std::to_string(f.id) + ": duplicate id");
      c.fractures.push_back(std::move(f));
    }
  }

  if (root.contains("generator")) {
    const auto& j = root["generator"];
    check_keys(j, "generator", {"name", "seed"});
    GeneratorConfig g;
    read(j, "name", "generator", g.name);
    read(j, "seed", "generator", g.seed);
    if (g.name.empty()) throw Error("config: field 'generator.name' is required");
    c.generator = g;
  }

  if (root.contains("boundary")) {
    const auto& j = root["boundary"];
    check_keys(j, "boundary", {"bilinear", "polynomial"});
    if (j.contains("bilinear") && j.contains("polynomial"))
      throw Error("config: 'boundary' takes either 'bilinear' or 'polynomial', not both");
    if (j.contains("bilinear")) {
      std::array<double, 4> b{};
      read(j, "bilinear", "boundary", b);
      c.boundary = {b[0], b[1], b[2], b[3], 0.0, 0.0};
    } else {
      read(j, "polynomial", "boundary", c.boundary);
    }
  }

  read(root, "source", "<root>", c.source);
  if (root.contains("offline")) parse_offline(root["offline"], c.offline);
  if (root.contains("adapt")) parse_adapt(root["adapt"], c);

  if (root.contains("output")) {
    const auto& j = root["output"];
    check_keys(j, "output", {"dir", "fields", "vtk", "eigenvalues"});
    read(j, "dir", "output", c.output.dir);
    read(j, "fields", "output", c.output.fields);
    read(j, "vtk", "output", c.output.vtk);
    read(j, "eigenvalues", "output", c.output.eigenvalues);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json_text(const RunConfig& c) {
  json root;
  const auto& d = c.grid.domain;
  root["grid"] = {{"domain", {d.x0, d.x1, d.y0, d.y1}},
                  {"coarse", {c.grid.coarse_nx, c.grid.coarse_ny}},
                  {"refine", c.grid.refine},
                  {"oversampling", c.grid.oversampling}};
  json m = {{"kappa", c.matrix.kappa}, {"mask_kappa", c.matrix.mask_kappa}};
  if (!c.matrix.kappa_file.empty()) m["kappa_file"] = c.matrix.kappa_file;
  if (!c.matrix.mask_file.empty()) m["mask_file"] = c.matrix.mask_file;
  root["matrix"] = m;
  json fr = json::array();
  for (const auto& f : c.fractures) {
    json pts = json::array();
    for (const auto& p : f.polyline) pts.push_back({p.x(), p.y()});
    fr.push_back({{"id", f.id},
                  {"points", pts},
                  {"aperture", f.aperture},
                  {"kappa_f", f.kappa_f},
                  {"model", to_string(f.model)}});
  }
  root["fractures"] = fr;
  if (c.generator) root["generator"] = {{"name", c.generator->name}, {"seed", c.generator->seed}};
  root["strict_dfm"] = c.strict_dfm;
  root["efm"] = {{"coupling_scale", c.coupling_scale}, {"segment_length", c.efm_segment}};
  root["boundary"] = {{"polynomial", c.boundary}};
  root["source"] = c.source;
  json off = {{"snapshots", c.offline.snapshots == SnapshotKind::Full ? "full" : "randomized"},
              {"oversampled", c.offline.oversampled},
              {"m_off", c.offline.m_off},
              {"p_bf", c.offline.p_bf},
              {"seed", c.offline.seed}};
  if (c.offline.boundary_m_off) off["boundary_m_off"] = *c.offline.boundary_m_off;
  root["offline"] = off;
  const auto& a = c.adapt;
  json ad = {{"theta", a.theta},
             {"max_iters", a.max_iters},
             {"increment", a.basis_increment},
             {"indicator", a.indicator == IndicatorKind::Residual ? "residual" : "manual"},
             {"region", {a.region.i0, a.region.i1, a.region.j0, a.region.j1}},
             {"tolerance", a.tolerance},
             {"initial_m_off", c.adapt_initial_m_off}};
  if (a.target_energy_error) ad["target_energy_error"] = *a.target_energy_error;
  root["adapt"] = ad;
  root["output"] = {{"dir", c.output.dir},
                    {"fields", c.output.fields},
                    {"vtk", c.output.vtk},
                    {"eigenvalues", c.output.eigenvalues}};
  return root.dump(2);
}

}  // namespace fracms

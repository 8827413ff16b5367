#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "distlab/cone.hpp"
#include "distlab/critical.hpp"
#include "distlab/dc.hpp"
#include "distlab/errors.hpp"
#include "distlab/field.hpp"
#include "distlab/json_out.hpp"
#include "distlab/levelset.hpp"
#include "distlab/reach.hpp"
#include "distlab/scene.hpp"

namespace {

using namespace distlab;

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t pos = 0;
      double v = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InputError("cannot parse number '" + tok + "' in '" + s + "'");
    }
  }
  return out;
}

Box parse_bbox(const std::string& s) {
  std::vector<double> v = parse_csv_doubles(s);
  Box b;
  if (v.size() == 4) {
    b.lo = Vec(v[0], v[1]);
    b.hi = Vec(v[2], v[3]);
  } else if (v.size() == 6) {
    b.lo = Vec(v[0], v[1], v[2]);
    b.hi = Vec(v[3], v[4], v[5]);
  } else {
    throw InputError("--bbox needs x0,y0,x1,y1 (2D) or x0,y0,z0,x1,y1,z1 (3D)");
  }
  for (int a = 0; a < b.dim(); ++a)
    if (!(b.lo[a] < b.hi[a])) throw InputError("--bbox is empty on some axis");
  return b;
}

// Shared inputs: either --field (a sampled dump) or scene/bbox/res to sample.
struct FieldOpts {
  std::string field_path;
  std::string scene_path;
  std::string norm = "euclid";
  std::string bbox;
  int res = 0;
  int threads = 1;
};

void add_field_opts(CLI::App* cmd, FieldOpts& o, bool allow_load = true) {
  if (allow_load)
    cmd->add_option("--field", o.field_path, "sampled field sidecar (.json)");
  cmd->add_option("--scene", o.scene_path, "scene file (JSON)");
  cmd->add_option("--norm", o.norm, "euclid | lp:<p> | table:<path>");
  cmd->add_option("--bbox", o.bbox, "x0,y0,x1,y1 or x0,y0,z0,x1,y1,z1");
  cmd->add_option("--res", o.res, "vertices along the x axis");
  cmd->add_option("--threads", o.threads, "worker threads");
}

DistanceField make_field(const FieldOpts& o) {
  if (!o.field_path.empty()) return load_field(o.field_path);
  if (o.scene_path.empty() || o.bbox.empty() || o.res < 2)
    throw InputError("need --field, or --scene with --bbox and --res >= 2");
  ClosedSet scene = ClosedSet::load(o.scene_path);
  Box box = parse_bbox(o.bbox);
  if (box.dim() != scene.dim())
    throw InputError("--bbox dimension does not match the scene");
  double h = (box.hi[0] - box.lo[0]) / (o.res - 1);
  GridSpec grid = GridSpec::from_box(box, h);
  Norm norm = Norm::parse(o.norm, scene.dim());
  return sample_field(scene, norm, grid, o.threads);
}

void emit(const std::string& json, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << json << "\n";
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw InputError("cannot write " + out_path);
  f << json << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"distance-function lab"};
  app.require_subcommand(1);

  // ---- field ----
  FieldOpts field_opts;
  std::string field_out, field_csv;
  auto* cmd_field = app.add_subcommand("field", "sample d_F on a grid");
  add_field_opts(cmd_field, field_opts, false);
  cmd_field->add_option("--out", field_out, "sidecar path (.json; values go to .bin)");
  cmd_field->add_option("--csv", field_csv, "also export vertices as CSV");
  cmd_field->callback([&] {
    DistanceField f = make_field(field_opts);
    const GridSpec& g = f.grid();
    std::printf("grid %dx%d%s h=%.6g\n", g.dims[0], g.dims[1],
                g.dim == 3 ? ("x" + std::to_string(g.dims[2])).c_str() : "",
                g.h);
    std::printf("values [%.17g, %.17g]\n", f.min_value(), f.max_value());
    double ex = f.lipschitz_excess();
    std::printf("lipschitz excess %.3g (%s)\n", ex,
                ex <= 1e-9 ? "pass" : "FAIL");
    if (ex > 1e-9)
      throw FalsificationError("sampled field violates the 1-Lipschitz bound");
    if (!field_out.empty()) {
      std::string bin = field_out;
      if (bin.size() > 5 && bin.substr(bin.size() - 5) == ".json")
        bin = bin.substr(0, bin.size() - 5) + ".bin";
      else
        bin += ".bin";
      dump_field(f, bin, field_out);
    }
    if (!field_csv.empty()) export_csv(f, field_csv);
  });

  // ---- crit ----
  FieldOpts crit_field;
  CriticalScanParams crit_params;
  std::string crit_out, crit_kind = "auto";
  auto* cmd_crit = app.add_subcommand("crit", "scan for Clarke-critical vertices");
  add_field_opts(cmd_crit, crit_field);
  cmd_crit->add_option("--eta", crit_params.eta, "hull margin threshold");
  cmd_crit->add_option("--delta", crit_params.delta, "directional ball radius");
  cmd_crit->add_option("--directions", crit_params.directions, "sampled directions");
  cmd_crit->add_option("--probes", crit_params.probes, "ball probes per vertex");
  cmd_crit->add_option("--seed", crit_params.seed, "rng seed");
  cmd_crit->add_option("--criterion", crit_kind, "auto | directional");
  cmd_crit->add_option("--out", crit_out, "report path (stdout otherwise)");
  cmd_crit->callback([&] {
    if (crit_kind != "auto" && crit_kind != "directional")
      throw InputError("--criterion must be auto or directional");
    crit_params.use_directional = crit_kind == "directional";
    crit_params.threads = crit_field.threads;
    DistanceField f = make_field(crit_field);
    ClosedSet scene = ClosedSet::from_json(f.scene_json());
    CriticalReport rep = critical_scan(f, scene, f.norm(), crit_params);
    emit(rep.to_json(), crit_out);
    std::fprintf(stderr, "scanned %d vertices, %zu critical\n", rep.scanned,
                 rep.critical_points.size());
  });

  // ---- levelset ----
  FieldOpts ls_field;
  double ls_r = 0;
  std::string ls_out;
  auto* cmd_ls = app.add_subcommand("levelset", "extract the distance sphere S_r");
  add_field_opts(cmd_ls, ls_field);
  cmd_ls->add_option("--r", ls_r, "level value")->required();
  cmd_ls->add_option("--out", ls_out, "mesh + manifold report path");
  cmd_ls->callback([&] {
    DistanceField f = make_field(ls_field);
    LevelSetMesh mesh = extract_level_set(f, ls_r);
    ManifoldReport mc = manifold_check(mesh);
    JsonWriter w;
    w.begin_object();
    w.key("r");
    w.value_double(mesh.r);
    w.key("r_snapped");
    w.value_double(mesh.r_snapped);
    w.key("dim");
    w.value_int(mesh.dim);
    w.key("vertices");
    w.begin_array();
    for (const auto& v : mesh.vertices) {
      w.begin_array();
      for (int a = 0; a < mesh.dim; ++a) w.value_double(v[a]);
      w.end_array();
    }
    w.end_array();
    w.key("cells");
    w.begin_array();
    if (mesh.dim == 2) {
      for (const auto& e : mesh.edges) {
        w.begin_array();
        w.value_int(e[0]);
        w.value_int(e[1]);
        w.end_array();
      }
    } else {
      for (const auto& t : mesh.triangles) {
        w.begin_array();
        w.value_int(t[0]);
        w.value_int(t[1]);
        w.value_int(t[2]);
        w.end_array();
      }
    }
    w.end_array();
    w.key("components");
    w.value_int(mc.components);
    w.key("manifold");
    w.value_bool(mc.manifold);
    w.key("defects");
    w.begin_array();
    for (const auto& d : mc.defects) {
      w.begin_object();
      w.key("location");
      w.begin_array();
      for (int a = 0; a < mesh.dim; ++a) w.value_double(d.location[a]);
      w.end_array();
      w.key("kind");
      w.value_string(d.kind);
      w.end_object();
    }
    w.end_array();
    w.end_object();
    emit(w.str(), ls_out);
    std::fprintf(stderr, "%zu vertices, %zu cells, %d components, %s\n",
                 mesh.vertices.size(), mesh.cell_count(), mc.components,
                 mc.manifold ? "manifold" : "NOT manifold");
  });

  // ---- sweep ----
  FieldOpts sw_field;
  double sw_rmin = 0, sw_rmax = 0;
  int sw_count = 0;
  std::string sw_out, sw_crit_report;
  auto* cmd_sweep = app.add_subcommand("sweep", "manifold verdicts across radii");
  add_field_opts(cmd_sweep, sw_field);
  cmd_sweep->add_option("--rmin", sw_rmin, "first radius")->required();
  cmd_sweep->add_option("--rmax", sw_rmax, "last radius")->required();
  cmd_sweep->add_option("--count", sw_count, "number of radii")->required();
  cmd_sweep->add_option("--crit-report", sw_crit_report,
                        "crit output to cross-link critical values");
  cmd_sweep->add_option("--out", sw_out, "report path");
  cmd_sweep->callback([&] {
    DistanceField f = make_field(sw_field);
    SweepParams params;
    params.threads = sw_field.threads;
    if (!sw_crit_report.empty()) {
      std::ifstream in(sw_crit_report);
      if (!in) throw InputError("cannot open " + sw_crit_report);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw InputError(sw_crit_report + ": " + e.what());
      }
      if (!j.contains("critical_values") || !j["critical_values"].is_array())
        throw InputError(sw_crit_report + ": missing critical_values");
      for (const auto& v : j["critical_values"])
        params.critical_values.push_back(v.get<double>());
    }
    SweepReport rep = radius_sweep(f, sw_rmin, sw_rmax, sw_count, params);
    emit(rep.to_json(), sw_out);
    int bad = 0;
    for (const auto& e : rep.entries)
      if (!e.manifold) bad++;
    std::fprintf(stderr, "%d radii, %d non-manifold\n", sw_count, bad);
  });

  // ---- reach ----
  FieldOpts rc_field;
  double rc_r = 0;
  ReachParams rc_params;
  std::string rc_out;
  auto* cmd_reach = app.add_subcommand("reach", "estimate reach of {d_F >= r}");
  add_field_opts(cmd_reach, rc_field);
  cmd_reach->add_option("--r", rc_r, "superlevel threshold")->required();
  cmd_reach->add_option("--samples", rc_params.at.samples, "ball probes per radius test");
  cmd_reach->add_option("--boundary-samples", rc_params.boundary_samples,
                        "boundary points tested");
  cmd_reach->add_option("--cap", rc_params.at.cap, "largest radius tried");
  cmd_reach->add_option("--seed", rc_params.at.seed, "rng seed");
  cmd_reach->add_option("--out", rc_out, "report path");
  cmd_reach->callback([&] {
    DistanceField f = make_field(rc_field);
    rc_params.threads = rc_field.threads;
    ReachReport rep = estimate_reach(f, rc_r, rc_params);
    emit(rep.to_json(), rc_out);
    std::fprintf(stderr, "global reach estimate %.6g over %zu points\n",
                 rep.global_reach, rep.per_point.size());
  });

  // ---- dc-sard ----
  std::string dc_path, dc_out, dc_bbox;
  double dc_s = 0.5, dc_delta = 1e-3;
  auto* cmd_dc = app.add_subcommand("dc-sard", "stationary values of a DC function");
  cmd_dc->add_option("--dc", dc_path, "DC function file (JSON)")->required();
  cmd_dc->add_option("--bbox", dc_bbox, "x0,x1 | x0,y0,x1,y1")->required();
  cmd_dc->add_option("--s", dc_s, "premeasure exponent");
  cmd_dc->add_option("--delta", dc_delta, "cover scale");
  cmd_dc->add_option("--out", dc_out, "report path");
  cmd_dc->callback([&] {
    DCFunction f = DCFunction::load(dc_path);
    std::vector<double> v = parse_csv_doubles(dc_bbox);
    Box box;
    if (f.dim == 1 && v.size() == 2) {
      box.lo = Vec(v[0], 0);
      box.hi = Vec(v[1], 0);
    } else if (f.dim == 2 && v.size() == 4) {
      box = parse_bbox(dc_bbox);
    } else {
      throw InputError("--bbox token count does not match the DC dimension");
    }
    StationarySet st = stationary_set(f, box);
    HausdorffEstimate est = hausdorff_box_estimate(st.values, dc_s, dc_delta);
    JsonWriter w;
    w.begin_object();
    w.key("dim");
    w.value_int(f.dim);
    w.key("values");
    w.begin_array();
    for (double x : st.values) w.value_double(x);
    w.end_array();
    if (f.dim == 1) {
      w.key("intervals");
      w.begin_array();
      for (const auto& iv : st.intervals) {
        w.begin_object();
        w.key("lo");
        w.value_double(iv.lo);
        w.key("hi");
        w.value_double(iv.hi);
        w.key("value");
        w.value_double(iv.value);
        w.end_object();
      }
      w.end_array();
    } else {
      w.key("regions");
      w.begin_array();
      for (const auto& rg : st.regions) {
        w.begin_object();
        w.key("polygon");
        w.begin_array();
        for (const auto& p : rg.polygon) {
          w.begin_array();
          w.value_double(p[0]);
          w.value_double(p[1]);
          w.end_array();
        }
        w.end_array();
        w.key("value");
        w.value_double(rg.value);
        w.end_object();
      }
      w.end_array();
    }
    w.key("hausdorff");
    w.value_raw(hausdorff_to_json(est));
    w.end_object();
    emit(w.str(), dc_out);
  });

  // ---- cone ----
  std::string cone_alpha = "auto", cone_out;
  int cone_samples = 10000, cone_threads = 1;
  uint64_t cone_seed = 1;
  auto* cmd_cone = app.add_subcommand("cone", "search for an obtuse direction triple");
  cmd_cone->add_option("--alpha", cone_alpha, "steepness, or 'auto'");
  cmd_cone->add_option("--samples", cone_samples, "random triples");
  cmd_cone->add_option("--seed", cone_seed, "rng seed");
  cmd_cone->add_option("--threads", cone_threads, "worker threads");
  cmd_cone->add_option("--out", cone_out, "report path");
  cmd_cone->callback([&] {
    double alpha;
    if (cone_alpha == "auto") {
      alpha = cone_auto_alpha();
    } else {
      try {
        size_t pos = 0;
        alpha = std::stod(cone_alpha, &pos);
        if (pos != cone_alpha.size()) throw std::invalid_argument(cone_alpha);
      } catch (const std::exception&) {
        throw InputError("--alpha must be a number or 'auto'");
      }
    }
    ObtuseTriple res = obtuse_triple_search(alpha, cone_samples, cone_seed,
                                            cone_threads);
    JsonWriter w;
    w.begin_object();
    w.key("alpha");
    w.value_double(alpha);
    w.key("samples");
    w.value_int(cone_samples);
    w.key("witness");
    if (res.found) {
      w.begin_array();
      for (const auto& p : res.points) {
        w.begin_object();
        w.key("r");
        w.value_double(p.r);
        w.key("theta");
        w.value_double(p.theta);
        w.key("s");
        w.value_double(p.s);
        w.end_object();
      }
      w.end_array();
    } else {
      w.value_null();
    }
    w.key("max_min_pairwise_angle");
    w.value_double(res.max_min_angle);
    w.end_object();
    emit(w.str(), cone_out);
    if (res.found && alpha >= cone_auto_alpha() - 1e-12)
      throw FalsificationError(
          "obtuse triple found at or above the threshold steepness");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const distlab::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const distlab::ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const distlab::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const distlab::FalsificationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

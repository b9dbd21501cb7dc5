#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctri/analysis.hpp"
#include "ctri/consistency.hpp"
#include "ctri/errors.hpp"
#include "ctri/simulate.hpp"
#include "ctri/toy2d.hpp"
#include "ctri/triangulators.hpp"
#include "ctri/version.hpp"

namespace {

using namespace ctri;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
  if (!out) throw ConfigError("short write to " + path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string stamp(std::uint64_t seed, std::uint64_t config_hash) {
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "# seed=%llu config_hash=%016llx version=%s\n",
                static_cast<unsigned long long>(seed),
                static_cast<unsigned long long>(config_hash), kVersion);
  return buf;
}

std::uint64_t parse_seed_text(const std::string& text,
                              const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (errno != 0 || end == text.c_str() || *end != '\0')
    throw ConfigError(what + " must be an unsigned integer, got: " + text);
  return v;
}

std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value,
                           std::uint64_t fallback) {
  if (flag_given) return flag_value;
  if (const char* env = std::getenv("CTRI_SEED"))
    return parse_seed_text(env, "CTRI_SEED");
  return fallback;
}

std::vector<std::string> expand_algorithms(const std::string& selector) {
  std::vector<std::string> algos;
  if (selector == "all") {
    for (const char* tag : kAlgorithmTags) algos.push_back(tag);
    return algos;
  }
  std::istringstream in(selector);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto b = item.find_last_not_of(" \t");
    item = item.substr(a, b - a + 1);
    bool known = false;
    for (const char* tag : kAlgorithmTags) known = known || item == tag;
    if (!known) throw ConfigError("unknown algorithm: " + item);
    algos.push_back(item);
  }
  if (algos.empty()) throw ConfigError("no algorithm selected");
  return algos;
}

// Instance files are flat text: '# comment' lines, 'q inf|1|2',
// 'delta <d>', and one 'camera' line per view carrying
// f cx cy R(9, row-major) C(3) x y.
Instance parse_instance(const std::string& text) {
  Instance inst;
  bool have_q = false, have_delta = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    const std::string where = " (line " + std::to_string(lineno) + ")";
    if (key == "q") {
      std::string v;
      if (!(ls >> v)) throw ConfigError("instance: missing q value" + where);
      if (v == "inf")
        inst.noise.q = kInfNorm;
      else if (v == "1")
        inst.noise.q = 1;
      else if (v == "2")
        inst.noise.q = 2;
      else
        throw ConfigError("instance: q must be 1, 2 or inf" + where);
      have_q = true;
    } else if (key == "delta") {
      if (!(ls >> inst.noise.delta))
        throw ConfigError("instance: bad delta" + where);
      have_delta = true;
    } else if (key == "camera") {
      double v[17];
      for (double& x : v)
        if (!(ls >> x))
          throw ConfigError("instance: camera line needs 17 numbers" + where);
      double tail;
      if (ls >> tail)
        throw ConfigError("instance: camera line has extra fields" + where);
      Mat3 R;
      for (int i = 0; i < 9; ++i) R.m[i] = v[3 + i];
      const Vec3 C{v[12], v[13], v[14]};
      Observation obs;
      obs.cam = make_camera(v[0], Vec2{v[1], v[2]}, R, C);
      obs.x = Vec2{v[15], v[16]};
      inst.observations.push_back(obs);
    } else {
      throw ConfigError("instance: unknown key " + key + where);
    }
  }
  if (!have_q || !have_delta)
    throw ConfigError("instance: q and delta are required");
  validate(inst);
  return inst;
}

std::string curve_csv(const DecayCurve& curve, std::uint64_t seed,
                      std::uint64_t config_hash) {
  std::string out = stamp(seed, config_hash);
  out += "M,mean_sq_err,stderr,trials,excluded\n";
  for (const DecayPoint& pt : curve.points) {
    out += std::to_string(pt.m) + ',' + fmt(pt.mean_sq_err) + ',' +
           fmt(pt.std_error) + ',' + std::to_string(pt.trials) + ',' +
           std::to_string(pt.excluded) + '\n';
  }
  return out;
}

std::string algo_out_path(const std::string& base, const std::string& algo,
                          bool single) {
  if (single) return base;
  const std::size_t dot = base.find_last_of('.');
  const std::size_t slash = base.find_last_of('/');
  const bool has_ext =
      dot != std::string::npos && (slash == std::string::npos || dot > slash);
  if (!has_ext) return base + "_" + algo;
  return base.substr(0, dot) + "_" + algo + base.substr(dot);
}

Toy2dConfig parse_toy2d_config(const std::string& text) {
  Toy2dConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto a = line.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) continue;
    const auto b = line.find_last_not_of(" \t\r\n");
    line = line.substr(a, b - a + 1);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("toy2d config: expected key = value, got: " + line);
    auto trim = [](std::string s) {
      const auto x = s.find_first_not_of(" \t");
      if (x == std::string::npos) return std::string();
      const auto y = s.find_last_not_of(" \t");
      return s.substr(x, y - x + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError("toy2d config: empty value for " + key);
    try {
      if (key == "m_schedule") {
        cfg.m_schedule.clear();
        std::istringstream vs(val);
        std::string item;
        while (std::getline(vs, item, ',')) {
          item = trim(item);
          if (!item.empty()) cfg.m_schedule.push_back(std::stoi(item));
        }
      } else if (key == "pixel_count") {
        cfg.pixel_count = std::stoi(val);
      } else if (key == "pixel_pitch") {
        cfg.pixel_pitch = std::stod(val);
      } else if (key == "focal_length") {
        cfg.focal_length = std::stod(val);
      } else if (key == "camera_span") {
        cfg.camera_span = std::stod(val);
      } else if (key == "clip_halfwidth") {
        cfg.clip_halfwidth = std::stod(val);
      } else if (key == "clip_depth") {
        cfg.clip_depth = std::stod(val);
      } else if (key == "eval_halfwidth") {
        cfg.eval_halfwidth = std::stod(val);
      } else if (key == "eval_depth_min") {
        cfg.eval_depth_min = std::stod(val);
      } else if (key == "eval_depth_max") {
        cfg.eval_depth_max = std::stod(val);
      } else {
        throw ConfigError("toy2d config: unknown key: " + key);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("toy2d config: bad value for " + key + ": " + val);
    }
  }
  return cfg;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string item;
    while (std::getline(ls, item, ',')) fields.push_back(item);
    if (table.header.empty())
      table.header = fields;
    else
      table.rows.push_back(fields);
  }
  if (table.header.empty()) throw ConfigError("curve CSV has no header row");
  return table;
}

int run_triangulate(const std::string& instance_path,
                    const std::string& selector, std::uint64_t seed) {
  const std::string text = read_file(instance_path);
  const Instance inst = parse_instance(text);
  const std::vector<std::string> algos = expand_algorithms(selector);

  std::string out = stamp(seed, fnv1a64(text));
  out += "algorithm,x,y,z,objective,consistent,converged,iterations\n";
  for (const std::string& algo : algos) {
    const TriangulationResult res = run_algorithm(algo, inst);
    out += res.algorithm + ',' + fmt(res.X.x) + ',' + fmt(res.X.y) + ',' +
           fmt(res.X.z) + ',' +
           (res.has_objective ? fmt(res.objective) : std::string()) + ',' +
           (res.consistent ? "1" : "0") + ',' +
           (res.converged ? "1" : "0") + ',' + std::to_string(res.iterations) +
           '\n';
  }
  std::fputs(out.c_str(), stdout);
  return 0;
}

int run_decay(const std::string& config_path, const std::string& selector,
              const std::string& out_path, bool seed_given,
              std::uint64_t seed_flag) {
  const std::string text = read_file(config_path);
  ExperimentConfig cfg = parse_experiment_config(text);
  cfg.rng_seed = resolve_seed(seed_given, seed_flag, cfg.rng_seed);
  const std::vector<std::string> algos = expand_algorithms(selector);
  const std::uint64_t hash = fnv1a64(text);
  for (const std::string& algo : algos) {
    const DecayCurve curve = run_decay_experiment(cfg, algo);
    write_file(algo_out_path(out_path, algo, algos.size() == 1),
               curve_csv(curve, cfg.rng_seed, hash));
  }
  return 0;
}

int run_toy2d(const std::string& config_path, const std::string& out_path,
              const std::string& svg_path, std::uint64_t seed) {
  std::string text;
  Toy2dConfig cfg;
  if (!config_path.empty()) {
    text = read_file(config_path);
    cfg = parse_toy2d_config(text);
  }
  const std::vector<Toy2dRow> rows = toy2d_study(cfg);

  std::string out = stamp(seed, fnv1a64(text));
  out +=
      "M,cell_count,E_linear,E_linf_brute,E_l2_brute,E_consistent_min_l2,"
      "inconsistent_fraction_l2\n";
  for (const Toy2dRow& row : rows) {
    out += std::to_string(row.m) + ',' + std::to_string(row.cell_count) +
           ',' + fmt(row.e_linear) + ',' + fmt(row.e_linf_brute) + ',' +
           fmt(row.e_l2_brute) + ',' + fmt(row.e_consistent_min_l2) + ',' +
           fmt(row.inconsistent_fraction_l2) + '\n';
  }
  write_file(out_path, out);

  if (!svg_path.empty()) {
    const int last_m = cfg.m_schedule.back();
    const std::vector<Camera2D> cams = toy2d_study_cameras(cfg, last_m);
    const double W = cfg.clip_halfwidth;
    const Polygon2D clip{{-W, 0.01},
                         {W, 0.01},
                         {W, 0.01 + cfg.clip_depth},
                         {-W, 0.01 + cfg.clip_depth}};
    write_file(svg_path, toy2d_svg(toy2d_partition(cams, clip), clip));
  }
  return 0;
}

int run_slope(const std::string& in_path, int mmin, int mmax) {
  const CsvTable table = parse_csv(read_file(in_path));
  int col_m = -1, col_e = -1;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == "M") col_m = static_cast<int>(i);
    if (table.header[i] == "mean_sq_err") col_e = static_cast<int>(i);
  }
  if (col_m < 0 || col_e < 0)
    throw ConfigError("curve CSV needs M and mean_sq_err columns");
  DecayCurve curve;
  for (const auto& row : table.rows) {
    if (static_cast<int>(row.size()) <= std::max(col_m, col_e))
      throw ConfigError("curve CSV row is too short");
    DecayPoint pt;
    try {
      pt.m = std::stoi(row[col_m]);
      pt.mean_sq_err = std::stod(row[col_e]);
    } catch (const std::exception&) {
      throw ConfigError("curve CSV has a malformed row");
    }
    curve.points.push_back(pt);
  }
  const SlopeFit fit = fit_loglog_slope(curve, mmin, mmax);
  std::printf(
      "slope=%.6f intercept=%.6f residual_rms=%.6f points=%d m_range=[%d,%d]\n",
      fit.slope, fit.intercept, fit.residual_rms, fit.points_used, fit.m_min,
      fit.m_max);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bounded-noise multi-view triangulation experiments"};
  app.require_subcommand(1);

  std::string instance_path, tri_algos = "all";
  auto* tri = app.add_subcommand(
      "triangulate", "triangulate one instance file, one CSV row per "
                     "algorithm on stdout");
  tri->add_option("--instance", instance_path, "instance file (flat text)")
      ->required();
  tri->add_option("--algo", tri_algos,
                  "comma-separated algorithm tags, or 'all'");

  std::string decay_config, decay_algos = "all", decay_out;
  std::uint64_t seed_flag = 0;
  auto* dec = app.add_subcommand(
      "decay", "run the Monte-Carlo decay experiment and write curve CSVs");
  dec->add_option("--config", decay_config, "experiment config file")
      ->required();
  dec->add_option("--algo", decay_algos,
                  "comma-separated algorithm tags, or 'all'");
  dec->add_option("--out", decay_out,
                  "output CSV path (suffixed per algorithm when several "
                  "are selected)")
      ->required();
  auto* seed_opt = dec->add_option(
      "--seed", seed_flag,
      "RNG seed; overrides the config file and the CTRI_SEED variable");

  std::string toy_config, toy_out, toy_svg;
  auto* toy = app.add_subcommand(
      "toy2d", "run the planar pixel-array study and write its CSV");
  toy->add_option("--config", toy_config, "study config file (optional)");
  toy->add_option("--out", toy_out, "output CSV path")->required();
  toy->add_option("--svg", toy_svg,
                  "also write the largest-M cell arrangement as SVG");

  std::string slope_in;
  int mmin = 8, mmax = std::numeric_limits<int>::max();
  auto* slp = app.add_subcommand(
      "slope", "fit a log-log decay slope to a curve CSV");
  slp->add_option("--in", slope_in, "curve CSV path")->required();
  slp->add_option("--mmin", mmin, "smallest camera count to fit");
  slp->add_option("--mmax", mmax, "largest camera count to fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (tri->parsed())
      return run_triangulate(instance_path, tri_algos,
                             resolve_seed(false, 0, 0));
    if (dec->parsed())
      return run_decay(decay_config, decay_algos, decay_out,
                       seed_opt->count() > 0, seed_flag);
    if (toy->parsed())
      return run_toy2d(toy_config, toy_out, toy_svg,
                       resolve_seed(false, 0, 0));
    if (slp->parsed()) return run_slope(slope_in, mmin, mmax);
    std::fputs("error: no subcommand\n", stderr);
    return 1;
  } catch (const ctri::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ctri::InfeasibleError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ctri::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

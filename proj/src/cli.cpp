#include "syzkit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "syzkit/bside.hpp"
#include "syzkit/skeleton.hpp"
#include "syzkit/syz.hpp"
#include "syzkit/tropical.hpp"

namespace syzkit::cli {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigError(key + ": cannot parse '" + text + "'");
  return v;
}

struct Field {
  std::function<std::string(const RunConfig&)> get;  // empty string: unset
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<json(const RunConfig&)> as_json;
};

template <typename T>
Field field(T RunConfig::*member, const std::string& key) {
  Field f;
  f.get = [member](const RunConfig& c) {
    if constexpr (std::is_floating_point_v<T>) {
      return format_double(c.*member);
    } else {
      return std::to_string(c.*member);
    }
  };
  f.set = [member, key](RunConfig& c, const std::string& v) { c.*member = parse_number<T>(key, v); };
  f.as_json = [member](const RunConfig& c) -> json {
    if constexpr (std::is_floating_point_v<T>) {
      return number(c.*member);
    } else {
      return c.*member;
    }
  };
  return f;
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["shape.p"] = field(&RunConfig::p, "shape.p");
    t["shape.q"] = field(&RunConfig::q, "shape.q");
    t["shape.L"] = field(&RunConfig::L, "shape.L");
    t["shape.eps"] = field(&RunConfig::eps, "shape.eps");
    t["shape.eps_pert"] = field(&RunConfig::eps_pert, "shape.eps_pert");
    t["shape.chi_radius"] = field(&RunConfig::chi_radius, "shape.chi_radius");
    t["solver.n_starts"] = field(&RunConfig::n_starts, "solver.n_starts");
    t["solver.grad_tol"] = field(&RunConfig::grad_tol, "solver.grad_tol");
    t["solver.accept_tol"] = field(&RunConfig::accept_tol, "solver.accept_tol");
    t["solver.cluster_radius"] = field(&RunConfig::cluster_radius, "solver.cluster_radius");
    t["solver.zero_rel_threshold"] = field(&RunConfig::zero_rel_threshold, "solver.zero_rel_threshold");
    t["raster.xi_min"] = field(&RunConfig::xi_min, "raster.xi_min");
    t["raster.xi_max"] = field(&RunConfig::xi_max, "raster.xi_max");
    t["raster.resolution"] = field(&RunConfig::resolution, "raster.resolution");
    t["raster.search_grid"] = field(&RunConfig::search_grid, "raster.search_grid");
    t["bside.n"] = field(&RunConfig::bside_n, "bside.n");
    t["bside.m"] = field(&RunConfig::bside_m, "bside.m");
    t["bside.samples"] = field(&RunConfig::bside_samples, "bside.samples");
    t["output.figure_size"] = field(&RunConfig::figure_size, "output.figure_size");
    Field seed;
    seed.get = [](const RunConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); };
    seed.set = [](RunConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("solver.seed", v); };
    seed.as_json = [](const RunConfig& c) -> json { return c.seed ? json(*c.seed) : json(nullptr); };
    t["solver.seed"] = seed;
    return t;
  }();
  return table;
}

void require(bool cond, const std::string& message) {
  if (!cond) throw ConfigError(message);
}

syz::ModelShape model_shape(const RunConfig& cfg) {
  syz::ModelShape s;
  s.p = cfg.p;
  s.q = cfg.q;
  s.params.L = cfg.L;
  s.params.eps = cfg.eps;
  s.eps_pert = cfg.eps_pert;
  s.chi_radius = cfg.chi_radius;
  return s;
}

int raster_resolution(const RunConfig& cfg) {
  if (cfg.resolution > 0) return cfg.resolution;
  return cfg.q == 1 ? 200 : cfg.q == 2 ? 64 : 16;
}

// Cell centres of a resolution^q grid over [xi_min, xi_max]^q, first
// coordinate fastest.
struct Grid {
  int q;
  int res;
  double lo;
  double step;

  std::size_t size() const {
    std::size_t n = 1;
    for (int k = 0; k < q; ++k) n *= static_cast<std::size_t>(res);
    return n;
  }
  tropical::BasePoint at(std::size_t idx) const {
    tropical::BasePoint xi{std::vector<double>(q)};
    for (int k = 0; k < q; ++k) {
      xi.xi[k] = lo + (static_cast<double>(idx % res) + 0.5) * step;
      idx /= res;
    }
    return xi;
  }
};

Grid make_grid(const RunConfig& cfg) {
  const int res = raster_resolution(cfg);
  return Grid{cfg.q, res, cfg.xi_min, (cfg.xi_max - cfg.xi_min) / res};
}

// Rows of a q <= 2 raster; row j holds xi_2 = centre j (a single row for q = 1).
json raster_rows(const Grid& g, const std::vector<char>& cells) {
  json rows = json::array();
  if (g.q > 2) return rows;
  const std::size_t width = static_cast<std::size_t>(g.res);
  for (std::size_t start = 0; start < cells.size(); start += width) {
    rows.push_back(std::string(cells.begin() + start, cells.begin() + start + width));
  }
  return rows;
}

json xi_json(const std::vector<double>& xi) {
  json a = json::array();
  for (double v : xi) a.push_back(number(v));
  return a;
}

bool tailored_member(const tropical::BasePoint& xi, const tropical::TailoringParams& params) {
  return tropical::polygon_condition(tropical::tailored_moduli(xi, 1.0, params), 0.0);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Pt {
  double x, y;
};

double cross(const Pt& o, const Pt& a, const Pt& b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

std::vector<Pt> convex_hull(std::vector<Pt> pts) {
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.size() < 3) return pts;
  std::vector<Pt> h(2 * pts.size());
  std::size_t k = 0;
  for (const Pt& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

bool inside_hull(const std::vector<Pt>& hull, const Pt& p) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross(hull[i], hull[(i + 1) % hull.size()], p) < 0) return false;
  }
  return true;
}

}  // namespace

void RunConfig::validate() const {
  require(p >= 0 && p <= 6, "shape.p must lie in [0, 6]");
  require(q >= 1 && q <= 4, "shape.q must lie in [1, 4]");
  require(eps > 0.0, "shape.eps must be positive");
  require(L >= 10.0 * eps, "shape.L must be at least 10 * shape.eps");
  require(eps_pert >= 0.0, "shape.eps_pert must be >= 0");
  require(chi_radius > 0.0, "shape.chi_radius must be positive");
  require(grad_tol > 0.0, "solver.grad_tol must be positive");
  require(accept_tol > 0.0, "solver.accept_tol must be positive");
  require(cluster_radius > 0.0, "solver.cluster_radius must be positive");
  require(zero_rel_threshold > 0.0, "solver.zero_rel_threshold must be positive");
  require(std::isfinite(xi_min) && std::isfinite(xi_max) && xi_min < xi_max,
          "raster.xi_min must be below raster.xi_max");
  require(resolution >= 0 && resolution <= 2048, "raster.resolution must lie in [0, 2048]");
  require(search_grid >= 4 && search_grid <= 256, "raster.search_grid must lie in [4, 256]");
  require(bside_n >= 1 && bside_n <= 4, "bside.n must lie in [1, 4]");
  require(bside_m >= 0 && bside_m <= 4, "bside.m must lie in [0, 4]");
  require(bside_samples >= 1, "bside.samples must be positive");
  require(figure_size >= 64 && figure_size <= 4096, "output.figure_size must lie in [64, 4096]");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown key " + key);
    it->second.set(cfg, trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, f] : fields()) {
    const std::string v = f.get(cfg);
    if (!v.empty()) out += key + " = " + v + "\n";
  }
  return out;
}

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [key, f] : fields()) j[key] = f.as_json(cfg);
  return j;
}

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string timestamp() {
  std::time_t t = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    t = static_cast<std::time_t>(parse_number<long long>("SOURCE_DATE_EPOCH", env));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CommandResult cmd_spine(const RunConfig& cfg) {
  cfg.validate();
  require(cfg.q <= 3, "shape.q must be <= 3 for spine");
  const Grid g = make_grid(cfg);
  const double tol = 0.5 * g.step;
  std::vector<char> cells(g.size());
  std::vector<std::size_t> counts(cfg.q + 1, 0);
  std::size_t spine_hits = 0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto c = tropical::classify_chamber(g.at(idx), tol);
    if (const auto* ch = std::get_if<tropical::ChamberId>(&c)) {
      ++counts[ch->index];
      cells[idx] = static_cast<char>('0' + ch->index);
    } else {
      ++spine_hits;
      cells[idx] = '+';
    }
  }
  json spine = json::array();
  const auto spine_cells = tropical::enumerate_spine_cells(cfg.q);
  for (const auto& c : spine_cells) spine.push_back({{"dim", c.dim}, {"tie_set", c.tie_set}});
  const std::size_t expected_cells = (std::size_t{1} << (cfg.q + 1)) - cfg.q - 2;
  const bool all_chambers = std::all_of(counts.begin(), counts.end(), [](std::size_t n) { return n > 0; });

  CommandResult r;
  r.ok = spine_cells.size() == expected_cells && all_chambers;
  r.payload = {{"q", cfg.q},
               {"cells", spine},
               {"chamber_counts", counts},
               {"spine_hits", spine_hits},
               {"raster", {{"resolution", g.res}, {"xi_min", number(cfg.xi_min)}, {"xi_max", number(cfg.xi_max)},
                           {"rows", raster_rows(g, cells)}}},
               {"checks", {{"cell_count", spine_cells.size() == expected_cells}, {"all_chambers_sampled", all_chambers}}}};
  r.summary = "spine q=" + std::to_string(cfg.q) + ": " + std::to_string(spine_cells.size()) + " cells";
  return r;
}

CommandResult cmd_amoeba(const RunConfig& cfg) {
  cfg.validate();
  require(cfg.q <= 3, "shape.q must be <= 3 for amoeba");
  const Grid g = make_grid(cfg);
  const tropical::TailoringParams params{cfg.eps, cfg.L};
  const double gap_bound = std::max(2.0 * cfg.eps, std::log(static_cast<double>(cfg.q)));
  std::vector<char> plain(g.size()), tailored(g.size());
  std::size_t differences = 0, collar_violations = 0, compared = 0, disagreements = 0;
  double max_gap = 0.0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto xi = g.at(idx);
    const bool a = tropical::amoeba_contains(xi, 0.0);
    const bool b = tailored_member(xi, params);
    plain[idx] = a ? '#' : '.';
    tailored[idx] = b ? '#' : '.';
    if (a != b) {
      ++differences;
      const double gap = tropical::dominance_gap(xi);
      max_gap = std::max(max_gap, gap);
      if (gap > gap_bound + 1e-12) ++collar_violations;
    }
    if (std::abs(tropical::polygon_margin(tropical::untailored_moduli(xi))) > 1e-3) {
      ++compared;
      if (a != tropical::amoeba_contains_oracle(xi, cfg.search_grid, 1e-6)) ++disagreements;
    }
  }
  CommandResult r;
  r.ok = collar_violations == 0 && disagreements == 0;
  r.payload = {{"q", cfg.q},
               {"raster", {{"resolution", g.res}, {"xi_min", number(cfg.xi_min)}, {"xi_max", number(cfg.xi_max)},
                           {"untailored", raster_rows(g, plain)}, {"tailored", raster_rows(g, tailored)}}},
               {"untailored_cells", std::count(plain.begin(), plain.end(), '#')},
               {"tailored_cells", std::count(tailored.begin(), tailored.end(), '#')},
               {"differences", differences},
               {"max_gap_at_difference", number(max_gap)},
               {"gap_bound", number(gap_bound)},
               {"oracle", {{"compared", compared}, {"disagreements", disagreements}, {"grid", cfg.search_grid}}},
               {"checks", {{"differences_within_collar", collar_violations == 0}, {"oracle_agrees", disagreements == 0}}}};
  r.summary = "amoeba q=" + std::to_string(cfg.q) + ": " + std::to_string(differences) + " tailoring differences, " +
              std::to_string(disagreements) + " oracle disagreements";
  return r;
}

CommandResult cmd_critical(const RunConfig& cfg) {
  cfg.validate();
  require(cfg.seed.has_value(), "solver.seed is required for critical (set it or pass --seed)");
  const syz::ModelShape shape = model_shape(cfg);
  syz::SolverOptions opt;
  opt.grad_tol = cfg.grad_tol;
  opt.accept_tol = cfg.accept_tol;
  opt.cluster_radius = cfg.cluster_radius;
  opt.zero_rel_threshold = cfg.zero_rel_threshold;
  const std::size_t n_starts = cfg.n_starts ? cfg.n_starts : (std::size_t{40} << cfg.q);
  const syz::CriticalSearch search = syz::find_critical_manifolds(shape, n_starts, *cfg.seed, opt);
  const auto catalog = syz::predicted_catalog(shape);

  std::vector<int> hits(catalog.size(), 0);
  std::size_t unmatched = 0, wrong_index = 0;
  json rows = json::array();
  for (const auto& m : search.manifolds) {
    json row = {{"found_xi", xi_json(m.base_xi.xi)},
                {"eta", xi_json(m.eta)},
                {"index", m.index},
                {"nullity", m.nullity},
                {"grad_norm", number(m.grad_norm)},
                {"z_radius", number(m.z_radius)},
                {"members", m.members.size()}};
    if (m.I) {
      const auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& e) { return e.I == *m.I; });
      ++hits[it - catalog.begin()];
      row["I"] = *m.I;
      row["predicted_xi"] = xi_json(it->xi.xi);
      row["expected_index"] = m.I->size();
      if (m.index != static_cast<int>(m.I->size())) ++wrong_index;
    } else {
      ++unmatched;
      row["I"] = nullptr;
    }
    rows.push_back(row);
  }
  json missing = json::array();
  std::size_t duplicated = 0;
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    if (hits[k] == 0) missing.push_back(catalog[k].I);
    if (hits[k] > 1) ++duplicated;
  }
  CommandResult r;
  r.ok = missing.empty() && duplicated == 0 && unmatched == 0 && wrong_index == 0;
  r.payload = {{"p", cfg.p},
               {"q", cfg.q},
               {"seed", *cfg.seed},
               {"n_starts", search.n_starts},
               {"converged", search.converged},
               {"discarded", search.discarded},
               {"rows", rows},
               {"missing", missing},
               {"checks", {{"catalog_complete", missing.empty()},
                           {"one_cluster_per_entry", duplicated == 0},
                           {"no_unmatched_clusters", unmatched == 0},
                           {"index_equals_size", wrong_index == 0}}}};
  r.summary = "critical (" + std::to_string(cfg.p) + "," + std::to_string(cfg.q) + "): " +
              std::to_string(search.manifolds.size()) + " clusters, " + std::to_string(missing.size()) +
              " missing, " + std::to_string(unmatched) + " unmatched, " + std::to_string(wrong_index) +
              " index mismatches";
  return r;
}

CommandResult cmd_skeleton(const RunConfig& cfg) {
  cfg.validate();
  require(cfg.p <= 3, "shape.p must be <= 3 for skeleton");
  skeleton::SkeletonSpec spec;
  spec.p = cfg.p;
  spec.q = cfg.q;
  const skeleton::GluedSkeleton gs = skeleton::glued_skeleton(spec);
  const skeleton::FltzModel fltz = skeleton::fltz_chain(spec);

  const bool complexes = gs.L1.is_complex() && gs.L2.is_complex() && gs.L12.is_complex() && gs.glued.is_complex() &&
                         fltz.L.is_complex() && fltz.boundary.is_complex();
  const bool maps = gs.f.commutes(gs.L12, gs.L1) && gs.g.commutes(gs.L12, gs.L2) &&
                    fltz.inclusion.commutes(fltz.boundary, fltz.L);
  json homology = json::object();
  bool euler_ok = false, fltz_torus = false;
  skeleton::MayerVietorisReport mv;
  if (complexes) {
    const auto hg = skeleton::homology(gs.glued);
    homology = {{"glued", skeleton::format_homology(hg)},
                {"L1", skeleton::format_homology(skeleton::homology(gs.L1))},
                {"L2", skeleton::format_homology(skeleton::homology(gs.L2))},
                {"L12", skeleton::format_homology(skeleton::homology(gs.L12))},
                {"fltz", skeleton::format_homology(skeleton::homology(fltz.L))}};
    const long chi = skeleton::euler_characteristic(gs.glued);
    euler_ok = chi == skeleton::euler_characteristic(hg) &&
               chi == skeleton::euler_characteristic(gs.L1) + skeleton::euler_characteristic(gs.L2) -
                          skeleton::euler_characteristic(gs.L12);
    fltz_torus = skeleton::homology(fltz.L) == skeleton::homology(skeleton::torus_chain(cfg.p + cfg.q));
    homology["euler"] = chi;
    mv = skeleton::mayer_vietoris(gs);
  } else {
    mv.exact = false;
  }
  CommandResult r;
  r.ok = complexes && maps && euler_ok && fltz_torus && mv.exact;
  r.payload = {{"p", cfg.p},
               {"q", cfg.q},
               {"generators", gs.glued.size()},
               {"homology", homology},
               {"mayer_vietoris", {{"slots_checked", mv.slots_checked}, {"failures", mv.failures}}},
               {"checks", {{"d_squared_zero", complexes},
                           {"chain_maps_commute", maps},
                           {"euler_additive", euler_ok},
                           {"fltz_is_torus", fltz_torus},
                           {"mayer_vietoris_exact", mv.exact}}}};
  r.summary = "skeleton (" + std::to_string(cfg.p) + "," + std::to_string(cfg.q) + "): H = " +
              (homology.contains("glued") ? homology["glued"].get<std::string>() : std::string("n/a"));
  return r;
}

CommandResult cmd_bside(const RunConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = cfg.seed.value_or(1);
  const auto blow = bside::verify_blowup_presentation(cfg.bside_n, cfg.bside_m, seed);
  const auto smooth = bside::jacobian_smoothness(cfg.bside_n, cfg.bside_m);
  const auto cone = bside::cone_relation_check(cfg.bside_n, cfg.bside_m, seed, cfg.bside_samples);
  json partials = json::array();
  for (const auto& p : smooth.partials) partials.push_back(p.to_string());

  CommandResult r;
  r.ok = blow.passed() && smooth.passed() && cone.passed();
  r.payload = {{"n", cfg.bside_n},
               {"m", cfg.bside_m},
               {"seed", seed},
               {"blowup", {{"relation_vanishes", blow.relation_vanishes},
                           {"substitution_holds", blow.substitution_holds},
                           {"kernel_in_ideal", blow.kernel_in_ideal},
                           {"evaluation_separates", blow.evaluation_separates},
                           {"samples", blow.samples},
                           {"basis_size", blow.basis_size},
                           {"kernel_dim", blow.kernel_dim},
                           {"kernel_elements_checked", blow.kernel_elements_checked},
                           {"residual", blow.residual}}},
               {"smoothness", {{"partials", partials},
                               {"has_constant_partial", smooth.has_constant_partial},
                               {"unit_ideal", smooth.unit_ideal},
                               {"certificate", smooth.certificate}}},
               {"cone", {{"identity_vanishes", cone.identity_vanishes},
                         {"samples", cone.samples},
                         {"agreements", cone.agreements},
                         {"residual", cone.residual}}},
               {"checks", {{"blowup", blow.passed()}, {"smoothness", smooth.passed()}, {"cone", cone.passed()}}}};
  r.summary = "bside (" + std::to_string(cfg.bside_n) + "," + std::to_string(cfg.bside_m) + "): " +
              (r.ok ? "all identities hold" : "identity failed: " + blow.residual + cone.residual);
  return r;
}

CommandResult cmd_figure(const RunConfig& cfg) {
  cfg.validate();
  require(cfg.q == 2, "figure requires shape.q = 2");
  const syz::ModelShape shape = model_shape(cfg);
  const tropical::TailoringParams params{cfg.eps, cfg.L};
  const auto catalog = syz::predicted_catalog(shape);
  const Grid g = make_grid(cfg);
  const double size = cfg.figure_size;
  const double span = cfg.xi_max - cfg.xi_min;
  auto px = [&](double xi) { return (xi - cfg.xi_min) / span * size; };
  auto py = [&](double xi) { return size - (xi - cfg.xi_min) / span * size; };
  const double cell = size / g.res;

  std::vector<Pt> hull_input;
  for (const auto& e : catalog) hull_input.push_back({e.xi[0], e.xi[1]});
  const std::vector<Pt> hull = convex_hull(hull_input);

  std::vector<char> amoeba(g.size()), blue(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto xi = g.at(idx);
    amoeba[idx] = tailored_member(xi, params);
    blue[idx] = !amoeba[idx] && inside_hull(hull, {xi[0], xi[1]});
  }
  // Horizontal runs of set cells, one rect per run.
  auto runs = [&](const std::vector<char>& on, const std::string& style, std::size_t& count) {
    std::string out;
    for (int row = 0; row < g.res; ++row) {
      for (int col = 0; col < g.res;) {
        if (!on[static_cast<std::size_t>(row) * g.res + col]) {
          ++col;
          continue;
        }
        int end = col;
        while (end < g.res && on[static_cast<std::size_t>(row) * g.res + end]) ++end;
        out += "<rect x=\"" + fmt("%.3f", col * cell) + "\" y=\"" + fmt("%.3f", size - (row + 1) * cell) +
               "\" width=\"" + fmt("%.3f", (end - col) * cell) + "\" height=\"" + fmt("%.3f", cell) + "\" " + style +
               "/>\n";
        ++count;
        col = end;
      }
    }
    return out;
  };
  std::size_t amoeba_rects = 0, blue_rects = 0;
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt("%.0f", size) + "\" height=\"" +
         fmt("%.0f", size) + "\" viewBox=\"0 0 " + fmt("%.0f", size) + " " + fmt("%.0f", size) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt("%.0f", size) + "\" height=\"" + fmt("%.0f", size) +
         "\" fill=\"white\"/>\n";
  svg += "<g id=\"amoeba\">\n" + runs(amoeba, "fill=\"#bdbdbd\"", amoeba_rects) + "</g>\n";
  svg += "<g id=\"skeleton-region\">\n" + runs(blue, "fill=\"blue\" fill-opacity=\"0.35\"", blue_rects) + "</g>\n";
  // Spine of max(0, xi_1, xi_2): three rays from the origin.
  const double lo = cfg.xi_min, hi = cfg.xi_max;
  auto line = [&](double x1, double y1, double x2, double y2) {
    return "<line x1=\"" + fmt("%.3f", px(x1)) + "\" y1=\"" + fmt("%.3f", py(y1)) + "\" x2=\"" + fmt("%.3f", px(x2)) +
           "\" y2=\"" + fmt("%.3f", py(y2)) + "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  };
  svg += "<g id=\"spine\">\n";
  if (lo < 0.0 && hi > 0.0) {
    svg += line(0, 0, lo, 0) + line(0, 0, 0, lo) + line(0, 0, hi, hi);
  }
  svg += "</g>\n";
  json green = json::array();
  json red = json::array();
  std::string markers;
  const double radius = std::max(3.0, size / 96.0);
  for (const auto& e : catalog) {
    const bool base = e.I.empty();
    markers += "<circle cx=\"" + fmt("%.3f", px(e.xi[0])) + "\" cy=\"" + fmt("%.3f", py(e.xi[1])) + "\" r=\"" +
               fmt("%.3f", radius) + "\" fill=\"" + (base ? "red" : "green") + "\" stroke=\"black\"/>\n";
    (base ? red : green).push_back({{"I", e.I}, {"xi", xi_json(e.xi.xi)}});
  }
  svg += "<g id=\"markers\">\n" + markers + "</g>\n</svg>\n";

  json hull_json = json::array();
  for (const Pt& p : hull) hull_json.push_back({number(p.x), number(p.y)});
  CommandResult r;
  r.ok = red.size() == 1 && green.size() == catalog.size() - 1;
  r.svg = svg;
  r.payload = {{"p", cfg.p},
               {"q", cfg.q},
               {"size", cfg.figure_size},
               {"resolution", g.res},
               {"markers", {{"red", red}, {"green", green}}},
               {"blue_hull", hull_json},
               {"amoeba_cells", std::count(amoeba.begin(), amoeba.end(), 1)},
               {"blue_cells", std::count(blue.begin(), blue.end(), 1)},
               {"rects", {{"amoeba", amoeba_rects}, {"blue", blue_rects}}},
               {"svg_bytes", svg.size()},
               {"svg_fnv1a", hex64(fnv1a(svg))}};
  r.summary = "figure: 1 red, " + std::to_string(green.size()) + " green markers";
  return r;
}

CommandResult run_command(const std::string& name, const RunConfig& cfg) {
  static const std::map<std::string, CommandResult (*)(const RunConfig&)> table = {
      {"amoeba", cmd_amoeba}, {"bside", cmd_bside},       {"critical", cmd_critical},
      {"figure", cmd_figure}, {"skeleton", cmd_skeleton}, {"spine", cmd_spine}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown command " + name);
  try {
    return it->second(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json envelope(const std::string& command, const RunConfig& cfg, const CommandResult& r) {
  return {{"checksum", hex64(fnv1a(r.payload.dump()))},
          {"command", command},
          {"config", config_json(cfg)},
          {"ok", r.ok},
          {"payload", r.payload},
          {"timestamp", timestamp()},
          {"version", kVersion}};
}

}  // namespace syzkit::cli

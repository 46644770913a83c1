#include "coarse/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "coarse/amenability.hpp"
#include "coarse/asdim.hpp"
#include "coarse/cqi.hpp"
#include "coarse/ends.hpp"
#include "coarse/error.hpp"
#include "coarse/growth.hpp"
#include "coarse/pseudogroup.hpp"
#include "coarse/serialize.hpp"
#include "coarse/spaces.hpp"

namespace coarse {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"net",   "match", "compose", "verify", "growth",
                                              "folner", "ends",  "asdim",   "orbit",  "recur",
                                              "reeb",  "limitset", "double", "demo-rotation"};
  return names;
}

ExperimentConfig config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw Error(Errc::parse_error, "experiment config must be a JSON object");
  ExperimentConfig c;
  c.base_dir = base_dir;
  try {
    c.command = j.at("command").get<std::string>();
    c.name = j.value("name", c.command);
    c.input = j.value("input", json());
    c.params = j.value("params", json::object());
    c.horizon = j.value("horizon", c.horizon);
    c.budget = j.value("budget", c.budget);
    c.format = j.value("format", c.format);
    c.seed = j.value("seed", c.seed);
    c.output = j.value("output", std::string());
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, std::string("bad experiment config: ") + e.what());
  }
  if (std::find(subcommands().begin(), subcommands().end(), c.command) == subcommands().end())
    throw Error(Errc::unsupported_name, "unknown subcommand '" + c.command + "'");
  if (c.format != "json" && c.format != "csv") throw Error(Errc::parse_error, "format must be json or csv");
  if (!c.params.is_object()) throw Error(Errc::parse_error, "params must be a JSON object");
  return c;
}

json to_json(const ExperimentConfig& c) {
  return {{"name", c.name},       {"command", c.command}, {"input", c.input},
          {"params", c.params},   {"horizon", c.horizon}, {"budget", c.budget},
          {"format", c.format},   {"seed", c.seed},       {"output", c.output}};
}

namespace {

// ---------------------------------------------------------------- parameter access

std::string resolve(const ExperimentConfig& c, const std::string& path) {
  if (c.base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(c.base_dir) / path).string();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, path + ": " + e.what());
  }
}

// Objects are used inline; strings name a JSON file.
json inline_or_file(const ExperimentConfig& c, const json& v) {
  if (v.is_string()) return read_json_file(resolve(c, v.get<std::string>()));
  return v;
}

std::size_t get_size(const json& p, const char* key, std::size_t fallback) {
  if (!p.contains(key)) return fallback;
  const json& v = p.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw Error(Errc::parse_error, std::string("\"") + key + "\" must be a non-negative integer");
  return v.get<std::size_t>();
}

std::vector<std::size_t> get_sizes(const json& p, const char* key, std::vector<std::size_t> fallback) {
  if (!p.contains(key)) return fallback;
  const json& v = p.at(key);
  std::vector<std::size_t> out;
  if (v.is_number_integer()) return {get_size(p, key, 0)};
  if (!v.is_array()) throw Error(Errc::parse_error, std::string("\"") + key + "\" must be a list of integers");
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 0)
      throw Error(Errc::parse_error, std::string("\"") + key + "\" must be a list of non-negative integers");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

Rational get_rational(const json& p, const char* key, const Rational& fallback) {
  return p.contains(key) ? rational_from_json(p.at(key)) : fallback;
}

std::string get_string(const json& p, const char* key, const std::string& fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_string()) throw Error(Errc::parse_error, std::string("\"") + key + "\" must be a string");
  return p.at(key).get<std::string>();
}

std::string cell(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }
std::string cell(const Rational& q) { return to_string(q); }
template <typename T>
std::string cell(const T& v) {
  return std::to_string(v);
}

// ---------------------------------------------------------------- inputs

bool parse_call(const std::string& text, std::string& name, std::string& arg) {
  auto open = text.find('(');
  if (open == std::string::npos || text.empty() || text.back() != ')') return false;
  name = text.substr(0, open);
  arg = text.substr(open + 1, text.size() - open - 2);
  return true;
}

std::size_t parse_count(const std::string& arg, const std::string& what) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(arg, &used);
    if (used != arg.size() || v < 0) throw std::invalid_argument(arg);
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw Error(Errc::parse_error, what + " needs a non-negative integer, got '" + arg + "'");
  }
}

bool looks_like_pseudogroup(const json& j) { return j.is_object() && j.contains("kind"); }

PseudogroupPtr load_pseudogroup(const ExperimentConfig& c, const json& input) {
  if (input.is_null()) throw Error(Errc::invalid_argument, "this subcommand needs a pseudogroup input");
  if (input.is_object()) return pseudogroup_from_json(input);
  if (!input.is_string()) throw Error(Errc::parse_error, "input must be a string or an object");
  const std::string text = input.get<std::string>();
  std::string name, arg;
  if (parse_call(text, name, arg)) return parse_example(text);
  json j = read_json_file(resolve(c, text));
  if (!looks_like_pseudogroup(j)) throw Error(Errc::parse_error, text + " is not a pseudogroup description");
  return pseudogroup_from_json(j);
}

struct SpaceInput {
  std::shared_ptr<const Space> space;
  Point center;
};

SpaceInput load_space(const ExperimentConfig& c, const json& input) {
  ExploreLimits limits{.horizon = 4 * c.horizon + 16, .max_vertices = c.budget};
  if (input.is_null()) throw Error(Errc::invalid_argument, "this subcommand needs an input space");
  auto orbit = [&](const PseudogroupPtr& pg) {
    std::shared_ptr<const Space> s = orbit_graph(pg, pg->basepoints().front(), limits);
    return SpaceInput{s, Point{0}};
  };
  if (looks_like_pseudogroup(input)) return orbit(pseudogroup_from_json(input));
  if (input.is_object()) return {std::make_shared<ExplicitGraph>(graph_from_json(input)), Point{0}};
  if (!input.is_string()) throw Error(Errc::parse_error, "input must be a string or an object");
  const std::string text = input.get<std::string>();
  std::string name, arg;
  if (text.rfind("orbit:", 0) == 0) return orbit(load_pseudogroup(c, text.substr(6)));
  if (parse_call(text, name, arg)) {
    if (name == "zd") return {make_lattice(parse_count(arg, "zd"), limits), Point{0}};
    if (name == "free") return {make_free_group(parse_count(arg, "free"), limits), Point{0}};
    if (name == "regular_tree") return {make_regular_tree(parse_count(arg, "regular_tree"), limits), Point{0}};
    if (name == "path") return {std::make_shared<ExplicitGraph>(path_graph(parse_count(arg, "path"))), Point{0}};
    if (name == "cycle") return {std::make_shared<ExplicitGraph>(cycle_graph(parse_count(arg, "cycle"))), Point{0}};
    throw Error(Errc::unsupported_name, "unknown space '" + name + "'",
                {{"supported", {"zd(d)", "free(k)", "regular_tree(K)", "path(n)", "cycle(n)", "orbit:<pseudogroup>"}}});
  }
  const std::string path = resolve(c, text);
  if (fs::path(path).extension() == ".json") {
    json j = read_json_file(path);
    if (looks_like_pseudogroup(j)) return orbit(pseudogroup_from_json(j));
  }
  return {std::make_shared<ExplicitGraph>(load_graph_file(path)), Point{0}};
}

struct Setting {
  SpaceInput in;
  std::unique_ptr<Window> window;
};

Setting window_for(const ExperimentConfig& c, const json& input) {
  Setting s{load_space(c, input), nullptr};
  if (c.params.contains("center")) {
    if (s.in.space->kind() != SpaceKind::explicit_graph)
      throw Error(Errc::invalid_argument, "lazy spaces are centered at their root; set the basepoint instead");
    s.in.center = s.in.space->at(key_from_json(c.params.at("center")));
  }
  s.window = std::make_unique<Window>(*s.in.space, s.in.center, c.horizon);
  return s;
}

Distortion get_distortion(const json& p) {
  return Distortion{get_rational(p, "K", Rational(1)), get_rational(p, "C", Rational(1))};
}

Key pg_point(const PseudogroupPtr& pg, const json& p, const char* key) {
  return p.contains(key) ? pg->parse_point(p.at(key)) : pg->basepoints().front();
}

// ---------------------------------------------------------------- subcommands

RunResult cmd_net(const ExperimentConfig& c) {
  Setting s = window_for(c, c.input);
  const std::size_t K = get_size(c.params, "K", 2);
  PointSet net = separated_net(*s.window, K, s.in.center);
  RunResult r;
  json pts = set_to_json(*s.in.space, net);
  r.report = {{"K", K}, {"horizon", c.horizon}, {"window_size", s.window->points().size()},
              {"size", net.size()}, {"is_net", is_net(*s.window, net, K)}, {"net", pts}};
  r.table.push_back({"point"});
  for (const auto& p : pts) r.table.push_back({cell(p)});
  return r;
}

std::uint32_t max_displacement(const Space& space, const PartialBijection& h, std::size_t cap) {
  std::uint32_t worst = 0;
  for (auto [x, y] : h.pairs()) worst = std::max(worst, pairwise_distances(space, {x}, {y}, cap)[0][0]);
  return worst;
}

RunResult cmd_match(const ExperimentConfig& c) {
  Setting s = window_for(c, c.input);
  const Space& space = *s.in.space;
  const std::size_t K = get_size(c.params, "K", 2);
  PointSet a1 = c.params.contains("a1") ? set_from_json(space, inline_or_file(c, c.params.at("a1")))
                                        : separated_net(*s.window, K, s.in.center);
  PointSet a2;
  if (c.params.contains("a2")) {
    a2 = set_from_json(space, inline_or_file(c, c.params.at("a2")));
  } else {
    // A second net grown from the first point at depth min(K, horizon).
    std::vector<Point> pts(s.window->points().begin(), s.window->points().end());
    std::sort(pts.begin(), pts.end(), [&](Point a, Point b) { return space.key_less(a, b); });
    Point start = s.in.center;
    for (Point p : pts)
      if (s.window->depth(p) == std::min(K, c.horizon)) {
        start = p;
        break;
      }
    a2 = separated_net(*s.window, K, start);
  }
  MatchingResult m = net_matching(*s.window, a1, a2, K);
  CqiReport rep = verify_cqi(m.h, *s.window, *s.window, m.claimed);
  const std::uint32_t disp = max_displacement(space, m.h, 2 * K + 1);
  RunResult r;
  r.status = rep.ok() && disp <= 2 * K ? 0 : 1;
  r.report = {{"K", K},
              {"claimed", to_json(m.claimed)},
              {"map", to_json(m.h, space, space)},
              {"unmatched", m.unmatched},
              {"max_displacement", disp},
              {"verification", to_json(rep)}};
  r.table.push_back({"source", "target"});
  for (const auto& p : r.report["map"]["pairs"]) r.table.push_back({cell(p[0]), cell(p[1])});
  return r;
}

RunResult cmd_compose(const ExperimentConfig& c) {
  Setting s = window_for(c, c.input);
  const Space& space = *s.in.space;
  if (!c.params.contains("f") || !c.params.contains("f2"))
    throw Error(Errc::invalid_argument, "compose needs maps \"f\" and \"f2\"");
  PartialBijection f = bijection_from_json(inline_or_file(c, c.params.at("f")), space, space);
  PartialBijection f2 = bijection_from_json(inline_or_file(c, c.params.at("f2")), space, space);
  const Distortion d = get_distortion(c.params);
  CompositeResult g = coarse_composite(f, f2, *s.window, *s.window, *s.window, d);
  CqiReport rep = verify_cqi(g.g, *s.window, *s.window, g.claimed);
  RunResult r;
  r.status = rep.ok() ? 0 : 1;
  r.report = {{"claimed", to_json(g.claimed)}, {"map", to_json(g.g, space, space)}, {"verification", to_json(rep)}};
  r.table.push_back({"source", "target"});
  for (const auto& p : r.report["map"]["pairs"]) r.table.push_back({cell(p[0]), cell(p[1])});
  return r;
}

RunResult cmd_verify(const ExperimentConfig& c) {
  Setting src = window_for(c, c.input);
  Setting dst;
  const Setting* target = &src;
  if (c.params.contains("target")) {
    ExperimentConfig tc = c;
    tc.params.erase("center");
    if (c.params.contains("target_center")) tc.params["center"] = c.params.at("target_center");
    dst = window_for(tc, c.params.at("target"));
    target = &dst;
  }
  if (!c.params.contains("map")) throw Error(Errc::invalid_argument, "verify needs a \"map\"");
  json mj = inline_or_file(c, c.params.at("map"));
  Distortion d = get_distortion(c.params);
  if (mj.contains("claimed")) {
    const json& cl = mj.at("claimed");
    if (!c.params.contains("K") && cl.contains("K")) d.K = rational_from_json(cl.at("K"));
    if (!c.params.contains("C") && cl.contains("C")) d.C = rational_from_json(cl.at("C"));
  }
  PartialBijection f = bijection_from_json(mj, *src.in.space, *target->in.space);
  CqiReport rep = verify_cqi(f, *src.window, *target->window, d);
  RunResult r;
  r.status = rep.ok() ? 0 : 1;
  r.report = {{"ok", rep.ok()}, {"distortion", to_json(d)}, {"report", to_json(rep)}};
  r.table.push_back({"kind", "points", "d_source", "d_target"});
  for (const auto& v : r.report["report"].value("violations", json::array()))
    r.table.push_back({cell(v.value("kind", json(""))), cell(v.value("points", json::array())),
                       cell(v.value("d_source", json())), cell(v.value("d_target", json()))});
  return r;
}

RunResult cmd_growth(const ExperimentConfig& c) {
  SpaceInput in = load_space(c, c.input);
  const std::size_t r_max = get_size(c.params, "r_max", c.horizon);
  GrowthSample sample = growth_function(*in.space, in.center, r_max);
  const double tol = c.params.value("tolerance", 0.15);
  const Rational tail = get_rational(c.params, "tail", Rational(1, 2));
  RunResult r;
  r.report = {{"sample", to_json(sample)},
              {"exponents", to_json(growth_exponents(sample, tail))},
              {"class", to_json(classify_growth(sample, tol, tail))}};
  r.table.push_back({"r", "v"});
  for (std::size_t i = 0; i <= sample.r_max(); ++i) r.table.push_back({cell(i), cell(sample.at(i))});
  return r;
}

RunResult cmd_folner(const ExperimentConfig& c) {
  Setting s = window_for(c, c.input);
  const auto radii = get_sizes(c.params, "radii", {1});
  Schedule schedule = parse_schedule(get_string(c.params, "schedule", "8/n"));
  FolnerCertificate cert;
  const bool given = c.params.contains("certificate");
  if (given) {
    cert = certificate_from_json(*s.in.space, inline_or_file(c, c.params.at("certificate")));
  } else {
    FolnerBudget budget{get_size(c.params, "max_n", 20), get_size(c.params, "max_size", 100000)};
    const std::string strategy = get_string(c.params, "strategy", "balls");
    if (strategy != "balls" && strategy != "shaved")
      throw Error(Errc::unsupported_name, "strategy must be balls or shaved");
    cert = folner_search(*s.window, budget, strategy == "balls" ? FolnerStrategy::balls : FolnerStrategy::shaved,
                         radii);
  }
  FolnerReport rep = verify_folner(*s.window, cert, radii, schedule);
  RunResult r;
  r.status = given && !rep.accepted ? 1 : 0;
  r.report = {{"certificate", to_json(*s.in.space, cert)}, {"report", to_json(rep)}};
  std::vector<std::string> header{"n", "size"};
  for (std::size_t rad : radii) header.push_back("ratio_r" + std::to_string(rad));
  r.table.push_back(header);
  for (std::size_t n = 0; n < cert.sets.size(); ++n) {
    std::vector<std::string> row{cell(n + 1), cell(cert.sets[n].size())};
    for (std::size_t i = 0; i < radii.size() && n < cert.ratios.size() && i < cert.ratios[n].size(); ++i)
      row.push_back(cell(cert.ratios[n][i]));
    r.table.push_back(row);
  }
  return r;
}

RunResult cmd_ends(const ExperimentConfig& c) {
  Setting s = window_for(c, c.input);
  const std::size_t mu = get_size(c.params, "mu", 1);
  const std::size_t offset = get_size(c.params, "offset", 0);
  const std::size_t depth_default = c.horizon > offset + 3 * mu ? c.horizon - offset - 3 * mu : 1;
  const std::size_t depth = get_size(c.params, "depth", depth_default);
  ComponentForest forest = end_tree(*s.window, mu, depth, offset);
  EndClass cls = end_classification(forest);
  RunResult r;
  json counts = json::array();
  r.table.push_back({"level", "components", "escaping"});
  for (std::size_t n = 1; n <= forest.depth(); ++n) {
    counts.push_back(forest.escaping_count(n));
    r.table.push_back({cell(n), cell(forest.levels[n - 1].size()), cell(forest.escaping_count(n))});
  }
  r.report = {{"classification", to_string(cls)}, {"escaping_counts", counts}, {"forest", to_json(*s.in.space, forest)}};
  return r;
}

RunResult cmd_asdim(const ExperimentConfig& c) {
  Setting s = window_for(c, c.input);
  const auto radii = get_sizes(c.params, "radii", {2});
  auto entries = asdim_profile(*s.window, radii);
  RunResult r;
  json rows = json::array();
  r.table.push_back({"R", "n", "method", "D", "verified"});
  for (const AsdimEntry& e : entries) {
    json row = {{"R", e.R}, {"n", e.n ? json(*e.n) : json()}, {"method", e.method}};
    bool verified = false;
    if (e.cover) {
      CoverReport rep = verify_cover(*s.window, *e.cover);
      verified = rep.ok;
      row["D"] = e.cover->D;
      row["verification"] = to_json(rep);
      if (c.params.value("include_covers", false)) row["cover"] = to_json(*s.in.space, *e.cover);
    }
    row["verified"] = verified;
    if (e.cover && !verified) r.status = 1;
    r.table.push_back({cell(e.R), e.n ? cell(*e.n) : "", e.method, e.cover ? cell(e.cover->D) : "", verified ? "true" : "false"});
    rows.push_back(row);
  }
  r.report = {{"horizon", c.horizon}, {"profile", rows}};
  return r;
}

RunResult cmd_orbit(const ExperimentConfig& c) {
  PseudogroupPtr pg = load_pseudogroup(c, c.input);
  const Key x = pg_point(pg, c.params, "point");
  OrbitBall ball = orbit_ball(pg, x, get_size(c.params, "radius", c.horizon), c.budget);
  RunResult r;
  r.report = {{"pseudogroup", to_json(*pg)}, {"ball", to_json(*pg, ball)}};
  r.table.push_back({"index", "point", "depth", "word"});
  const json& pts = r.report["ball"]["points"];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::string word;
    for (const auto& g : pts[i]["word"]) word += (word.empty() ? "" : " ") + g.get<std::string>();
    r.table.push_back({cell(i), cell(pts[i]["point"]), cell(pts[i]["depth"]), word});
  }
  return r;
}

RunResult cmd_recur(const ExperimentConfig& c) {
  PseudogroupPtr pg = load_pseudogroup(c, c.input);
  if (!c.params.contains("target")) throw Error(Errc::invalid_argument, "recur needs a \"target\" predicate");
  auto target = pg->parse_predicate(c.params.at("target"));
  std::vector<Key> bases = pg->basepoints();
  if (c.params.contains("basepoints")) {
    bases.clear();
    for (const auto& p : c.params.at("basepoints")) bases.push_back(pg->parse_point(p));
  }
  const std::size_t horizon = get_size(c.params, "horizon", c.horizon);
  std::optional<std::size_t> sample;
  if (c.params.contains("sample_radius")) sample = get_size(c.params, "sample_radius", 0);
  RecurrenceReport rep = recurrence_radius(pg, target, bases, horizon, sample, c.budget);
  RunResult r;
  r.report = to_json(*pg, rep);
  r.table.push_back({"basepoint", "R"});
  for (std::size_t i = 0; i < bases.size(); ++i)
    r.table.push_back({cell(pg->point_json(bases[i])), rep.per_basepoint[i] ? cell(*rep.per_basepoint[i]) : "none"});
  return r;
}

RunResult cmd_reeb(const ExperimentConfig& c) {
  PseudogroupPtr pg = load_pseudogroup(c, c.input);
  const Key x = pg_point(pg, c.params, "point");
  ReebNeighborhood V(pg, x, get_size(c.params, "r", 2), c.budget);
  RunResult r;
  r.report = V.descriptor();
  r.table.push_back({"y", "in_V", "isometric"});
  json maps = json::array();
  std::vector<json> ys;
  if (c.params.contains("y")) ys.push_back(c.params.at("y"));
  for (const auto& y : c.params.value("ys", json::array())) ys.push_back(y);
  for (const json& yj : ys) {
    Key y = pg->parse_point(yj);
    const bool in = V.contains(y);
    json entry = {{"y", pg->point_json(y)}, {"in_V", in}};
    std::string iso;
    if (in) {
      ReebMap m = V.map_to(y);
      entry["map"] = to_json(*pg, m);
      iso = m.isometric ? "true" : "false";
      if (!m.isometric || !m.edges_preserved) r.status = 1;
    }
    r.table.push_back({cell(pg->point_json(y)), in ? "true" : "false", iso});
    maps.push_back(entry);
  }
  r.report["targets"] = maps;
  return r;
}

RunResult cmd_limitset(const ExperimentConfig& c) {
  PseudogroupPtr pg = load_pseudogroup(c, c.input);
  std::vector<ObservationWindow> windows;
  for (const auto& w : c.params.value("windows", json::array())) {
    if (!w.is_object()) throw Error(Errc::parse_error, "windows are {\"center\", \"radius\"} objects");
    windows.push_back({w.contains("center") ? pg->parse_point(w.at("center")) : pg->basepoints().front(),
                       get_size(w, "radius", c.horizon)});
  }
  if (windows.empty())
    for (const Key& b : pg->basepoints()) windows.push_back({b, c.horizon});
  LimitSample s = limit_set_sample(pg, windows, get_rational(c.params, "eps", Rational(1, 16)), c.budget);
  RunResult r;
  r.report = to_json(*pg, s);
  r.table.push_back({"cell"});
  for (const auto& cl : r.report["cells"]) r.table.push_back({cell(cl)});
  return r;
}

RunResult cmd_double(const ExperimentConfig& c) {
  PseudogroupPtr pg = load_pseudogroup(c, c.input);
  GroupDouble d = group_double(pg, get_size(c.params, "radius", 15));
  RunResult r;
  r.status = d.report.bounds_ok && d.report.involutions_ok ? 0 : 1;
  r.report = {{"doubled", to_json(*d.doubled)}, {"report", to_json(*pg, d.report)}};
  r.table.push_back({"pairs_checked", "min_gap", "max_gap", "bounds_ok", "involutions_ok"});
  r.table.push_back({cell(d.report.pairs_checked), cell(d.report.min_gap), cell(d.report.max_gap),
                     d.report.bounds_ok ? "true" : "false", d.report.involutions_ok ? "true" : "false"});
  return r;
}

RunResult cmd_demo_rotation(const ExperimentConfig& c) {
  PseudogroupPtr pg = load_pseudogroup(c, c.input.is_null() ? json("rotation(golden)") : c.input);
  RotationDemo demo = rotation_demo(pg, get_size(c.params, "n_max", 6), get_size(c.params, "max_steps", 1'000'000));
  RunResult r;
  r.report = to_json(*pg, demo);
  bool all = true;
  r.table.push_back({"n", "arc_lo", "arc_hi", "x", "steps", "ball_size", "ball_in_A"});
  for (const auto& row : demo.rows) {
    all = all && row.ball_in_A && row.ball_is_orbit_segment;
    r.table.push_back({cell(row.n), cell(row.arc_lo), cell(row.arc_hi), cell(pg->point_json(row.x)),
                       cell(row.steps), cell(row.ball_size), row.ball_in_A ? "true" : "false"});
  }
  r.status = all ? 0 : 1;
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  static const std::map<std::string, RunResult (*)(const ExperimentConfig&)> table{
      {"net", cmd_net},       {"match", cmd_match},     {"compose", cmd_compose},
      {"verify", cmd_verify}, {"growth", cmd_growth},   {"folner", cmd_folner},
      {"ends", cmd_ends},     {"asdim", cmd_asdim},     {"orbit", cmd_orbit},
      {"recur", cmd_recur},   {"reeb", cmd_reeb},       {"limitset", cmd_limitset},
      {"double", cmd_double}, {"demo-rotation", cmd_demo_rotation}};
  RunResult failed;
  failed.status = 1;
  try {
    auto it = table.find(config.command);
    if (it == table.end()) throw Error(Errc::unsupported_name, "unknown subcommand '" + config.command + "'");
    return it->second(config);
  } catch (const Error& e) {
    failed.report = e.to_json();
  } catch (const json::exception& e) {
    failed.report = Error(Errc::parse_error, e.what()).to_json();
  } catch (const std::bad_alloc&) {
    failed.report = Error(Errc::budget_exhausted, "out of memory").to_json();
  } catch (const std::exception& e) {
    failed.report = Error(Errc::invalid_argument, e.what()).to_json();
  }
  failed.table = {{"error", "message"}, {failed.report.value("error", ""), failed.report.value("message", "")}};
  return failed;
}

std::string render(const RunResult& result, const std::string& format) {
  if (format == "json") return result.report.dump(2) + "\n";
  std::string out;
  for (const auto& row : result.table) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(row[i]);
    out += "\n";
  }
  return out;
}

std::string output_name(const ExperimentConfig& config, std::size_t index) {
  if (!config.output.empty()) return config.output;
  std::string stem = config.name.empty() ? config.command : config.name;
  for (char& ch : stem)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  return std::to_string(index) + "-" + stem + "." + config.format;
}

BatchResult run_batch(const std::vector<ExperimentConfig>& configs, const std::string& dir, std::size_t jobs) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir + ": " + ec.message());
  std::vector<RunResult> results(configs.size());
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next == configs.size()) return;
        i = next++;
      }
      results[i] = run(configs[i]);
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < std::max<std::size_t>(1, std::min(jobs, configs.size())); ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  BatchResult out;
  json entries = json::array();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string name = output_name(configs[i], i);
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw Error(Errc::io_error, "cannot write " + (fs::path(dir) / name).string());
    f << render(results[i], configs[i].format);
    json entry = {{"config", to_json(configs[i])}, {"output", name}, {"status", results[i].status}};
    if (results[i].report.contains("error")) entry["error"] = results[i].report.at("error");
    entries.push_back(entry);
    out.status = std::max(out.status, results[i].status);
  }
  out.manifest = {{"tool", "coarse"}, {"version", kToolVersion}, {"experiments", entries}};
  std::ofstream m(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!m) throw Error(Errc::io_error, "cannot write manifest in " + dir);
  m << out.manifest.dump(2) << "\n";
  return out;
}

}  // namespace coarse

#include "lalg/manifest.hpp"

#include <fstream>

namespace lalg {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ManifestError("unknown key '" + it.key() + "' in " + where);
  }
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ManifestError("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

Expr parse_entry(const json& j, const std::vector<std::string>& vars, const std::string& where) {
  if (j.is_number()) return Expr::constant(j.get<double>());
  if (!j.is_string()) throw ManifestError(where + ": expression entries must be strings");
  try {
    return parse_expr(j.get<std::string>(), vars);
  } catch (const ParseError& e) {
    throw ManifestError(where + ": " + e.what() + " in '" + j.get<std::string>() + "'");
  }
}

std::vector<Expr> parse_vector(const json& j, const std::vector<std::string>& vars, std::size_t len,
                               const std::string& where) {
  if (!j.is_array() || j.size() != len)
    throw ManifestError(where + ": expected an array of length " + std::to_string(len));
  std::vector<Expr> out;
  out.reserve(len);
  for (const auto& e : j) out.push_back(parse_entry(e, vars, where));
  return out;
}

std::vector<std::vector<Expr>> parse_matrix(const json& j, const std::vector<std::string>& vars,
                                            std::size_t rows, std::size_t cols,
                                            const std::string& where) {
  if (!j.is_array() || j.size() != rows)
    throw ManifestError(where + ": expected " + std::to_string(rows) + " rows");
  std::vector<std::vector<Expr>> out;
  out.reserve(rows);
  for (const auto& row : j) out.push_back(parse_vector(row, vars, cols, where));
  return out;
}

std::vector<std::pair<double, double>> parse_box(const json& j, std::size_t dim,
                                                 const std::string& where) {
  if (!j.is_array() || j.size() != dim)
    throw ManifestError(where + ": box must have one [lo, hi] pair per variable");
  std::vector<std::pair<double, double>> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw ManifestError(where + ": box entries are [lo, hi]");
    double lo = e[0].get<double>(), hi = e[1].get<double>();
    if (!(lo < hi)) throw ManifestError(where + ": box entry with lo >= hi");
    out.emplace_back(lo, hi);
  }
  return out;
}

}  // namespace

SampleGrid Manifest::grid() const {
  if (strategy != "halton") throw ManifestError("unsupported grid strategy '" + strategy + "'");
  return make_grid(chart, grid_count, seed, tol_eq, tol_nonzero);
}

Manifest parse_manifest(const json& j) {
  check_keys(j, "manifest",
             {"chart", "algebroid", "structure", "grid", "convention", "tolerances"});
  Manifest mf;

  const json& jc = need(j, "chart", "manifest");
  check_keys(jc, "chart", {"variables", "box"});
  for (const auto& v : need(jc, "variables", "chart")) mf.chart.variables.push_back(v.get<std::string>());
  if (mf.chart.variables.empty()) throw ManifestError("chart: no variables");
  mf.chart.box = parse_box(need(jc, "box", "chart"), mf.chart.variables.size(), "chart");
  const auto& vars = mf.chart.variables;
  std::size_t n = vars.size();

  const json& ja = need(j, "algebroid", "manifest");
  check_keys(ja, "algebroid", {"rank", "anchor", "structure"});
  int rank = need(ja, "rank", "algebroid").get<int>();
  if (rank < 1) throw ManifestError("algebroid: rank must be positive");
  auto anchor = parse_matrix(need(ja, "anchor", "algebroid"), vars, static_cast<std::size_t>(rank), n,
                             "algebroid.anchor");
  std::vector<std::vector<std::vector<Expr>>> C(
      static_cast<std::size_t>(rank),
      std::vector<std::vector<Expr>>(static_cast<std::size_t>(rank), std::vector<Expr>(static_cast<std::size_t>(rank))));
  if (ja.contains("structure")) {
    const json& js = ja["structure"];
    if (!js.is_array() || js.size() != static_cast<std::size_t>(rank))
      throw ManifestError("algebroid.structure: expected rank-many planes C[a][b][c]");
    for (int a = 0; a < rank; ++a) {
      auto plane = parse_matrix(js[static_cast<std::size_t>(a)], vars, static_cast<std::size_t>(rank), static_cast<std::size_t>(rank),
                                "algebroid.structure");
      C[static_cast<std::size_t>(a)] = std::move(plane);
    }
  }
  try {
    mf.algebroid = make_algebroid(mf.chart, rank, std::move(anchor), std::move(C));
  } catch (const std::invalid_argument& e) {
    throw ManifestError(std::string("algebroid: ") + e.what());
  }

  if (j.contains("convention")) {
    std::string c = j["convention"].get<std::string>();
    if (c == "plain")
      mf.convention = DConvention::Plain;
    else if (c == "half")
      mf.convention = DConvention::Half;
    else
      throw ManifestError("convention must be 'plain' or 'half'");
  }

  if (j.contains("grid")) {
    const json& jg = j["grid"];
    check_keys(jg, "grid", {"count", "seed", "strategy"});
    if (jg.contains("count")) mf.grid_count = jg["count"].get<std::size_t>();
    if (jg.contains("seed")) mf.seed = jg["seed"].get<unsigned>();
    if (jg.contains("strategy")) mf.strategy = jg["strategy"].get<std::string>();
    if (mf.grid_count == 0) throw ManifestError("grid.count must be positive");
  }

  if (j.contains("tolerances")) {
    const json& jt = j["tolerances"];
    check_keys(jt, "tolerances", {"eq", "nonzero", "classify"});
    if (jt.contains("eq")) mf.tol_eq = jt["eq"].get<double>();
    if (jt.contains("nonzero")) mf.tol_nonzero = jt["nonzero"].get<double>();
    if (jt.contains("classify")) mf.tol_classify = jt["classify"].get<double>();
  }

  if (j.contains("structure")) {
    const json& js = j["structure"];
    check_keys(js, "structure", {"F", "xi", "eta", "metric"});
    std::size_t m = static_cast<std::size_t>(rank);
    TensorField F = TensorField::endomorphism(
        mf.algebroid, parse_matrix(need(js, "F", "structure"), vars, m, m, "structure.F"));
    TensorField xi =
        TensorField::section(mf.algebroid, parse_vector(need(js, "xi", "structure"), vars, m, "structure.xi"));
    TensorField eta = TensorField::one_form(
        mf.algebroid, parse_vector(need(js, "eta", "structure"), vars, m, "structure.eta"));
    AlmostContactStructure acs{mf.algebroid, std::move(F), std::move(xi), std::move(eta),
                               std::nullopt, mf.convention};
    if (js.contains("metric")) {
      const json& jm = js["metric"];
      if (jm.is_string() && jm.get<std::string>() == "synthesize") {
        acs.metric = build_compatible_metric(acs, BundleMetric::euclidean(mf.algebroid));
      } else {
        acs.metric =
            BundleMetric{mf.algebroid, parse_matrix(jm, vars, m, m, "structure.metric")};
      }
    }
    mf.structure = std::move(acs);
  }
  return mf;
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw ManifestError("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_manifest(j);
}

BigTangentSpec load_bigtangent_spec(const std::string& path, int dim_override) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open metric file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw ManifestError("malformed JSON in '" + path + "': " + e.what());
  }
  check_keys(j, "metric file", {"dim", "g", "box", "margin"});
  BigTangentSpec spec;
  const json& jg = need(j, "g", "metric file");
  spec.n = j.contains("dim") ? j["dim"].get<int>() : int(jg.size());
  if (dim_override > 0 && spec.n != dim_override)
    throw ManifestError("metric file dimension does not match --dim");
  if (spec.n < 1) throw ManifestError("metric file: dimension must be positive");
  std::vector<std::string> xvars;
  for (int i = 1; i <= spec.n; ++i) xvars.push_back("x" + std::to_string(i));
  spec.g = parse_matrix(jg, xvars, static_cast<std::size_t>(spec.n), static_cast<std::size_t>(spec.n), "metric file g");
  if (j.contains("margin")) spec.margin = j["margin"].get<double>();
  if (j.contains("box")) {
    const json& jb = j["box"];
    check_keys(jb, "metric file box", {"x", "y", "p"});
    auto bx = parse_box(need(jb, "x", "box"), static_cast<std::size_t>(spec.n), "box.x");
    auto by = parse_box(need(jb, "y", "box"), static_cast<std::size_t>(spec.n), "box.y");
    auto bp = parse_box(need(jb, "p", "box"), static_cast<std::size_t>(spec.n), "box.p");
    spec.box = bx;
    spec.box.insert(spec.box.end(), by.begin(), by.end());
    spec.box.insert(spec.box.end(), bp.begin(), bp.end());
  } else {
    spec.box.assign(static_cast<std::size_t>(3 * spec.n), {-1.5, 1.5});
  }
  return spec;
}

nlohmann::ordered_json point_json(const Point& p) {
  json arr = json::array();
  for (double c : p.coords) arr.push_back(c);
  return arr;
}

nlohmann::ordered_json report_json(const Report& report) {
  json checks = json::array();
  for (const auto& e : report.entries) {
    json c;
    c["name"] = e.name;
    c["value"] = e.value;
    c["threshold"] = e.threshold;
    c["mode"] = e.mode == CheckResult::Mode::MaxBelow ? "max_below" : "min_above";
    c["pass"] = e.pass;
    if (!e.worst.coords.empty()) c["worst_point"] = point_json(e.worst);
    if (!e.note.empty()) c["note"] = e.note;
    checks.push_back(std::move(c));
  }
  json out;
  out["pass"] = report.all_pass();
  out["checks"] = std::move(checks);
  return out;
}

}  // namespace lalg

#include "hamla/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>
#define TOML_EXCEPTIONS 1
#include <toml.hpp>

namespace hamla {
namespace {

using json = nlohmann::ordered_json;

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string indexed(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void reject_unknown(const toml::table& t, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : t) {
    if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end())
      throw SchemaError(join(path, key.str()), "unknown key");
  }
}

const toml::table* table_at(const toml::table& t, std::string_view key, const std::string& path) {
  const toml::node* n = t.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) throw SchemaError(join(path, key), "expected a table");
  return n->as_table();
}

const toml::array& array_of(const toml::node& n, const std::string& path) {
  if (!n.is_array()) throw SchemaError(path, "expected an array");
  return *n.as_array();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Expression and shape failures while building fields are reported against
// the document path that produced them.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw SchemaError(path, e.what());
  } catch (const ShapeError& e) {
    throw SchemaError(path, e.what());
  }
}

// With a chart the text is also parsed, so syntax errors and unknown names
// point at the element that holds them.
std::string expr_text(const toml::node& n, const std::string& path, const Chart* chart = nullptr) {
  if (auto s = n.value_exact<std::string>()) {
    if (chart) at_path(path, [&] { return chart->parse(*s); });
    return *s;
  }
  if (auto i = n.value_exact<std::int64_t>()) return std::to_string(*i);
  if (auto d = n.value_exact<double>()) return format_double(*d);
  throw SchemaError(path, "expected an expression string or a number");
}

std::vector<std::string> expr_list(const toml::node& n, const std::string& path, const Chart* chart = nullptr) {
  const auto& arr = array_of(n, path);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(expr_text(arr[i], indexed(path, i), chart));
  return out;
}

double number(const toml::node& n, const std::string& path) {
  if (auto d = n.value<double>(); d && (n.is_number())) return *d;
  throw SchemaError(path, "expected a number");
}

std::int64_t integer(const toml::node& n, const std::string& path) {
  if (auto i = n.value_exact<std::int64_t>()) return *i;
  throw SchemaError(path, "expected an integer");
}

std::string string_at(const toml::node& n, const std::string& path) {
  if (auto s = n.value_exact<std::string>()) return *s;
  throw SchemaError(path, "expected a string");
}

std::vector<double> number_list(const toml::node& n, const std::string& path) {
  const auto& arr = array_of(n, path);
  std::vector<double> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(number(arr[i], indexed(path, i)));
  return out;
}

std::vector<std::string> components_of(const toml::table& t, const std::string& path, const Chart& chart) {
  reject_unknown(t, path, {"components"});
  const toml::node* n = t.get("components");
  if (!n) throw SchemaError(join(path, "components"), "missing");
  return expr_list(*n, join(path, "components"), &chart);
}

void require_count(std::size_t got, std::size_t want, const std::string& path) {
  if (got != want)
    throw SchemaError(path, "expected " + std::to_string(want) + " entries, got " + std::to_string(got));
}

StructureConstants named_lie_algebra(const std::string& name, int rank, const std::string& path) {
  if (name == "so3") return StructureConstants::so3();
  if (name == "abelian") {
    if (rank < 1) throw SchemaError(path, "abelian algebra needs rank >= 1");
    return StructureConstants::abelian(rank);
  }
  throw SchemaError(path, "unknown lie_algebra '" + name + "' (so3, abelian)");
}

int frame_index(const toml::node& n, int r, const std::string& path) {
  std::int64_t v = integer(n, path);
  if (v < 1 || v > r) throw SchemaError(path, "frame index must be in 1.." + std::to_string(r));
  return static_cast<int>(v - 1);
}

int coordinate_ref(const toml::node& n, const Chart& chart, const std::string& path) {
  if (auto s = n.value_exact<std::string>()) {
    int i = chart.index_of(*s);
    if (i < 0) throw SchemaError(path, "unknown coordinate '" + *s + "'");
    return i;
  }
  return frame_index(n, chart.dim(), path);
}

// structure = [ {a = 1, b = 2, g = 3, value = "1"}, ... ], 1-based; c^g_{ba} follows by antisymmetry.
std::vector<std::vector<std::vector<std::string>>> sparse_structure(const toml::node& n, int r,
                                                                    const std::string& path,
                                                                    const Chart* chart = nullptr) {
  std::vector<std::vector<std::vector<std::string>>> dense(
      r, std::vector<std::vector<std::string>>(r, std::vector<std::string>(r, "0")));
  const auto& arr = array_of(n, path);
  for (std::size_t k = 0; k < arr.size(); ++k) {
    std::string p = indexed(path, k);
    if (!arr[k].is_table()) throw SchemaError(p, "expected a table {a, b, g, value}");
    const auto& t = *arr[k].as_table();
    reject_unknown(t, p, {"a", "b", "g", "value"});
    for (auto key : {"a", "b", "g", "value"})
      if (!t.get(key)) throw SchemaError(join(p, key), "missing");
    int a = frame_index(*t.get("a"), r, join(p, "a"));
    int b = frame_index(*t.get("b"), r, join(p, "b"));
    int g = frame_index(*t.get("g"), r, join(p, "g"));
    if (a == b) throw SchemaError(p, "a and b must differ");
    std::string v = expr_text(*t.get("value"), join(p, "value"), chart);
    dense[a][b][g] = v;
    dense[b][a][g] = "-(" + v + ")";
  }
  return dense;
}

Field structure_field(const toml::table& t, const ChartPtr& chart, int rank, const std::string& path,
                      std::span<const Point> probe) {
  const toml::node* lie = t.get("lie_algebra");
  const toml::node* st = t.get("structure");
  if (lie && st) throw SchemaError(path, "give either lie_algebra or structure");
  if (lie) {
    auto c = named_lie_algebra(string_at(*lie, join(path, "lie_algebra")), rank, join(path, "lie_algebra"));
    if (c.rank() != rank) throw SchemaError(join(path, "rank"), "rank does not match lie_algebra");
    return Field::constant(chart, FieldKind::Table, c.upper());
  }
  if (!st) return Field::zero(chart, FieldKind::Table, pair_count(rank) * static_cast<std::size_t>(rank));
  auto dense = sparse_structure(*st, rank, join(path, "structure"), chart.get());
  return at_path(join(path, "structure"), [&] { return structure_from_dense(chart, rank, dense, probe); });
}

std::vector<VectorField> vector_field_list(const toml::node& n, const ChartPtr& chart, const std::string& path) {
  const auto& arr = array_of(n, path);
  std::vector<VectorField> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string p = indexed(path, i);
    auto comps = expr_list(arr[i], p, chart.get());
    require_count(comps.size(), static_cast<std::size_t>(chart->dim()), p);
    out.push_back(at_path(p, [&] { return vector_field(chart, comps); }));
  }
  return out;
}

AlgebroidPtr parse_algebroid(const toml::table& t, const PoissonChartPtr& P, const Validation& v) {
  const std::string path = "algebroid";
  const toml::node* kn = t.get("kind");
  if (!kn) throw SchemaError(join(path, "kind"), "missing");
  std::string kind = string_at(*kn, join(path, "kind"));
  const ChartPtr& chart = P->chart();
  auto rank_of = [&](bool required) -> int {
    const toml::node* rn = t.get("rank");
    if (!rn) {
      if (required) throw SchemaError(join(path, "rank"), "missing");
      return 0;
    }
    std::int64_t r = integer(*rn, join(path, "rank"));
    if (r < 1 || r > 16) throw SchemaError(join(path, "rank"), "rank must be in 1..16");
    return static_cast<int>(r);
  };

  if (kind == "cotangent") {
    reject_unknown(t, path, {"kind"});
    return make_cotangent_algebroid(P, v);
  }
  if (kind == "tangent") {
    reject_unknown(t, path, {"kind"});
    return make_tangent_algebroid(P);
  }
  if (kind == "action") {
    reject_unknown(t, path, {"kind", "lie_algebra", "rank", "structure", "generators"});
    const toml::node* gn = t.get("generators");
    if (!gn) throw SchemaError(join(path, "generators"), "missing");
    auto gens = vector_field_list(*gn, chart, join(path, "generators"));
    int r = static_cast<int>(gens.size());
    if (int declared = rank_of(false); declared && declared != r)
      throw SchemaError(join(path, "rank"), "rank does not match the number of generators");
    StructureConstants c(r);
    if (const toml::node* lie = t.get("lie_algebra")) {
      if (t.get("structure")) throw SchemaError(path, "give either lie_algebra or structure");
      c = named_lie_algebra(string_at(*lie, join(path, "lie_algebra")), r, join(path, "lie_algebra"));
      if (c.rank() != r) throw SchemaError(join(path, "generators"), "need one generator per basis element");
    } else if (const toml::node* st = t.get("structure")) {
      auto dense = sparse_structure(*st, r, join(path, "structure"));
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
          for (int g = 0; g < r; ++g) {
            std::string p = join(path, "structure");
            // Action algebras need constant structure constants.
            Expr e = at_path(p, [&] { return parse_expr(dense[a][b][g], {}); });
            c.raw(a, b, g) = e.value({});
          }
    } else {
      throw SchemaError(path, "action algebroid needs lie_algebra or structure");
    }
    return make_action_algebroid(P, c, gens, v);
  }
  if (kind == "lie_algebra_bundle") {
    reject_unknown(t, path, {"kind", "lie_algebra", "rank", "structure"});
    int r = rank_of(t.get("lie_algebra") == nullptr);
    if (!r) r = named_lie_algebra(string_at(*t.get("lie_algebra"), join(path, "lie_algebra")), 1, path).rank();
    return make_lie_algebra_bundle(P, r, structure_field(t, chart, r, path, v.points), v);
  }
  if (kind == "custom") {
    reject_unknown(t, path, {"kind", "rank", "anchor", "structure", "lie_algebra"});
    int r = rank_of(true);
    const toml::node* an = t.get("anchor");
    if (!an) throw SchemaError(join(path, "anchor"), "missing");
    auto anchors = vector_field_list(*an, chart, join(path, "anchor"));
    require_count(anchors.size(), static_cast<std::size_t>(r), join(path, "anchor"));
    // rho^i_a at i * r + a
    std::vector<Field> entries;
    for (int i = 0; i < chart->dim(); ++i)
      for (int a = 0; a < r; ++a) entries.push_back(anchors[static_cast<std::size_t>(a)].component(static_cast<std::size_t>(i)));
    Field anchor = stack(chart, FieldKind::Table, entries);
    return make_custom_algebroid(P, r, anchor, structure_field(t, chart, r, path, v.points), v);
  }
  throw SchemaError(join(path, "kind"),
                    "unknown kind '" + kind + "' (cotangent, tangent, action, lie_algebra_bundle, custom)");
}

Connection parse_connection(const toml::table& t, const AlgebroidPtr& A) {
  const std::string path = "connection";
  reject_unknown(t, path, {"kind", "gamma", "entries"});
  std::string kind = "trivial";
  if (const toml::node* kn = t.get("kind")) kind = string_at(*kn, join(path, "kind"));
  if (kind == "trivial") {
    if (t.get("gamma") || t.get("entries")) throw SchemaError(path, "a trivial connection takes no coefficients");
    return Connection::trivial(A);
  }
  if (kind != "table") throw SchemaError(join(path, "kind"), "unknown kind '" + kind + "' (trivial, table)");
  const int n = A->dim();
  const int r = A->rank();
  std::vector<std::string> coeffs(static_cast<std::size_t>(n * r * r), "0");
  if (const toml::node* gn = t.get("gamma")) {
    // gamma[i][g][b] = Gamma^g_{ib}
    std::string p = join(path, "gamma");
    const auto& gi = array_of(*gn, p);
    require_count(gi.size(), static_cast<std::size_t>(n), p);
    for (int i = 0; i < n; ++i) {
      std::string pi = indexed(p, static_cast<std::size_t>(i));
      const auto& gg = array_of(gi[static_cast<std::size_t>(i)], pi);
      require_count(gg.size(), static_cast<std::size_t>(r), pi);
      for (int g = 0; g < r; ++g) {
        std::string pg = indexed(pi, static_cast<std::size_t>(g));
        auto row = expr_list(gg[static_cast<std::size_t>(g)], pg, A->chart().get());
        require_count(row.size(), static_cast<std::size_t>(r), pg);
        for (int b = 0; b < r; ++b) coeffs[Connection::index(r, i, g, b)] = row[static_cast<std::size_t>(b)];
      }
    }
  }
  if (const toml::node* en = t.get("entries")) {
    std::string p = join(path, "entries");
    const auto& arr = array_of(*en, p);
    for (std::size_t k = 0; k < arr.size(); ++k) {
      std::string pk = indexed(p, k);
      if (!arr[k].is_table()) throw SchemaError(pk, "expected a table {i, g, b, value}");
      const auto& e = *arr[k].as_table();
      reject_unknown(e, pk, {"i", "g", "b", "value"});
      for (auto key : {"i", "g", "b", "value"})
        if (!e.get(key)) throw SchemaError(join(pk, key), "missing");
      int i = coordinate_ref(*e.get("i"), *A->chart(), join(pk, "i"));
      int g = frame_index(*e.get("g"), r, join(pk, "g"));
      int b = frame_index(*e.get("b"), r, join(pk, "b"));
      coeffs[Connection::index(r, i, g, b)] = expr_text(*e.get("value"), join(pk, "value"), A->chart().get());
    }
  }
  return at_path(path, [&] { return Connection::from_strings(A, coeffs); });
}

BivectorField parse_poisson(const toml::table& t, const ChartPtr& chart, std::span<const Point> probe) {
  const std::string path = "poisson";
  reject_unknown(t, path, {"matrix", "upper"});
  const toml::node* m = t.get("matrix");
  const toml::node* u = t.get("upper");
  if (m && u) throw SchemaError(path, "give either matrix or upper");
  if (u) {
    auto comps = expr_list(*u, join(path, "upper"), chart.get());
    require_count(comps.size(), pair_count(chart->dim()), join(path, "upper"));
    return at_path(join(path, "upper"), [&] { return bivector_from_upper(chart, comps); });
  }
  if (!m) throw SchemaError(path, "missing matrix or upper");
  std::string p = join(path, "matrix");
  const auto& rows = array_of(*m, p);
  require_count(rows.size(), static_cast<std::size_t>(chart->dim()), p);
  std::vector<std::vector<std::string>> mat;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    mat.push_back(expr_list(rows[i], indexed(p, i), chart.get()));
    require_count(mat.back().size(), static_cast<std::size_t>(chart->dim()), indexed(p, i));
  }
  return at_path(p, [&] { return bivector_from_matrix(chart, mat, probe); });
}

Expectation parse_expectation(const toml::node& n, const std::string& path) {
  Expectation e;
  if (auto b = n.value_exact<bool>()) {
    e.pass = *b;
    return e;
  }
  if (!n.is_table()) throw SchemaError(path, "expected a boolean or a table");
  const auto& t = *n.as_table();
  reject_unknown(t, path, {"pass", "max_residual", "within", "metrics"});
  if (const toml::node* p = t.get("pass")) {
    auto b = p->value_exact<bool>();
    if (!b) throw SchemaError(join(path, "pass"), "expected a boolean");
    e.pass = *b;
  }
  if (const toml::node* r = t.get("max_residual")) e.max_residual = number(*r, join(path, "max_residual"));
  if (const toml::node* w = t.get("within")) {
    e.within = number(*w, join(path, "within"));
    if (!(e.within >= 0)) throw SchemaError(join(path, "within"), "must be non-negative");
  }
  if (const toml::node* m = t.get("metrics")) {
    if (!m->is_table()) throw SchemaError(join(path, "metrics"), "expected a table");
    for (const auto& [k, v] : *m->as_table())
      e.metrics[std::string(k.str())] = number(v, join(join(path, "metrics"), k.str()));
  }
  return e;
}

std::vector<Point> parse_sampling(const toml::table* t, int n, std::uint64_t& seed, bool seed_forced) {
  const std::string path = "sampling";
  SampleBox box = SampleBox::cube(n, -1.0, 1.0);
  std::size_t count = kDefaultSampleCount;
  std::vector<Point> explicit_points;
  if (t) {
    reject_unknown(*t, path, {"lo", "hi", "box", "count", "seed", "points"});
    if (t->get("box") && (t->get("lo") || t->get("hi"))) throw SchemaError(path, "give either box or lo/hi");
    if (const toml::node* lo = t->get("lo")) box.lo.assign(static_cast<std::size_t>(n), number(*lo, join(path, "lo")));
    if (const toml::node* hi = t->get("hi")) box.hi.assign(static_cast<std::size_t>(n), number(*hi, join(path, "hi")));
    if (const toml::node* b = t->get("box")) {
      std::string p = join(path, "box");
      const auto& arr = array_of(*b, p);
      require_count(arr.size(), static_cast<std::size_t>(n), p);
      for (std::size_t i = 0; i < arr.size(); ++i) {
        auto iv = number_list(arr[i], indexed(p, i));
        require_count(iv.size(), 2, indexed(p, i));
        box.lo[i] = iv[0];
        box.hi[i] = iv[1];
      }
    }
    for (int i = 0; i < n; ++i)
      if (!(box.lo[static_cast<std::size_t>(i)] <= box.hi[static_cast<std::size_t>(i)]))
        throw SchemaError(path, "empty sampling box in direction " + std::to_string(i + 1));
    if (const toml::node* c = t->get("count")) {
      std::int64_t v = integer(*c, join(path, "count"));
      if (v < 0 || v > 100000) throw SchemaError(join(path, "count"), "count must be in 0..100000");
      count = static_cast<std::size_t>(v);
    }
    if (const toml::node* s = t->get("seed"); s && !seed_forced) {
      std::int64_t v = integer(*s, join(path, "seed"));
      if (v < 0) throw SchemaError(join(path, "seed"), "seed must be non-negative");
      seed = static_cast<std::uint64_t>(v);
    }
    if (const toml::node* ps = t->get("points")) {
      std::string p = join(path, "points");
      const auto& arr = array_of(*ps, p);
      for (std::size_t i = 0; i < arr.size(); ++i) {
        auto pt = number_list(arr[i], indexed(p, i));
        require_count(pt.size(), static_cast<std::size_t>(n), indexed(p, i));
        explicit_points.push_back(pt);
      }
    }
  }
  auto sampled = sample_box(box, count, seed);
  explicit_points.insert(explicit_points.end(), sampled.begin(), sampled.end());
  if (explicit_points.empty()) throw SchemaError(path, "no sample points");
  return explicit_points;
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "poisson",        "algebroid",           "H1",          "H2",           "H3",
      "H1_pre",         "H2_pre",              "H3_pre",      "liouville",    "pointwise",
      "invariance",     "coisotropy",          "momentum_connection",         "symplectic_suite",
      "classify_connection", "theorem41",      "bivector_map", "pi_hat_brackets", "pi_A_brackets"};
  return names;
}

double Scenario::tolerance_for(const std::string& check) const {
  if (auto it = tolerance_overrides.find(check); it != tolerance_overrides.end()) return it->second;
  if (check == "momentum_connection" || check == "coisotropy") return std::max(tolerance, 1e-8);
  return tolerance;
}

Scenario parse_scenario(std::string_view text, const std::string& source_name, const ScenarioOverrides& ov) {
  toml::table doc;
  try {
    doc = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    const auto& b = e.source().begin;
    throw SchemaError("", std::string(e.description()) + " at line " + std::to_string(b.line) + ", column " +
                              std::to_string(b.column));
  }
  reject_unknown(doc, "",
                 {"name", "description", "jet_order", "chart", "poisson", "algebroid", "connection", "momentum",
                  "eta", "eta_bar", "sampling", "tolerance", "checks", "expect", "symplectic", "coisotropy",
                  "fiber", "pointwise"});

  Scenario s;
  s.source = std::string(text);
  if (const toml::node* n = doc.get("name")) s.name = string_at(*n, "name");
  else throw SchemaError("name", "missing");
  if (const toml::node* n = doc.get("description")) s.description = string_at(*n, "description");

  if (const toml::node* n = doc.get("jet_order")) {
    std::int64_t k = integer(*n, "jet_order");
    s.jet_order = static_cast<int>(k);
    if (k < 1 || k > kMaxJetOrder) throw SchemaError("jet_order", "must be in 1.." + std::to_string(kMaxJetOrder));
  }
  if (ov.jet_order) {
    if (*ov.jet_order < 1 || *ov.jet_order > kMaxJetOrder)
      throw SchemaError("jet_order", "override must be in 1.." + std::to_string(kMaxJetOrder));
    s.jet_order = *ov.jet_order;
  }

  const toml::table* chart_t = table_at(doc, "chart", "");
  if (!chart_t) throw SchemaError("chart", "missing");
  reject_unknown(*chart_t, "chart", {"coordinates"});
  const toml::node* coords = chart_t->get("coordinates");
  if (!coords) throw SchemaError("chart.coordinates", "missing");
  std::vector<std::string> names;
  {
    const auto& arr = array_of(*coords, "chart.coordinates");
    for (std::size_t i = 0; i < arr.size(); ++i) names.push_back(string_at(arr[i], indexed("chart.coordinates", i)));
  }
  s.chart = at_path("chart.coordinates", [&] { return Chart::make(names); });
  const int n = s.chart->dim();

  if (ov.seed) s.seed = *ov.seed;
  s.points = parse_sampling(table_at(doc, "sampling", ""), n, s.seed, ov.seed.has_value());

  if (const toml::table* t = table_at(doc, "tolerance", "")) {
    for (const auto& [k, v] : *t) {
      std::string key(k.str());
      double tol = number(v, join("tolerance", key));
      if (!(tol > 0)) throw SchemaError(join("tolerance", key), "must be positive");
      if (key == "default") {
        s.tolerance = tol;
      } else {
        const auto& kc = known_checks();
        if (std::find(kc.begin(), kc.end(), key) == kc.end()) throw SchemaError(join("tolerance", key), "unknown check");
        s.tolerance_overrides[key] = tol;
      }
    }
  }
  if (ov.tolerance) {
    if (!(*ov.tolerance > 0)) throw SchemaError("tolerance.default", "override must be positive");
    s.tolerance = *ov.tolerance;
    s.tolerance_overrides.clear();
  }

  const toml::table* poisson_t = table_at(doc, "poisson", "");
  if (!poisson_t) throw SchemaError("poisson", "missing");
  s.poisson = PoissonChart::make(parse_poisson(*poisson_t, s.chart, s.points));

  Validation v{s.points, s.jet_order, std::max(s.tolerance, kDefaultTolerance)};
  if (const toml::table* t = table_at(doc, "algebroid", "")) s.algebroid = parse_algebroid(*t, s.poisson, v);

  if (const toml::table* t = table_at(doc, "connection", "")) {
    if (!s.algebroid) throw SchemaError("connection", "a connection needs an [algebroid]");
    s.connection = parse_connection(*t, s.algebroid);
  } else if (s.algebroid) {
    s.connection = Connection::trivial(s.algebroid);
  }

  if (const toml::table* t = table_at(doc, "momentum", "")) {
    auto comps = components_of(*t, "momentum", *s.chart);
    std::size_t want = static_cast<std::size_t>(s.algebroid ? s.algebroid->rank() : n);
    require_count(comps.size(), want, "momentum.components");
    s.momentum = at_path("momentum.components",
                         [&] { return Field::from_strings(s.chart, FieldKind::Table, comps); });
  }
  auto one_form_at = [&](const char* key) -> std::optional<OneForm> {
    const toml::table* t = table_at(doc, key, "");
    if (!t) return std::nullopt;
    auto comps = components_of(*t, key, *s.chart);
    std::string p = join(key, "components");
    require_count(comps.size(), static_cast<std::size_t>(n), p);
    return at_path(p, [&] { return one_form(s.chart, comps); });
  };
  s.eta = one_form_at("eta");
  s.eta_bar = one_form_at("eta_bar");

  if (const toml::table* t = table_at(doc, "symplectic", "")) {
    reject_unknown(*t, "symplectic", {"n"});
    const toml::node* nn = t->get("n");
    if (!nn) throw SchemaError("symplectic.n", "missing");
    auto comps = expr_list(*nn, "symplectic.n", s.chart.get());
    require_count(comps.size(), static_cast<std::size_t>(n), "symplectic.n");
    s.symplectic_n = at_path("symplectic.n", [&] { return vector_field(s.chart, comps); });
  }
  if (const toml::table* t = table_at(doc, "coisotropy", "")) {
    reject_unknown(*t, "coisotropy", {"point", "delta"});
    if (const toml::node* p = t->get("point")) {
      s.coisotropy_point = number_list(*p, "coisotropy.point");
      require_count(s.coisotropy_point->size(), static_cast<std::size_t>(n), "coisotropy.point");
    }
    if (const toml::node* d = t->get("delta")) {
      s.coisotropy_delta = number(*d, "coisotropy.delta");
      if (!(s.coisotropy_delta > 0)) throw SchemaError("coisotropy.delta", "must be positive");
    }
  }
  if (const toml::table* t = table_at(doc, "fiber", "")) {
    reject_unknown(*t, "fiber", {"lo", "hi"});
    if (const toml::node* lo = t->get("lo")) s.fiber_lo = number(*lo, "fiber.lo");
    if (const toml::node* hi = t->get("hi")) s.fiber_hi = number(*hi, "fiber.hi");
    if (!(s.fiber_lo <= s.fiber_hi)) throw SchemaError("fiber", "lo must not exceed hi");
  }
  if (const toml::table* t = table_at(doc, "pointwise", "")) {
    reject_unknown(*t, "pointwise", {"points"});
    if (const toml::node* c = t->get("points")) {
      std::int64_t k = integer(*c, "pointwise.points");
      if (k < 1) throw SchemaError("pointwise.points", "must be positive");
      s.pointwise_points = static_cast<std::size_t>(k);
    }
  }

  const toml::table* checks_t = table_at(doc, "checks", "");
  if (!checks_t) throw SchemaError("checks", "missing");
  reject_unknown(*checks_t, "checks", {"run"});
  const toml::node* run = checks_t->get("run");
  if (!run) throw SchemaError("checks.run", "missing");
  {
    const auto& arr = array_of(*run, "checks.run");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string p = indexed("checks.run", i);
      std::string c = string_at(arr[i], p);
      const auto& kc = known_checks();
      if (std::find(kc.begin(), kc.end(), c) == kc.end()) throw SchemaError(p, "unknown check '" + c + "'");
      if (!seen.insert(c).second) throw SchemaError(p, "duplicate check '" + c + "'");
      s.checks.push_back(c);
    }
  }

  if (const toml::table* t = table_at(doc, "expect", "")) {
    for (const auto& [k, node] : *t) {
      std::string key(k.str());
      if (std::find(s.checks.begin(), s.checks.end(), key) == s.checks.end())
        throw SchemaError(join("expect", key), "not among checks.run");
      s.expect[key] = parse_expectation(node, join("expect", key));
    }
  }

  // Requirements of the requested checks that can be decided without evaluation.
  for (const auto& c : s.checks) {
    std::string p = "checks.run";
    bool needs_algebroid = c != "poisson" && c != "liouville";
    if (needs_algebroid && !s.algebroid) throw SchemaError(p, "check '" + c + "' needs an [algebroid]");
    if ((c == "liouville" || c == "coisotropy") && !s.momentum)
      throw SchemaError(p, "check '" + c + "' needs [momentum]");
    if (c == "liouville" && s.algebroid && s.algebroid->kind() != AlgebroidKind::Cotangent)
      throw SchemaError(p, "liouville reads the momentum as a vector field and needs the cotangent algebroid");
    if (c == "momentum_connection") {
      if (s.algebroid->kind() != AlgebroidKind::Cotangent)
        throw SchemaError(p, "momentum_connection needs the cotangent algebroid");
      if (!s.eta) throw SchemaError(p, "momentum_connection needs [eta]");
    }
    if (c == "symplectic_suite") {
      if (s.algebroid->kind() != AlgebroidKind::Tangent)
        throw SchemaError(p, "symplectic_suite needs the tangent algebroid");
      if (!s.symplectic_n) throw SchemaError(p, "symplectic_suite needs [symplectic] n");
    }
    if (c == "classify_connection" && s.algebroid->kind() != AlgebroidKind::Tangent &&
        s.algebroid->kind() != AlgebroidKind::Cotangent)
      throw SchemaError(p, "classify_connection needs the tangent or cotangent algebroid");
  }
  return s;
}

Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path, overrides);
}

namespace {

HamiltonianInstance instance_of(const Scenario& s, const std::string& check) {
  const auto& A = s.algebroid;
  SectionAStar mu = s.momentum ? SectionAStar(s.momentum->retagged(FieldKind::SectionAStar))
                               : SectionAStar(Field::zero(s.chart, FieldKind::SectionAStar,
                                                          static_cast<std::size_t>(A->rank())));
  HamiltonianInstance inst{A, *s.connection, mu, s.eta, s.eta_bar, s.points};
  inst.order = s.jet_order;
  inst.tol = s.tolerance_for(check);
  inst.seed = s.seed;
  return inst;
}

CheckReport poisson_check(const Scenario& s, double tol) {
  CheckReport rep;
  rep.tolerance = tol;
  TrivectorField T = s.poisson->jacobiator();
  for (const auto& p : s.points) {
    double scale = std::max(1.0, residual_at(s.poisson->pi(), p, s.jet_order));
    rep.add(p, residual_at(T, p, s.jet_order), scale);
  }
  const int n = s.chart->dim();
  auto vals = T.values(s.points.front(), s.jet_order);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        rep.metrics["schouten_" + std::to_string(i + 1) + std::to_string(j + 1) + std::to_string(k + 1)] =
            vals[triple_index(n, i, j, k)];
  rep.finalize();
  return rep;
}

CheckReport algebroid_check(const Scenario& s, double tol) {
  CheckReport rep;
  rep.tolerance = tol;
  for (const auto& p : s.points) {
    std::span<const Point> one(&p, 1);
    double jac = s.algebroid->jacobiator_residual(one, s.jet_order).value;
    double anc = s.algebroid->anchor_residual(one, s.jet_order).value;
    rep.metric_max("jacobiator", jac);
    rep.metric_max("anchor", anc);
    rep.add(p, std::max(jac, anc));
  }
  rep.finalize();
  return rep;
}

Point coisotropy_point(const Scenario& s) {
  if (s.coisotropy_point) return *s.coisotropy_point;
  for (const auto& p : s.points) {
    auto v = s.momentum->values(p, 0);
    double norm = 0;
    for (double x : v) norm += x * x;
    if (std::sqrt(norm) <= s.coisotropy_delta) return p;
  }
  throw PreconditionError("no sample point lies on the zero set of the momentum section; set [coisotropy] point");
}

CheckReport momentum_connection_check(const Scenario& s, double tol) {
  MomentumConnectionOptions opt;
  opt.points = s.points;
  opt.order = s.jet_order;
  opt.tol = tol;
  const Connection& D = *s.connection;
  Connection Dp = build_momentum_connection(s.poisson, D, *s.eta, s.eta_bar, opt);
  OneForm eta = *s.eta;
  SectionAStar mu(as_dual_section(pi_sharp(s.poisson->pi(), eta)));
  HamiltonianInstance inst{s.algebroid, Dp, mu, s.eta, s.eta_bar, s.points};
  inst.order = s.jet_order;
  inst.tol = tol;
  inst.seed = s.seed;
  CheckReport h1 = check_H1(inst);
  CheckReport h2 = check_H2(inst);

  const int n = s.chart->dim();
  Connection T0 = D.dual();
  Connection T1 = Dp.dual();
  CheckReport rep;
  rep.tolerance = tol;
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    const Point& p = s.points[k];
    double torsion = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        auto di = coordinate_vector(s.chart, i);
        auto dj = coordinate_vector(s.chart, j);
        torsion = std::max(torsion, residual_at(subtract(T1.torsion_TM(di, dj), T0.torsion_TM(di, dj)), p, s.jet_order));
      }
    // delta^g_{ib} = Gamma'^g_{ib} - Gamma^g_{ib} must be symmetric in (i, g)
    auto g1 = Dp.coefficients().values(p, s.jet_order);
    auto g0 = D.coefficients().values(p, s.jet_order);
    double asym = 0;
    for (int i = 0; i < n; ++i)
      for (int g = 0; g < n; ++g)
        for (int b = 0; b < n; ++b) {
          double dig = g1[Connection::index(n, i, g, b)] - g0[Connection::index(n, i, g, b)];
          double dgi = g1[Connection::index(n, g, i, b)] - g0[Connection::index(n, g, i, b)];
          asym = std::max(asym, std::abs(dig - dgi));
        }
    rep.metric_max("h1", h1.residuals[k]);
    rep.metric_max("h2", h2.residuals[k]);
    rep.metric_max("torsion_change", torsion);
    rep.metric_max("shift_asymmetry", asym);
    double res = std::max({h1.residuals[k] / h1.scales[k], h2.residuals[k] / h2.scales[k], torsion, asym});
    rep.add(p, res * h2.scales[k], h2.scales[k]);
  }
  rep.finalize();
  return rep;
}

}  // namespace

CheckReport run_check(const Scenario& s, const std::string& name) {
  const double tol = s.tolerance_for(name);
  const int order = s.jet_order;
  CheckReport rep;
  if (name == "poisson") {
    rep = poisson_check(s, tol);
  } else if (name == "algebroid") {
    rep = algebroid_check(s, tol);
  } else if (name == "H1") {
    rep = check_H1(instance_of(s, name));
  } else if (name == "H2") {
    rep = check_H2(instance_of(s, name));
  } else if (name == "H3") {
    rep = check_H3(instance_of(s, name));
  } else if (name == "H1_pre" || name == "H2_pre" || name == "H3_pre") {
    auto inst = instance_of(s, name);
    TwoForm omega = inverse_two_form(s.poisson->pi());
    rep = name == "H1_pre" ? check_H1_pre(inst, omega)
          : name == "H2_pre" ? check_H2_pre(inst, omega)
                             : check_H3_pre(inst, omega);
  } else if (name == "liouville") {
    VectorField mu(s.momentum->retagged(FieldKind::Vector));
    rep = liouville_residual(s.poisson, mu, s.eta, s.points, order, tol);
  } else if (name == "pointwise") {
    std::size_t k = std::min(s.pointwise_points, s.points.size());
    rep = pointwise_checks(instance_of(s, name), std::span<const Point>(s.points.data(), k));
  } else if (name == "invariance") {
    rep = invariance_residual(instance_of(s, name));
  } else if (name == "coisotropy") {
    CoisotropyOptions opt;
    opt.delta = s.coisotropy_delta;
    opt.tol = tol;
    rep = coisotropy_witness(instance_of(s, name), coisotropy_point(s), opt);
  } else if (name == "momentum_connection") {
    rep = momentum_connection_check(s, tol);
  } else if (name == "symplectic_suite") {
    rep = symplectic_suite(s.poisson, *s.connection, *s.symplectic_n, s.points, order, tol);
  } else if (name == "classify_connection") {
    rep = classify_connection(s.poisson, *s.connection, s.points, order, tol);
  } else if (name == "theorem41") {
    rep = theorem41_check(*s.connection, s.points, order, tol);
  } else if (name == "bivector_map") {
    rep = bivector_map_residual(instance_of(s, name));
  } else if (name == "pi_hat_brackets" || name == "pi_A_brackets") {
    auto total = total_space_points(s.points, s.algebroid->rank(), s.fiber_lo, s.fiber_hi, s.seed);
    rep = name == "pi_hat_brackets" ? pi_hat_bracket_check(*s.connection, total, order, tol)
                                    : pi_A_bracket_check(*s.algebroid, total, order, tol);
  } else {
    throw SchemaError("checks.run", "unknown check '" + name + "'");
  }
  rep.name = name;
  rep.seed = s.seed;
  return rep;
}

namespace {

bool close(double got, double want, double within) {
  if (std::isnan(got)) return false;
  return std::abs(got - want) <= within;
}

bool meets(const CheckOutcome& o) {
  if (o.error) return false;
  const Expectation& e = *o.expected;
  if (e.pass && *e.pass != o.report.pass) return false;
  if (e.max_residual && !close(o.report.max_residual, *e.max_residual, e.within)) return false;
  for (const auto& [k, want] : e.metrics) {
    auto it = o.report.metrics.find(k);
    if (it == o.report.metrics.end() || !close(it->second, want, e.within)) return false;
  }
  return true;
}

// Evaluation errors raised inside a sweep do not always know their point;
// rerun the check one point at a time to find it.
Point failing_point(const Scenario& s, const std::string& name, const Error& e) {
  if (auto* v = dynamic_cast<const ValidationError*>(&e); v && !v->point().empty()) return v->point();
  if (auto* v = dynamic_cast<const PreconditionError*>(&e); v && !v->point().empty()) return v->point();
  if (!dynamic_cast<const DomainError*>(&e)) return {};
  Scenario one = s;
  for (const auto& p : s.points) {
    one.points = {p};
    try {
      run_check(one, name);
    } catch (const DomainError&) {
      return p;
    } catch (const Error&) {
    }
  }
  return {};
}

std::string digest(std::string_view text) {
  // FNV-1a, stable across platforms
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

Report run_checks(const Scenario& s) {
  auto start = std::chrono::steady_clock::now();
  Report r;
  r.scenario = s.name;
  r.digest = digest(s.source);
  r.seed = s.seed;
  r.jet_order = s.jet_order;
  r.point_count = s.points.size();
  for (const auto& name : s.checks) {
    CheckOutcome o;
    o.name = name;
    auto it = s.expect.find(name);
    o.expected = it != s.expect.end() ? it->second : Expectation{true, std::nullopt, {}, 1e-9};
    try {
      o.report = run_check(s, name);
    } catch (const Error& e) {
      o.error = e.what();
      o.error_point = failing_point(s, name, e);
      o.report = CheckReport{};
      o.report.name = name;
      o.report.tolerance = s.tolerance_for(name);
      o.report.seed = s.seed;
      o.report.pass = false;
      r.evaluation_error = true;
    }
    o.expectation_met = meets(o);
    r.verdict = r.verdict && o.report.pass;
    r.expectations_met = r.expectations_met && o.expectation_met;
    r.checks.push_back(std::move(o));
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

int exit_code(const Report& r) {
  if (r.evaluation_error) return 2;
  return r.expectations_met ? 0 : 1;
}

namespace {

json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json expectation_json(const Expectation& e) {
  json j = json::object();
  j["pass"] = e.pass ? json(*e.pass) : json(nullptr);
  j["max_residual"] = e.max_residual ? number_json(*e.max_residual) : json(nullptr);
  json m = json::object();
  for (const auto& [k, v] : e.metrics) m[k] = number_json(v);
  j["metrics"] = m;
  j["within"] = e.within;
  return j;
}

json check_json(const CheckOutcome& o) {
  const CheckReport& r = o.report;
  json j = json::object();
  j["name"] = o.name;
  j["max_residual"] = number_json(r.max_residual);
  j["max_scaled_residual"] = number_json(r.max_scaled_residual);
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["points"] = r.points.size();
  j["worst_point"] = r.worst_point;
  json m = json::object();
  for (const auto& [k, v] : r.metrics) m[k] = number_json(v);
  j["metrics"] = m;
  j["notes"] = r.notes;
  j["expected"] = expectation_json(*o.expected);
  j["expectation_met"] = o.expectation_met;
  j["error"] = o.error ? json(*o.error) : json(nullptr);
  j["error_point"] = o.error_point.empty() ? json(nullptr) : json(o.error_point);
  return j;
}

std::string sci(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string expectation_text(const Expectation& e) {
  std::string out = e.pass ? (*e.pass ? "pass" : "fail") : "any";
  if (e.max_residual) out += ", max " + sci(*e.max_residual);
  for (const auto& [k, v] : e.metrics) out += ", " + k + " " + sci(v);
  return out;
}

}  // namespace

std::string emit_report(const Report& r, ReportFormat format) {
  if (format == ReportFormat::Json) {
    json j = json::object();
    j["scenario"] = r.scenario;
    j["digest"] = r.digest;
    j["seed"] = r.seed;
    j["jet_order"] = r.jet_order;
    j["points"] = r.point_count;
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(check_json(c));
    j["checks"] = checks;
    j["verdict"] = r.verdict ? "PASS" : "FAIL";
    j["expectations_met"] = r.expectations_met;
    j["evaluation_error"] = r.evaluation_error;
    j["tool_version"] = HAMLA_VERSION;
    j["schema_version"] = kReportSchemaVersion;
    j["wall_time"] = r.wall_time;
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "scenario " << r.scenario << "  seed " << r.seed << "  jet order " << r.jet_order << "  points "
      << r.point_count << "\n";
  out << std::left << std::setw(22) << "check" << std::setw(7) << "result" << std::setw(12) << "max resid"
      << std::setw(12) << "scaled" << std::setw(10) << "tol" << "expected\n";
  for (const auto& c : r.checks) {
    const CheckReport& rep = c.report;
    out << std::left << std::setw(22) << c.name << std::setw(7) << (c.error ? "ERROR" : rep.pass ? "PASS" : "FAIL")
        << std::setw(12) << sci(rep.max_residual) << std::setw(12) << sci(rep.max_scaled_residual) << std::setw(10)
        << sci(rep.tolerance) << expectation_text(*c.expected) << (c.expectation_met ? "" : "  MISMATCH") << "\n";
    if (c.error) {
      out << "    error: " << *c.error;
      if (!c.error_point.empty()) out << " at " << format_point(c.error_point);
      out << "\n";
    }
    if (!rep.pass && !c.error && !rep.worst_point.empty()) out << "    worst at " << format_point(rep.worst_point) << "\n";
    for (const auto& note : rep.notes) out << "    note: " << note << "\n";
  }
  out << "verdict " << (r.verdict ? "PASS" : "FAIL") << "  expectations "
      << (r.expectations_met ? "met" : "not met") << "\n";
  return out.str();
}

const GalleryEntry* find_gallery(std::string_view name) {
  for (const auto& e : gallery())
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace hamla

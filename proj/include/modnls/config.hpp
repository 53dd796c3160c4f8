#pragma once

// JSON run configuration. Every section is optional; unknown fields are
// rejected with the field path and the line it appears on.

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "modnls/solver.hpp"
#include "modnls/verify.hpp"

namespace modnls {

class ConfigError : public Error {
public:
  using Error::Error;
};

struct DataSpec {
  std::string kind = "gaussian";  ///< gaussian | random | file
  double width = 1.5;
  std::vector<double> center;
  std::vector<double> momentum;
  double band = 2.0;
  std::optional<double> amplitude = 0.05;  ///< ||u0||_{M^s_{2,q}}; absent keeps the raw profile
  std::string path;
};

struct DeltaSearchSpec {
  bool enabled = false;
  double lo = 0.02;
  double hi = 0.2;
  int steps = 6;
  int probe_iters = 4;
  double threshold = 0.9;
};

struct RunConfig {
  SolveConfig solve;
  DataSpec data;
  DeltaSearchSpec delta_search;
  bool compare_oracle = true;
  VerifySettings verify;
  nlohmann::ordered_json effective;  ///< the configuration actually used, defaults filled in
};

namespace detail {

inline int line_of(const std::string& text, const std::vector<std::string>& path) {
  if (text.empty()) return 0;
  std::size_t pos = 0;
  for (const auto& key : path) {
    const auto at = text.find("\"" + key + "\"", pos);
    if (at == std::string::npos) return 0;
    pos = at + 1;
  }
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

/// Typed view of one JSON object that remembers which keys were read.
class Section {
public:
  Section(const nlohmann::json& j, std::vector<std::string> path, const std::string& text)
      : j_(j), path_(std::move(path)), text_(text) {
    if (!j_.is_object()) fail({}, "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    auto p = path_;
    if (!key.empty()) p.push_back(key);
    std::string name;
    for (const auto& s : p) name += (name.empty() ? "" : ".") + s;
    const int line = line_of(text_, p);
    throw ConfigError("config field '" + name + "'" + (line ? " (line " + std::to_string(line) + ")" : "") + ": " + what);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const std::string& key, std::optional<double> def) {
    if (!has(key)) return def;
    if (j_.at(key).is_null()) return std::nullopt;
    return number(key, 0.0);
  }

  long integer(const std::string& key, long def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  /// Integer, decimal or "a/b" / "inf" string.
  Rational rational(const std::string& key, const Rational& def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    try {
      if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
      if (v.is_string()) return Rational::parse(v.get<std::string>());
    } catch (const Error& e) {
      fail(key, e.what());
    }
    fail(key, "expected an integer or a string such as \"4/3\" or \"inf\"");
  }

  cplx complex(const std::string& key, cplx def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
      return {v[0].get<double>(), v[1].get<double>()};
    fail(key, "expected a number or [re, im]");
  }

  std::vector<double> vector(const std::string& key, std::vector<double> def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key, "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::optional<Section> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    auto p = path_;
    p.push_back(key);
    return Section(j_.at(key), p, text_);
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
  }

private:
  const nlohmann::json& j_;
  std::vector<std::string> path_;
  const std::string& text_;
  std::set<std::string> seen_;
};

template <class F>
auto guarded(Section& s, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    s.fail(key, e.what());
  }
}

inline GridSpec read_grid(Section& s, GridSpec def) {
  const int d = static_cast<int>(s.integer("d", def.d));
  const int M = static_cast<int>(s.integer("M", def.M));
  const int n = static_cast<int>(s.integer("n", def.n));
  s.finish();
  return guarded(s, "", [&] { return make_grid_m(d, M, n); });
}

inline PartitionSpec read_partition(Section& s, PartitionSpec def) {
  PartitionSpec p = def;
  if (s.has("kind")) p.kind = guarded(s, "kind", [&] { return parse_partition_kind(s.string("kind", "")); });
  p.K_max = static_cast<int>(s.integer("K_max", def.K_max));
  s.finish();
  return p;
}

inline EquationCoeffs read_equation(Section& s, EquationCoeffs def) {
  const double a = s.number("alpha", def.alpha);
  const double b = s.number("beta", def.beta);
  const double g = s.number("gamma", def.gamma);
  s.finish();
  return guarded(s, "", [&] { return EquationCoeffs(a, b, g); });
}

inline NonlinSpec read_nonlinearity(Section& s, const NonlinSpec& def) {
  const std::string kind = s.string("kind", def.zero ? "none" : def.kind == NonlinKind::Power ? "power" : "exponential");
  NonlinSpec out;
  if (kind == "none") {
    out = NonlinSpec::none();
  } else if (kind == "power") {
    const std::string pattern = s.string("pattern", def.kind == NonlinKind::Power && !def.zero ? def.pattern_string() : "u,conj,u");
    const cplx c = s.complex("coeff", def.coeff);
    out = guarded(s, "pattern", [&] { return NonlinSpec::power(parse_pattern(pattern), c); });
  } else if (kind == "exponential") {
    const cplx lambda = s.complex("lambda", def.lambda);
    const double rho = s.number("rho", def.rho);
    const int cutoff = static_cast<int>(s.integer("cutoff", def.cutoff));
    out = guarded(s, "", [&] { return NonlinSpec::exponential(lambda, rho, cutoff); });
  } else {
    s.fail("kind", "expected none, power or exponential");
  }
  s.finish();
  return out;
}

inline nlohmann::ordered_json complex_json(cplx c) { return nlohmann::ordered_json::array({c.real(), c.imag()}); }

inline nlohmann::ordered_json nonlin_json(const NonlinSpec& n) {
  if (n.zero) return {{"kind", "none"}};
  if (n.kind == NonlinKind::Power) return {{"kind", "power"}, {"pattern", n.pattern_string()}, {"coeff", complex_json(n.coeff)}};
  return {{"kind", "exponential"}, {"lambda", complex_json(n.lambda)}, {"rho", n.rho}, {"cutoff", n.cutoff}};
}

inline nlohmann::ordered_json partition_json(const PartitionSpec& p) { return {{"kind", to_string(p.kind)}, {"K_max", p.K_max}}; }

inline nlohmann::ordered_json grid_config_json(const GridSpec& g) { return {{"d", g.d}, {"M", g.M}, {"n", g.n}}; }

inline nlohmann::ordered_json equation_json(const EquationCoeffs& c) {
  return {{"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma}};
}

}  // namespace detail

/// The configuration actually in force, as JSON.
inline nlohmann::ordered_json effective_json(const RunConfig& rc) {
  using detail::complex_json;
  const SolveConfig& c = rc.solve;
  nlohmann::ordered_json j;
  j["grid"] = detail::grid_config_json(c.grid);
  j["partition"] = detail::partition_json(c.partition);
  j["equation"] = detail::equation_json(c.coeffs);
  j["nonlinearity"] = detail::nonlin_json(c.nonlin);
  j["time"] = {{"t_min", c.t_min}, {"t_max", c.t_max}, {"intervals", c.intervals}};
  j["norm"] = {{"s", c.s}, {"q", c.q.str()}, {"r", c.r.str()}, {"p", c.p.str()}};
  j["solver"] = {{"delta", c.delta},
                 {"max_iters", c.max_iters},
                 {"tolerance", c.tolerance},
                 {"oracle_substeps", c.oracle_substeps},
                 {"override_hypotheses", c.override_hypotheses},
                 {"s_reading", c.s_reading == SReading::NonNegative ? "nonnegative" : "at-least-p"},
                 {"tail_tolerance", c.tail_tolerance},
                 {"compare_oracle", rc.compare_oracle}};
  nlohmann::ordered_json d{{"kind", rc.data.kind}};
  if (rc.data.kind == "file") {
    d["path"] = rc.data.path;
  } else {
    d["band"] = rc.data.band;
    if (rc.data.kind == "gaussian") {
      d["width"] = rc.data.width;
      d["center"] = rc.data.center;
      d["momentum"] = rc.data.momentum;
    }
  }
  d["amplitude"] = rc.data.amplitude ? nlohmann::ordered_json(*rc.data.amplitude) : nlohmann::ordered_json(nullptr);
  j["data"] = d;
  const auto& ds = rc.delta_search;
  j["delta_search"] = {{"enabled", ds.enabled}, {"lo", ds.lo},           {"hi", ds.hi},
                       {"steps", ds.steps},     {"probe_iters", ds.probe_iters}, {"threshold", ds.threshold}};
  const auto& v = rc.verify;
  const auto& h = v.harness;
  const auto& e = v.ensemble;
  j["harness"] = {{"grid", detail::grid_config_json(h.grid)},
                  {"partition", detail::partition_json(h.partition)},
                  {"equation", detail::equation_json(h.coeffs)},
                  {"time", {{"t_min", h.t_min}, {"t_max", h.t_max}, {"intervals", h.intervals}}},
                  {"s", h.s},
                  {"q", h.q},
                  {"p", v.p.str()},
                  {"r", v.r.str()},
                  {"refine", v.refine},
                  {"drift_limit", v.drift_limit},
                  {"lipschitz_band", v.lipschitz_band},
                  {"lipschitz_pattern", v.lipschitz_pattern},
                  {"ensemble",
                   {{"count", e.count},
                    {"law", to_string(e.law)},
                    {"decay", e.decay},
                    {"amplitude", e.amplitude},
                    {"band", e.band},
                    {"boxes", e.boxes}}}};
  return j;
}

/// Parses configuration text; `seed` feeds the ensemble and random data.
inline RunConfig parse_config(const std::string& text, std::uint64_t seed) {
  nlohmann::json root;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    root = nlohmann::json::object();
  } else {
    try {
      root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      const auto upto = std::min<std::size_t>(e.byte, text.size());
      const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
      throw ConfigError("config parse error at line " + std::to_string(line) + ": " + e.what());
    }
  }
  RunConfig rc;
  SolveConfig& c = rc.solve;
  detail::Section top(root, {}, text);
  if (auto s = top.child("grid")) c.grid = detail::read_grid(*s, c.grid);
  if (auto s = top.child("partition")) c.partition = detail::read_partition(*s, c.partition);
  if (auto s = top.child("equation")) c.coeffs = detail::read_equation(*s, c.coeffs);
  if (auto s = top.child("nonlinearity")) c.nonlin = detail::read_nonlinearity(*s, c.nonlin);
  if (auto s = top.child("time")) {
    c.t_min = s->number("t_min", c.t_min);
    c.t_max = s->number("t_max", c.t_max);
    const long n = s->integer("intervals", static_cast<long>(c.intervals));
    if (n < 1) s->fail("intervals", "must be positive");
    c.intervals = static_cast<std::size_t>(n);
    if (!(c.t_min < c.t_max)) s->fail("t_max", "must exceed t_min");
    s->finish();
  }
  if (auto s = top.child("norm")) {
    c.s = s->number("s", c.s);
    c.q = s->rational("q", c.q);
    c.r = s->rational("r", c.r);
    c.p = s->rational("p", c.p);
    if (c.q < Rational(1)) s->fail("q", "must be >= 1");
    s->finish();
  }
  if (auto s = top.child("solver")) {
    c.delta = s->number("delta", c.delta);
    c.max_iters = static_cast<int>(s->integer("max_iters", c.max_iters));
    c.tolerance = s->number("tolerance", c.tolerance);
    c.oracle_substeps = static_cast<int>(s->integer("oracle_substeps", c.oracle_substeps));
    c.override_hypotheses = s->boolean("override_hypotheses", c.override_hypotheses);
    const std::string reading = s->string("s_reading", "nonnegative");
    if (reading == "nonnegative")
      c.s_reading = SReading::NonNegative;
    else if (reading == "at-least-p")
      c.s_reading = SReading::AtLeastP;
    else
      s->fail("s_reading", "expected nonnegative or at-least-p");
    c.tail_tolerance = s->number("tail_tolerance", c.tail_tolerance);
    rc.compare_oracle = s->boolean("compare_oracle", rc.compare_oracle);
    if (c.max_iters < 1) s->fail("max_iters", "must be positive");
    s->finish();
  }
  if (auto s = top.child("data")) {
    auto& d = rc.data;
    d.kind = s->string("kind", d.kind);
    if (d.kind != "gaussian" && d.kind != "random" && d.kind != "file") s->fail("kind", "expected gaussian, random or file");
    d.width = s->number("width", d.width);
    d.center = s->vector("center", d.center);
    d.momentum = s->vector("momentum", d.momentum);
    d.band = s->number("band", d.band);
    d.amplitude = s->optional_number("amplitude", d.amplitude);
    d.path = s->string("path", d.path);
    if (d.kind == "file" && d.path.empty()) s->fail("path", "required when kind is file");
    s->finish();
  }
  if (auto s = top.child("delta_search")) {
    auto& ds = rc.delta_search;
    ds.enabled = s->boolean("enabled", ds.enabled);
    ds.lo = s->number("lo", ds.lo);
    ds.hi = s->number("hi", ds.hi);
    ds.steps = static_cast<int>(s->integer("steps", ds.steps));
    ds.probe_iters = static_cast<int>(s->integer("probe_iters", ds.probe_iters));
    ds.threshold = s->number("threshold", ds.threshold);
    if (!(0.0 < ds.lo && ds.lo < ds.hi)) s->fail("hi", "needs 0 < lo < hi");
    s->finish();
  }
  auto& v = rc.verify;
  if (auto s = top.child("harness")) {
    auto& h = v.harness;
    if (auto g = s->child("grid")) h.grid = detail::read_grid(*g, h.grid);
    if (auto p = s->child("partition")) h.partition = detail::read_partition(*p, h.partition);
    if (auto e = s->child("equation")) h.coeffs = detail::read_equation(*e, h.coeffs);
    if (auto t = s->child("time")) {
      h.t_min = t->number("t_min", h.t_min);
      h.t_max = t->number("t_max", h.t_max);
      const long n = t->integer("intervals", static_cast<long>(h.intervals));
      if (n < 1) t->fail("intervals", "must be positive");
      h.intervals = static_cast<std::size_t>(n);
      t->finish();
    }
    h.s = s->number("s", h.s);
    h.q = s->number("q", h.q);
    v.p = s->rational("p", v.p);
    v.r = s->rational("r", v.r);
    v.refine = s->boolean("refine", v.refine);
    v.drift_limit = s->number("drift_limit", v.drift_limit);
    v.lipschitz_band = s->number("lipschitz_band", v.lipschitz_band);
    v.lipschitz_pattern = s->string("lipschitz_pattern", v.lipschitz_pattern);
    if (auto e = s->child("ensemble")) {
      auto& en = v.ensemble;
      const long count = e->integer("count", static_cast<long>(en.count));
      if (count < 1) e->fail("count", "must be positive");
      en.count = static_cast<std::size_t>(count);
      if (e->has("law")) en.law = detail::guarded(*e, "law", [&] { return parse_field_law(e->string("law", "")); });
      en.decay = e->number("decay", en.decay);
      en.amplitude = e->number("amplitude", en.amplitude);
      en.band = e->number("band", en.band);
      en.boxes = static_cast<int>(e->integer("boxes", en.boxes));
      detail::guarded(*e, "", [&] { en.validate(); return 0; });
      e->finish();
    }
    detail::guarded(*s, "grid", [&] { return Partition(h.partition, h.grid).box_count(); });
    s->finish();
  }
  v.ensemble.seed = seed;
  top.finish();
  detail::guarded(top, "partition", [&] { return Partition(c.partition, c.grid).box_count(); });
  rc.effective = effective_json(rc);
  return rc;
}

inline RunConfig load_config(const std::string& path, std::uint64_t seed) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), seed);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace modnls

#include "flrw/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "flrw/errors.hpp"
#include "flrw/extended_real.hpp"

namespace flrw::cli {

std::string to_string(DataKind k) {
  switch (k) {
    case DataKind::gaussian: return "gaussian";
    case DataKind::plane_wave: return "plane_wave";
    case DataKind::flat: return "flat";
    case DataKind::file: return "file";
  }
  return "?";
}

namespace {

DataKind parse_kind(const std::string& s) {
  for (DataKind k : {DataKind::gaussian, DataKind::plane_wave, DataKind::flat, DataKind::file})
    if (to_string(k) == s) return k;
  throw DomainError("unknown data kind '" + s + "' (gaussian | plane_wave | flat | file)");
}

std::string trim(std::string s) {
  auto sp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && sp(s.back())) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && sp(s[b])) ++b;
  return s.substr(b);
}

double real(const std::string& s) {
  const ExtendedReal x = ExtendedReal::parse(s);
  return x.as_double();
}

long integer(const std::string& s) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    throw DomainError("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw DomainError("not an integer: '" + s + "'");
  return v;
}

bool boolean(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw DomainError("not a boolean: '" + s + "'");
}

std::string opt_real(const std::optional<double>& v) { return v ? format_double(*v) : "default"; }

struct Entry {
  KeySpec spec;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define FLRW_REAL(sec, key, field, help)                                                   \
  Entry {                                                                                  \
    {sec, key, format_double(RunConfig{}.field), help},                                    \
        [](RunConfig& c, const std::string& v) { c.field = real(v); },                     \
        [](const RunConfig& c) { return format_double(c.field); }                          \
  }
#define FLRW_INT(sec, key, field, help)                                                    \
  Entry {                                                                                  \
    {sec, key, std::to_string(RunConfig{}.field), help},                                   \
        [](RunConfig& c, const std::string& v) { c.field = static_cast<int>(integer(v)); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                         \
  }
#define FLRW_BOOL(sec, key, field, help)                                                   \
  Entry {                                                                                  \
    {sec, key, RunConfig{}.field ? "true" : "false", help},                                \
        [](RunConfig& c, const std::string& v) { c.field = boolean(v); },                  \
        [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }         \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back({{"cosmology", "n", "", "spatial dimension"},
                 [](RunConfig& c, const std::string& v) { c.cosmology.n = static_cast<int>(integer(v)); },
                 [](const RunConfig& c) { return std::to_string(c.cosmology.n); }});
    t.push_back({{"cosmology", "H", "", "Hubble constant"},
                 [](RunConfig& c, const std::string& v) { c.cosmology.hubble = real(v); },
                 [](const RunConfig& c) { return format_double(c.cosmology.hubble); }});
    t.push_back(FLRW_REAL("cosmology", "sigma", cosmology.sigma, "equation-of-state parameter"));
    t.push_back(FLRW_REAL("cosmology", "c", cosmology.c, "speed of light"));
    t.push_back({{"cosmology", "m", "", "mass"},
                 [](RunConfig& c, const std::string& v) { c.cosmology.mass = real(v); },
                 [](const RunConfig& c) { return format_double(c.cosmology.mass); }});
    t.push_back(FLRW_REAL("cosmology", "a0", cosmology.a0, "scale factor at t = 0"));

    t.push_back({{"nonlinearity", "lambda", "0", "coupling (real part)"},
                 [](RunConfig& c, const std::string& v) { c.nonlinearity.lambda.real(real(v)); },
                 [](const RunConfig& c) { return format_double(c.nonlinearity.lambda.real()); }});
    t.push_back({{"nonlinearity", "lambda_imag", "0", "coupling (imaginary part)"},
                 [](RunConfig& c, const std::string& v) { c.nonlinearity.lambda.imag(real(v)); },
                 [](const RunConfig& c) { return format_double(c.nonlinearity.lambda.imag()); }});
    t.push_back(FLRW_REAL("nonlinearity", "p", nonlinearity.p, "power"));
    t.push_back({{"nonlinearity", "form", "gauge_invariant", "gauge_invariant | gauge_variant"},
                 [](RunConfig& c, const std::string& v) { c.nonlinearity.form = parse_nonlinear_form(v); },
                 [](const RunConfig& c) { return to_string(c.nonlinearity.form); }});
    t.push_back(FLRW_REAL("nonlinearity", "kappa", nonlinearity.kappa, "blow-up exponent kappa"));
    t.push_back(FLRW_REAL("nonlinearity", "kappa_star", nonlinearity.kappa_star, "blow-up exponent kappa_*"));

    t.push_back(FLRW_REAL("exponents", "mu0", exponents.mu0, "Sobolev order of the data space"));
    t.push_back(FLRW_REAL("exponents", "mu", exponents.mu, "Sobolev order of the solution space"));
    t.push_back({{"exponents", "inv_q", "default", "1/q, or 'default' for the upper endpoint"},
                 [](RunConfig& c, const std::string& v) {
                   c.exponents.inv_q = v == "default" ? std::optional<double>{} : std::optional<double>{real(v)};
                 },
                 [](const RunConfig& c) { return opt_real(c.exponents.inv_q); }});
    t.push_back(FLRW_REAL("exponents", "C", exponents.C, "absolute constant C"));
    t.push_back(FLRW_REAL("exponents", "C0", exponents.C0, "absolute constant C0"));
    t.push_back({{"exponents", "D", "default", "data size D_mu0, or 'default' to measure the data"},
                 [](RunConfig& c, const std::string& v) {
                   c.exponents.D = v == "default" ? std::optional<double>{} : std::optional<double>{real(v)};
                 },
                 [](const RunConfig& c) { return opt_real(c.exponents.D); }});

    t.push_back(FLRW_INT("grid", "points", grid.points, "points per axis (power of two)"));
    t.push_back(FLRW_REAL("grid", "length", grid.length, "box side"));

    t.push_back(FLRW_REAL("solver", "t_end", t_end, "final time"));
    t.push_back(FLRW_REAL("solver", "dt", solver.dt, "time step"));
    t.push_back(FLRW_INT("solver", "slab_steps", solver.slab_steps, "Duhamel slab length in steps"));
    t.push_back(FLRW_REAL("solver", "picard_tol", solver.picard_tol, "Picard tolerance"));
    t.push_back(FLRW_INT("solver", "picard_max", solver.picard_max, "Picard iteration cap"));
    t.push_back({{"solver", "scheme", "mol", "duhamel | mol | both"},
                 [](RunConfig& c, const std::string& v) { c.solver.scheme = parse_scheme(v); },
                 [](const RunConfig& c) { return to_string(c.solver.scheme); }});
    t.push_back(FLRW_INT("solver", "output_stride", solver.output_stride, "steps between stored states"));
    t.push_back(FLRW_INT("solver", "pad", solver.pad, "nonlinear evaluation refinement"));
    t.push_back(FLRW_REAL("solver", "horizon_fraction", solver.horizon_fraction, "stop at this fraction of T0"));
    t.push_back(FLRW_BOOL("solver", "adaptive", solver.adaptive, "nonlinear CFL step control"));
    t.push_back(FLRW_REAL("solver", "cfl", solver.cfl, "adaptive CFL number"));
    t.push_back(FLRW_REAL("solver", "min_dt", solver.min_dt, "adaptive step floor"));
    t.push_back(FLRW_REAL("solver", "norm_cap_factor", solver.norm_cap_factor, "stop at this multiple of ||u0||"));
    t.push_back({{"solver", "ledger_rule", "trapezoid", "trapezoid | simpson"},
                 [](RunConfig& c, const std::string& v) {
                   if (v == "trapezoid") c.ledger_rule = TimeRule::trapezoid;
                   else if (v == "simpson") c.ledger_rule = TimeRule::simpson;
                   else throw DomainError("unknown ledger rule '" + v + "' (trapezoid | simpson)");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.ledger_rule == TimeRule::simpson ? "simpson" : "trapezoid");
                 }});

    t.push_back(FLRW_REAL("blowup", "growth_factor", blowup.growth_factor, "detect at this multiple of ||u0||"));
    t.push_back(FLRW_REAL("blowup", "t_star_slack", blowup.t_star_slack, "detected time <= (1 + slack) T*"));
    t.push_back(FLRW_REAL("blowup", "claim_tol", blowup.claim_tol, "gdot >= -tol max|gdot|"));
    t.push_back(FLRW_REAL("blowup", "envelope_tol", blowup.envelope_tol, "G envelope tolerance"));

    t.push_back({{"data", "kind", "gaussian", "gaussian | plane_wave | flat | file"},
                 [](RunConfig& c, const std::string& v) { c.data.kind = parse_kind(v); },
                 [](const RunConfig& c) { return to_string(c.data.kind); }});
    t.push_back(FLRW_REAL("data", "amplitude", data.amplitude, "amplitude"));
    t.push_back(FLRW_REAL("data", "width", data.width, "gaussian width"));
    t.push_back(FLRW_REAL("data", "velocity_ratio", data.velocity_ratio, "u1 = ratio * u0"));
    t.push_back({{"data", "k", "1,0,0", "plane-wave lattice index"},
                 [](RunConfig& c, const std::string& v) {
                   std::array<int, 3> k{0, 0, 0};
                   std::stringstream ss(v);
                   std::string part;
                   int i = 0;
                   while (std::getline(ss, part, ',')) {
                     if (i >= 3) throw DomainError("k has more than 3 components");
                     k[i++] = static_cast<int>(integer(trim(part)));
                   }
                   if (i == 0) throw DomainError("k is empty");
                   c.data.k = k;
                 },
                 [](const RunConfig& c) {
                   return std::to_string(c.data.k[0]) + "," + std::to_string(c.data.k[1]) + "," +
                          std::to_string(c.data.k[2]);
                 }});
    t.push_back(FLRW_REAL("data", "modulation", data.modulation, "flat data modulation depth"));
    t.push_back({{"data", "path", "", "snapshot of u0 (kind = file)"},
                 [](RunConfig& c, const std::string& v) { c.data.path = v; },
                 [](const RunConfig& c) { return c.data.path; }});
    t.push_back({{"data", "velocity_path", "", "snapshot of u1 (kind = file)"},
                 [](RunConfig& c, const std::string& v) { c.data.velocity_path = v; },
                 [](const RunConfig& c) { return c.data.velocity_path; }});

    t.push_back({{"output", "directory", "flrwkg-out", "artifact directory"},
                 [](RunConfig& c, const std::string& v) { c.output.directory = v; },
                 [](const RunConfig& c) { return c.output.directory; }});
    t.push_back({{"output", "seed", std::to_string(RunConfig{}.output.seed), "seed for randomized suites"},
                 [](RunConfig& c, const std::string& v) {
                   const long s = integer(v);
                   if (s < 0) throw DomainError("seed must be >= 0");
                   c.output.seed = static_cast<std::uint64_t>(s);
                 },
                 [](const RunConfig& c) { return std::to_string(c.output.seed); }});
    t.push_back(FLRW_BOOL("output", "snapshots", output.snapshots, "write binary field snapshots"));
    return t;
  }();
  return table;
}

#undef FLRW_REAL
#undef FLRW_INT
#undef FLRW_BOOL

const std::vector<std::string>& section_order() {
  static const std::vector<std::string> s{"cosmology", "nonlinearity", "exponents", "grid",
                                          "solver",    "blowup",       "data",      "output"};
  return s;
}

void collect(const std::function<void()>& f, std::vector<std::string>& out) {
  try {
    f();
  } catch (const HypothesisError& e) {
    for (const auto& v : e.violations()) out.push_back(v);
  } catch (const ConfigError& e) {
    for (const auto& v : e.problems()) out.push_back(v);
  } catch (const Error& e) {
    out.push_back(e.what());
  }
}

}  // namespace

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> t = [] {
    std::vector<KeySpec> out;
    for (const auto& e : entries()) out.push_back(e.spec);
    return out;
  }();
  return t;
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides, bool apply_env) {
  namespace pt = boost::property_tree;
  std::vector<std::string> problems;
  // section -> key -> value
  std::map<std::string, std::map<std::string, std::string>> values;

  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({std::string("config syntax: ") + e.what()});
  }
  for (const auto& [sec, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      problems.push_back("key '" + sec + "' outside any section");
      continue;
    }
    for (const auto& [key, leaf] : body) values[sec][key] = trim(leaf.data());
  }
  // file < environment < --set
  if (apply_env) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) values["output"]["directory"] = dir;
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      problems.push_back("override '" + o + "' is not section.key=value");
      continue;
    }
    values[trim(o.substr(0, dot))][trim(o.substr(dot + 1, eq - dot - 1))] = trim(o.substr(eq + 1));
  }

  std::set<std::pair<std::string, std::string>> known;
  for (const auto& e : entries()) known.insert({e.spec.section, e.spec.key});
  const auto& secs = section_order();
  for (const auto& [sec, kv] : values) {
    if (std::find(secs.begin(), secs.end(), sec) == secs.end()) {
      problems.push_back("unknown section [" + sec + "]");
      continue;
    }
    for (const auto& [key, v] : kv)
      if (!known.count({sec, key})) problems.push_back("unknown key '" + key + "' in [" + sec + "]");
  }

  RunConfig c;
  for (const auto& e : entries()) {
    const auto sit = values.find(e.spec.section);
    const bool present = sit != values.end() && sit->second.count(e.spec.key);
    if (!present) {
      if (e.spec.default_value.empty() && e.spec.section == "cosmology")
        problems.push_back("missing required key '" + e.spec.key + "' in [" + e.spec.section +
                           "] (see the key table: flrwkg keys)");
      continue;
    }
    const std::string& v = sit->second.at(e.spec.key);
    try {
      e.set(c, v);
    } catch (const Error& ex) {
      problems.push_back("[" + e.spec.section + "] " + e.spec.key + ": " + ex.what());
    }
  }
  c.grid.n_dim = c.cosmology.n;

  if (problems.empty()) {
    collect([&] { c.cosmology.validate(); }, problems);
    collect([&] { c.nonlinearity.validate(); }, problems);
    collect([&] { c.solver.validate(); }, problems);
    collect(
        [&] {
          GridSpec g = c.grid;
          g.n_dim = std::clamp(g.n_dim, 1, 3);
          g.validate();
        },
        problems);
    if (!(c.t_end > 0.0)) problems.push_back("solver t_end must be > 0");
    if (c.exponents.D && !(*c.exponents.D >= 0.0)) problems.push_back("exponents D must be >= 0");
    if (!(c.exponents.C > 0.0) || !(c.exponents.C0 > 0.0)) problems.push_back("exponents C, C0 must be > 0");
    if (!(c.blowup.growth_factor > 1.0)) problems.push_back("blowup growth_factor must be > 1");
    if (!(c.blowup.t_star_slack >= 0.0)) problems.push_back("blowup t_star_slack must be >= 0");
    if (c.data.kind == DataKind::file && c.data.path.empty()) problems.push_back("data kind = file needs path");
    if (c.data.kind == DataKind::gaussian && !(c.data.width > 0.0)) problems.push_back("data width must be > 0");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string echo_config(const RunConfig& c) {
  std::ostringstream os;
  std::string current;
  for (const auto& e : entries()) {
    if (e.spec.section != current) {
      if (!current.empty()) os << '\n';
      current = e.spec.section;
      os << '[' << current << "]\n";
    }
    const std::string v = e.get(c);
    // Empty strings cannot be written as INI values; the default already is empty.
    if (v.empty()) continue;
    os << e.spec.key << " = " << v << '\n';
  }
  return os.str();
}

FieldState build_initial_data(const RunConfig& c) {
  const GridSpec& g = c.grid;
  g.validate();
  const double L = g.length;
  const auto& d = c.data;
  FieldState s;
  switch (d.kind) {
    case DataKind::gaussian: {
      s.u = to_spectral(sample(g, [&](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int i = 0; i < g.n_dim; ++i) r2 += (x[i] - L / 2) * (x[i] - L / 2);
        return Complex(d.amplitude * std::exp(-r2 / (d.width * d.width)), 0.0);
      }));
      s.ut = d.velocity_ratio * s.u;
      break;
    }
    case DataKind::flat: {
      s.u = to_spectral(sample(g, [&](const std::array<double, 3>& x) {
        return Complex(d.amplitude * (1.0 + d.modulation * std::cos(2.0 * M_PI * x[0] / L)), 0.0);
      }));
      s.ut = d.velocity_ratio * s.u;
      break;
    }
    case DataKind::plane_wave: {
      s.u = SpectralField(g);
      s.ut = SpectralField(g);
      std::size_t flat = 0, stride = 1;
      for (int i = 0; i < g.n_dim; ++i) {
        const int j = d.k[i];
        if (j < -g.points / 2 || j >= g.points / 2) throw ConfigError({"plane_wave k outside the lattice"});
        flat += static_cast<std::size_t>(j < 0 ? j + g.points : j) * stride;
        stride *= static_cast<std::size_t>(g.points);
      }
      s.u.coef[flat] = d.amplitude;
      break;
    }
    case DataKind::file: {
      std::ifstream in(d.path, std::ios::binary);
      if (!in) throw ConfigError({"cannot read snapshot '" + d.path + "'"});
      s.u = read_snapshot(in);
      if (!(s.u.grid == g)) throw ConfigError({"snapshot grid differs from [grid]"});
      s.ut = SpectralField(g);
      if (!d.velocity_path.empty()) {
        std::ifstream vin(d.velocity_path, std::ios::binary);
        if (!vin) throw ConfigError({"cannot read snapshot '" + d.velocity_path + "'"});
        s.ut = read_snapshot(vin);
        if (!(s.ut.grid == g)) throw ConfigError({"velocity snapshot grid differs from [grid]"});
      }
      break;
    }
  }
  return prepare_initial(s, c.nonlinearity);
}

}  // namespace flrw::cli

#pragma once

// Scenario files and plot-data emission behind the qmg command-line tool.
// Every kind is parsed into a typed config (all validation happens there),
// then computed into in-memory files; writing to disk is a separate step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "qmg/auction.hpp"
#include "qmg/clearing.hpp"
#include "qmg/csv.hpp"
#include "qmg/errors.hpp"
#include "qmg/literal.hpp"
#include "qmg/risk.hpp"
#include "qmg/strategy.hpp"
#include "qmg/wigner.hpp"
#include "qmg/zeno.hpp"

namespace qmg {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::json;

/// Malformed scenario document. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("parse error at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
              what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

/// Well-formed document whose content fails the kind's schema.
class ValidationError : public InvalidParameter {
 public:
  ValidationError(std::string field, const std::string& what)
      : InvalidParameter((field.empty() ? std::string("<root>") : field) + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// 2 parse, 3 validation or contract, 4 numerical.
inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return 2;
  if (dynamic_cast<const InvalidParameter*>(&e) || dynamic_cast<const ContractViolation*>(&e)) return 3;
  return 4;
}

/// Line and column of a byte offset (1-based) in text.
inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte points one past the offending character.
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string msg = e.what();
    if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError(line, col, msg);
  }
}

// ---------------------------------------------------------------------------
// Schema helpers

class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ValidationError(at(key), "missing required field");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ValidationError(at(key), "missing required field");
    }
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ValidationError(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(at(key), "must be finite");
    return d;
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double v = number(key, fallback);
    if (!(v > 0)) throw ValidationError(at(key), "must be > 0");
    return v;
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback, std::int64_t min) {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ValidationError(at(key), "missing required field");
    }
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ValidationError(at(key), "expected an integer");
    const auto i = v.get<std::int64_t>();
    if (i < min) throw ValidationError(at(key), "must be >= " + std::to_string(min));
    return i;
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ValidationError(at(key), "missing required field");
    }
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ValidationError(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::string choice(const std::string& key, const std::vector<std::string>& options, std::string fallback) {
    const auto v = string(key, fallback);
    if (std::find(options.begin(), options.end(), v) == options.end()) {
      std::string list;
      for (const auto& o : options) list += (list.empty() ? "" : "|") + o;
      throw ValidationError(at(key), "expected one of " + list);
    }
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ValidationError(at(key), "missing required field");
    }
    const auto& v = j_.at(key);
    if (!v.is_array() || v.empty()) throw ValidationError(at(key), "expected a nonempty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ValidationError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  /// Rejects keys nobody asked for.
  void finish() const {
    for (const auto& item : j_.items())
      if (!used_.count(item.key())) throw ValidationError(at(item.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline RiskParams parse_risk(Fields& parent) {
  if (!parent.has("risk")) return {};
  Fields f(parent.raw("risk"), parent.at("risk"));
  RiskParams r;
  r.hbar_e = f.positive("hbar_e", 1.0);
  r.m = f.positive("m", 1.0);
  r.theta_nc = f.number("theta_nc", 0.0);
  if (r.theta_nc < 0) throw ValidationError(f.at("theta_nc"), "must be >= 0");
  const bool has_theta = f.has("theta"), has_omega = f.has("omega");
  if (has_theta && has_omega) throw ValidationError(f.at("omega"), "give either theta or omega, not both");
  if (has_omega) r.theta = 2.0 * std::numbers::pi / f.positive("omega");
  if (has_theta) r.theta = f.positive("theta");
  f.finish();
  return r;
}

inline Representation parse_picture(Fields& f) {
  return f.choice("picture", {"demand", "supply"}, "demand") == "supply" ? Representation::supply
                                                                          : Representation::demand;
}

inline Strategy parse_strategy_at(const json& v, const std::string& path, Representation rep,
                                  const RiskParams& risk, const std::filesystem::path& base) {
  if (!v.is_string()) throw ValidationError(path, "expected a strategy literal string");
  try {
    return parse_strategy(v.get<std::string>(), rep, risk, base);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(path, e.what());
  }
}

struct GridSpec {
  double lo, hi;
  std::size_t n;
};

inline std::optional<GridSpec> parse_grid_triplet(Fields& f, const std::string& key) {
  if (!f.has(key)) return std::nullopt;
  const auto& v = f.raw(key);
  const auto path = f.at(key);
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number_integer())
    throw ValidationError(path, "expected [lo, hi, n]");
  GridSpec g{v[0].get<double>(), v[1].get<double>(), static_cast<std::size_t>(std::max<std::int64_t>(0, v[2].get<std::int64_t>()))};
  if (!(g.lo < g.hi)) throw ValidationError(path, "lo must be < hi");
  if (g.n < Grid::kMinPoints) throw ValidationError(path, "n must be >= 8");
  if (g.n > 4001) throw ValidationError(path, "n must be <= 4001");
  return g;
}

// ---------------------------------------------------------------------------
// Results

struct OutputFile {
  std::string name;
  std::string content;
};

struct ScenarioResult {
  std::string kind;
  std::vector<OutputFile> files;
  json manifest;
};

namespace scenario {

struct Context {
  std::uint64_t seed = 0;
  std::filesystem::path base_dir;
};

inline std::string density_csv(const PhaseSpaceDensity& d) {
  csv::Writer w({"p", "q", "w"});
  for (std::size_t ip = 0; ip < d.p_grid().size(); ++ip)
    for (std::size_t iq = 0; iq < d.q_grid().size(); ++iq) w.row(d.p_grid()[ip], d.q_grid()[iq], d(ip, iq));
  return w.str();
}

// --- fixed-point ----------------------------------------------------------

struct FixedPointConfig {
  std::vector<double> sigmas;
};

inline FixedPointConfig parse_fixed_point(Fields& f) {
  FixedPointConfig c{f.numbers("sigmas", std::vector<double>{1.0})};
  for (std::size_t i = 0; i < c.sigmas.size(); ++i) {
    const auto path = f.at("sigmas") + "[" + std::to_string(i) + "]";
    if (!(c.sigmas[i] > 0)) throw ValidationError(path, "must be > 0");
    if (i > 0 && c.sigmas[i] > c.sigmas[i - 1]) throw ValidationError(path, "sigmas must be non-increasing");
  }
  return c;
}

inline ScenarioResult run(const FixedPointConfig& c) {
  ScenarioResult r{"fixed-point", {}, {}};
  csv::Writer w({"sigma", "fixed_point", "max_intensity"});
  for (const auto& row : cooling_experiment(c.sigmas)) w.row(row.sigma, row.fixed_point, row.max_intensity);
  r.files.push_back({"fixed_point.csv", w.str()});
  return r;
}

// --- risk-spectrum --------------------------------------------------------

struct SpectrumConfig {
  RiskParams risk;
  int levels;
};

inline SpectrumConfig parse_spectrum(Fields& f) {
  SpectrumConfig c;
  c.risk = parse_risk(f);
  c.levels = static_cast<int>(f.integer("levels", 10, 1));
  if (c.levels > 100000) throw ValidationError(f.at("levels"), "must be <= 100000");
  return c;
}

inline ScenarioResult run(const SpectrumConfig& c) {
  ScenarioResult r{"risk-spectrum", {}, {}};
  const auto spec = spectrum(c.risk, c.levels);
  csv::Writer w({"level", "eigenvalue"});
  for (std::size_t n = 0; n < spec.eigenvalues.size(); ++n) w.row(n, spec.eigenvalues[n]);
  r.files.push_back({"spectrum.csv", w.str()});
  r.manifest["results"] = {{"hbar_eff", effective_planck(c.risk)},
                           {"h_e", c.risk.h_e()},
                           {"ground_times_2theta", spec.ground() * 2.0 * c.risk.theta}};
  return r;
}

// --- curves ---------------------------------------------------------------

struct CurvesConfig {
  RiskParams risk;
  std::variant<Strategy, CoherentParams, int, double> source;  // strategy, coherent, excited n, thermal beta
  std::optional<GridSpec> p_grid, q_grid;
  std::size_t points = 161;
  std::optional<double> p_slice, q_slice;
  std::optional<GridSpec> lnc;
};

inline CurvesConfig parse_curves(Fields& f, const Context& ctx) {
  CurvesConfig c{parse_risk(f), 0.0, {}, {}, 161, {}, {}, {}};
  const std::vector<std::string> keys{"strategy", "coherent", "excited", "thermal"};
  int given = 0;
  for (const auto& k : keys) given += f.has(k) ? 1 : 0;
  if (given != 1) throw ValidationError(f.path(), "give exactly one of strategy, coherent, excited, thermal");
  const Representation rep = parse_picture(f);
  if (f.has("strategy")) {
    auto s = parse_strategy_at(f.raw("strategy"), f.at("strategy"), rep, c.risk, ctx.base_dir);
    if (s.is_improper()) throw ValidationError(f.at("strategy"), "curves need a normalizable strategy");
    c.source = s;
  } else if (f.has("coherent")) {
    Fields g(f.raw("coherent"), f.at("coherent"));
    CoherentParams cp;
    cp.r = g.number("r", 0.0);
    if (!(std::abs(cp.r) < 1.0)) throw ValidationError(g.at("r"), "|r| must be < 1");
    cp.eta = g.positive("eta", std::sqrt(c.risk.hbar_eff() / 2.0));
    cp.p0 = g.number("p0", 0.0);
    cp.q0 = g.number("q0", 0.0);
    g.finish();
    c.source = cp;
  } else if (f.has("excited")) {
    c.source = static_cast<int>(f.integer("excited", std::nullopt, 0));
    if (std::get<int>(c.source) > kMaxExcitedLevel)
      throw ValidationError(f.at("excited"), "level must be <= " + std::to_string(kMaxExcitedLevel));
  } else {
    c.source = f.positive("thermal");
  }
  if (f.has("grid")) {
    Fields g(f.raw("grid"), f.at("grid"));
    c.p_grid = parse_grid_triplet(g, "p");
    c.q_grid = parse_grid_triplet(g, "q");
    g.finish();
  }
  c.points = static_cast<std::size_t>(f.integer("points", 161, 8));
  if (c.points > 1001) throw ValidationError(f.at("points"), "must be <= 1001");
  if (f.has("p_slice")) c.p_slice = f.number("p_slice");
  if (f.has("q_slice")) c.q_slice = f.number("q_slice");
  c.lnc = parse_grid_triplet(f, "lnc");
  return c;
}

/// Default window: center +- 6 standard deviations in each variable.
struct Window {
  double mp, sp, mq, sq;
};

inline Window natural_window(const CurvesConfig& c) {
  const double hbar = effective_planck(c.risk);
  if (const auto* s = std::get_if<Strategy>(&c.source)) {
    const auto [mx, sx] = s->spread();
    const auto [mk, sk] = s->conjugate_spread(hbar);
    const double half_k = std::abs(mk) + 6.0 * sk;  // sign of <k> unknown here
    if (s->representation() == Representation::demand) return {0.0, half_k / 6.0, mx, sx};
    return {mx, sx, 0.0, half_k / 6.0};
  }
  if (const auto* cp = std::get_if<CoherentParams>(&c.source)) return {cp->p0, cp->delta_p(hbar), cp->q0, cp->delta_q()};
  if (const auto* n = std::get_if<int>(&c.source)) {
    const double f = std::sqrt(2.0 * *n + 1.0);
    return {0.0, c.risk.sigma_p0() * f, 0.0, c.risk.sigma_q0() * f};
  }
  const double x = thermal_x(std::get<double>(c.source), c.risk);
  const double w = c.risk.omega();
  return {0.0, std::sqrt(c.risk.m / x), 0.0, std::sqrt(1.0 / (x * c.risk.m * w * w))};
}

inline ScenarioResult run(const CurvesConfig& c) {
  ScenarioResult r{"curves", {}, {}};
  const auto win = natural_window(c);
  const Grid pg = c.p_grid ? Grid(c.p_grid->lo, c.p_grid->hi, c.p_grid->n)
                           : Grid(win.mp - 6.0 * win.sp, win.mp + 6.0 * win.sp, c.points);
  const Grid qg = c.q_grid ? Grid(c.q_grid->lo, c.q_grid->hi, c.q_grid->n)
                           : Grid(win.mq - 6.0 * win.sq, win.mq + 6.0 * win.sq, c.points);
  const double hbar = effective_planck(c.risk);
  const PhaseSpaceDensity d = std::visit(
      [&](const auto& src) -> PhaseSpaceDensity {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, Strategy>) return wigner_transform(src, pg, qg, hbar);
        else if constexpr (std::is_same_v<T, CoherentParams>) return coherent_wigner(src, hbar, pg, qg);
        else if constexpr (std::is_same_v<T, int>) return excited_wigner(src, c.risk, pg, qg);
        else return thermal_wigner(src, c.risk, pg, qg);
      },
      c.source);
  const auto curves = dominant_curves(d, c.p_slice, c.q_slice);
  const GridSpec lnc = c.lnc.value_or(GridSpec{qg.lo(), qg.hi(), 201});
  const Grid lg(lnc.lo, lnc.hi, lnc.n);
  csv::Writer w({"lnc", "Fd", "Fs"});
  for (std::size_t i = 0; i < lg.size(); ++i) w.row(lg[i], curves.demand(lg[i]), curves.supply(lg[i]));
  r.files.push_back({"density.csv", density_csv(d)});
  r.files.push_back({"curves.csv", w.str()});
  const auto g = is_giffen(d);
  r.manifest["results"] = {{"giffen", g.giffen},
                           {"min_value", g.min_value},
                           {"min_at", {{"p", g.p}, {"q", g.q}}},
                           {"p_slice", curves.p_slice()},
                           {"q_slice", curves.q_slice()},
                           {"demand_monotone", curves.demand_monotone()},
                           {"supply_monotone", curves.supply_monotone()},
                           {"demand_degenerate", curves.demand_degenerate()},
                           {"supply_degenerate", curves.supply_degenerate()}};
  return r;
}

// --- thermal --------------------------------------------------------------

struct ThermalConfig {
  RiskParams risk;
  double beta;
  std::vector<double> betas;
  std::optional<GridSpec> p_grid, q_grid;
  std::size_t points = 161;
  ThermalMode mode;
};

inline ThermalConfig parse_thermal(Fields& f) {
  ThermalConfig c;
  c.risk = parse_risk(f);
  c.beta = f.positive("beta");
  c.betas = f.numbers("betas", std::vector<double>{c.beta});
  for (std::size_t i = 0; i < c.betas.size(); ++i)
    if (!(c.betas[i] > 0)) throw ValidationError(f.at("betas") + "[" + std::to_string(i) + "]", "must be > 0");
  if (f.has("grid")) {
    Fields g(f.raw("grid"), f.at("grid"));
    c.p_grid = parse_grid_triplet(g, "p");
    c.q_grid = parse_grid_triplet(g, "q");
    g.finish();
  }
  c.points = static_cast<std::size_t>(f.integer("points", 161, 8));
  if (c.points > 1001) throw ValidationError(f.at("points"), "must be <= 1001");
  const auto mode = f.choice("mode", {"closed", "series"}, "closed");
  const auto terms = static_cast<int>(f.integer("terms", 200, 1));
  c.mode = mode == "closed" ? ThermalMode::closed() : ThermalMode::series(terms);
  return c;
}

inline ScenarioResult run(const ThermalConfig& c) {
  ScenarioResult r{"thermal", {}, {}};
  const double x = thermal_x(c.beta, c.risk);
  const double w = c.risk.omega();
  const double sp = std::sqrt(c.risk.m / x), sq = std::sqrt(1.0 / (x * c.risk.m * w * w));
  const Grid pg = c.p_grid ? Grid(c.p_grid->lo, c.p_grid->hi, c.p_grid->n) : Grid(-6.0 * sp, 6.0 * sp, c.points);
  const Grid qg = c.q_grid ? Grid(c.q_grid->lo, c.q_grid->hi, c.q_grid->n) : Grid(-6.0 * sq, 6.0 * sq, c.points);
  r.files.push_back({"density.csv", density_csv(thermal_wigner(c.beta, c.risk, pg, qg, c.mode))});
  csv::Writer t({"beta", "T", "energy"});
  for (double b : c.betas) {
    const auto mt = market_temperature(b, c.risk);
    t.row(b, mt.temperature, mt.energy);
  }
  r.files.push_back({"thermal.csv", t.str()});
  return r;
}

// --- zeno -----------------------------------------------------------------

struct ZenoConfig {
  ZenoRun run;
  std::vector<std::size_t> n_values;
};

inline ZenoConfig parse_zeno(Fields& f, const Context& ctx) {
  const RiskParams risk = parse_risk(f);
  const bool has_s = f.has("strategy"), has_c = f.has("coefficients");
  if (has_s == has_c) throw ValidationError(f.path(), "give exactly one of strategy, coefficients");
  const bool has_wt = f.has("omega_t"), has_t = f.has("total_time");
  if (has_wt == has_t) throw ValidationError(f.path(), "give exactly one of omega_t, total_time");
  const double t = has_t ? f.number("total_time") : f.number("omega_t") / risk.omega();
  const Representation rep = parse_picture(f);

  std::vector<std::size_t> ns;
  for (double v : f.numbers("n_values", std::vector<double>{1, 10, 100, 1000})) {
    const auto path = f.at("n_values") + "[" + std::to_string(ns.size()) + "]";
    if (v != std::floor(v) || v < 1) throw ValidationError(path, "must be a positive integer");
    if (!ns.empty() && static_cast<std::size_t>(v) <= ns.back()) throw ValidationError(path, "must be ascending");
    ns.push_back(static_cast<std::size_t>(v));
  }

  if (has_c) {
    const auto& arr = f.raw("coefficients");
    if (!arr.is_array() || arr.empty()) throw ValidationError(f.at("coefficients"), "expected a nonempty array");
    std::vector<cplx> c;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& v = arr[i];
      const auto path = f.at("coefficients") + "[" + std::to_string(i) + "]";
      if (v.is_number())
        c.emplace_back(v.get<double>(), 0.0);
      else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        c.emplace_back(v[0].get<double>(), v[1].get<double>());
      else
        throw ValidationError(path, "expected a number or [re, im]");
    }
    try {
      return {ZenoRun::from_coefficients(std::move(c), t, ns.front(), risk), ns};
    } catch (const DegenerateState& e) {
      throw ValidationError(f.at("coefficients"), e.what());
    }
  }
  auto s = parse_strategy_at(f.raw("strategy"), f.at("strategy"), rep, risk, ctx.base_dir);
  if (s.is_improper()) throw ValidationError(f.at("strategy"), "zeno needs a normalizable strategy");
  return {ZenoRun::from_strategy(s, t, ns.front(), risk), ns};
}

inline ScenarioResult run(const ZenoConfig& c) {
  ScenarioResult r{"zeno", {}, {}};
  csv::Writer w({"n", "survival"});
  for (const auto& row : freeze_experiment(c.run, c.n_values)) w.row(row.n, row.survival);
  r.files.push_back({"zeno.csv", w.str()});
  r.manifest["results"] = {{"levels", c.run.coefficients.size()}, {"total_time", c.run.total_time}};
  return r;
}

// --- auction --------------------------------------------------------------

inline AuctionInstance parse_auction(Fields& f, const Context& ctx) {
  const RiskParams risk = parse_risk(f);
  const auto& buyers = f.raw("buyers");
  if (!buyers.is_array() || buyers.empty()) throw ValidationError(f.at("buyers"), "expected a nonempty array");
  std::vector<Strategy> bs;
  for (std::size_t i = 0; i < buyers.size(); ++i)
    bs.push_back(parse_strategy_at(buyers[i], f.at("buyers") + "[" + std::to_string(i) + "]",
                                   Representation::demand, risk, ctx.base_dir));
  Strategy seller = parse_strategy_at(f.raw("seller"), f.at("seller"), Representation::supply, risk, ctx.base_dir);
  const auto pricing = f.choice("pricing", {"first", "second", "mixed"}, "first");
  const double weight = f.number("weight", pricing == "mixed" ? 0.5 : 1.0);
  if (!(weight >= 0 && weight <= 1)) throw ValidationError(f.at("weight"), "must lie in [0, 1]");
  const auto samples = f.integer("samples", 100000, 1);
  if (samples > 100000000) throw ValidationError(f.at("samples"), "must be <= 1e8");
  AuctionInstance inst{std::move(bs), std::move(seller),
                       pricing == "first" ? Pricing::first : pricing == "second" ? Pricing::second : Pricing::mixed,
                       weight, static_cast<std::size_t>(samples), ctx.seed};
  return inst;
}

inline ScenarioResult run(const AuctionInstance& inst) {
  ScenarioResult r{"auction", {}, {}};
  const auto out = run_auction(inst);
  const auto exact = transaction_probability(inst);
  json res = {{"pricing", to_string(out.pricing)},
              {"samples", out.samples},
              {"winner_freq", out.winner_freq},
              {"revenue_mean", out.revenue_mean},
              {"revenue_sd", out.revenue_sd},
              {"revenue_se", out.revenue_se},
              {"p_no_trade", out.p_no_trade},
              {"quadrature",
               {{"per_buyer", exact.per_buyer},
                {"total", exact.total},
                {"no_trade", exact.no_trade},
                {"first_price_revenue", exact.expected_revenue}}}};
  r.files.push_back({"auction.json", res.dump(2) + "\n"});
  csv::Writer h({"bin_lo", "bin_hi", "count"});
  const auto& hist = out.price_histogram;
  for (std::size_t i = 0; i < hist.weights.size(); ++i) h.row(hist.edges[i], hist.edges[i + 1], hist.weights[i]);
  r.files.push_back({"histogram.csv", h.str()});
  return r;
}

// --- clearing -------------------------------------------------------------

struct ClearingConfig {
  std::vector<Strategy> traders;
  ClearingPolicy policy;
  std::size_t rounds;
};

inline ClearingConfig parse_clearing(Fields& f, const Context& ctx) {
  const RiskParams risk = parse_risk(f);
  const auto& arr = f.raw("traders");
  if (!arr.is_array() || arr.size() < 2) throw ValidationError(f.at("traders"), "expected at least two traders");
  std::vector<Strategy> traders;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto path = f.at("traders") + "[" + std::to_string(i) + "]";
    if (arr[i].is_object()) {
      Fields t(arr[i], path);
      const Representation rep = parse_picture(t);
      traders.push_back(parse_strategy_at(t.raw("strategy"), t.at("strategy"), rep, risk, ctx.base_dir));
      t.finish();
    } else {
      traders.push_back(parse_strategy_at(arr[i], path, Representation::demand, risk, ctx.base_dir));
    }
  }
  ClearingPolicy policy = ClearingPolicy::random(risk);
  if (f.has("policy")) {
    const auto& p = f.raw("policy");
    if (p.is_string()) {
      const auto s = p.get<std::string>();
      if (s == "representation")
        policy = ClearingPolicy::representation(risk);
      else if (s != "random")
        throw ValidationError(f.at("policy"), "expected random|representation|{buyers, sellers}");
    } else {
      Fields d(p, f.at("policy"));
      Division div;
      for (const char* key : {"buyers", "sellers"}) {
        auto& dst = std::string(key) == "buyers" ? div.buyers : div.sellers;
        for (double v : d.numbers(key)) {
          if (v != std::floor(v) || v < 0) throw ValidationError(d.at(key), "expected trader indices");
          dst.push_back(static_cast<std::size_t>(v));
        }
      }
      d.finish();
      try {
        div.validate(traders.size());
      } catch (const Error& e) {
        throw ValidationError(f.at("policy"), e.what());
      }
      policy = ClearingPolicy::fixed_division(std::move(div), risk);
    }
  }
  const auto rounds = f.integer("rounds", 10, 1);
  if (rounds > 1000000) throw ValidationError(f.at("rounds"), "must be <= 1e6");
  return {std::move(traders), std::move(policy), static_cast<std::size_t>(rounds)};
}

inline ScenarioResult run(const ClearingConfig& c, std::uint64_t seed) {
  ScenarioResult r{"clearing", {}, {}};
  ClearingEngine engine(MarketState(c.traders), c.policy);
  RandomSource rng(seed, 1);
  auto w = round_log_writer();
  std::size_t executed = 0;
  for (std::size_t k = 0; k < c.rounds; ++k) {
    const auto out = engine.round(rng);
    for (const auto& m : out.matches) executed += m.executed ? 1 : 0;
    append_round_log(w, k, out);
  }
  r.files.push_back({"rounds.csv", w.str()});
  r.manifest["results"] = {{"executed_matches", executed}};
  return r;
}

}  // namespace scenario

// ---------------------------------------------------------------------------
// Entry points

inline const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> k{"curves", "fixed-point", "auction", "zeno",
                                          "thermal", "risk-spectrum", "clearing"};
  return k;
}

/// Validates and runs a scenario document. A bare auction spec (an object
/// with "buyers" and no "kind") is accepted as an auction scenario.
inline ScenarioResult run_scenario(const json& doc, std::optional<std::uint64_t> seed_override = std::nullopt,
                                   const std::filesystem::path& base_dir = {}) {
  Fields top(doc, "");
  const bool bare_auction = !doc.contains("kind") && doc.contains("buyers");
  scenario::Context ctx;
  ctx.base_dir = base_dir;
  if (top.has("seed")) ctx.seed = static_cast<std::uint64_t>(top.integer("seed", std::nullopt, 0));
  if (seed_override) ctx.seed = *seed_override;

  std::string kind = "auction";
  json params_copy;
  ScenarioResult result;
  if (bare_auction) {
    params_copy = doc;
    params_copy.erase("seed");
    Fields f(params_copy, "");
    auto inst = scenario::parse_auction(f, ctx);
    f.finish();
    result = scenario::run(inst);
  } else {
    kind = top.choice("kind", scenario_kinds(), "");
    top.string("output", std::string("."));
    params_copy = top.has("parameters") ? top.raw("parameters") : json::object();
    top.finish();
    Fields f(params_copy, "parameters");
    if (kind == "fixed-point") {
      auto c = scenario::parse_fixed_point(f);
      f.finish();
      result = scenario::run(c);
    } else if (kind == "risk-spectrum") {
      auto c = scenario::parse_spectrum(f);
      f.finish();
      result = scenario::run(c);
    } else if (kind == "curves") {
      auto c = scenario::parse_curves(f, ctx);
      f.finish();
      result = scenario::run(c);
    } else if (kind == "thermal") {
      auto c = scenario::parse_thermal(f);
      f.finish();
      result = scenario::run(c);
    } else if (kind == "zeno") {
      auto c = scenario::parse_zeno(f, ctx);
      f.finish();
      result = scenario::run(c);
    } else if (kind == "auction") {
      auto inst = scenario::parse_auction(f, ctx);
      f.finish();
      result = scenario::run(inst);
    } else {
      auto c = scenario::parse_clearing(f, ctx);
      f.finish();
      result = scenario::run(c, ctx.seed);
    }
  }

  json outputs = json::array();
  for (const auto& file : result.files) outputs.push_back(file.name);
  json manifest = {{"tool", "qmg"},    {"version", kVersion}, {"kind", kind},
                   {"seed", ctx.seed}, {"parameters", params_copy}, {"outputs", outputs}};
  if (result.manifest.contains("results")) manifest["results"] = result.manifest["results"];
  result.kind = kind;
  result.manifest = std::move(manifest);
  return result;
}

/// Output directory named by the document, or "." when absent.
inline std::string scenario_output_dir(const json& doc) {
  if (doc.is_object() && doc.contains("output") && doc["output"].is_string()) return doc["output"].get<std::string>();
  return ".";
}

inline void write_result(const ScenarioResult& r, const std::filesystem::path& dir,
                         const json& extra_manifest = json::object()) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / name).string());
    os << content;
  };
  for (const auto& f : r.files) put(f.name, f.content);
  json m = r.manifest;
  for (const auto& item : extra_manifest.items()) m[item.key()] = item.value();
  put("manifest.json", m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Plot data

inline std::string column_unit(const std::string& name) {
  static const std::map<std::string, std::string> units{
      {"lnc", "log price"},       {"Fd", "probability"},       {"Fs", "probability"},
      {"p", "log price"},         {"q", "log price"},          {"w", "density"},
      {"n", "measurements"},      {"survival", "probability"}, {"sigma", "log price"},
      {"fixed_point", "log price"}, {"max_intensity", "log price"}, {"bin_lo", "price"},
      {"bin_hi", "price"},        {"count", "samples"},        {"beta", "inverse temperature"},
      {"T", "temperature"},       {"energy", "risk"},          {"level", "index"},
      {"eigenvalue", "risk"},     {"logprice", "log price"},   {"flow", "currency"}};
  auto it = units.find(name);
  return it == units.end() ? "" : it->second;
}

/// Self-describing series for a plotting frontend.
inline json plot_data(const csv::Table& t, const std::string& x, const std::vector<std::string>& ys,
                      const std::string& source) {
  auto col = [&](const std::string& name, const std::string& flag) {
    const long c = t.column(name);
    if (c < 0) throw ValidationError(flag, "column '" + name + "' not found in " + source);
    try {
      return t.numeric(static_cast<std::size_t>(c));
    } catch (const std::exception&) {
      throw ValidationError(flag, "column '" + name + "' is not numeric");
    }
  };
  if (ys.empty()) throw ValidationError("--y", "no series requested");
  const auto xv = col(x, "--x");
  json series = json::array();
  for (const auto& y : ys) series.push_back({{"label", y}, {"unit", column_unit(y)}, {"y", col(y, "--y")}});
  bool log_x = !xv.empty();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double v : xv) {
    if (!(v > 0)) log_x = false;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  log_x = log_x && hi / lo >= 100.0;
  json out = {{"source", source},
              {"x", {{"label", x}, {"unit", column_unit(x)}, {"values", xv}}},
              {"series", series},
              {"axes", {{"x", {{"label", x}, {"log", log_x}}}, {"y", {{"label", ys.size() == 1 ? ys[0] : "value"}}}}}};
  if (t.column("bin_lo") >= 0 && t.column("bin_hi") >= 0) {
    auto edges = col("bin_lo", "bin_lo");
    const auto hi_edges = col("bin_hi", "bin_hi");
    if (!hi_edges.empty()) edges.push_back(hi_edges.back());
    out["bin_edges"] = edges;
  }
  return out;
}

}  // namespace qmg

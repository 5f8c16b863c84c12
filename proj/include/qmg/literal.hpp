#pragma once

// Strategy literals used in scenario files:
//   gaussian(center, width[, slope])   hermite(n)   delta(x)
//   discrete(x1, x2, ...)              sampled(@path.csv)   (columns x,re[,im])

#include <cctype>
#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qmg/csv.hpp"
#include "qmg/errors.hpp"
#include "qmg/strategy.hpp"

namespace qmg {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view tok, const std::string& literal) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw InvalidParameter("strategy literal '" + literal + "': bad number '" + std::string(tok) + "'");
  return v;
}

}  // namespace detail

inline Strategy parse_strategy(const std::string& literal, Representation rep = Representation::demand,
                               const RiskParams& risk = {}, const std::filesystem::path& base_dir = {}) {
  const std::string_view text = detail::trim(literal);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')')
    throw InvalidParameter("strategy literal '" + literal + "': expected name(args)");
  const std::string name(detail::trim(text.substr(0, open)));
  const std::string_view body = text.substr(open + 1, text.size() - open - 2);

  if (name == "sampled") {
    auto arg = detail::trim(body);
    if (arg.empty() || arg.front() != '@')
      throw InvalidParameter("strategy literal '" + literal + "': sampled needs @path");
    std::filesystem::path path(std::string(arg.substr(1)));
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    const auto table = csv::read_file(path.string());
    const long cx = table.column("x"), cre = table.column("re"), cim = table.column("im");
    if (cx < 0 || cre < 0) throw InvalidParameter("sampled strategy file needs columns x,re[,im]");
    const auto xs = table.numeric(static_cast<std::size_t>(cx));
    const auto re = table.numeric(static_cast<std::size_t>(cre));
    const auto im = cim >= 0 ? table.numeric(static_cast<std::size_t>(cim)) : std::vector<double>(xs.size());
    if (xs.size() < Grid::kMinPoints) throw InvalidParameter("sampled strategy file has too few rows");
    const Grid g(xs.front(), xs.back(), xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (std::abs(xs[i] - g[i]) > 1e-9 * std::max(1.0, std::abs(g[i])))
        throw InvalidParameter("sampled strategy file: x must be uniformly spaced");
    std::vector<cplx> amps(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) amps[i] = {re[i], im[i]};
    return Strategy::sampled(g, std::move(amps), rep);
  }

  std::vector<double> args;
  if (!detail::trim(body).empty()) {
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      args.push_back(detail::parse_number(body.substr(start, comma - start), literal));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      throw InvalidParameter("strategy literal '" + literal + "': wrong number of arguments");
  };
  if (name == "gaussian") {
    arity(2, 3);
    return Strategy::gaussian(args[0], args[1], args.size() > 2 ? args[2] : 0.0, rep);
  }
  if (name == "hermite") {
    arity(1, 1);
    if (args[0] != std::floor(args[0]) || args[0] < 0)
      throw InvalidParameter("strategy literal '" + literal + "': hermite order must be a nonnegative integer");
    return Strategy::hermite(static_cast<int>(args[0]), risk, rep);
  }
  if (name == "delta") {
    arity(1, 1);
    return Strategy::delta(args[0], rep);
  }
  if (name == "discrete") {
    arity(1, std::numeric_limits<std::size_t>::max());
    return Strategy::discrete(args, {}, rep);
  }
  throw InvalidParameter("strategy literal '" + literal + "': unknown family '" + name + "'");
}

}  // namespace qmg

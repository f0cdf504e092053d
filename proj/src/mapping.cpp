#include "rkan/mapping.hpp"

#include <cmath>
#include <limits>

#include "rkan/error.hpp"

namespace rkan {

const char* mapkind_name(MapKind kind) {
  switch (kind) {
    case MapKind::Finite: return "finite";
    case MapKind::SemiLog: return "semi-log";
    case MapKind::SemiAlg: return "semi-alg";
    case MapKind::SemiExp: return "semi-exp";
    case MapKind::InfLog: return "inf-log";
    case MapKind::InfAlg: return "inf-alg";
    case MapKind::Fractional: return "fractional";
    case MapKind::Identity: return "identity";
  }
  throw ValueError("mapkind_name: unknown kind");
}

MapKind mapkind_parse(const std::string& name) {
  if (name == "finite") return MapKind::Finite;
  if (name == "semi-log") return MapKind::SemiLog;
  if (name == "semi-alg") return MapKind::SemiAlg;
  if (name == "semi-exp") return MapKind::SemiExp;
  if (name == "inf-log") return MapKind::InfLog;
  if (name == "inf-alg") return MapKind::InfAlg;
  if (name == "fractional") return MapKind::Fractional;
  if (name == "identity") return MapKind::Identity;
  throw ValueError("unknown mapping \"" + name + "\"");
}

namespace {

void require_finite_interval(double d0, double d1) {
  if (!(d0 < d1)) throw ValueError("map_finite: requires d0 < d1");
}

void require_semi_kind(MapKind kind) {
  if (kind != MapKind::SemiLog && kind != MapKind::SemiAlg && kind != MapKind::SemiExp)
    throw ValueError("map_semi: kind must be semi-log, semi-alg, or semi-exp");
}

void require_inf_kind(MapKind kind) {
  if (kind != MapKind::InfLog && kind != MapKind::InfAlg)
    throw ValueError("map_infinite: kind must be inf-log or inf-alg");
}

void require_iota(double iota, const char* who) {
  if (!(iota > 0.0)) throw ValueError(std::string(who) + ": iota must be positive");
}

}  // namespace

double map_finite(double xi, double d0, double d1) {
  require_finite_interval(d0, d1);
  return (2.0 * xi - d0 - d1) / (d1 - d0);
}

double map_semi(double xi, MapKind kind, double iota) {
  require_semi_kind(kind);
  require_iota(iota, "map_semi");
  if (xi < 0.0) throw ValueError("map_semi: xi must be non-negative");
  switch (kind) {
    case MapKind::SemiLog: return 2.0 * std::tanh(xi / iota) - 1.0;
    case MapKind::SemiAlg: return (xi - iota) / (xi + iota);
    default: return 1.0 - 2.0 * std::exp(-xi / iota);
  }
}

double map_infinite(double xi, MapKind kind, double iota) {
  require_inf_kind(kind);
  require_iota(iota, "map_infinite");
  if (kind == MapKind::InfLog) return std::tanh(xi / iota);
  return xi / std::sqrt(xi * xi + iota * iota);
}

double map_fractional(double s, double gamma) {
  if (!(gamma > 0.0)) throw ValueError("map_fractional: gamma must be positive");
  if (!(s > 0.0 && s < 1.0)) throw ValueError("map_fractional: s must lie in (0,1)");
  return 2.0 * std::pow(s, gamma) - 1.0;
}

namespace {

void check_values(const Var& v, double lo, double hi, const char* who) {
  for (double x : v.val().v)
    if (!(x >= lo && x <= hi))
      throw ValueError(std::string(who) + ": input out of range");
}

Var check_scalar_iota(Var iota, const char* who) {
  if (!iota.tape || !iota.val().is_scalar() || !(iota.val().v[0] > 0.0))
    throw ValueError(std::string(who) + ": iota must be a positive scalar");
  return iota;
}

}  // namespace

Var map_finite(Var xi, double d0, double d1) {
  require_finite_interval(d0, d1);
  return (2.0 * xi - (d0 + d1)) / (d1 - d0);
}

Var map_semi(Var xi, MapKind kind, Var iota) {
  require_semi_kind(kind);
  check_scalar_iota(iota, "map_semi");
  check_values(xi, 0.0, std::numeric_limits<double>::infinity(), "map_semi");
  switch (kind) {
    case MapKind::SemiLog: return 2.0 * tanh(xi / iota) - 1.0;
    case MapKind::SemiAlg: return (xi - iota) / (xi + iota);
    default: return 1.0 - 2.0 * exp(-xi / iota);
  }
}

Var map_infinite(Var xi, MapKind kind, Var iota) {
  require_inf_kind(kind);
  check_scalar_iota(iota, "map_infinite");
  if (kind == MapKind::InfLog) return tanh(xi / iota);
  return xi / pow(xi * xi + iota * iota, 0.5);
}

Var map_fractional(Var s, Var gamma) {
  if (!gamma.tape || !gamma.val().is_scalar() || !(gamma.val().v[0] > 0.0))
    throw ValueError("map_fractional: gamma must be a positive scalar");
  for (double x : s.val().v)
    if (!(x > 0.0 && x < 1.0))
      throw ValueError("map_fractional: s must lie in (0,1)");
  return 2.0 * exp(gamma * log(s)) - 1.0;
}

Var map_apply(Var xi, const MappingSpec& spec, Var iota, Var gamma) {
  switch (spec.kind) {
    case MapKind::Finite: return map_finite(xi, spec.d0, spec.d1);
    case MapKind::SemiLog:
    case MapKind::SemiAlg:
    case MapKind::SemiExp: return map_semi(xi, spec.kind, iota);
    case MapKind::InfLog:
    case MapKind::InfAlg: return map_infinite(xi, spec.kind, iota);
    case MapKind::Fractional: return map_fractional(xi, gamma);
    case MapKind::Identity: return xi;
  }
  throw ValueError("map_apply: unknown kind");
}

}  // namespace rkan

#pragma once

#include <string>

#include "rkan/autodiff.hpp"

namespace rkan {

enum class MapKind {
  Finite,
  SemiLog,
  SemiAlg,
  SemiExp,
  InfLog,
  InfAlg,
  Fractional,
  Identity,
};

// Config-file names: "finite", "semi-log", "semi-alg", "semi-exp", "inf-log",
// "inf-alg", "fractional", "identity".
const char* mapkind_name(MapKind kind);
MapKind mapkind_parse(const std::string& name);

// Which mapping a layer applies before the basis, with the raw trainable
// parameter it needs: iota_raw for the semi/infinite kinds, gamma_raw for
// Fractional, d0/d1 for Finite. Effective iota/gamma go through
// softplus_constrain, so both raw defaults give an effective value of 1.
struct MappingSpec {
  MapKind kind = MapKind::InfAlg;
  double iota_raw = 0.5413248546129181;   // softplus_inverse(1)
  double gamma_raw = 0.5413248546129181;  // softplus_inverse(1)
  double d0 = -1.0;
  double d1 = 1.0;
};

// (2*xi - d0 - d1)/(d1 - d0): [d0,d1] -> [-1,1]. Throws unless d0 < d1.
double map_finite(double xi, double d0, double d1);

// SemiLog 2tanh(xi/iota)-1, SemiAlg (xi-iota)/(xi+iota), SemiExp 1-2e^{-xi/iota}:
// [0,inf) -> [-1,1). Throws for xi < 0, iota <= 0, or a non-semi kind.
double map_semi(double xi, MapKind kind, double iota);

// InfLog tanh(xi/iota), InfAlg xi/sqrt(xi^2+iota^2): R -> (-1,1), odd.
// Throws for iota <= 0 or a non-infinite kind.
double map_infinite(double xi, MapKind kind, double iota);

// 2*s^gamma - 1 on s in (0,1); the caller squashes into (0,1) first. The closed
// endpoints are rejected because gamma < 1 makes the derivative unbounded at 0.
double map_fractional(double s, double gamma);

// Graph counterparts, elementwise over xi with scalar iota/gamma Vars that are
// already softplus-constrained. Input-range checks run eagerly against the
// forward values on the tape.
Var map_finite(Var xi, double d0, double d1);
Var map_semi(Var xi, MapKind kind, Var iota);
Var map_infinite(Var xi, MapKind kind, Var iota);
Var map_fractional(Var s, Var gamma);

// Dispatch on kind; Identity returns xi unchanged. iota/gamma may be
// default-constructed Vars for kinds that do not use them.
Var map_apply(Var xi, const MappingSpec& spec, Var iota, Var gamma);

}  // namespace rkan

#pragma once

#include <array>

namespace polarquad {

/// Fully symmetric 25-point rule of polynomial degree 10 on the reference
/// triangle: centroid, two (a, a, 1-2a) orbits and three (a, b, 1-a-b)
/// orbits. Weights sum to 1/2. Regenerate with tools/derive_symmetric_rule.py.
inline constexpr int kSymmetricRuleDegree = 10;

inline constexpr std::array<std::array<double, 3>, 25> kSymmetricRule25{{
    {0.33333333333333333, 0.33333333333333333, 0.04540899519137679},
    {0.48557763338365738, 0.48557763338365738, 0.018362978878233352},
    {0.48557763338365738, 0.028844733232685245, 0.018362978878233352},
    {0.028844733232685245, 0.48557763338365738, 0.018362978878233352},
    {0.10948157548503705, 0.10948157548503705, 0.022660529717763967},
    {0.78103684902992589, 0.10948157548503705, 0.022660529717763967},
    {0.10948157548503705, 0.78103684902992589, 0.022660529717763967},
    {0.14170721941487995, 0.30793983876412095, 0.036378958422710054},
    {0.14170721941487995, 0.5503529418209991, 0.036378958422710054},
    {0.30793983876412095, 0.14170721941487995, 0.036378958422710054},
    {0.30793983876412095, 0.5503529418209991, 0.036378958422710054},
    {0.5503529418209991, 0.14170721941487995, 0.036378958422710054},
    {0.5503529418209991, 0.30793983876412095, 0.036378958422710054},
    {0.025003534762686386, 0.24667256063990269, 0.014163621265528742},
    {0.025003534762686386, 0.72832390459741092, 0.014163621265528742},
    {0.24667256063990269, 0.025003534762686386, 0.014163621265528742},
    {0.24667256063990269, 0.72832390459741092, 0.014163621265528742},
    {0.72832390459741092, 0.025003534762686386, 0.014163621265528742},
    {0.72832390459741092, 0.24667256063990269, 0.014163621265528742},
    {0.0095408154002994576, 0.066803251012200266, 0.0047108334818664117},
    {0.0095408154002994576, 0.92365593358750028, 0.0047108334818664117},
    {0.066803251012200266, 0.0095408154002994576, 0.0047108334818664117},
    {0.066803251012200266, 0.92365593358750028, 0.0047108334818664117},
    {0.92365593358750028, 0.0095408154002994576, 0.0047108334818664117},
    {0.92365593358750028, 0.066803251012200266, 0.0047108334818664117},
}};

}  // namespace polarquad

#pragma once

#include <string>
#include <vector>

#include "odebound/config.hpp"

namespace odebound::presets {

/// fig1, fig2_1, fig2_2, fig4_1, fig4_2, fig4_3, fig5, fig6.
[[nodiscard]] const std::vector<std::string>& preset_names();

/// Ready-to-run configuration for a named experiment; throws ConfigError
/// listing the valid names for anything else.
///
/// All presets share the controlled oscillator
///     x1' = x2,  x2' = -omega^2(t) x1 - alpha1 x2 + f2 + a sin(omega2 t)
/// with omega^2(t) = omega0^2 + a1 sin(r1 t) + a2 sin(r2 t), omega0 = 2,
/// alpha1 = 0.2, and cubic f2 = -alpha2 x2^3 (fig6 swaps in the Duffing
/// spring term -alpha2 x1^3 with no forcing).
[[nodiscard]] config::RunConfig make_preset(const std::string& name);

}  // namespace odebound::presets

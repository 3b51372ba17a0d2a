#ifndef GAPGAME_GAPGAME_HPP
#define GAPGAME_GAPGAME_HPP

#include "gapgame/blocktime.hpp"
#include "gapgame/config.hpp"
#include "gapgame/difficulty.hpp"
#include "gapgame/equilibrium.hpp"
#include "gapgame/experiments.hpp"
#include "gapgame/model.hpp"
#include "gapgame/optimize.hpp"
#include "gapgame/parallel.hpp"
#include "gapgame/simulator.hpp"
#include "gapgame/utility.hpp"
#include "gapgame/validation.hpp"

namespace gapgame {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // GAPGAME_GAPGAME_HPP

#pragma once

#include "iaqmob/classify.hpp"
#include "iaqmob/core.hpp"
#include "iaqmob/error.hpp"
#include "iaqmob/featurize.hpp"
#include "iaqmob/iaq.hpp"
#include "iaqmob/ingest.hpp"
#include "iaqmob/rng.hpp"
#include "iaqmob/simulate.hpp"
#include "iaqmob/svg.hpp"
#include "iaqmob/text.hpp"
#include "iaqmob/trajectory.hpp"

namespace iaqmob {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace iaqmob

#pragma once

#include "schauder/error.hpp"
#include "schauder/dyadic_core.hpp"
#include "schauder/io.hpp"
#include "schauder/operators.hpp"
#include "schauder/paracontrolled.hpp"
#include "schauder/ito.hpp"
#include "schauder/processes.hpp"
#include "schauder/sde.hpp"

namespace schauder {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace schauder

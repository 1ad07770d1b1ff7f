#pragma once

// Umbrella header.

#include "kb.hpp"
#include "parser.hpp"
#include "navigation.hpp"
#include "similarity.hpp"
#include "clustering.hpp"
#include "recommend.hpp"
#include "refactoring.hpp"
#include "solver.hpp"

namespace kbtool {

// Default seed for randomized operations; the KBTOOL_SEED environment
// variable overrides it in the command-line tool.
constexpr uint64_t kDefaultSeed = 0;

}  // namespace kbtool

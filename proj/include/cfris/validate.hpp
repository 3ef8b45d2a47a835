#pragma once

#include <iosfwd>

#include "cfris/parallel.hpp"

namespace cfris {

// Fast invariant/oracle battery on small instances; prints one line per
// check. Returns true when every check passes.
bool run_validation(std::ostream& out, Exec exec = Exec::serial);

}  // namespace cfris

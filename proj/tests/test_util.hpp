#pragma once

#include "kw/greens.hpp"

// One shared table for the whole suite; R = 64 keeps the build to a couple
// of seconds while still exercising the asymptotic branch.
inline const kw::GreensTable& test_table() {
  static kw::GreensTable t = kw::build_greens_table(64, 2048);
  return t;
}

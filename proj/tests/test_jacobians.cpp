// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "support/gradient_check.hpp"

using namespace pofcap;

TEST_CASE("analytic jacobians match central differences per block") {
  // 20 random configurations per block here; the acceptance suite runs 100.
  for (const auto& block : gradcheck::all_blocks()) {
    CAPTURE(block);
    const double err = gradcheck::check_block(block, 20, 1234);
    CHECK_MESSAGE(err <= 1e-4, "block ", block, " max rel err ", err);
  }
}

#include <string>

#include "brute_policy.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace txnlab;
using namespace txnlab::testing;

TEST_CASE("random micro cases serialize under optimistic execution") {
  const OracleReport report = run_serializability_sample(60, 101, Protocol::kOcc);
  CAPTURE(report.first_failure);
  CHECK(report.cases == 60);
  CHECK(report.failures == 0);
}

TEST_CASE("random micro cases serialize under two-phase locking") {
  const OracleReport report = run_serializability_sample(60, 202, Protocol::kTwoPl);
  CAPTURE(report.first_failure);
  CHECK(report.failures == 0);
}

TEST_CASE("random micro cases serialize under no-wait locking") {
  const OracleReport report =
      run_serializability_sample(30, 303, Protocol::kTwoPl, /*no_wait=*/true);
  CAPTURE(report.first_failure);
  CHECK(report.failures == 0);
}

TEST_CASE("a cyclic read-write pair still lands on a serial outcome") {
  // Each transaction reads the row the other writes; only a serial order's
  // final state is acceptable.
  MicroCase c;
  c.rows = 2;
  c.txns = {
      {micro_select(1), micro_update(2, WriteExpr::kAddCaptured, 0)},
      {micro_select(2), micro_update(1, WriteExpr::kAddCaptured, 0)},
  };
  for (const Protocol protocol : {Protocol::kOcc, Protocol::kTwoPl}) {
    for (int round = 0; round < 25; ++round) {
      std::string why;
      const bool ok = check_micro_case(c, protocol, /*no_wait=*/false, &why);
      CAPTURE(why);
      CHECK(ok);
    }
  }
}

TEST_CASE("penalty subtraction outcomes depend only on the serial order") {
  // The penalty branch makes the final balance sensitive to what was read, so
  // a broken isolation path would produce a state outside the serial set.
  MicroCase c;
  c.rows = 3;
  c.txns = {
      {micro_select(1), micro_update(1, WriteExpr::kSubWithPenalty, 15)},
      {micro_update(1, WriteExpr::kAdd, 7), micro_select(3),
       micro_update(2, WriteExpr::kAddCaptured, 0)},
  };
  for (const Protocol protocol : {Protocol::kOcc, Protocol::kTwoPl}) {
    for (int round = 0; round < 25; ++round) {
      std::string why;
      const bool ok = check_micro_case(c, protocol, /*no_wait=*/false, &why);
      CAPTURE(why);
      CHECK(ok);
    }
  }
}

TEST_CASE("the dispatch pipeline agrees with the brute-force model on a sample") {
  const BruteComparison cmp = run_brute_comparison(150, 2024);
  CAPTURE(cmp.first_mismatch);
  CHECK(cmp.decisions == 150 * 16);
  CHECK(cmp.mismatches == 0);
}

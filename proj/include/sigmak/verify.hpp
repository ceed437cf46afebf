// SPDX-License-Identifier: Apache-2.0
#pragma once

// Self-contained property suites shared by the CLI `verify` subcommand and
// the test harness.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace sigmak {

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::vector<std::pair<std::string, bool>> checks;

  nlohmann::json to_json() const;
};

std::vector<std::string> verify_suite_names();  // invariance, lemma2, touching, duality

// Runs one named suite (or "all"). Unknown names report BadInput.
std::vector<SuiteResult> run_verify_suites(const std::string& name,
                                           std::uint64_t seed);

}  // namespace sigmak
